"""Clutter covariance structure and clutter ranks of frequency-diverse radar waveforms."""

__version__ = "0.1.0"
