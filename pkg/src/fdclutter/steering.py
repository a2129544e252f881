"""Range, velocity and direction steering vectors.

All vectors follow the sample layout documented in :mod:`fdclutter.fdcm`.
Entries of the full steering vector are

    |beta_{p,l,q}|^2 * exp(-j 2pi/c * f_n * (2 D + 2 v p T + alpha x_n))

with ``f_n = fc + df * G_Q[pQ+q, l]`` and ``x_n = d_t l + d_r r`` (``2 d_t l``
for a monostatic FDA).
"""
from __future__ import annotations

import numpy as np

from .fdcm import C, WaveformConfig


def sample_frequencies(cfg: WaveformConfig) -> np.ndarray:
    return cfg.fc + cfg.df * cfg.afdcm.codes


def spatial_path(cfg: WaveformConfig) -> np.ndarray:
    """Two-way spatial path per unit direction sine, per sample (m)."""
    lay = cfg.layout
    if cfg.monostatic_fda:
        return 2.0 * cfg.d_t * lay.l
    return cfg.d_t * lay.l + cfg.d_r * lay.r


def temporal_path(cfg: WaveformConfig) -> np.ndarray:
    """Two-way range walk per unit velocity, ``2 p T`` (s)."""
    return 2.0 * cfg.pri * cfg.layout.p


def range_factor(cfg: WaveformConfig, D: float) -> np.ndarray:
    f = sample_frequencies(cfg)
    return np.exp(-1j * (4.0 * np.pi / C) * D * f)


def velocity_factor(cfg: WaveformConfig, v: float) -> np.ndarray:
    f = sample_frequencies(cfg)
    return np.exp(-1j * (4.0 * np.pi / C) * cfg.pri * v * f * cfg.layout.p)


def direction_factor(cfg: WaveformConfig, alpha: float) -> np.ndarray:
    f = sample_frequencies(cfg)
    return np.exp(-1j * (2.0 * np.pi / C) * alpha * f * spatial_path(cfg))


def steering_vector(cfg: WaveformConfig, D: float, v: float, alpha: float) -> np.ndarray:
    """Full range-velocity-direction steering vector (Hadamard product form)."""
    return (cfg.modulation() * range_factor(cfg, D) * velocity_factor(cfg, v)
            * direction_factor(cfg, alpha))


def sub_velocity_steering(block, cfg: WaveformConfig, v: float) -> np.ndarray:
    """Velocity steering restricted to one frequency block, in member order."""
    f = cfg.fc + block.m * cfg.df
    t = cfg.pri * block.pulse
    return np.exp(-1j * (4.0 * np.pi / C) * v * f * t)


def sub_direction_steering(block, cfg: WaveformConfig, alpha: float) -> np.ndarray:
    """Direction steering restricted to one frequency block, in member order."""
    f = cfg.fc + block.m * cfg.df
    return np.exp(-1j * (2.0 * np.pi / C) * alpha * f * block.path)
