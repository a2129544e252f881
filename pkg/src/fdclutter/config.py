"""TOML experiment configuration.

Example::

    [waveform]
    kind = "rfd"          # rfd | fda | sf | fdmimo | stap
    P = 16
    Q = 1
    L = 4
    R = 8
    fc = 10e9
    df = 10e6
    d_r = 0.015           # defaults: half wavelength
    d_t = 0.12            # defaults: R * d_r (quarter wavelength for fda)
    pri = 1e-4

    [codes]
    mode = "random"       # fixed | linear | random, or give G = [[...], ...]
    M = 4
    seed = 1
    axis = "entry"        # entry | pulse | element (rfd only)
    replace = true

    [region]
    v_extent = 1.0        # fractions of the unambiguous intervals
    a_extent = 1.0

    [sweep]
    axis = "a_extent"     # a_extent | v_extent | extent
    values = [0.1, 0.5, 1.0]

Missing keys fall back to the package defaults.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .covariance import ClutterRegion
from .fdcm import (DEFAULT_DF, DEFAULT_FC, DEFAULT_PRI, KINDS, WaveformConfig, adapt_fda,
                   adapt_fdmimo, adapt_sf, adapt_stap, assign_codes, assign_matrix, wavelength)

SWEEP_AXES = ("a_extent", "v_extent", "extent")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CodeSpec:
    mode: str = "fixed"
    M: int = 1
    seed: int | None = 0
    axis: str = "entry"
    replace: bool = True
    G: tuple | None = None


@dataclass(frozen=True)
class RunConfig:
    waveform: WaveformConfig
    codes: CodeSpec
    v_extent: float | None = 1.0
    a_extent: float | None = 1.0
    sweep_axis: str = "a_extent"
    sweep_values: tuple = field(default_factory=tuple)

    def region(self, extent: float | None = None) -> ClutterRegion:
        v, a = self.v_extent, self.a_extent
        if extent is not None:
            if self.sweep_axis in ("v_extent", "extent"):
                v = extent
            if self.sweep_axis in ("a_extent", "extent"):
                a = extent
        return ClutterRegion.for_config(self.waveform, v, a)


def _extent(x, name: str):
    if x is None:
        return None
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {x}")
    return x


def build_codes(kind: str, shape: tuple[int, int], spec: CodeSpec) -> np.ndarray:
    """Code vector (adapters) or matrix (``rfd``) from a :class:`CodeSpec`."""
    P, L = shape
    if spec.G is not None:
        G = np.asarray(spec.G, dtype=np.int64)
        return G if kind == "rfd" else G.ravel()
    if spec.mode not in ("fixed", "linear", "random"):
        raise ConfigError(f"unknown assignment mode {spec.mode!r}")
    if kind == "rfd":
        return assign_matrix(P, L, spec.M, spec.mode, spec.seed, axis=spec.axis,
                             replace=spec.replace)
    n = P if kind == "sf" else L
    return assign_codes(n, spec.M, spec.mode, spec.seed, replace=spec.replace)


def build_waveform(w: dict, spec: CodeSpec) -> WaveformConfig:
    w = dict(w)
    kind = w.pop("kind", "rfd")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    fc = float(w.pop("fc", DEFAULT_FC))
    df = float(w.pop("df", DEFAULT_DF))
    pri = float(w.pop("pri", DEFAULT_PRI))
    P, Q, L, R = (int(w.pop(k, 1)) for k in ("P", "Q", "L", "R"))
    d_t, d_r, v_p = w.pop("d_t", None), w.pop("d_r", None), w.pop("v_p", None)
    if w:
        raise ConfigError(f"unknown waveform keys: {sorted(w)}")
    common = dict(fc=fc, df=df, pri=pri)
    try:
        if kind == "fda":
            g = build_codes(kind, (1, L), spec)
            return adapt_fda(L, Q, g, d=d_t if d_t is not None else d_r, **common)
        if kind == "sf":
            return adapt_sf(P, Q, build_codes(kind, (P, 1), spec), **common)
        if kind == "fdmimo":
            return adapt_fdmimo(L, R, Q, build_codes(kind, (1, L), spec), d_r=d_r, d_t=d_t,
                                **common)
        if kind == "stap":
            return adapt_stap(L, R, P, build_codes(kind, (1, L), spec), v_p=v_p, Q=Q, d_r=d_r,
                              d_t=d_t, **common)
        if d_r is None:
            d_r = wavelength(fc) / 2.0
        if d_t is None:
            d_t = R * d_r
        return WaveformConfig(P=P, Q=Q, L=L, R=R, G=build_codes(kind, (P, L), spec),
                              d_t=float(d_t), d_r=float(d_r), **common)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - {"waveform", "codes", "region", "sweep"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    c = dict(data.get("codes", {}))
    G = c.pop("G", None)
    spec = CodeSpec(mode=c.pop("mode", "fixed"), M=int(c.pop("M", 1)), seed=c.pop("seed", 0),
                    axis=c.pop("axis", "entry"), replace=bool(c.pop("replace", True)),
                    G=tuple(map(tuple, np.atleast_2d(G).tolist())) if G is not None else None)
    if c:
        raise ConfigError(f"unknown codes keys: {sorted(c)}")
    wf = build_waveform(data.get("waveform", {}), spec)
    reg = dict(data.get("region", {}))
    v = _extent(reg.pop("v_extent", 1.0), "v_extent")
    a = _extent(reg.pop("a_extent", 1.0), "a_extent")
    if reg:
        raise ConfigError(f"unknown region keys: {sorted(reg)}")
    sw = dict(data.get("sweep", {}))
    axis = sw.pop("axis", "a_extent")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
    values = tuple(_extent(x, "sweep value") for x in sw.pop("values", []))
    if sw:
        raise ConfigError(f"unknown sweep keys: {sorted(sw)}")
    return RunConfig(wf, spec, v, a, axis, values)


def load_config(path) -> RunConfig:
    try:
        data = tomllib.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)
