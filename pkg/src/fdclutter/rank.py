"""Numerical clutter ranks and the aperture-based rank estimators.

Every frequency block sees complex sinusoids sampled on an aperture (pulse
times, element positions, or both merged for side-looking STAP). The
estimated rank of a block factor is the time-bandwidth count

    min{ #unique samples,
         ceil(rate/c * f_m * extent * span(aperture)) + 1,
         sum over sub-apertures of (ceil(rate/c * f_m * extent * span(sub)) + 1) }

where sub-apertures come from cutting the aperture at gaps wider than the
Nyquist interval ``c / (rate * f_m * extent)``. ``rate`` is 2 for pulse
times (two-way Doppler), 1 for MIMO element positions and 2 for a
monostatic FDA.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covariance import (ClutterGramian, ClutterRegion, FrequencyBlock, partition_blocks,
                         reduced_block_gramian)
from .fdcm import C, WaveformConfig

DEFAULT_REL_TOL = 1e-6

RATES = {"temporal": 2.0, "spatial": 1.0, "fda": 2.0}


@dataclass(frozen=True)
class ApertureSplit:
    sub_apertures: list
    threshold: float

    def __len__(self):
        return len(self.sub_apertures)


def _ceil(x: float) -> int:
    # products of exact decimal parameters land a few ulps above integers
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


def split_aperture(aperture, extent: float, carrier: float, kind: str = "temporal", *,
                   rate: float | None = None) -> ApertureSplit:
    """Cut a sorted aperture wherever consecutive samples are farther apart than
    the Nyquist interval ``c / (rate * carrier * extent)``."""
    a = np.asarray(aperture, dtype=float)
    if rate is None:
        rate = RATES[kind]
    thr = math.inf if extent <= 0 else C / (rate * carrier * extent)
    if a.size == 0:
        return ApertureSplit([], thr)
    if np.any(np.diff(a) < 0):
        raise ValueError("aperture must be sorted ascending")
    cuts = np.nonzero(np.diff(a) > thr)[0] + 1
    return ApertureSplit(np.split(a, cuts), thr)


def aperture_rank(aperture, extent: float, carrier: float, rate: float) -> int:
    """Time-bandwidth rank estimate of sinusoids sampled on ``aperture``."""
    a = np.asarray(aperture, dtype=float)
    if a.size == 0:
        return 0
    k = rate / C * carrier * extent
    whole = _ceil(k * (a[-1] - a[0])) + 1
    split = split_aperture(a, extent, carrier, rate=rate)
    pieces = sum(_ceil(k * (s[-1] - s[0])) + 1 for s in split.sub_apertures)
    return int(min(a.size, whole, pieces))


def _carrier(cfg: WaveformConfig, block: FrequencyBlock) -> float:
    return cfg.fc + block.m * cfg.df


def u_vm(block: FrequencyBlock, cfg: WaveformConfig, V_interval) -> int:
    """Velocity-factor rank estimate of one block (1 when velocity is unobserved)."""
    if V_interval is None:
        return 1
    width = V_interval[1] - V_interval[0]
    return aperture_rank(block.temporal_aperture, width, _carrier(cfg, block), RATES["temporal"])


def u_am(block: FrequencyBlock, cfg: WaveformConfig, A_interval, v_p: float | None = None) -> int:
    """Direction-factor rank estimate of one block.

    With a platform speed the embedded (space plus slow-time) aperture is used.
    """
    if A_interval is None:
        return 1
    width = A_interval[1] - A_interval[0]
    if v_p is not None:
        if block.embedded_aperture is None:
            raise ValueError("block was built without an embedded aperture")
        return aperture_rank(block.embedded_aperture, width, _carrier(cfg, block), 1.0)
    rate = RATES["fda"] if cfg.monostatic_fda else RATES["spatial"]
    return aperture_rank(block.spatial_aperture, width, _carrier(cfg, block), rate)


def u_cm(block: FrequencyBlock, cfg: WaveformConfig, region: ClutterRegion) -> tuple[int, int]:
    """Lower and upper block-rank bounds from the two factor estimates."""
    uv = 1 if region.v_p is not None else u_vm(block, cfg, region.V_interval)
    ua = u_am(block, cfg, region.A_interval, region.v_p)
    return min(block.K, uv + ua - 1), min(block.K, uv * ua)


# --------------------------------------------------------------------------
# numerical ranks
# --------------------------------------------------------------------------

def check_hermitian(M: np.ndarray) -> None:
    scale = np.max(np.abs(M)) if M.size else 0.0
    if scale == 0.0:
        return
    asym = np.max(np.abs(M - M.conj().T))
    if asym > 8 * np.finfo(float).eps * scale:
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3g}, scale {scale:.3g})")


def hermitian_eigvals(M) -> np.ndarray:
    M = M.matrix if isinstance(M, ClutterGramian) else np.asarray(M)
    check_hermitian(M)
    return np.linalg.eigvalsh(M)


def count_above(eigvals: np.ndarray, rel_tol: float, reference: float | None = None) -> int:
    ref = np.max(eigvals) if reference is None else reference
    if ref <= 0:
        return 0
    return int(np.sum(eigvals > rel_tol * ref))


def numerical_rank(gramian, rel_tol: float = DEFAULT_REL_TOL, *,
                   reference: float | None = None) -> int:
    """Eigenvalues above ``rel_tol`` times the largest (or ``reference``)."""
    return count_above(hermitian_eigvals(gramian), rel_tol, reference)


@dataclass(frozen=True)
class BlockRank:
    m: int
    K: int
    rank: int
    U_V: int
    U_A: int
    U_C_lower: int
    U_C_upper: int


@dataclass(frozen=True)
class RankReport:
    dim: int
    numerical_rank: int
    lower_bound: int
    upper_bound: int
    per_block: list = field(default_factory=list)
    tolerance_used: float = DEFAULT_REL_TOL

    @property
    def ncr(self) -> float:
        return self.numerical_rank / self.dim

    @property
    def ncr_lower(self) -> float:
        return self.lower_bound / self.dim

    @property
    def ncr_upper(self) -> float:
        return self.upper_bound / self.dim


def block_spectra(cfg: WaveformConfig, region: ClutterRegion, blocks=None,
                  which: str = "C") -> list[np.ndarray]:
    """Eigenvalues of every block Gramian (via the merged-duplicate form)."""
    blocks = partition_blocks(cfg) if blocks is None else blocks
    return [np.linalg.eigvalsh(reduced_block_gramian(cfg, b, region, which)) for b in blocks]


def clutter_rank_bounds(cfg: WaveformConfig, region: ClutterRegion,
                        rel_tol: float = DEFAULT_REL_TOL, *, numerical: bool = True,
                        blocks=None) -> RankReport:
    """Per-block estimates, their sums, and the numerical rank.

    The numerical rank thresholds every block against the largest eigenvalue
    over all blocks, which is the largest eigenvalue of the full Gramian.
    """
    blocks = partition_blocks(cfg) if blocks is None else blocks
    spectra = block_spectra(cfg, region, blocks) if numerical else None
    ref = max(float(s.max()) for s in spectra) if numerical else None
    rows = []
    for i, b in enumerate(blocks):
        uv = 1 if region.v_p is not None else u_vm(b, cfg, region.V_interval)
        ua = u_am(b, cfg, region.A_interval, region.v_p)
        lo, hi = u_cm(b, cfg, region)
        rk = count_above(spectra[i], rel_tol, ref) if numerical else -1
        rows.append(BlockRank(b.m, b.K, rk, uv, ua, lo, hi))
    return RankReport(
        dim=cfg.dim,
        numerical_rank=sum(r.rank for r in rows) if numerical else -1,
        lower_bound=sum(r.U_C_lower for r in rows),
        upper_bound=sum(r.U_C_upper for r in rows),
        per_block=rows,
        tolerance_used=rel_tol,
    )


COROLLARY_KINDS = ("fda", "sf", "fdmimo", "stap")


def corollary_rank(kind: str, cfg: WaveformConfig, region: ClutterRegion, blocks=None) -> int:
    """Closed-form clutter-rank estimate for a specialised waveform."""
    if kind not in COROLLARY_KINDS:
        raise ValueError(f"kind must be one of {COROLLARY_KINDS}")
    if cfg.kind != kind:
        raise ValueError(f"waveform was built as {cfg.kind!r}, not {kind!r}")
    blocks = partition_blocks(cfg) if blocks is None else blocks
    if kind == "sf":
        return sum(u_vm(b, cfg, region.V_interval) for b in blocks)
    if kind == "stap":
        if region.v_p is None:
            raise ValueError("STAP corollary needs a region with v_p")
        return sum(u_am(b, cfg, region.A_interval, region.v_p) for b in blocks)
    return sum(u_am(b, cfg, region.A_interval) for b in blocks)


def factor_ranks(cfg: WaveformConfig, region: ClutterRegion, which: str,
                 rel_tol: float = DEFAULT_REL_TOL, blocks=None) -> list[tuple[int, int, int]]:
    """``(m, numerical rank, estimate)`` of one factor Gramian per block.

    ``which='V'`` compares ``R_V_m`` with ``U_V_m``; ``'A'`` compares ``R_A_m``
    with ``U_A_m``. Each factor is thresholded against its own largest
    eigenvalue.
    """
    blocks = partition_blocks(cfg) if blocks is None else blocks
    out = []
    for b in blocks:
        ev = np.linalg.eigvalsh(reduced_block_gramian(cfg, b, region, which))
        if which == "V":
            est = u_vm(b, cfg, region.V_interval)
        else:
            est = u_am(b, cfg, region.A_interval, region.v_p)
        out.append((b.m, count_above(ev, rel_tol), est))
    return out
