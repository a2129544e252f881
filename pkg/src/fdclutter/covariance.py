"""Clutter regions, frequency blocks and clutter Gramians.

The clutter Gramian ``C C^H`` is built two ways:

* :func:`gramian_analytic` multiplies closed-form interval integrals of the
  range, velocity and direction factors (plus the rank-1 modulation term);
* :func:`gramian_discrete` sums outer products of steering vectors over a
  midpoint grid of clutter voxels, scaled by the voxel volume.

Samples whose codes differ are exactly uncorrelated over the full range
interval, so permuting samples by code gives a block-diagonal matrix with one
block per frequency point (:func:`partition_blocks`,
:func:`permute_block_diagonal`).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .fdcm import C, WaveformConfig
from .steering import sample_frequencies, spatial_path, temporal_path

# brute-force discrete Gramians above this many (samples x voxels) entries
# fall back to the factored voxel sum
BRUTE_BUDGET = 6e7


@dataclass(frozen=True)
class ClutterRegion:
    """Range/velocity/direction clutter intervals and their grid counts.

    ``None`` for ``V_interval`` or ``A_interval`` marks a factor that the
    waveform cannot observe; its Gramian is all ones. A zero-width interval is a
    single clutter point. ``v_p`` couples velocity to direction
    (``v = alpha * v_p``) for side-looking STAP; ``V_interval`` is then unused.
    """

    D_interval: tuple[float, float]
    V_interval: tuple[float, float] | None = None
    A_interval: tuple[float, float] | None = None
    N_D: int | None = None
    N_V: int | None = None
    N_A: int | None = None
    v_p: float | None = None

    def __post_init__(self):
        for name in ("D_interval", "V_interval", "A_interval"):
            iv = getattr(self, name)
            if iv is None:
                continue
            lo, hi = map(float, iv)
            if not hi >= lo:
                raise ValueError(f"{name} is empty: [{lo}, {hi}]")
            object.__setattr__(self, name, (lo, hi))
        for name in ("N_D", "N_V", "N_A"):
            n = getattr(self, name)
            if n is not None and n < 1:
                raise ValueError(f"{name} must be >= 1")

    @classmethod
    def for_config(cls, cfg: WaveformConfig, v_extent: float | None = 1.0,
                   a_extent: float | None = 1.0, **grid) -> "ClutterRegion":
        """Region centred on zero with extents given as fractions of the
        unambiguous intervals. Factors the waveform cannot observe are dropped.
        """
        D = (0.0, cfg.range_extent())
        V = A = None
        v_p = None
        if cfg.kind == "stap":
            v_p = cfg.v_p
        elif cfg.P > 1 and v_extent is not None:
            lo, hi = cfg.unambiguous_velocity()
            V = (v_extent * lo, v_extent * hi)
        if np.any(spatial_path(cfg) != 0) and a_extent is not None:
            lo, hi = cfg.unambiguous_direction()
            A = (a_extent * lo, a_extent * hi)
        return cls(D_interval=D, V_interval=V, A_interval=A, v_p=v_p, **grid)

    @property
    def v_width(self) -> float:
        return 0.0 if self.V_interval is None else self.V_interval[1] - self.V_interval[0]

    @property
    def a_width(self) -> float:
        return 0.0 if self.A_interval is None else self.A_interval[1] - self.A_interval[0]

    def full_range(self, cfg: WaveformConfig) -> bool:
        lo, hi = self.D_interval
        ext = cfg.range_extent()
        return abs(lo) <= 1e-12 * ext and abs(hi - ext) <= 1e-12 * ext

    def validate(self, cfg: WaveformConfig) -> None:
        """Raise ``ValueError`` when the region leaves the unambiguous intervals."""
        eps = 1e-9
        ext = cfg.range_extent()
        lo, hi = self.D_interval
        if lo < -eps * ext or hi > ext * (1 + eps):
            raise ValueError(f"range interval [{lo}, {hi}] exceeds [0, {ext}]")
        if self.V_interval is not None:
            vlo, vhi = cfg.unambiguous_velocity()
            lo, hi = self.V_interval
            if lo < vlo * (1 + eps) or hi > vhi * (1 + eps):
                raise ValueError(f"velocity interval [{lo}, {hi}] exceeds [{vlo}, {vhi}]")
        if self.A_interval is not None:
            alo, ahi = cfg.unambiguous_direction()
            lo, hi = self.A_interval
            if lo < alo - eps or hi > ahi + eps:
                raise ValueError(f"direction interval [{lo}, {hi}] exceeds [{alo}, {ahi}]")
        if cfg.kind == "stap" and self.v_p is None:
            raise ValueError("STAP regions need the platform speed v_p")


@dataclass(frozen=True, eq=False)
class FrequencyBlock:
    """Samples sharing one frequency code ``m``.

    Per-member arrays are in ``member_indices`` order. ``path`` is the two-way
    spatial path per unit direction sine; the apertures are sorted unique
    values.
    """

    m: int
    member_indices: np.ndarray
    pulse: np.ndarray
    path: np.ndarray
    weight: np.ndarray
    temporal_aperture: np.ndarray
    spatial_aperture: np.ndarray
    embedded_aperture: np.ndarray | None = None

    @property
    def K(self) -> int:
        return int(self.member_indices.size)


@dataclass(frozen=True, eq=False)
class ClutterGramian:
    matrix: np.ndarray
    provenance: str = "analytic"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _unique_sorted(x: np.ndarray, scale: float) -> np.ndarray:
    if x.size == 0:
        return x
    if scale <= 0:
        return np.unique(x)
    keys, idx = np.unique(np.round(x / scale, 6), return_index=True)
    return np.sort(x[idx])


def _length_unit(cfg: WaveformConfig) -> float:
    return C / cfg.fc


def partition_blocks(cfg: WaveformConfig) -> list[FrequencyBlock]:
    """One block per unique augmented code, members in layout order."""
    codes = cfg.afdcm.codes
    lay = cfg.layout
    phys = cfg.d_t * lay.l + (0.0 if cfg.monostatic_fda else cfg.d_r * lay.r)
    path = spatial_path(cfg)
    weight = cfg.modulation()
    unit = _length_unit(cfg)
    blocks = []
    for m in cfg.afdcm.M_Q:
        idx = np.nonzero(codes == m)[0]
        p = lay.p[idx]
        emb = None
        if cfg.kind == "stap":
            emb = _unique_sorted(phys[idx] + 2.0 * cfg.v_p * cfg.pri * p, unit)
        blocks.append(FrequencyBlock(
            m=int(m), member_indices=idx, pulse=p, path=path[idx], weight=weight[idx],
            temporal_aperture=cfg.pri * np.unique(p),
            spatial_aperture=_unique_sorted(phys[idx], unit),
            embedded_aperture=emb,
        ))
    return blocks


def rd_entry(cfg: WaveformConfig, a: int, b: int) -> float:
    """Range-factor Gramian entry over the full range interval.

    Equal codes integrate to the interval length ``c / (2 df)``; different codes
    integrate a whole number of complex cycles and give exactly zero.
    """
    codes = cfg.afdcm.codes
    n = cfg.dim
    if not (0 <= a < n and 0 <= b < n):
        raise IndexError("sample index out of range")
    return cfg.range_extent() if codes[a] == codes[b] else 0.0


# --------------------------------------------------------------------------
# analytic Gramians
# --------------------------------------------------------------------------

def _range_gramian(cfg: WaveformConfig, region: ClutterRegion) -> np.ndarray:
    codes = cfg.afdcm.codes
    if region.full_range(cfg):
        return np.where(codes[:, None] == codes[None, :], cfg.range_extent(), 0.0)
    k = (4.0 * np.pi / C) * cfg.df * codes
    return _kernels.pair_integral(k, *region.D_interval)


def _motion_factors(freq, tpath, xpath, region: ClutterRegion):
    """Closed-form velocity and direction Gramians (``None`` when absent)."""
    w = 2.0 * np.pi / C * freq
    if region.v_p is not None:
        if region.A_interval is None:
            return None, None
        k = w * (xpath + region.v_p * tpath)
        return None, _kernels.pair_integral(k, *region.A_interval)
    RV = RA = None
    if region.V_interval is not None:
        RV = _kernels.pair_integral(w * tpath, *region.V_interval)
    if region.A_interval is not None:
        RA = _kernels.pair_integral(w * xpath, *region.A_interval)
    return RV, RA


def gramian_analytic(cfg: WaveformConfig, region: ClutterRegion) -> ClutterGramian:
    """``(beta beta^H) * R_D * R_V * R_A`` (Hadamard products) from closed forms."""
    beta = cfg.modulation()
    out = _range_gramian(cfg, region).astype(np.complex128)
    out *= np.outer(beta, beta)
    RV, RA = _motion_factors(sample_frequencies(cfg), temporal_path(cfg), spatial_path(cfg),
                             region)
    for F in (RV, RA):
        if F is not None:
            out *= F
    return ClutterGramian(out, "analytic")


# --------------------------------------------------------------------------
# discrete Gramians
# --------------------------------------------------------------------------

def _midpoints(interval, n: int):
    lo, hi = interval
    if hi == lo:
        return np.array([lo]), 1.0
    h = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * h, h


def _lattice_steps(x) -> int:
    """Number of lattice steps spanned by the distinct values of ``x``."""
    u = np.unique(np.round(np.asarray(x, dtype=float), 12))
    if u.size < 2:
        return 1
    return int(round((u[-1] - u[0]) / np.diff(u).min())) + 1


def default_grid_counts(cfg: WaveformConfig, region: ClutterRegion,
                        oversample: int = 8) -> tuple[int, int, int]:
    """Grid counts: the range grid only has to exceed the code span (the
    midpoint rule is exact for whole cycles); velocity/direction use
    ``max(64, oversample * n)`` with ``n`` the larger of the largest block
    dimension and the lattice span of the sampling points on that axis.
    A sparse block aperture needs the span, not the member count.
    """
    M = cfg.afdcm.M_Q
    n_d = region.N_D or max(8, int(M.max() - M.min()) + 1)
    kmax = max(b.K for b in partition_blocks(cfg))
    tpath, xpath = temporal_path(cfg), spatial_path(cfg)
    if region.v_p is not None:
        xpath = xpath + region.v_p * tpath
    n_v = max(64, oversample * max(kmax, _lattice_steps(tpath)))
    n_a = max(64, oversample * max(kmax, _lattice_steps(xpath)))
    return n_d, region.N_V or n_v, region.N_A or n_a


def gramian_discrete(cfg: WaveformConfig, region: ClutterRegion, *, oversample: int = 8,
                     method: str = "auto", chunk: int = 4096) -> ClutterGramian:
    """Riemann sum of steering-vector outer products over the clutter voxels.

    ``method='brute'`` forms every voxel's steering vector directly and
    accumulates ``C C^H``. ``method='factored'`` uses that a Cartesian voxel
    grid makes ``C C^H`` the Hadamard product of the per-axis voxel sums, which
    is the same number computed with far fewer exponentials. ``auto`` picks
    brute force when it fits :data:`BRUTE_BUDGET`.
    """
    n_d, n_v, n_a = default_grid_counts(cfg, region, oversample)
    dg, hd = _midpoints(region.D_interval, n_d)
    freq = sample_frequencies(cfg)
    tpath = temporal_path(cfg)
    xpath = spatial_path(cfg)
    beta = cfg.modulation()
    zeros = np.zeros(1)

    if region.v_p is not None:
        # STAP: one direction axis, velocity slaved to it
        if region.A_interval is None:
            ag, ha = zeros, 1.0
        else:
            ag, ha = _midpoints(region.A_interval, n_a)
        vg, hv = ag * region.v_p, 1.0
        axes = [("D", dg, hd), ("AV", ag, ha)]
    else:
        vg, hv = (zeros, 1.0) if region.V_interval is None else _midpoints(region.V_interval, n_v)
        ag, ha = (zeros, 1.0) if region.A_interval is None else _midpoints(region.A_interval, n_a)
        axes = [("D", dg, hd), ("V", vg, hv), ("A", ag, ha)]

    n_vox = int(np.prod([a[1].size for a in axes]))
    if method == "auto":
        method = "brute" if n_vox * cfg.dim <= BRUTE_BUDGET else "factored"
    N = cfg.dim
    zero_n = np.zeros(N)
    ones_n = np.ones(N)

    if method == "factored":
        out = np.outer(beta, beta).astype(np.complex128)
        for name, grid, h in axes:
            t = tpath if "V" in name else zero_n
            x = xpath if "A" in name else zero_n
            z = np.zeros(grid.size)
            if name == "D":
                Cx = _kernels.steering_grid(freq, zero_n, zero_n, ones_n, grid, z, z)
            elif name == "AV":
                Cx = _kernels.steering_grid(freq, t, x, ones_n, z, grid * region.v_p, grid)
            elif name == "V":
                Cx = _kernels.steering_grid(freq, t, zero_n, ones_n, z, grid, z)
            else:
                Cx = _kernels.steering_grid(freq, zero_n, x, ones_n, z, z, grid)
            out *= h * (Cx @ Cx.conj().T)
        return ClutterGramian(out, "discrete")
    if method != "brute":
        raise ValueError(f"unknown method {method!r}")

    # full voxel enumeration
    if region.v_p is not None:
        D_all, A_all = (g.ravel() for g in np.meshgrid(dg, ag, indexing="ij"))
        V_all = A_all * region.v_p
        vol = hd * ha
    else:
        D_all, V_all, A_all = (g.ravel() for g in np.meshgrid(dg, vg, ag, indexing="ij"))
        vol = hd * hv * ha
    out = np.zeros((N, N), dtype=np.complex128)
    for s in range(0, D_all.size, chunk):
        Cx = _kernels.steering_grid(freq, tpath, xpath, beta, D_all[s:s + chunk],
                                    V_all[s:s + chunk], A_all[s:s + chunk])
        out += Cx @ Cx.conj().T
    out *= vol
    return ClutterGramian(out, "discrete")


# --------------------------------------------------------------------------
# block structure
# --------------------------------------------------------------------------

def block_permutation(blocks, n: int) -> np.ndarray:
    perm = np.concatenate([b.member_indices for b in blocks]) if blocks else np.array([], int)
    if perm.size != n or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError("blocks do not partition the sample index set")
    return perm


def permute_block_diagonal(gramian: ClutterGramian, blocks) -> tuple[ClutterGramian, np.ndarray]:
    """Symmetric permutation that groups samples block by block."""
    perm = block_permutation(blocks, gramian.dim)
    M = gramian.matrix[np.ix_(perm, perm)]
    return replace(gramian, matrix=M), perm


def block_offsets(blocks) -> np.ndarray:
    return np.concatenate([[0], np.cumsum([b.K for b in blocks])])


def off_block_mask(blocks) -> np.ndarray:
    """Boolean mask of entries outside the diagonal blocks, in permuted order."""
    off = block_offsets(blocks)
    n = off[-1]
    label = np.repeat(np.arange(len(blocks)), np.diff(off))
    return label[:, None] != label[None, :] if n else np.zeros((0, 0), bool)


def block_factor_gramians(cfg: WaveformConfig, block: FrequencyBlock, region: ClutterRegion):
    """Per-block velocity and direction Gramians ``(R_V, R_A)`` from the
    sub-steering closed forms; ``None`` marks an all-ones factor. For STAP the
    merged factor is returned as the direction Gramian.
    """
    f = np.full(block.K, cfg.fc + block.m * cfg.df)
    return _motion_factors(f, 2.0 * cfg.pri * block.pulse, block.path, region)


def _range_scale(cfg: WaveformConfig, region: ClutterRegion) -> float:
    lo, hi = region.D_interval
    return hi - lo if hi > lo else 1.0


def block_gramians(cfg: WaveformConfig, blocks, region: ClutterRegion) -> list[ClutterGramian]:
    """Diagonal blocks ``R_C_m`` of the permuted analytic Gramian."""
    scale = _range_scale(cfg, region)
    out = []
    for b in blocks:
        M = scale * np.outer(b.weight, b.weight).astype(np.complex128)
        for F in block_factor_gramians(cfg, b, region):
            if F is not None:
                M *= F
        out.append(ClutterGramian(M, "analytic"))
    return out


def reduced_block_gramian(cfg: WaveformConfig, block: FrequencyBlock, region: ClutterRegion,
                          which: str = "C") -> np.ndarray:
    """Smaller matrix with the same non-zero spectrum as a block Gramian.

    Members that share a sampling point (same pulse and same path, or same
    embedded position for STAP) give identical rows. Merging them into one
    row weighted by the summed squared member weights keeps the non-zero
    eigenvalues (``W^1/2 R_u W^1/2`` versus ``E R_u E^H``).

    ``which`` selects ``'C'`` (full block), ``'V'`` (velocity factor only) or
    ``'A'`` (direction factor only, merged factor for STAP).
    """
    unit = _length_unit(cfg)
    tp = 2.0 * cfg.pri * block.pulse
    if which == "V":
        key = np.round(block.pulse.astype(float), 6)[:, None]
        w2 = np.ones(block.K)
    elif which == "A":
        emb = block.path + (region.v_p * tp if region.v_p is not None else 0.0)
        key = np.round(emb / unit, 6)[:, None]
        w2 = np.ones(block.K)
    elif which == "C":
        if region.v_p is not None:
            key = np.round((block.path + region.v_p * tp) / unit, 6)[:, None]
        else:
            key = np.column_stack([block.pulse.astype(float), np.round(block.path / unit, 6)])
        w2 = block.weight ** 2 * _range_scale(cfg, region)
    else:
        raise ValueError(f"which must be 'C', 'V' or 'A', got {which!r}")
    _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
    inv = inv.ravel()
    wsum = np.bincount(inv, weights=w2, minlength=first.size)
    f = np.full(first.size, cfg.fc + block.m * cfg.df)
    RV, RA = _motion_factors(f, tp[first], block.path[first], region)
    M = np.ones((first.size, first.size), dtype=np.complex128)
    if which in ("C", "V") and RV is not None:
        M *= RV
    if which in ("C", "A") and RA is not None:
        M *= RA
    s = np.sqrt(wsum)
    return s[:, None] * M * s[None, :]


# --------------------------------------------------------------------------
# binary matrix interchange
# --------------------------------------------------------------------------

def write_matrix(path, matrix) -> None:
    """Dense complex matrix: two little-endian uint64 dims, then row-major
    little-endian float64 (re, im) pairs.
    """
    M = np.asarray(matrix, dtype=np.complex128)
    if M.ndim != 2:
        raise ValueError("matrix must be 2-D")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", *M.shape))
        fh.write(np.ascontiguousarray(M).astype("<c16").tobytes())


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    rows, cols = struct.unpack_from("<QQ", raw, 0)
    data = np.frombuffer(raw, dtype="<c16", offset=16, count=rows * cols)
    return data.reshape(rows, cols).astype(np.complex128)
