"""Clutter-suppression figures of merit.

* ``scnr_exact``: MVDR output ``u^H (R + s2 I)^-1 u`` via a Cholesky solve;
* ``scnr_approx``: ``||P_perp u||^2 / s2`` with ``P_perp`` the projector onto
  the complement of the clutter eigenspace;
* ``mean_projected_power``: Monte Carlo mean of ``||P_perp u||^2 / ||u||^2``
  over targets spread on the unambiguous extents;
* ``fdl``: frequency diversity loss ``10 log10((1 - ncr_fd) / (1 - ncr_fixed))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .covariance import ClutterGramian, ClutterRegion, block_gramians, partition_blocks
from .fdcm import WaveformConfig
from .rank import DEFAULT_REL_TOL, check_hermitian
from .steering import steering_vector


def _db(x: float) -> float:
    return -math.inf if x <= 0 else 10.0 * math.log10(x)


def _matrix(gramian) -> np.ndarray:
    return gramian.matrix if isinstance(gramian, ClutterGramian) else np.asarray(gramian)


def _check_sigma2(sigma2: float) -> None:
    if not sigma2 > 0:
        raise ValueError(f"noise power must be positive, got {sigma2}")


@dataclass(frozen=True)
class ScnrResult:
    exact: float
    approx: float
    sigma2: float
    clutter_rank_used: int


def scnr_exact_linear(gramian, sigma2: float, target) -> float:
    _check_sigma2(sigma2)
    R = _matrix(gramian)
    check_hermitian(R)
    u = np.asarray(target, dtype=np.complex128)
    A = R + sigma2 * np.eye(R.shape[0])
    x = sla.cho_solve(sla.cho_factor(A, lower=True), u)
    return float(np.real(np.vdot(u, x)))


def scnr_exact(gramian, sigma2: float, target) -> float:
    """Optimal (MVDR) output SCNR in dB."""
    return _db(scnr_exact_linear(gramian, sigma2, target))


class ClutterSubspace:
    """Orthonormal basis of the clutter eigenspace.

    Eigenvalues above ``rel_tol`` times the largest are kept. A list of
    ``(indices, block_matrix)`` pairs may be given instead of a full matrix;
    the basis then stays block-sparse.
    """

    def __init__(self, gramian=None, rel_tol: float = DEFAULT_REL_TOL, *, blocks=None,
                 dim: int | None = None):
        if (gramian is None) == (blocks is None):
            raise ValueError("pass exactly one of gramian or blocks")
        if gramian is not None:
            R = _matrix(gramian)
            blocks = [(np.arange(R.shape[0]), R)]
            dim = R.shape[0]
        spectra = []
        for idx, M in blocks:
            check_hermitian(M)
            spectra.append(np.linalg.eigh(M))
        top = max((float(w.max()) for w, _ in spectra if w.size), default=0.0)
        self.dim = int(dim)
        self.parts = []
        for (idx, _), (w, V) in zip(blocks, spectra):
            keep = w > rel_tol * top if top > 0 else np.zeros(w.size, bool)
            self.parts.append((np.asarray(idx), V[:, keep]))
        self.rank = sum(V.shape[1] for _, V in self.parts)

    def captured(self, U: np.ndarray) -> np.ndarray:
        """``||V^H u||^2`` for each column of ``U``."""
        U = U.reshape(self.dim, -1)
        out = np.zeros(U.shape[1])
        for idx, V in self.parts:
            if V.shape[1]:
                out += np.sum(np.abs(V.conj().T @ U[idx]) ** 2, axis=0)
        return out

    def complement_power(self, U: np.ndarray) -> np.ndarray:
        U = U.reshape(self.dim, -1)
        total = np.sum(np.abs(U) ** 2, axis=0)
        return np.maximum(total - self.captured(U), 0.0)


def scnr_approx_linear(gramian, sigma2: float, target, rel_tol: float = DEFAULT_REL_TOL) -> float:
    _check_sigma2(sigma2)
    sub = gramian if isinstance(gramian, ClutterSubspace) else ClutterSubspace(gramian, rel_tol)
    u = np.asarray(target, dtype=np.complex128)
    return float(sub.complement_power(u)[0]) / sigma2


def scnr_approx(gramian, sigma2: float, target, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Projection approximation of the optimal SCNR in dB."""
    return _db(scnr_approx_linear(gramian, sigma2, target, rel_tol))


def scnr(gramian, sigma2: float, target, rel_tol: float = DEFAULT_REL_TOL) -> ScnrResult:
    sub = ClutterSubspace(gramian, rel_tol)
    return ScnrResult(
        exact=scnr_exact(gramian, sigma2, target),
        approx=_db(scnr_approx_linear(sub, sigma2, target)),
        sigma2=float(sigma2),
        clutter_rank_used=sub.rank,
    )


def block_subspace(cfg: WaveformConfig, region: ClutterRegion,
                   rel_tol: float = DEFAULT_REL_TOL) -> ClutterSubspace:
    """Clutter subspace assembled from the analytic diagonal blocks."""
    blocks = partition_blocks(cfg)
    grams = block_gramians(cfg, blocks, region)
    return ClutterSubspace(blocks=[(b.member_indices, g.matrix) for b, g in zip(blocks, grams)],
                           rel_tol=rel_tol, dim=cfg.dim)


def sample_targets(cfg: WaveformConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    """``(count, 3)`` array of ``(D, v, alpha)`` uniform on the unambiguous extents.

    Coordinates the waveform cannot observe are set to zero.
    """
    D = rng.uniform(0.0, cfg.range_extent(), count)
    v = rng.uniform(*cfg.unambiguous_velocity(), count) if cfg.P > 1 else np.zeros(count)
    if cfg.L * cfg.R > 1 and (cfg.d_t > 0 or cfg.d_r > 0):
        a = rng.uniform(*cfg.unambiguous_direction(), count)
    else:
        a = np.zeros(count)
    return np.column_stack([D, v, a])


def mean_projected_power(gramian, cfg: WaveformConfig, sample_count: int, seed: int = 0,
                         rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Mean fraction of target energy outside the clutter eigenspace.

    ``gramian`` may be a matrix, a :class:`ClutterGramian` or a prebuilt
    :class:`ClutterSubspace`.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    sub = gramian if isinstance(gramian, ClutterSubspace) else ClutterSubspace(gramian, rel_tol)
    rng = np.random.default_rng(seed)
    pts = sample_targets(cfg, sample_count, rng)
    acc = 0.0
    for s in range(0, sample_count, 256):
        U = np.column_stack([steering_vector(cfg, *p) for p in pts[s:s + 256]])
        acc += float(np.sum(sub.complement_power(U) / np.sum(np.abs(U) ** 2, axis=0)))
    return acc / sample_count


def fdl(ncr_fd: float, ncr_fixed: float) -> float:
    """Frequency diversity loss in dB; ``-inf`` when clutter fills the space."""
    for name, x in (("ncr_fd", ncr_fd), ("ncr_fixed", ncr_fixed)):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {x}")
    if ncr_fixed >= 1.0:
        raise ValueError("fixed-frequency NCR of 1 leaves no clutter-free space")
    if ncr_fd == ncr_fixed:
        return 0.0
    if ncr_fd >= 1.0:
        return -math.inf
    return 10.0 * math.log10((1.0 - ncr_fd) / (1.0 - ncr_fixed))
