"""Monte Carlo detection of a point target in clutter plus white noise.

Clutter is a sum of voxel echoes with i.i.d. circular complex Gaussian
amplitudes, so the clutter vector is zero-mean Gaussian with covariance equal
to the (scaled) clutter Gramian. It is drawn as ``F z`` with ``F`` the
eigen-factor of each diagonal block, which has exactly that distribution.
Components whose variance is below ``clutter_floor * sigma2`` are dropped.

The detector is square-law on the MVDR output, ``|w^H x|^2`` with
``w = (R_C + s2 I)^-1 u`` scaled to unit output interference power. The
threshold is the empirical ``1 - pfa`` quantile of a calibration H0 batch;
the achieved false-alarm rate is measured on an independent H0 batch.

Two trial modes give the same statistic distribution. ``echo`` forms every
echo vector ``x`` (noise, clutter and target) and applies the filter.
``projected`` uses that the statistic is linear in ``x``: it draws the same
clutter coefficients ``z`` and forms ``(F^H w)^H z`` directly, and draws the
filtered noise as one complex Gaussian of variance ``s2 ||w||^2``. This costs
``O(rank)`` rather than ``O(dim * rank)`` per trial.

Trials run in fixed-size chunks, each with its own seed derived from
``(seed, phase, snr index, chunk index)``, so results do not depend on the
number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import isotonic_regression

from .covariance import ClutterRegion, block_gramians, partition_blocks
from .fdcm import WaveformConfig
from .steering import steering_vector

PHASE_CALIBRATE, PHASE_VALIDATE, PHASE_H1 = 0, 1, 2


@dataclass(frozen=True)
class DetectionScenario:
    cfg: WaveformConfig
    region: ClutterRegion
    targets: tuple
    snr_db: tuple
    pfa: float = 1e-3
    trials_h0: int = 100_000
    trials_h1: int = 10_000
    cnr_db: float = 40.0
    sigma2: float = 1.0
    clutter_floor: float = 1e-6
    chunk: int = 2000
    seed: int = 0
    mode: str = "projected"

    def __post_init__(self):
        tg = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if tg.shape[1] != 3 or tg.shape[0] == 0:
            raise ValueError("targets must be a non-empty list of (D, v, alpha)")
        object.__setattr__(self, "targets", tuple(map(tuple, tg)))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if not 0.0 < self.pfa < 1.0:
            raise ValueError("pfa must lie in (0, 1)")
        if self.trials_h0 < 10 / self.pfa:
            raise ValueError(f"trials_h0 must be at least 10/pfa = {math.ceil(10 / self.pfa)}")
        if self.trials_h1 < 1 or self.chunk < 1:
            raise ValueError("trial counts must be positive")
        if self.mode not in ("projected", "echo"):
            raise ValueError("mode must be 'projected' or 'echo'")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        for t in self.targets:
            if in_clutter_region(self.cfg, self.region, t):
                raise ValueError(f"target {t} lies inside the clutter region")


def in_clutter_region(cfg: WaveformConfig, region: ClutterRegion, target) -> bool:
    """Whether a ``(D, v, alpha)`` point coincides with some clutter voxel."""
    D, v, a = target
    lo, hi = region.D_interval
    if not lo <= D <= hi:
        return False
    if region.A_interval is not None and not region.A_interval[0] <= a <= region.A_interval[1]:
        return False
    if region.v_p is not None:
        vmax = abs(cfg.unambiguous_velocity()[1])
        return abs(v - a * region.v_p) <= 1e-9 * vmax
    if region.V_interval is not None and not region.V_interval[0] <= v <= region.V_interval[1]:
        return False
    return True


@dataclass
class DetectionResult:
    snr_db: np.ndarray
    pd: np.ndarray
    pfa_achieved: float
    threshold: float
    trials_h0: int
    trials_h1: int
    pd_by_target: np.ndarray = field(repr=False)

    def rows(self):
        return [(float(s), float(p), self.pfa_achieved, self.trials_h1)
                for s, p in zip(self.snr_db, self.pd)]

    def sigma(self) -> np.ndarray:
        """Binomial standard deviation of each pd estimate."""
        p = np.clip(self.pd, 1.0 / self.trials_h1, 1 - 1.0 / self.trials_h1)
        return np.sqrt(p * (1 - p) / self.trials_h1)


class _Model:
    """Clutter factors, filters and target vectors of one scenario."""

    def __init__(self, sc: DetectionScenario):
        cfg = sc.cfg
        blocks = partition_blocks(cfg)
        grams = [g.matrix for g in block_gramians(cfg, blocks, sc.region)]
        total = sum(float(np.trace(g).real) for g in grams)
        # clutter density scaled to the requested per-sample clutter-to-noise ratio
        scale = 10.0 ** (sc.cnr_db / 10.0) * sc.sigma2 * cfg.dim / total if total > 0 else 0.0
        U = np.column_stack([steering_vector(cfg, *t) for t in sc.targets])
        W = np.zeros_like(U)
        self.factors = []
        for b, g in zip(blocks, grams):
            Rm = scale * g
            lam, V = np.linalg.eigh(Rm)
            keep = lam > sc.clutter_floor * sc.sigma2
            self.factors.append((b.member_indices, V[:, keep] * np.sqrt(lam[keep])))
            A = Rm + sc.sigma2 * np.eye(b.K)
            W[b.member_indices] = sla.cho_solve(sla.cho_factor(A, lower=True), U[b.member_indices])
        gain = np.real(np.sum(U.conj() * W, axis=0))
        self.W = W / np.sqrt(gain)
        self.U = U
        # target amplitude per unit linear SNR: |a|^2 ||u||^2 / sigma2 = snr
        self.amp = np.sqrt(sc.sigma2 / np.sum(np.abs(U) ** 2, axis=0))
        self.dim = cfg.dim
        self.sigma2 = sc.sigma2
        self.mode = sc.mode
        # filtered clutter coefficients, filter norms and filtered target gains
        self.G = np.concatenate([F.conj().T @ self.W[idx] for idx, F in self.factors], axis=0)
        self.wnorm = np.linalg.norm(self.W, axis=0)
        self.wu = np.sum(self.W.conj() * U, axis=0)


def _clutter_coeffs(model: _Model, n: int, rng: np.random.Generator) -> np.ndarray:
    r = model.G.shape[0]
    return (rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))) / math.sqrt(2.0)


def _chunk_stats(model: _Model, n: int, first: int, snr_lin: float, rng: np.random.Generator):
    """Statistics of ``n`` trials starting at global trial index ``first``."""
    if model.mode == "projected":
        return _chunk_stats_projected(model, n, first, snr_lin, rng)
    return _chunk_stats_echo(model, n, first, snr_lin, rng)


def _chunk_stats_projected(model: _Model, n: int, first: int, snr_lin: float, rng):
    k = (first + np.arange(n)) % model.U.shape[1]
    z = _clutter_coeffs(model, n, rng)
    y = np.sum(model.G[:, k].conj() * z, axis=0)
    noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(model.sigma2 / 2.0)
    y += model.wnorm[k] * noise
    if snr_lin > 0:
        phase = np.exp(2j * np.pi * rng.random(n))
        y += model.wu[k] * model.amp[k] * math.sqrt(snr_lin) * phase
    return np.abs(y) ** 2, k


def _chunk_stats_echo(model: _Model, n: int, first: int, snr_lin: float, rng):
    z = _clutter_coeffs(model, n, rng)
    X = np.empty((model.dim, n), dtype=np.complex128)
    s = math.sqrt(model.sigma2 / 2.0)
    X.real = rng.standard_normal((model.dim, n))
    X.imag = rng.standard_normal((model.dim, n))
    X *= s
    row = 0
    for idx, F in model.factors:
        r = F.shape[1]
        if r:
            X[idx] += F @ z[row:row + r]
        row += r
    k = (first + np.arange(n)) % model.U.shape[1]
    if snr_lin > 0:
        phase = np.exp(2j * np.pi * rng.random(n))
        X += model.U[:, k] * (model.amp[k] * math.sqrt(snr_lin) * phase)
    y = np.sum(model.W[:, k].conj() * X, axis=0)
    return np.abs(y) ** 2, k


def _chunks(total: int, size: int):
    return [(s, min(size, total - s)) for s in range(0, total, size)]


_WORKER_MODEL = None


def _init_worker(sc):
    global _WORKER_MODEL
    _WORKER_MODEL = _Model(sc)


def _run_task(task):
    seed, phase, j, c, first, n, snr_lin = task
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(phase, j, c))
    return _chunk_stats(_WORKER_MODEL, n, first, snr_lin, np.random.default_rng(ss))


def simulate_pd(sc: DetectionScenario, jobs: int = 1) -> DetectionResult:
    """Detection probability per SNR point at an empirical fixed-pfa threshold."""
    tasks = []
    for phase, trials in ((PHASE_CALIBRATE, sc.trials_h0), (PHASE_VALIDATE, sc.trials_h0)):
        tasks += [(sc.seed, phase, 0, c, s, n, 0.0)
                  for c, (s, n) in enumerate(_chunks(trials, sc.chunk))]
    for j, snr in enumerate(sc.snr_db):
        tasks += [(sc.seed, PHASE_H1, j, c, s, n, 10.0 ** (snr / 10.0))
                  for c, (s, n) in enumerate(_chunks(sc.trials_h1, sc.chunk))]

    if jobs > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(sc,)) as ex:
            results = list(ex.map(_run_task, tasks, chunksize=1))
    else:
        _init_worker(sc)
        results = [_run_task(t) for t in tasks]

    by_phase = {}
    for t, res in zip(tasks, results):
        by_phase.setdefault((t[1], t[2]), []).append(res)

    def cat(key):
        parts = by_phase.get(key, [])
        return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))

    h0, _ = cat((PHASE_CALIBRATE, 0))
    thr = float(np.quantile(h0, 1.0 - sc.pfa, method="higher"))
    val, _ = cat((PHASE_VALIDATE, 0))
    pfa_hat = float(np.mean(val > thr))

    K = len(sc.targets)
    pd = np.zeros(len(sc.snr_db))
    by_target = np.zeros((len(sc.snr_db), K))
    for j in range(len(sc.snr_db)):
        stat, k = cat((PHASE_H1, j))
        hit = stat > thr
        pd[j] = hit.mean()
        by_target[j] = np.bincount(k, weights=hit, minlength=K) / np.maximum(
            np.bincount(k, minlength=K), 1)
    return DetectionResult(np.asarray(sc.snr_db), pd, pfa_hat, thr, sc.trials_h0, sc.trials_h1,
                           by_target)


def default_targets(cfg: WaveformConfig, region: ClutterRegion, count: int = 32) -> tuple:
    """Targets spread over the clutter-free directions, at static velocity.

    Directions sit at cell centres of the two clutter-free direction bands;
    ranges follow a golden-ratio sequence over the unambiguous range.
    """
    lo, hi = cfg.unambiguous_direction()
    a_lo, a_hi = region.A_interval if region.A_interval is not None else (0.0, 0.0)
    half = count // 2
    pos = a_hi + (hi - a_hi) * (np.arange(count - half) + 0.5) / (count - half)
    neg = a_lo - (a_lo - lo) * (np.arange(half) + 0.5) / max(half, 1)
    alpha = np.concatenate([pos, neg])
    D = cfg.range_extent() * ((np.arange(count) * 0.6180339887498949) % 1.0)
    return tuple((float(d), 0.0, float(a)) for d, a in zip(D, alpha))


def isotonic_increasing(y) -> np.ndarray:
    """Least-squares non-decreasing fit."""
    return isotonic_regression(np.asarray(y, dtype=float), increasing=True).x
