"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import time from ``FDCLUTTER_BACKEND``
(``numba`` or ``numpy``; default ``numba``). When numba is requested but not
importable, the numpy path is used. Both implementations are always exposed
under explicit names so tests and the benchmark can compare them.
"""
from __future__ import annotations

import logging
import os

import numpy as np

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0


# --------------------------------------------------------------------------
# numpy reference implementations
# --------------------------------------------------------------------------

def pair_integral_numpy(k: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Matrix of ``int_lo^hi exp(-j (k_a - k_b) s) ds`` over all pairs.

    A zero-width interval is a point mass at ``lo`` (weight 1).
    """
    k = np.asarray(k, dtype=np.float64)
    kappa = k[:, None] - k[None, :]
    width = hi - lo
    if width == 0.0:
        return np.exp(-1j * kappa * lo)
    mid = 0.5 * (lo + hi)
    # width * sinc keeps kappa -> 0 continuous
    return width * np.exp(-1j * kappa * mid) * np.sinc(kappa * width / (2.0 * np.pi))


def steering_grid_numpy(freq, tpath, xpath, weight, dgrid, vgrid, agrid):
    """Steering matrix, one column per grid point ``(D_i, v_i, alpha_i)``.

    Entry ``n, i`` is ``weight_n * exp(-j 2pi/c f_n (2 D_i + tpath_n v_i + xpath_n alpha_i))``
    where ``tpath = 2 T p`` and ``xpath`` is the two-way spatial path per unit
    direction sine.
    """
    phase = (2.0 * np.pi / SPEED_OF_LIGHT) * freq[:, None] * (
        2.0 * dgrid[None, :]
        + tpath[:, None] * vgrid[None, :]
        + xpath[:, None] * agrid[None, :]
    )
    return weight[:, None] * np.exp(-1j * phase)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

try:
    import numba as _nb

    HAS_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip the TBB probe, which warns on older system TBB builds
        _nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


if HAS_NUMBA:

    @_nb.njit(cache=True, fastmath=False)
    def pair_integral_numba(k, lo, hi):
        n = k.shape[0]
        out = np.empty((n, n), dtype=np.complex128)
        width = hi - lo
        mid = 0.5 * (lo + hi)
        for a in range(n):
            out[a, a] = 1.0 if width == 0.0 else width
            for b in range(a + 1, n):
                kap = k[a] - k[b]
                if width == 0.0:
                    val = np.exp(-1j * kap * lo)
                else:
                    x = 0.5 * kap * width
                    s = 1.0 if x == 0.0 else np.sin(x) / x
                    val = width * s * np.exp(-1j * kap * mid)
                out[a, b] = val
                out[b, a] = val.conjugate()
        return out

    @_nb.njit(cache=True, parallel=True)
    def steering_grid_numba(freq, tpath, xpath, weight, dgrid, vgrid, agrid):
        n = freq.shape[0]
        m = dgrid.shape[0]
        out = np.empty((n, m), dtype=np.complex128)
        scale = 2.0 * np.pi / SPEED_OF_LIGHT
        for i in _nb.prange(m):
            d2 = 2.0 * dgrid[i]
            v = vgrid[i]
            a = agrid[i]
            for r in range(n):
                ph = scale * freq[r] * (d2 + tpath[r] * v + xpath[r] * a)
                out[r, i] = weight[r] * (np.cos(ph) - 1j * np.sin(ph))
        return out

else:  # pragma: no cover
    pair_integral_numba = None
    steering_grid_numba = None


def _select_backend() -> str:
    want = os.environ.get("FDCLUTTER_BACKEND", "numba").strip().lower()
    if want not in ("numba", "numpy"):
        raise ValueError(f"FDCLUTTER_BACKEND must be 'numba' or 'numpy', got {want!r}")
    if want == "numba" and not HAS_NUMBA:
        log.warning("numba unavailable, falling back to numpy kernels")
        return "numpy"
    return want


BACKEND = _select_backend()


def pair_integral(k, lo: float, hi: float) -> np.ndarray:
    k = np.ascontiguousarray(k, dtype=np.float64)
    if BACKEND == "numba":
        return pair_integral_numba(k, float(lo), float(hi))
    return pair_integral_numpy(k, float(lo), float(hi))


def steering_grid(freq, tpath, xpath, weight, dgrid, vgrid, agrid) -> np.ndarray:
    args = [np.ascontiguousarray(a, dtype=np.float64)
            for a in (freq, tpath, xpath, weight, dgrid, vgrid, agrid)]
    if BACKEND == "numba":
        return steering_grid_numba(*args)
    return steering_grid_numpy(*args)
