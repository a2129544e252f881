"""Independent reference computations used only by the tests.

These avoid the package's vectorised paths: steering entries are evaluated one
sample at a time from the delay model, interval integrals by adaptive
quadrature, and the MVDR SCNR from an explicit eigendecomposition.
"""
import math

import numpy as np
from scipy import integrate

C = 299_792_458.0


def steering_entry(cfg, p, l, r, q, D, v, alpha):
    """One sample of the steering vector from the two-way delay model."""
    G = np.asarray(cfg.G)
    f = cfg.fc + cfg.df * (G[p, l] + q)
    x = 2 * cfg.d_t * l if cfg.monostatic_fda else cfg.d_t * l + cfg.d_r * r
    w = 1.0 if cfg.beta is None else abs(cfg.beta[p, l, q]) ** 2
    phase = 2 * math.pi / C * f * (2 * D + 2 * v * p * cfg.pri + alpha * x)
    return w * complex(math.cos(phase), -math.sin(phase))


def steering_loop(cfg, D, v, alpha):
    out = np.zeros(cfg.dim, dtype=complex)
    PQ = cfg.P * cfg.Q
    for l in range(cfg.L):
        for r in range(cfg.R):
            for p in range(cfg.P):
                for q in range(cfg.Q):
                    out[(l * cfg.R + r) * PQ + p * cfg.Q + q] = steering_entry(
                        cfg, p, l, r, q, D, v, alpha)
    return out


def interval_integral_quad(kappa, lo, hi):
    """``int_lo^hi exp(-j kappa s) ds`` by adaptive quadrature."""
    re = integrate.quad(lambda s: math.cos(kappa * s), lo, hi, limit=400)[0]
    im = integrate.quad(lambda s: -math.sin(kappa * s), lo, hi, limit=400)[0]
    return complex(re, im)


def interval_integral_antiderivative(kappa, lo, hi):
    """Closed form from the antiderivative, ``x_hi - x_lo`` at zero rate."""
    if kappa == 0:
        return hi - lo
    return (np.exp(-1j * kappa * hi) - np.exp(-1j * kappa * lo)) / (-1j * kappa)


def scnr_eigen_sum(R, sigma2, u):
    """``sum_i |v_i^H u|^2 / (lambda_i + sigma2)`` over all eigenpairs."""
    lam, V = np.linalg.eigh(R)
    c = np.abs(V.conj().T @ u) ** 2
    return float(np.sum(c / (lam + sigma2)))


def dense_eig_rank(M, rel_tol):
    ev = np.linalg.eigvalsh(M)
    return int(np.sum(ev > rel_tol * ev.max()))


def marcum_pd(snr_out_lin, pfa):
    """Detection probability of a non-fluctuating target under a square-law
    detector with unit-variance complex Gaussian interference."""
    from scipy import stats
    thr = -math.log(pfa)
    return float(stats.ncx2.sf(2 * thr, 2, 2 * snr_out_lin))


def midpoints(interval, n):
    """Midpoint-rule nodes and weight; a zero-width interval is one unit node."""
    lo, hi = interval
    if hi == lo:
        return np.array([lo]), 1.0
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5), h


def block_gramian_riemann(cfg, block, region, n_v, n_a):
    """One diagonal block as a Riemann sum of sub-steering outer products.

    Within a block every sample shares one carrier, so the range sum is the
    range width. The velocity and direction sums are taken per axis and
    combined elementwise, which equals the sum over the Cartesian grid.
    """
    from fdclutter.steering import sub_direction_steering, sub_velocity_steering
    lo, hi = region.D_interval
    M = (hi - lo if hi > lo else 1.0) * np.outer(block.weight, block.weight).astype(complex)
    if region.v_p is not None:
        if region.A_interval is not None:
            grid, h = midpoints(region.A_interval, n_a)
            S = np.column_stack([sub_velocity_steering(block, cfg, a * region.v_p)
                                 * sub_direction_steering(block, cfg, a) for a in grid])
            M *= h * (S @ S.conj().T)
        return M
    if region.V_interval is not None:
        grid, h = midpoints(region.V_interval, n_v)
        S = np.column_stack([sub_velocity_steering(block, cfg, v) for v in grid])
        M *= h * (S @ S.conj().T)
    if region.A_interval is not None:
        grid, h = midpoints(region.A_interval, n_a)
        S = np.column_stack([sub_direction_steering(block, cfg, a) for a in grid])
        M *= h * (S @ S.conj().T)
    return M


def lattice_steps(x):
    """Lattice steps spanned by the distinct values of ``x``."""
    u = np.unique(np.round(np.asarray(x, float), 12))
    if u.size < 2:
        return 1
    return int(round((u[-1] - u[0]) / np.diff(u).min())) + 1


def factor_gramian_riemann(freq, samples, interval, n, chunk=8192):
    """Riemann sum of one factor over distinct sampling points.

    ``samples`` are path lengths per unit of the swept variable (``2 T p`` for
    velocity, the spatial path for direction). Repeated samples are merged
    into one row scaled by the square root of their multiplicity.
    """
    x, mult = np.unique(np.round(np.asarray(samples, float), 12), return_counts=True)
    grid, h = midpoints(interval, n)
    out = np.zeros((x.size, x.size), dtype=complex)
    w = np.sqrt(mult)[:, None]
    for s in range(0, grid.size, chunk):
        S = np.exp(-2j * math.pi / C * freq * np.outer(x, grid[s:s + chunk])) * w
        out += S @ S.conj().T
    return h * out
