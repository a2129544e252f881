"""Preset experiments producing the rank, loss and detection tables.

Every preset returns ``(columns, rows)`` with rows in a fixed order. Sweep
points may be evaluated in worker processes; results are collected in
submission order, so tables do not depend on the number of workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covariance import (ClutterRegion, gramian_analytic, partition_blocks,
                         permute_block_diagonal, reduced_block_gramian)
from .detect import DetectionScenario, default_targets, simulate_pd
from .fdcm import (WaveformConfig, adapt_fda, adapt_fdmimo, adapt_sf, adapt_stap,
                   assign_codes, assign_matrix, wavelength)
from .metrics import fdl
from .rank import (COROLLARY_KINDS, DEFAULT_REL_TOL, clutter_rank_bounds, count_above,
                   corollary_rank, u_am, u_vm)

DEFAULT_EXTENTS = tuple(round(0.1 * k, 10) for k in range(1, 11))
DEFAULT_SNR = tuple(range(6, 25, 2))

RANK_COLUMNS = ("variant", "kind", "M", "mode", "Q", "extent", "dim", "numerical_rank",
                "lower_bound", "upper_bound", "corollary", "ncr", "ncr_lower", "ncr_upper",
                "fdl_db")
FACTOR_COLUMNS = ("variant", "factor", "M", "mode", "extent", "unique_samples",
                  "numerical_rank", "estimate", "normalized_numerical", "normalized_estimate")
BLOCK_COLUMNS = ("m", "K", "numerical_rank", "U_V", "U_A", "lower", "upper")
DETECT_COLUMNS = ("variant", "snr_db", "pd", "pfa_achieved", "trials")
MAP_COLUMNS = ("variant", "target", "D", "alpha", "snr_db", "pd")


@dataclass(frozen=True)
class Variant:
    name: str
    cfg: WaveformConfig
    M: int
    mode: str
    reference: str | None = None     # fixed-frequency counterpart for the loss column


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


# --------------------------------------------------------------------------
# variant builders
# --------------------------------------------------------------------------

def _fd_variants(kind: str, n: int, seed: int, Qs=(1, 16), Ms=(1, 4, 8)):
    out = []
    for Q in Qs:
        fixed = f"{kind}_q{Q}_fixed"
        for M in Ms:
            for mode in (("fixed",) if M == 1 else ("linear", "random")):
                g = assign_codes(n, M, mode, seed)
                cfg = adapt_fda(n, Q, g) if kind == "fda" else adapt_sf(n, Q, g)
                name = fixed if M == 1 else f"{kind}_q{Q}_{mode}{M}"
                out.append(Variant(name, cfg, M, mode, None if M == 1 else fixed))
    return out


def fig6_variants(L: int = 256, seed: int = 0):
    return _fd_variants("fda", L, seed)


def fig7_variants(P: int = 256, seed: int = 0):
    return _fd_variants("sf", P, seed)


def fig8_variants(L: int = 64, R: int = 8, seed: int = 0, Ms=(1, 4, 8)):
    out = []
    for M in Ms:
        for mode in (("fixed",) if M == 1 else ("linear", "random")):
            cfg = adapt_fdmimo(L, R, 1, assign_codes(L, M, mode, seed))
            name = "fdmimo_fixed" if M == 1 else f"fdmimo_{mode}{M}"
            out.append(Variant(name, cfg, M, mode, None if M == 1 else "fdmimo_fixed"))
    return out


def fig9_variants(L: int = 16, R: int = 8, P: int = 16, seed: int = 0, Ms=(1, 4, 8)):
    out = []
    for M in Ms:
        for mode in (("fixed",) if M == 1 else ("linear", "random")):
            cfg = adapt_stap(L, R, P, assign_codes(L, M, mode, seed))
            name = "stap_fixed" if M == 1 else f"stap_{mode}{M}"
            out.append(Variant(name, cfg, M, mode, None if M == 1 else "stap_fixed"))
    return out


def fig3_config(seed: int = 0) -> WaveformConfig:
    d_r = wavelength() / 2.0
    G = assign_matrix(16, 4, 4, "random", seed, axis="entry")
    return WaveformConfig(P=16, Q=1, L=4, R=8, G=G, d_r=d_r, d_t=8 * d_r)


def fig4_variants(P: int = 128, L: int = 32, R: int = 8, seed: int = 0, Ms=(1, 4, 8, 16)):
    """Pulse-axis codes: one carrier per pulse, shared by every element."""
    d_r = wavelength() / 2.0
    out = []
    for M in Ms:
        for mode in (("fixed",) if M == 1 else ("linear", "random")):
            G = assign_matrix(P, L, M, mode, seed, axis="pulse")
            cfg = WaveformConfig(P=P, Q=1, L=L, R=R, G=G, d_r=d_r, d_t=R * d_r)
            out.append(Variant("fixed" if M == 1 else f"{mode}{M}", cfg, M, mode))
    return out


def fig5_variants(P: int = 32, L: int = 128, R: int = 8, seed: int = 0, Ms=(1, 4, 8, 16)):
    """Element-axis codes: one carrier per transmitter, constant over pulses."""
    d_r = wavelength() / 2.0
    out = []
    for M in Ms:
        for mode in (("fixed",) if M == 1 else ("linear", "random")):
            G = assign_matrix(P, L, M, mode, seed, axis="element")
            cfg = WaveformConfig(P=P, Q=1, L=L, R=R, G=G, d_r=d_r, d_t=R * d_r)
            out.append(Variant("fixed" if M == 1 else f"{mode}{M}", cfg, M, mode))
    return out


def fig10_variants(L: int = 256, seed: int = 0):
    spec = [(1, "fixed", 1), (1, "fixed", 16), (4, "random", 16), (8, "random", 16),
            (8, "linear", 16), (4, "random", 1), (8, "random", 1), (8, "linear", 1),
            (4, "linear", 1)]
    out = []
    for M, mode, Q in spec:
        d = wavelength() / 4.0
        cfg = adapt_fda(L, Q, assign_codes(L, M, mode, seed), d=d)
        name = f"q{Q}_fixed" if M == 1 else f"q{Q}_{mode}{M}"
        out.append(Variant(name, cfg, M, mode))
    return out


# fig10 clutter: direction sines within +-c / (32 d fc), i.e. 1/8 of the
# unambiguous FDA interval
FIG10_A_EXTENT = 0.125


# --------------------------------------------------------------------------
# rank sweeps
# --------------------------------------------------------------------------

def _region(cfg: WaveformConfig, extent: float, axis: str) -> ClutterRegion:
    v = extent if axis in ("v_extent", "extent") else 1.0
    a = extent if axis in ("a_extent", "extent") else 1.0
    return ClutterRegion.for_config(cfg, v, a)


def _rank_point(args):
    variant, extent, axis, rel_tol = args
    cfg = variant.cfg
    region = _region(cfg, extent, axis)
    rep = clutter_rank_bounds(cfg, region, rel_tol)
    cor = corollary_rank(cfg.kind, cfg, region) if cfg.kind in COROLLARY_KINDS else None
    return {
        "variant": variant.name, "kind": cfg.kind, "M": variant.M, "mode": variant.mode,
        "Q": cfg.Q, "extent": extent, "dim": rep.dim, "numerical_rank": rep.numerical_rank,
        "lower_bound": rep.lower_bound, "upper_bound": rep.upper_bound, "corollary": cor,
        "ncr": rep.ncr, "ncr_lower": rep.ncr_lower, "ncr_upper": rep.ncr_upper,
        "fdl_db": None,
    }


def _fill_loss(rows, variants):
    ref = {v.name: v.reference for v in variants}
    ncr = {(r["variant"], r["extent"]): r["ncr"] for r in rows}
    for r in rows:
        base = ref.get(r["variant"])
        if base is None:
            r["fdl_db"] = 0.0 if r["mode"] == "fixed" and r["ncr"] < 1 else None
            continue
        n0 = ncr.get((base, r["extent"]))
        if n0 is not None and n0 < 1.0:
            r["fdl_db"] = fdl(r["ncr"], n0)
    return rows


def rank_sweep(variants, extents=DEFAULT_EXTENTS, axis: str = "a_extent",
               rel_tol: float = DEFAULT_REL_TOL, jobs: int = 1):
    items = [(v, float(e), axis, rel_tol) for v in variants for e in extents]
    rows = _map(_rank_point, items, jobs)
    return RANK_COLUMNS, _fill_loss(rows, variants)


def _factor_point(args):
    variant, extent, which, rel_tol = args
    cfg = variant.cfg
    axis = "v_extent" if which == "V" else "a_extent"
    region = _region(cfg, extent, axis)
    unique = num = est = 0
    for b in partition_blocks(cfg):
        M = reduced_block_gramian(cfg, b, region, which)
        unique += M.shape[0]
        num += count_above(np.linalg.eigvalsh(M), rel_tol)
        est += u_vm(b, cfg, region.V_interval) if which == "V" else u_am(b, cfg, region.A_interval)
    return {"variant": variant.name, "factor": which, "M": variant.M, "mode": variant.mode,
            "extent": extent, "unique_samples": unique, "numerical_rank": num, "estimate": est,
            "normalized_numerical": num / unique, "normalized_estimate": est / unique}


def factor_sweep(variants, which: str, extents=DEFAULT_EXTENTS,
                 rel_tol: float = DEFAULT_REL_TOL, jobs: int = 1):
    """Per-factor numerical rank against its estimate, summed over blocks and
    normalized by the number of unique sampling points."""
    items = [(v, float(e), which, rel_tol) for v in variants for e in extents]
    return FACTOR_COLUMNS, _map(_factor_point, items, jobs)


def fig3_tables(seed: int = 0, rel_tol: float = DEFAULT_REL_TOL):
    """Block table plus the Gramian before and after the block permutation."""
    cfg = fig3_config(seed)
    region = ClutterRegion.for_config(cfg, 1.0, 1.0)
    gram = gramian_analytic(cfg, region)
    blocks = partition_blocks(cfg)
    permuted, perm = permute_block_diagonal(gram, blocks)
    rep = clutter_rank_bounds(cfg, region, rel_tol, blocks=blocks)
    rows = [{"m": r.m, "K": r.K, "numerical_rank": r.rank, "U_V": r.U_V, "U_A": r.U_A,
             "lower": r.U_C_lower, "upper": r.U_C_upper} for r in rep.per_block]
    return cfg, BLOCK_COLUMNS, rows, gram.matrix, permuted.matrix, perm


# --------------------------------------------------------------------------
# detection
# --------------------------------------------------------------------------

def fig10_scenarios(seed: int = 0, snr_db=DEFAULT_SNR, long_run: bool = False, L: int = 256,
                    trials_h1: int = 10_000):
    pfa = 1e-5 if long_run else 1e-3
    trials_h0 = 10_000_000 if long_run else 100_000
    out = []
    for v in fig10_variants(L, seed):
        region = ClutterRegion.for_config(v.cfg, None, FIG10_A_EXTENT)
        sc = DetectionScenario(v.cfg, region, default_targets(v.cfg, region), tuple(snr_db),
                               pfa=pfa, trials_h0=trials_h0, trials_h1=trials_h1, seed=seed,
                               chunk=5000 if long_run else 2000)
        out.append((v, sc))
    return out


def detection_tables(scenarios, jobs: int = 1):
    rows, maps, results = [], [], {}
    for v, sc in scenarios:
        res = simulate_pd(sc, jobs=jobs)
        results[v.name] = res
        if v.mode == "linear" and v.M == 4:
            # detection is direction-dependent here, so no averaged pd is emitted
            for j, snr in enumerate(res.snr_db):
                for k, (D, _, a) in enumerate(sc.targets):
                    maps.append({"variant": v.name, "target": k, "D": D, "alpha": a,
                                 "snr_db": float(snr), "pd": float(res.pd_by_target[j, k])})
            continue
        for snr, pd, pfa_hat, n in res.rows():
            rows.append({"variant": v.name, "snr_db": snr, "pd": pd, "pfa_achieved": pfa_hat,
                         "trials": n})
    return DETECT_COLUMNS, rows, MAP_COLUMNS, maps, results

