"""Command-line runner for the preset experiments and custom configs.

Each run writes a CSV table (``#`` metadata lines, then a header row) and a
JSON manifest holding every resolved waveform so the run can be repeated.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .covariance import ClutterRegion, write_matrix
from .experiments import (DEFAULT_EXTENTS, DEFAULT_SNR, FIG10_A_EXTENT, Variant,
                          detection_tables, factor_sweep, fig3_tables, fig4_variants,
                          fig5_variants, fig6_variants, fig7_variants, fig8_variants,
                          fig9_variants, fig10_scenarios, rank_sweep)
from .fdcm import WaveformConfig
from .rank import DEFAULT_REL_TOL

log = logging.getLogger("fdclutter")

PRESETS = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "custom")
OUT_ENV = "FDCLUTTER_OUT"


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def write_table(path: Path, columns, rows, meta: dict) -> None:
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    path.write_text(buf.getvalue())


def read_table(path) -> tuple[dict, list[dict]]:
    """Metadata block and rows (as strings) of a table written by this tool."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


def _variant_entry(v: Variant, region: dict) -> dict:
    return {"name": v.name, "M": v.M, "mode": v.mode, "reference": v.reference,
            "waveform": v.cfg.to_dict(), "region": region}


def write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def resolve_manifest(manifest) -> dict[str, WaveformConfig]:
    """Rebuild every waveform recorded in a manifest (dict or path)."""
    if not isinstance(manifest, dict):
        manifest = json.loads(Path(manifest).read_text())
    return {v["name"]: WaveformConfig.from_dict(v["waveform"]) for v in manifest["variants"]}


# --------------------------------------------------------------------------
# runners
# --------------------------------------------------------------------------

RANK_PRESETS = {
    "fig6": (fig6_variants, "a_extent"),
    "fig7": (fig7_variants, "v_extent"),
    "fig8": (fig8_variants, "a_extent"),
    "fig9": (fig9_variants, "a_extent"),
}
FACTOR_PRESETS = {"fig4": (fig4_variants, "V"), "fig5": (fig5_variants, "A")}


def _run_rank(args, preset, out: Path, meta: dict) -> list[str]:
    build, axis = RANK_PRESETS[preset]
    variants = build(seed=args.seed)
    cols, rows = rank_sweep(variants, DEFAULT_EXTENTS, axis, args.rel_tol, args.jobs)
    write_table(out / f"{preset}.csv", cols, rows, meta)
    region = {"sweep_axis": axis, "extents": list(DEFAULT_EXTENTS)}
    meta_json = {"variants": [_variant_entry(v, region) for v in variants]}
    return [f"{preset}.csv"], meta_json


def _run_factor(args, preset, out: Path, meta: dict):
    build, which = FACTOR_PRESETS[preset]
    variants = build(seed=args.seed)
    cols, rows = factor_sweep(variants, which, DEFAULT_EXTENTS, args.rel_tol, args.jobs)
    write_table(out / f"{preset}.csv", cols, rows, meta)
    axis = "v_extent" if which == "V" else "a_extent"
    region = {"sweep_axis": axis, "extents": list(DEFAULT_EXTENTS)}
    return [f"{preset}.csv"], {"variants": [_variant_entry(v, region) for v in variants]}


def _run_fig3(args, preset, out: Path, meta: dict):
    cfg, cols, rows, gram, permuted, perm = fig3_tables(args.seed, args.rel_tol)
    write_table(out / "fig3.csv", cols, rows, meta)
    write_matrix(out / "fig3_gramian.bin", np.abs(gram))
    write_matrix(out / "fig3_gramian_permuted.bin", np.abs(permuted))
    (out / "fig3_permutation.txt").write_text("\n".join(map(str, perm)) + "\n")
    v = Variant("fig3", cfg, 4, "random")
    files = ["fig3.csv", "fig3_gramian.bin", "fig3_gramian_permuted.bin", "fig3_permutation.txt"]
    return files, {"variants": [_variant_entry(v, {"v_extent": 1.0, "a_extent": 1.0})]}


def _run_fig10(args, preset, out: Path, meta: dict):
    scenarios = fig10_scenarios(args.seed, DEFAULT_SNR, args.long_run)
    cols, rows, mcols, maps, _ = detection_tables(scenarios, args.jobs)
    sc0 = scenarios[0][1]
    meta = dict(meta, pfa=sc0.pfa, trials_h0=sc0.trials_h0, trials_h1=sc0.trials_h1)
    write_table(out / "fig10.csv", cols, rows, meta)
    write_table(out / "fig10_direction_map.csv", mcols, maps, meta)
    region = {"a_extent": FIG10_A_EXTENT, "snr_db": list(DEFAULT_SNR), "pfa": sc0.pfa,
              "trials_h0": sc0.trials_h0, "trials_h1": sc0.trials_h1,
              "cnr_db": sc0.cnr_db}
    entries = []
    for v, sc in scenarios:
        e = _variant_entry(v, region)
        e["targets"] = [list(t) for t in sc.targets]
        entries.append(e)
    return ["fig10.csv", "fig10_direction_map.csv"], {"variants": entries}


def _run_custom(args, preset, out: Path, meta: dict):
    if args.config is None:
        raise ConfigError("custom runs need --config PATH")
    rc: RunConfig = load_config(args.config)
    rc.region().validate(rc.waveform)
    v = Variant("custom", rc.waveform, rc.codes.M, rc.codes.mode)
    cols, rows = rank_sweep([v], rc.sweep_values, rc.sweep_axis, args.rel_tol, args.jobs)
    for r in rows:
        r["fdl_db"] = None
    write_table(out / "custom.csv", cols, rows, meta)
    region = {"sweep_axis": rc.sweep_axis, "extents": list(rc.sweep_values),
              "v_extent": rc.v_extent, "a_extent": rc.a_extent}
    entry = _variant_entry(v, region)
    entry["config_path"] = str(args.config)
    return ["custom.csv"], {"variants": [entry]}


def run(args) -> int:
    preset = args.preset
    out = Path(args.out or os.environ.get(OUT_ENV) or "results")
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    if not 0.0 < args.rel_tol < 1.0:
        raise ConfigError("--rel-tol must lie in (0, 1)")
    if args.config is not None and preset != "custom":
        raise ConfigError("--config is only used by the custom preset")
    out.mkdir(parents=True, exist_ok=True)
    meta = {"preset": preset, "version": __version__, "seed": args.seed,
            "rel_tol": repr(args.rel_tol)}
    if preset == "fig3":
        runner = _run_fig3
    elif preset in FACTOR_PRESETS:
        runner = _run_factor
    elif preset in RANK_PRESETS:
        runner = _run_rank
    elif preset == "fig10":
        runner = _run_fig10
    else:
        runner = _run_custom
    files, body = runner(args, preset, out, meta)
    manifest = {"preset": preset, "version": __version__, "seed": args.seed,
                "rel_tol": args.rel_tol, "long_run": bool(args.long_run), "outputs": files}
    manifest.update(body)
    write_manifest(out / f"{preset}_manifest.json", manifest)
    log.info("wrote %s", ", ".join(str(out / f) for f in files))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fdclutter",
                                 description="Clutter rank and detection experiments for "
                                             "frequency-diverse radar waveforms.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="preset", required=True, metavar="PRESET")
    helps = {
        "fig3": "block-diagonal Gramian of a 16-pulse 4x8 MIMO waveform",
        "fig4": "velocity-factor ranks versus estimates",
        "fig5": "direction-factor ranks versus estimates",
        "fig6": "FDA clutter ranks over direction extent",
        "fig7": "stepped-frequency clutter ranks over velocity extent",
        "fig8": "FD-MIMO clutter ranks over direction extent",
        "fig9": "airborne FD-MIMO clutter ranks and diversity loss",
        "fig10": "FDA detection probability versus SNR",
        "custom": "rank sweep of a TOML-configured waveform",
    }
    for name in PRESETS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", type=Path, default=None, help="TOML waveform config (custom)")
        p.add_argument("--out", type=Path, default=None,
                       help=f"output directory (default ${OUT_ENV} or ./results)")
        p.add_argument("--seed", type=int, default=0, help="seed for random codes and trials")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL,
                       help="relative eigenvalue threshold of the numerical rank")
        p.add_argument("--long-run", action="store_true",
                       help="detection at pfa 1e-5 with 1e7 H0 trials")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return run(args)
    except (ConfigError, ValueError) as exc:
        print(f"fdclutter: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
