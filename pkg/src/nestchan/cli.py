"""Command-line entry point: ``nestchan {array,estimate,bench,figures}``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import METHODS, PRESETS, ConfigError, Scenario, load_scenario, preset
from .geometry import GeometryError, build, difference_coarray, parse_indices
from .pipeline import (EstimationError, EstimatorConfig, estimate, nmse, records_digest, run_array_sweep,
                       run_experiment, synthesize_trial)


def _methods(arg: str | None, sc: Scenario) -> tuple:
    if arg is None:
        return sc.methods
    return METHODS if arg == "all" else (arg,)


def _scenario(args, default_preset: str | None = None) -> Scenario:
    if getattr(args, "config", None):
        sc = load_scenario(args.config)
    elif getattr(args, "preset", None) or default_preset:
        sc = preset(getattr(args, "preset", None) or default_preset)
    else:
        sc = Scenario()
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        over["trials"] = args.trials
    if getattr(args, "method", None) is not None:
        over["methods"] = _methods(args.method, sc)
    if getattr(args, "backend", None) is not None:
        over["backend"] = args.backend
    return sc.with_overrides(**over) if over else sc


def _progress(enabled: bool):
    if not enabled:
        return None

    def report(done, total):
        print(f"\r{done}/{total}", end="" if done < total else "\n", file=sys.stderr, flush=True)
    return report


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# subcommands -------------------------------------------------------------------

def cmd_array(args) -> int:
    if args.indices:
        s = parse_indices(args.indices, args.N)
    else:
        s = build(args.type, args.N, args.M)
    rep = difference_coarray(s)
    out = {"N": s.N, "M": s.M, "indices": list(s.indices), "lags": list(rep.lags),
           "contiguous_span": rep.contiguous_span, "holes": list(rep.holes),
           "hole_free": rep.hole_free}
    if args.json:
        print(json.dumps(out))
    else:
        print(f"selection ({s.M} of {s.N}): {s.to_json()}")
        print(f"coarray span: 0..{rep.contiguous_span}")
        print(f"holes: {list(rep.holes) if rep.holes else 'none'}")
    return 0


def cmd_estimate(args) -> int:
    sc = _scenario(args)
    snr = args.snr_db if args.snr_db is not None else sc.snr_db[0]
    paths, X, h, sigma = synthesize_trial(sc, args.trial, snr)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        (out / "snapshots.csv").write_text(X.to_csv())
    report = {"scenario": sc.name, "seed": sc.seed, "trial": args.trial, "snr_db": snr,
              "selection": list(sc.selection().indices),
              "true_paths": {"theta_deg": np.rad2deg(paths.theta).tolist(), "f": paths.f.tolist()},
              "methods": {}}
    status = 0
    for m in sc.methods:
        cfg = EstimatorConfig.from_scenario(sc, m, trace=args.trace)
        try:
            res = estimate(X, cfg, sigma_true=sigma)
        except EstimationError as exc:
            report["methods"][m] = {"error": str(exc), "stage": exc.stage}
            status = 1
            continue
        d = dict(res.diagnostics)
        trace = d.pop("trace", None)
        d.update(nmse=nmse(res.h_hat, h), theta_deg=np.rad2deg(res.theta_hat).tolist(),
                 f=res.f_hat.tolist(), p=res.atoms.p.tolist())
        report["methods"][m] = d
        if out and trace:
            keys = list(trace[0])
            _write_rows(out / f"trace_{m}.csv", keys, [[r[k] for k in keys] for r in trace])
        if out:
            _write_rows(out / f"h_hat_{m}.csv", ["antenna", "re", "im"],
                        [[n + 1, repr(float(v.real)), repr(float(v.imag))]
                         for n, v in enumerate(res.h_hat)])
    text = json.dumps(report, indent=2, default=float)
    if out:
        (out / "estimate.json").write_text(text + "\n")
    print(text)
    return status


def cmd_bench(args) -> int:
    sc = _scenario(args, default_preset=None)
    res = run_experiment(sc, out_dir=args.out, threads=args.threads,
                         progress=_progress(not args.quiet))
    for c in res.summary["cells"]:
        med = c["median_nmse_db"]
        t = c["median_solve_time_s"]
        print(f"{c['method']:>6} snr={c['snr_db']:6.1f}  median NMSE "
              f"{'nan' if med is None else f'{med:8.2f}'} dB  median solve "
              f"{'nan' if t is None else f'{t:.3f}'} s  failures {c['failures']}/{c['trials']}")
    print(f"digest {records_digest(res.records)}")
    return 0


def _fig_scenario(name: str, args) -> Scenario:
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.trials is not None and name != "fig3":
        over["trials"] = args.trials
    if args.method is not None:
        over["methods"] = METHODS if args.method == "all" else (args.method,)
    return preset(name, **over)


def cmd_figures(args) -> int:
    out = Path(args.out or "figures")
    out.mkdir(parents=True, exist_ok=True)
    which = args.which.split(",") if args.which else sorted(PRESETS)
    for name in which:
        if name not in PRESETS:
            raise ConfigError(f"unknown figure {name!r}")
        sc = _fig_scenario(name, args)
        if name == "fig3":
            res = run_experiment(sc, out_dir=out / name, threads=args.threads)
            (out / "fig3_scatter.csv").write_text((out / name / "scatter.csv").read_text())
        elif name == "fig4":
            sweep = run_array_sweep(sc, threads=args.threads)
            rows = []
            for at, res in sweep.items():
                res.write(out / name / at)
                for c in res.summary["cells"]:
                    rows.append([at, c["snr_db"], c["median_nmse"], c["median_nmse_db"],
                                 c["failures"]])
            _write_rows(out / "fig4_nmse.csv",
                        ["array_type", "snr_db", "median_nmse", "median_nmse_db", "failures"], rows)
        else:
            res = run_experiment(sc, out_dir=out / name, threads=args.threads,
                                 progress=_progress(not args.quiet))
            cells = res.summary["cells"]
            if name == "fig5":
                _write_rows(out / "fig5_nmse_runtime.csv",
                            ["method", "snr_db", "median_nmse", "median_nmse_db", "mean_nmse",
                             "median_solve_time_s", "std_solve_time_s", "failures"],
                            [[c["method"], c["snr_db"], c["median_nmse"], c["median_nmse_db"],
                              c["mean_nmse"], c["median_solve_time_s"], c["std_solve_time_s"],
                              c["failures"]] for c in cells])
            else:
                _write_rows(out / "fig6_se.csv",
                            ["method", "snr_db", "mean_se_bits", "mean_se_ideal_bits"],
                            [[c["method"], c["snr_db"], c["mean_se_bits"], c["mean_se_ideal_bits"]]
                             for c in cells])
        print(f"{name}: written under {out}")
    return 0


# parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nestchan", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, threads=False):
        sp.add_argument("--config", help="scenario JSON file")
        sp.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("--method", choices=METHODS + ("all",))
        sp.add_argument("--backend", choices=("interior-point", "iterative-splitting"))
        sp.add_argument("--out", help="output directory")
        if threads:
            sp.add_argument("--threads", type=int, default=1)
            sp.add_argument("--trials", type=int)
            sp.add_argument("--quiet", action="store_true")

    a = sub.add_parser("array", help="print a selection set and its difference coarray")
    a.add_argument("--type", default="nested", choices=("nested", "mra", "coprime", "ula"))
    a.add_argument("--N", type=int, required=True)
    a.add_argument("--M", type=int, default=None)
    a.add_argument("--indices", help="explicit 1-based indices, comma separated")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_array)

    e = sub.add_parser("estimate", help="single trial from a scenario")
    common(e)
    e.add_argument("--trial", type=int, default=0)
    e.add_argument("--trace", action="store_true", help="write per-iteration solver traces to --out")
    e.add_argument("--snr-db", type=float, dest="snr_db")
    e.set_defaults(func=cmd_estimate)

    b = sub.add_parser("bench", help="Monte-Carlo sweep; writes trials.csv, summary.json, scatter.csv")
    common(b, threads=True)
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("figures", help="plot-ready CSV for the four experiment figures")
    f.add_argument("--which", help="comma list out of fig3,fig4,fig5,fig6")
    f.add_argument("--seed", type=int)
    f.add_argument("--method", choices=METHODS + ("all",))
    f.add_argument("--out")
    f.add_argument("--threads", type=int, default=1)
    f.add_argument("--trials", type=int)
    f.add_argument("--quiet", action="store_true")
    f.set_defaults(func=cmd_figures)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "array" and not args.indices and args.M is None:
        build_parser().error("array needs --M or --indices")
    try:
        return args.func(args)
    except (ConfigError, GeometryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
