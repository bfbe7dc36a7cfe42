"""Command-line interface: simulation sweeps, analysis and analytic tables.

Exit codes: 0 success, 2 usage/configuration error, 3 runtime or
convergence error.  All CSV output is comma-separated UTF-8 with a header
row, LF line endings and 17-significant-digit floats; every CSV gets a JSON
manifest written next to it.  Identical invocations with the same --seed
produce byte-identical CSVs regardless of --threads.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys

import numpy as np

from . import __version__, analytics, fitting, montecarlo, percolation
from .montecarlo import (DYNAMICS_COLUMNS, RoundConfig, derive_seed,
                         run_experiment, write_csv, write_manifest)

__all__ = ["main"]


def _fail_usage(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _fail_runtime(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 3


def _parse_int_list(text: str) -> list[int]:
    """'3,5,7' or an inclusive range '3:13:2'."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",")]


def _parse_float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",")]


def _parse_sweep(text: str) -> tuple[str, list[float]]:
    """'pz=0:1:0.02' -> ('pz', inclusive grid)."""
    axis, _, spec = text.partition("=")
    axis = axis.strip().lower()
    if axis not in ("px", "py", "pz", "pm"):
        raise ValueError(f"sweep axis must be one of px,py,pz,pm, got {axis!r}")
    parts = [float(p) for p in spec.split(":")]
    if len(parts) != 3:
        raise ValueError(f"sweep spec must be start:stop:step, got {spec!r}")
    start, stop, step = parts
    if step <= 0:
        raise ValueError("sweep step must be positive")
    count = int(round((stop - start) / step))
    return axis, [start + k * step for k in range(count + 1)]


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _opt(args, cfg: dict, name: str, default=None):
    """Flag value if given, else config-file value, else default."""
    val = getattr(args, name.replace("-", "_"), None)
    if val is not None:
        return val
    if name in cfg:
        return cfg[name]
    return default


def _progress(msg: str):
    print(msg, file=sys.stderr, flush=True)


def _read_csv(path: str, required: list[str]) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = [c for c in required if c not in cols]
        if missing:
            raise ValueError(
                f"{path}: missing required columns {missing}; found {cols}")
        return [row for row in reader]


# -- single-round -----------------------------------------------------------------


def _points_from_flags(args, cfg) -> list[tuple[float, float, float]]:
    sweep = _opt(args, cfg, "sweep")
    mix = _opt(args, cfg, "mix")
    px = float(_opt(args, cfg, "px", 0.0))
    py = float(_opt(args, cfg, "py", 0.0))
    pz = float(_opt(args, cfg, "pz", 0.0))
    if mix is not None:
        mix = _parse_float_list(mix) if isinstance(mix, str) else list(mix)
        if len(mix) != 3:
            raise ValueError("--mix needs three comma-separated fractions")
    if sweep is None:
        return [(px, py, pz)]
    axis, grid = _parse_sweep(sweep)
    if axis == "pm":
        fr = mix if mix is not None else (
            (px / (px + py + pz), py / (px + py + pz), pz / (px + py + pz))
            if px + py + pz > 0 else None)
        if fr is None:
            raise ValueError("sweeping pm requires --mix (or nonzero --px/--py/--pz)")
        return [(fr[0] * pm, fr[1] * pm, fr[2] * pm) for pm in grid]
    points = []
    for v in grid:
        vals = {"px": px, "py": py, "pz": pz}
        vals[axis] = v
        points.append((vals["px"], vals["py"], vals["pz"]))
    return points


def cmd_single_round(args) -> int:
    cfg = _load_config_file(args.config)
    distances = _parse_int_list(str(_opt(args, cfg, "d", "3")))
    trials = int(_opt(args, cfg, "trials", 10_000))
    seed = int(_opt(args, cfg, "seed", 0))
    out = _opt(args, cfg, "out", "single_round.csv")
    threads = _opt(args, cfg, "threads")
    threads = int(threads) if threads is not None else None
    points = _points_from_flags(args, cfg)
    for p in points:
        RoundConfig(p_x=p[0], p_y=p[1], p_z=p[2])  # validates the simplex
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    rows = montecarlo.sweep_single_round(
        distances, points, trials, seed, threads,
        crosscheck=bool(_opt(args, cfg, "crosscheck", False)),
        progress=_progress if args.verbose else None)
    write_csv(out, montecarlo.SINGLE_ROUND_COLUMNS, rows)
    write_manifest(out, master_seed=seed,
                   config={"command": "single-round", "distances": distances,
                           "points": points, "trials": trials},
                   columns=montecarlo.SINGLE_ROUND_COLUMNS,
                   distances=distances, started=started)
    print(out)
    return 0


# -- dynamics ---------------------------------------------------------------------


def cmd_dynamics(args) -> int:
    cfg = _load_config_file(args.config)
    preset = _opt(args, cfg, "preset")
    seed = int(_opt(args, cfg, "seed", 0))
    threads = _opt(args, cfg, "threads")
    threads = int(threads) if threads is not None else None
    if preset:
        overrides = {}
        if _opt(args, cfg, "trials") is not None:
            overrides["trials"] = int(_opt(args, cfg, "trials"))
        if _opt(args, cfg, "d") is not None:
            overrides["distances"] = tuple(_parse_int_list(str(_opt(args, cfg, "d"))))
        csv_path, _ = run_experiment(
            preset, overrides, out_dir=_opt(args, cfg, "out_dir", "."),
            master_seed=seed, threads=threads,
            progress=_progress if args.verbose else None)
        print(csv_path)
        return 0
    distances = _parse_int_list(str(_opt(args, cfg, "d", "3")))
    trials = int(_opt(args, cfg, "trials", 10_000))
    rounds_max = int(_opt(args, cfg, "max_rounds", 100_000))
    out = _opt(args, cfg, "out", "dynamics.csv")
    families = str(_opt(args, cfg, "families", "both")).lower()
    if families not in ("both", "plaquettes", "stars"):
        raise ValueError(f"--families must be both/plaquettes/stars, got {families!r}")
    unbiased = _opt(args, cfg, "unbiased")
    ps_list = _parse_float_list(str(_opt(args, cfg, "ps", "0")))
    if unbiased is not None:
        u = float(unbiased) / 3.0
        base = (u, u, u)
    else:
        base = (float(_opt(args, cfg, "px", 0.0)),
                float(_opt(args, cfg, "py", 0.0)),
                float(_opt(args, cfg, "pz", 0.0)))
    configs = [RoundConfig(p_x=base[0], p_y=base[1], p_z=base[2], p_s=ps,
                           measure_plaquettes=families in ("both", "plaquettes"),
                           measure_stars=families in ("both", "stars"))
               for ps in ps_list]
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    rows = montecarlo.sweep_dynamics(
        distances, configs, trials, rounds_max, seed, threads,
        progress=_progress if args.verbose else None)
    write_csv(out, DYNAMICS_COLUMNS, rows)
    write_manifest(out, master_seed=seed,
                   config={"command": "dynamics", "distances": distances,
                           "p": base, "ps": ps_list, "trials": trials,
                           "rounds_max": rounds_max, "families": families},
                   columns=DYNAMICS_COLUMNS, distances=distances, started=started)
    print(out)
    return 0


# -- experiment presets -------------------------------------------------------------


def cmd_experiment(args) -> int:
    cfg = _load_config_file(args.config)
    overrides = {}
    if _opt(args, cfg, "trials") is not None:
        overrides["trials"] = int(_opt(args, cfg, "trials"))
    if _opt(args, cfg, "d") is not None:
        overrides["distances"] = tuple(_parse_int_list(str(_opt(args, cfg, "d"))))
    threads = _opt(args, cfg, "threads")
    csv_path, manifest = run_experiment(
        args.preset, overrides, out_dir=_opt(args, cfg, "out_dir", "."),
        master_seed=int(_opt(args, cfg, "seed", 0)),
        threads=int(threads) if threads is not None else None,
        progress=_progress if args.verbose else None)
    print(csv_path)
    return 0


# -- analyze ---------------------------------------------------------------------


def _series_by_distance(rows, axis, value):
    data: dict[int, list[tuple[float, float]]] = {}
    for row in rows:
        data.setdefault(int(float(row["d"])), []).append(
            (float(row[axis]), float(row[value])))
    out = {}
    for d, pts in data.items():
        pts.sort()
        out[d] = (np.array([p for p, _ in pts]), np.array([v for _, v in pts]))
    return out


def _detect_axis(rows, candidates=("p_z", "p_x", "p_y", "p_m", "p_s")) -> str:
    for col in candidates:
        if col in rows[0] and len({row[col] for row in rows}) > 1:
            return col
    raise ValueError("could not detect a varying probability column; use --axis")


def cmd_analyze_fit(args) -> int:
    rows = _read_csv(args.input, ["d", "p_s", "tau"])
    models = args.models.split(",")
    for m in models:
        if m not in fitting.MODELS:
            raise ValueError(f"unknown model {m!r}; choose from {fitting.MODELS}")
    groups: dict[tuple, list] = {}
    for row in rows:
        key = tuple(float(row.get(c, 0.0)) for c in ("p_x", "p_y", "p_z", "p_s"))
        groups.setdefault(key, []).append((float(row["d"]), float(row["tau"])))
    report = []
    for key in sorted(groups):
        pts = sorted(groups[key])
        entry = {"p_x": key[0], "p_y": key[1], "p_z": key[2], "p_s": key[3],
                 "fits": {}}
        for m in models:
            try:
                res = fitting.fit(m, pts)
                entry["fits"][m] = {"params": list(res.params), "rmse": res.rmse}
            except (fitting.FitError, ValueError) as exc:
                entry["fits"][m] = {"error": str(exc)}
        ok = {m: f["rmse"] for m, f in entry["fits"].items() if "rmse" in f}
        entry["winner"] = min(ok, key=ok.get) if ok else None
        report.append(entry)
    _write_report(args.out, {"input": os.path.basename(args.input),
                             "models": models, "groups": report})
    for entry in report:
        print(f"p_s={entry['p_s']:g}: winner={entry['winner']} " +
              " ".join(f"{m}_rmse={f.get('rmse', math.nan):.5g}"
                       for m, f in entry["fits"].items()))
    return 0


def cmd_analyze_crossing(args) -> int:
    rows = _read_csv(args.input, ["d"])
    axis = args.axis or _detect_axis(rows)
    value = args.value
    if value not in rows[0]:
        raise ValueError(f"{args.input}: missing required columns ['{value}']")
    curves = _series_by_distance(rows, axis, value)
    res = fitting.crossing_point(curves)
    _write_report(args.out, {"input": os.path.basename(args.input),
                             "axis": axis, "value": value,
                             "p_c": res.p_c, "err": res.err,
                             "pair_crossings": list(res.pair_crossings)})
    print(f"crossing {axis} = {res.p_c:.5f} +- {res.err:.5f} "
          f"({len(res.pair_crossings)} pairs)")
    return 0


def cmd_analyze_collapse(args) -> int:
    rows = _read_csv(args.input, ["d"])
    axis = args.axis or _detect_axis(rows)
    value = args.value
    if value not in rows[0]:
        raise ValueError(f"{args.input}: missing required columns ['{value}']")
    data = _series_by_distance(rows, axis, value)
    if args.scan_pc and args.scan_nu:
        pcs = np.arange(*[float(v) for v in args.scan_pc.split(":")])
        nus = np.arange(*[float(v) for v in args.scan_nu.split(":")])
        pc, nu, score, grid = fitting.collapse_scan(data, pcs, nus, args.beta)
        _write_report(args.out, {"best_p_c": pc, "best_nu": nu, "score": score})
        if args.grid_out:
            rows_out = [(pcs[i], nus[j], grid[i, j])
                        for i in range(len(pcs)) for j in range(len(nus))]
            write_csv(args.grid_out, ["p_c", "nu", "score"], rows_out)
        print(f"best collapse: p_c={pc:.5f} nu={nu:.5f} score={score:.6g}")
        return 0
    if args.pc is None:
        raise ValueError("either --pc or both --scan-pc/--scan-nu are required")
    score = fitting.collapse_quality(data, args.pc, args.nu, args.beta)
    _write_report(args.out, {"p_c": args.pc, "nu": args.nu, "beta": args.beta,
                             "score": score})
    print(f"collapse score at (p_c={args.pc:g}, nu={args.nu:g}, "
          f"beta={args.beta:g}): {score:.6g}")
    return 0


def cmd_analyze_delta(args) -> int:
    rows = _read_csv(args.input, ["d", "p"])
    samples: dict[int, list[float]] = {}
    for row in rows:
        samples.setdefault(int(float(row["d"])), []).append(float(row["p"]))
    b, err, res = fitting.delta_exponent(
        {d: np.array(v) for d, v in samples.items()})
    _write_report(args.out, {"one_over_nu": b, "err": err,
                             "fit_params": list(res.params), "rmse": res.rmse})
    print(f"1/nu = {b:.4f} +- {err:.4f}")
    return 0


def _write_report(path, payload: dict):
    if not path:
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- analytic tables ----------------------------------------------------------------


def cmd_analytic(args) -> int:
    sub = args.table
    if sub == "yfail":
        ds = _parse_int_list(args.d)
        pys = _parse_float_list(args.py)
        rows = [(d, py, analytics.y_fail_probability(d, py),
                 analytics.y_success_probability(d, py))
                for d in ds for py in pys]
        header = ["d", "p_y", "fail", "success"]
    elif sub == "threshold":
        pss = _parse_float_list(args.ps)
        alphas = tuple(_parse_float_list(args.alphas)) if args.alphas else \
            percolation.FITTED_REINTEGRATION_ALPHAS
        rows = [(ps, percolation.threshold_x(ps, args.mode, alphas))
                for ps in pss]
        header = ["p_s", "p_x_c"]
    else:  # lifetime
        ds = _parse_int_list(args.d)
        if args.pm is not None:
            rows = [(d, args.pm, analytics.lifetime_ps0(d, args.pm)) for d in ds]
            header = ["d", "p_m", "tau_ps0"]
        elif args.py is not None:
            pys = _parse_float_list(args.py)
            rows = [(d, py, analytics.lifetime_ps1(d, py)) for d in ds for py in pys]
            header = ["d", "p_y", "tau_ps1"]
        else:
            raise ValueError("analytic lifetime needs --pm (no stabilizers) "
                             "or --py (full restoration)")
    if args.out:
        write_csv(args.out, header, rows)
        print(args.out)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(format(v, ".10g") if isinstance(v, float) else str(v)
                           for v in row))
    return 0


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfperc",
        description="Measurement-only surface-code dynamics: simulation sweeps, "
                    "percolation analysis and analytic tables.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="master seed; identical seeds give byte-identical CSVs")
        p.add_argument("--trials", type=int, default=None,
                       help="Monte Carlo realizations per grid point")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: SURFPERC_THREADS or all cores); "
                            "does not affect results")
        p.add_argument("--config", default=None,
                       help="JSON file of option defaults; explicit flags win")
        p.add_argument("--verbose", action="store_true",
                       help="progress lines on stderr")

    p = sub.add_parser("single-round",
                       help="success rates after one round of Pauli measurements")
    add_common(p)
    p.add_argument("--d", default=None,
                   help="distances, e.g. 3,5,7 or 3:13:2")
    p.add_argument("--px", type=float, default=None,
                   help="per-qubit probability of an X measurement")
    p.add_argument("--py", type=float, default=None,
                   help="per-qubit probability of a Y measurement")
    p.add_argument("--pz", type=float, default=None,
                   help="per-qubit probability of a Z measurement")
    p.add_argument("--mix", default=None,
                   help="three fractions of the total rate, e.g. 0.72,0.10,0.18; "
                        "combine with --sweep pm=...")
    p.add_argument("--sweep", default=None,
                   help="axis sweep, e.g. pz=0:1:0.02 or pm=0:1:0.05")
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--crosscheck", action="store_true",
                   help="X-only runs: verify every trial against the "
                        "connectivity oracle")
    p.set_defaults(func=cmd_single_round)

    p = sub.add_parser("dynamics",
                       help="lifetime of the logical pair under repeated "
                            "Pauli + stabilizer rounds")
    add_common(p)
    p.add_argument("--d", default=None, help="distances, e.g. 3:13:2")
    p.add_argument("--px", type=float, default=None)
    p.add_argument("--py", type=float, default=None)
    p.add_argument("--pz", type=float, default=None)
    p.add_argument("--unbiased", type=float, default=None,
                   help="total rate p_m split equally over X, Y, Z")
    p.add_argument("--ps", default=None,
                   help="stabilizer measurement probabilities, e.g. 0,0.25,0.5")
    p.add_argument("--max-rounds", type=int, default=None,
                   help="round cap; capped trials are reported as censored")
    p.add_argument("--families", default=None,
                   help="which generators are measured: both|plaquettes|stars")
    p.add_argument("--preset", default=None, choices=sorted(montecarlo.PRESETS),
                   help="run a named experiment preset instead of explicit flags")
    p.add_argument("--out", default=None)
    p.add_argument("--out-dir", default=None, help="output directory for presets")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("experiment", help="run a named experiment preset")
    add_common(p)
    p.add_argument("--preset", required=True, choices=sorted(montecarlo.PRESETS))
    p.add_argument("--d", default=None, help="override preset distances")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_experiment)

    pa = sub.add_parser("analyze", help="fits, crossings, collapse and exponents "
                                        "on CSV produced by this tool")
    asub = pa.add_subparsers(dest="analysis", required=True)

    p = asub.add_parser("fit", help="lifetime model fits per parameter group")
    p.add_argument("input", help="dynamics CSV")
    p.add_argument("--models", default="log,exp",
                   help="comma list from log,exp,power,linear")
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_analyze_fit)

    p = asub.add_parser("crossing", help="crossing point of per-distance curves")
    p.add_argument("input", help="single-round or survival CSV")
    p.add_argument("--axis", default=None, help="probability column (autodetected)")
    p.add_argument("--value", default="R_xbar", help="value column (default R_xbar)")
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_analyze_crossing)

    p = asub.add_parser("collapse", help="finite-size scaling collapse score")
    p.add_argument("input")
    p.add_argument("--pc", type=float, default=None, help="critical point")
    p.add_argument("--nu", type=float, required=True, help="correlation exponent")
    p.add_argument("--beta", type=float, required=True, help="order exponent")
    p.add_argument("--axis", default=None)
    p.add_argument("--value", default="R_xbar")
    p.add_argument("--scan-pc", default=None, help="grid start:stop:step")
    p.add_argument("--scan-nu", default=None, help="grid start:stop:step")
    p.add_argument("--grid-out", default=None, help="CSV of the scanned scores")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze_collapse)

    p = asub.add_parser("delta", help="width exponent of first-loss samples")
    p.add_argument("input", help="bisection CSV with columns d,sample,p")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze_delta)

    p = sub.add_parser("analytic", help="closed-form tables")
    p.add_argument("table", choices=("yfail", "threshold", "lifetime"))
    p.add_argument("--d", default="2", help="distances")
    p.add_argument("--py", default=None, help="Y-measurement probabilities")
    p.add_argument("--pm", type=float, default=None, help="total Pauli rate")
    p.add_argument("--ps", default="1", help="stabilizer probabilities")
    p.add_argument("--mode", default="ansatz", choices=("ansatz", "meanfield"),
                   help="threshold model")
    p.add_argument("--alphas", default=None,
                   help="reintegration coefficients, e.g. 0.5,-0.375,0.875")
    p.add_argument("--out", default=None, help="write a CSV instead of stdout")
    p.set_defaults(func=cmd_analytic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail_usage(str(exc))
    except (fitting.FitError, RuntimeError) as exc:
        return _fail_runtime(str(exc))


if __name__ == "__main__":
    sys.exit(main())
