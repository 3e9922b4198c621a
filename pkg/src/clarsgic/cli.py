"""Command-line entry point: ``clarsgic {path,select,baseline,simulate,sweep}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .cbf_model import AngularGrid, Scenario, build_dictionary, generate_snapshot, trial_rng
from .cd_lasso import DEFAULT_EPSILON, DEFAULT_L, grid_path, grid_scores, select_from_grid
from .clars_path import compute_path
from .exceptions import ClarsGicError, ConfigError
from .experiments import AXES, run_monte_carlo, sweep
from .model_select import GAMMAS, penalty_sequence, select_model

log = logging.getLogger("clarsgic")

CONFIG_KEYS = ("n_sensors", "grid_spacing_deg", "doas_deg", "powers", "snr_db", "gamma", "seed", "trials")

DEFAULTS = {
    "n_sensors": 40,
    "grid_spacing_deg": 2.0,
    "doas_deg": [-8.0, 6.0, 24.0],
    "powers": [0.7, 0.9, 1.0],
    "snr_db": 15.0,
    "gamma": "all",
    "seed": 0,
    "trials": 1000,
}


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def load_config(path: str | None) -> dict:
    """Read a YAML/JSON scenario file; unknown keys are rejected."""
    if path is None:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}; allowed: {list(CONFIG_KEYS)}")
    return data


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(load_config(args.config))
    overrides = {
        "n_sensors": args.n_sensors,
        "grid_spacing_deg": args.grid_spacing,
        "doas_deg": args.doas,
        "powers": args.powers,
        "snr_db": args.snr_db,
        "gamma": args.gamma,
        "seed": args.seed,
        "trials": args.trials,
    }
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    cfg["n_sensors"] = int(cfg["n_sensors"])
    cfg["grid_spacing_deg"] = float(cfg["grid_spacing_deg"])
    cfg["doas_deg"] = [float(d) for d in cfg["doas_deg"]]
    cfg["powers"] = [float(s) for s in cfg["powers"]]
    cfg["snr_db"] = float(cfg["snr_db"])
    cfg["seed"] = int(cfg["seed"])
    cfg["trials"] = int(cfg["trials"])
    g = str(cfg["gamma"])
    if g not in ("0", "1", "2", "all"):
        raise ConfigError(f"gamma must be 0, 1, 2 or all, got {cfg['gamma']!r}")
    cfg["gamma"] = g if g == "all" else int(g)
    cfg["method"] = args.method
    cfg["residual"] = args.residual
    cfg["grid_L"] = args.grid_L
    cfg["epsilon"] = args.epsilon
    return cfg


def gammas_of(cfg) -> tuple[int, ...]:
    return GAMMAS if cfg["gamma"] == "all" else (cfg["gamma"],)


def methods_of(cfg) -> tuple[str, ...]:
    return {"clars": ("clars",), "grid": ("grid",), "both": ("clars", "grid")}[cfg["method"]]


def scenario_of(cfg) -> Scenario:
    try:
        return Scenario(
            n_sensors=cfg["n_sensors"],
            doas_deg=tuple(cfg["doas_deg"]),
            powers=tuple(cfg["powers"]),
            snr_db=cfg["snr_db"],
            grid=AngularGrid(cfg["grid_spacing_deg"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def header_lines(cfg) -> list[str]:
    return [
        f"# clarsgic {__version__}",
        f"# config: {json.dumps(cfg, sort_keys=True)}",
        f"# seed: {cfg['seed']}",
    ]


def _num(x) -> str:
    # repr is the shortest round-trip decimal form
    return repr(float(x))


def _problem(args, cfg):
    """Return ``(X, y, angles_deg or None)`` from ``--data`` or a generated snapshot."""
    if args.data:
        with np.load(args.data) as f:
            X = np.asarray(f["X"], dtype=np.complex128)
            y = np.asarray(f["y"], dtype=np.complex128).reshape(-1)
        return X, y, None
    scen = scenario_of(cfg)
    X = build_dictionary(scen.grid, scen.n_sensors)
    snap = generate_snapshot(scen, trial_rng(cfg["seed"], args.trial), X)
    return X, snap.y, scen.grid.angles_deg


def _emit(args, text: str, name: str):
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    sys.stdout.write(text)


def _csv_text(head: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("\n".join(head) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _json_text(head_cfg, body) -> str:
    doc = {"version": __version__, "config": head_cfg, "seed": head_cfg["seed"], **body}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def cmd_path(args, cfg) -> int:
    X, y, _ = _problem(args, cfg)
    path = compute_path(X, y)
    p = X.shape[1]
    if args.format == "csv":
        rows = [["k", "lambda", "event", "variable", "active_set"] + [f"abs_beta_{j}" for j in range(p)]]
        for kn in path.knots:
            rows.append([kn.index, _num(kn.lam), kn.event, "" if kn.variable is None else kn.variable,
                         " ".join(map(str, kn.active_set))] + [_num(v) for v in np.abs(kn.beta)])
        text = _csv_text(header_lines(cfg) + [f"# termination: {path.termination}"], rows)
    else:
        text = _json_text(cfg, {
            "termination": path.termination,
            "K_requested": path.K_requested,
            "knots": [{"k": kn.index, "lambda": kn.lam, "event": kn.event, "variable": kn.variable,
                       "active_set": list(kn.active_set), "abs_beta": np.abs(kn.beta).tolist()}
                      for kn in path.knots],
        })
    _emit(args, text, f"path.{args.format}")
    return 0


def _selection_body(sel, angles, trace):
    body = {
        "gamma": sel.gamma,
        "k_hat": sel.k_hat,
        "active_set_hat": [int(j) for j in sel.active_set_hat],
        "magnitudes": [float(abs(sel.beta_hat[j])) for j in sel.active_set_hat],
        "scores": trace,
    }
    if angles is not None:
        body["doas_deg"] = [float(angles[j]) for j in sel.active_set_hat]
    return body


def cmd_select(args, cfg) -> int:
    X, y, angles = _problem(args, cfg)
    path = compute_path(X, y)
    out = []
    for g in gammas_of(cfg):
        sel = select_model(path, X, y, g, cfg["residual"])
        trace = [{"knot": i, "k": int(k), "lambda": path.knots[i].lam, "gic": float(s)}
                 for i, (k, s) in enumerate(zip(sel.orders, sel.scores))]
        out.append(_selection_body(sel, angles, trace))
    if args.format == "csv":
        rows = [["gamma", "knot", "k", "lambda", "gic"]]
        head = header_lines(cfg)
        for b in out:
            desc = f"# gamma={b['gamma']} k_hat={b['k_hat']} active_set={b['active_set_hat']}"
            if "doas_deg" in b:
                desc += f" doas_deg={b['doas_deg']}"
            head.append(desc + f" magnitudes={[_num(m) for m in b['magnitudes']]}")
            rows += [[b["gamma"], t["knot"], t["k"], _num(t["lambda"]), _num(t["gic"])] for t in b["scores"]]
        text = _csv_text(head, rows)
    else:
        text = _json_text(cfg, {"selections": out})
    _emit(args, text, f"select.{args.format}")
    return 0


def cmd_baseline(args, cfg) -> int:
    X, y, angles = _problem(args, cfg)
    n, p = X.shape
    sol = grid_path(X, y, cfg["grid_L"], cfg["epsilon"])
    out = []
    for g in gammas_of(cfg):
        sel = select_from_grid(sol, n, g)
        scores = grid_scores(sol, n, penalty_sequence(n, p, g))
        trace = [{"l": l, "k": int(k), "lambda": float(lam), "gic": float(s)}
                 for l, (k, lam, s) in enumerate(zip(sol.nnz, sol.grid.values, scores))]
        out.append(_selection_body(sel, angles, trace))
    if args.format == "csv":
        rows = [["gamma", "l", "nnz", "lambda", "gic"]]
        head = header_lines(cfg)
        for b in out:
            head.append(f"# gamma={b['gamma']} k_hat={b['k_hat']} active_set={b['active_set_hat']}")
            rows += [[b["gamma"], t["l"], t["k"], _num(t["lambda"]), _num(t["gic"])] for t in b["scores"]]
        text = _csv_text(head, rows)
    else:
        text = _json_text(cfg, {"selections": out})
    _emit(args, text, f"baseline.{args.format}")
    return 0


CSV_FIELDS = ["axis", "axis_value", "method", "gamma", "PD", "PER", "MSE", "M", "failures", "seed"]


def report_rows(reports) -> list[list]:
    rows = [CSV_FIELDS]
    for rep in reports:
        for s in rep.summaries:
            rows.append([rep.axis or "", "" if rep.axis_value is None else rep.axis_value, s.method, s.gamma,
                         _num(s.pd), _num(s.per), _num(s.mse), rep.M, s.failures, rep.master_seed])
    return rows


def _write_reports(args, cfg, reports, stem: str) -> None:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    csv_text = _csv_text(header_lines(cfg), report_rows(reports))
    json_text = _json_text(cfg, {"reports": [r.to_dict(include_records=args.records) for r in reports]})
    (out / f"{stem}.csv").write_text(csv_text)
    (out / f"{stem}.json").write_text(json_text)


def _print_table(reports) -> None:
    print(f"{'axis':>10} {'value':>7} {'method':>6} {'gamma':>5} {'PD':>6} {'PER':>6} {'MSE':>10} {'fail':>5}")
    for rep in reports:
        for s in rep.summaries:
            v = "" if rep.axis_value is None else rep.axis_value
            print(f"{rep.axis or '-':>10} {v!s:>7} {s.method:>6} {s.gamma:>5} {s.pd:6.3f} {s.per:6.3f} "
                  f"{s.mse:10.4g} {s.failures:>5}")


def cmd_simulate(args, cfg) -> int:
    rep = run_monte_carlo(scenario_of(cfg), cfg["trials"], methods_of(cfg), cfg["seed"], gammas_of(cfg),
                          workers=args.workers, L=cfg["grid_L"], epsilon=cfg["epsilon"],
                          residual=cfg["residual"], keep_records=args.records)
    _write_reports(args, cfg, [rep], "simulate")
    _print_table([rep])
    return 0 if rep.failures == 0 else 1


def cmd_sweep(args, cfg) -> int:
    if args.axis is None or args.values is None:
        raise ConfigError("sweep needs --axis and --values")
    cfg["axis"] = args.axis
    cfg["values"] = args.values
    values = [int(v) if args.axis != "snr_db" else v for v in args.values]
    reps = sweep(scenario_of(cfg), args.axis, values, cfg["trials"], cfg["seed"], methods_of(cfg),
                 gammas_of(cfg), workers=args.workers, L=cfg["grid_L"], epsilon=cfg["epsilon"],
                 residual=cfg["residual"], keep_records=args.records)
    _write_reports(args, cfg, reps, "sweep")
    _print_table(reps)
    return 0 if all(r.failures == 0 for r in reps) else 1


COMMANDS = {
    "path": cmd_path,
    "select": cmd_select,
    "baseline": cmd_baseline,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON scenario file")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--gamma", choices=["0", "1", "2", "all"])
    common.add_argument("--method", choices=["clars", "grid", "both"], default="clars")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--n-sensors", dest="n_sensors", type=int)
    common.add_argument("--grid-spacing", dest="grid_spacing", type=float)
    common.add_argument("--doas", type=_float_list, help="comma-separated DoAs in degrees")
    common.add_argument("--powers", type=_float_list, help="comma-separated source magnitudes")
    common.add_argument("--snr-db", dest="snr_db", type=float)
    common.add_argument("--residual", choices=["path", "refit"], default="path",
                        help="residual used in the c-LARS-GIC variance estimate")
    common.add_argument("--grid-L", dest="grid_L", type=int, default=DEFAULT_L)
    common.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    common.add_argument("--trial", type=int, default=0, help="trial index of the snapshot (path/select/baseline)")
    common.add_argument("--data", help=".npz file with arrays X and y instead of a generated snapshot")
    common.add_argument("--records", action="store_true", help="include per-trial records in JSON output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="clarsgic", description=__doc__)
    parser.add_argument("--version", action="version", version=f"clarsgic {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("path", parents=[common], help="dump the Lasso knots of one snapshot")
    sub.add_parser("select", parents=[common], help="c-LARS-GIC selection on one snapshot")
    sub.add_parser("baseline", parents=[common], help="grid-based GIC selection on one snapshot")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo PD/PER/MSE")
    sw = sub.add_parser("sweep", parents=[common], help="Monte Carlo over one scenario axis")
    sw.add_argument("--axis", choices=AXES)
    sw.add_argument("--values", type=_float_list, help="comma-separated axis values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ClarsGicError, OSError, KeyError, ValueError) as exc:
        print(f"clarsgic {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
