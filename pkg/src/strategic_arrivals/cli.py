"""Command-line entry point.

    strategic-arrivals <command> --config scenario.json [--out DIR] [--grid N] [--tolerance X]

Exit status is 0 on success, 1 on solver failure or a failed verification
(``error.json`` or ``regret.json`` explains why) and 2 on a bad config.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, load_config
from .core_model import MWeight, PriceLadder, check_assumptions, type_grid
from .errors import ConfigError, EmptyQueueError, StrategicArrivalsError
from .multi_queue import (
    EquilibriumProfile,
    arrival_time,
    joining_cost,
    solve_thresholds,
)
from .revenue_opt import optimize_prices
from .single_queue import continuum_revenue, ne_arrival_time, ne_grade
from .verification import verify_epsilon_ne

COMMANDS = ("solve-single", "solve-multi", "optimize", "sweep-price", "verify", "grades")


def _clean(obj):
    """Make a structure JSON-safe: non-finite floats become strings, arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_clean(data), indent=2) + "\n")


def write_csv(path: Path, header, rows) -> None:
    def fmt(x):
        if isinstance(x, str):
            return x
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            return str(int(x))
        return "%.9g" % float(x)

    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def _capture(fn, *args, **kwargs):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = fn(*args, **kwargs)
    return out, sorted({str(w.message) for w in caught})


def _curve_types(cfg: ScenarioConfig, grid):
    return type_grid(cfg.model, grid or cfg.solver["curve_types"])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_solve_single(cfg: ScenarioConfig, out: Path, args) -> int:
    model = cfg.model
    v = _curve_types(cfg, args.grid)
    T = np.asarray(ne_arrival_time(model, v))
    G = np.asarray(model.cdf(v))
    rank = G if model.n.increasing else 1.0 - G
    cost = model.N * rank + np.asarray(model.n_value(v)) * np.asarray(model.g(T))
    write_csv(out / "single_profile.csv", ["v", "T", "cost"], zip(v, T, cost))
    write_json(out / "single_summary.json", {
        "command": "solve-single",
        "N": model.N,
        "support": [model.A, model.B],
        "evaluated_from": model.v_min,
        "T_max": float(np.max(T)),
        "T_at_B": float(ne_arrival_time(model, model.B)),
        "samples": int(v.size),
    })
    return 0


def _require_prices(cfg: ScenarioConfig):
    if cfg.prices is not None:
        return cfg.prices
    if cfg.optimize:
        if len(cfg.L) != 1:
            raise ConfigError("queues.L: exactly one L is needed to solve an optimized ladder",
                              field="queues.L")
        sol = optimize_prices(cfg.model, cfg.L[0], grid=cfg.solver["dp_grid"],
                              sweeps=cfg.solver["refine_sweeps"], enforce_gap=cfg.solver["enforce_gap"])
        return sol.prices
    if cfg.L == (1,) or not cfg.L:
        return PriceLadder((0.0,))
    raise ConfigError("queues.prices: an explicit price list or \"optimize\" is required",
                      field="queues.prices")


def cmd_solve_multi(cfg: ScenarioConfig, out: Path, args) -> int:
    model = cfg.model
    prices = _require_prices(cfg)
    profile, warns = _capture(solve_thresholds, model, prices)
    write_json(out / "profile.json", {"command": "solve-multi", **profile.to_dict(), "warnings": warns})
    v = _curve_types(cfg, args.grid)
    L = profile.L
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        T = [np.asarray(arrival_time(profile, l, v)) for l in range(L)]
        c = [np.asarray(joining_cost(profile, l, v)) for l in range(L)]
    queue = np.searchsorted(np.asarray(profile.thresholds), v, side="left") - 1
    queue = np.clip(queue, 0, L - 1)
    header = ["v", "queue"] + [f"T_{l}" for l in range(L)] + [f"c_{l}" for l in range(L)]
    rows = ([v[i], int(queue[i])] + [T[l][i] for l in range(L)] + [c[l][i] for l in range(L)]
            for i in range(v.size))
    write_csv(out / "curves.csv", header, rows)
    return 0


def cmd_optimize(cfg: ScenarioConfig, out: Path, args) -> int:
    if not cfg.L:
        raise ConfigError("queues.L: required for optimize", field="queues.L")
    grid = args.grid or cfg.solver["dp_grid"]
    sols = []
    for L in cfg.L:
        sol, warns = _capture(optimize_prices, cfg.model, L, grid=grid,
                              sweeps=cfg.solver["refine_sweeps"], enforce_gap=cfg.solver["enforce_gap"])
        sols.append((sol, warns))
    write_json(out / "optimize.json", {
        "command": "optimize",
        "solutions": [dict(s.to_dict(), warnings=w) for s, w in sols],
    })
    width = max(cfg.L) - 1
    header = (["L", "revenue"] + [f"v_{k}" for k in range(1, width + 1)]
              + [f"P_{k}" for k in range(1, width + 1)])
    rows = []
    for s, _ in sols:
        inner = list(s.thresholds[1:-1])
        ps = list(s.prices.prices[1:])
        pad = [""] * (width - len(inner))
        rows.append([s.L, s.revenue] + inner + pad + ps + pad)
    write_csv(out / "table.csv", header, rows)
    return 0


def sweep_two_queue(model, prices_grid, delta=None):
    """(P, v_1, revenue, status) along a sweep of the single paid price."""
    if delta is not None:
        model = dataclasses.replace(model, m=MWeight(model.m.kind, delta))
    rows = []
    for P in prices_grid:
        try:
            prof = solve_thresholds(model, (0.0, float(P)), warn=False)
            v1 = prof.thresholds[1]
            rows.append((float(P), v1, float(P) * prof.occupancies[1], "ok"))
        except EmptyQueueError as exc:
            if exc.queue == 1:
                rows.append((float(P), model.B, 0.0, "paid-queue-empty"))
            else:
                rows.append((float(P), model.A, float(P), "free-queue-empty"))
    return rows


def cmd_sweep_price(cfg: ScenarioConfig, out: Path, args) -> int:
    if cfg.sweep is None:
        raise ConfigError("queues.sweep: required for sweep-price", field="queues.sweep")
    s = cfg.sweep
    num = args.grid or s["num"]
    grid = np.linspace(s["start"], s["stop"], num)
    deltas = s["deltas"] if s["deltas"] is not None else [None]
    rows = []
    summary = []
    for d in deltas:
        part = sweep_two_queue(cfg.model, grid, d)
        dv = cfg.model.m.delta if d is None else d
        rows.extend([dv] + list(r) for r in part)
        rev = [r[2] for r in part]
        k = int(np.argmax(rev))
        summary.append({"delta": dv, "best_price": part[k][0], "best_revenue": rev[k],
                        "saturated_at": next((r[0] for r in part if r[3] == "paid-queue-empty"), None)})
    write_csv(out / "sweep.csv", ["delta", "P", "v1", "revenue", "status"], rows)
    write_json(out / "sweep.json", {"command": "sweep-price", "summary": summary})
    return 0


def _load_profile(cfg: ScenarioConfig, path: str) -> EquilibriumProfile:
    try:
        data = json.loads(Path(path).read_text())
        prices = PriceLadder(tuple(data["prices"]))
        return EquilibriumProfile.from_thresholds(cfg.model, prices, data["thresholds"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"--profile: cannot use {path}: {exc}", field="--profile") from None


def cmd_verify(cfg: ScenarioConfig, out: Path, args) -> int:
    if args.profile:
        profile = _load_profile(cfg, args.profile)
        profile = dataclasses.replace(profile, assumptions=check_assumptions(
            cfg.model, profile.prices, profile))
    else:
        profile = solve_thresholds(cfg.model, _require_prices(cfg), warn=False)
    n_types = args.grid or cfg.solver["verify_types"]
    tol = args.tolerance if args.tolerance is not None else cfg.solver["tolerance"]
    report = verify_epsilon_ne(profile, types=n_types, times=cfg.solver["verify_times"], tolerance=tol)
    write_json(out / "regret.json", {"command": "verify", "profile": profile.to_dict(),
                                     **report.to_dict()})
    if not report.passed:
        print(f"verification failed: max regret {report.max_regret:.6g} at v={report.worst_type:.6g}"
              f" exceeds {report.tolerance:.6g}", file=sys.stderr)
        return 1
    return 0


def cmd_grades(cfg: ScenarioConfig, out: Path, args) -> int:
    if not cfg.grade_pricings:
        raise ConfigError("grades.pricing: required for grades", field="grades.pricing")
    model = cfg.model
    v = _curve_types(cfg, args.grid)
    cols = [np.asarray(ne_grade(model, p, v)) for p in cfg.grade_pricings]
    header = ["v"] + [f"w_{k}" for k in range(len(cols))]
    write_csv(out / "grades.csv", header, ([v[i]] + [c[i] for c in cols] for i in range(v.size)))
    revs = [continuum_revenue(model, p) for p in cfg.grade_pricings]
    spread = (max(revs) - min(revs)) / max(abs(max(revs)), 1e-300)
    write_json(out / "grades.json", {
        "command": "grades",
        "pricings": [dataclasses.asdict(p) for p in cfg.grade_pricings],
        "revenues": revs,
        "relative_spread": spread,
    })
    return 0


HANDLERS = {
    "solve-single": cmd_solve_single,
    "solve-multi": cmd_solve_multi,
    "optimize": cmd_optimize,
    "sweep-price": cmd_sweep_price,
    "verify": cmd_verify,
    "grades": cmd_grades,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strategic-arrivals",
        description="Equilibrium arrival profiles and revenue-maximizing priority prices.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--out", default=None, help="output directory (default: output.dir or ./out)")
    parser.add_argument("--grid", type=int, default=None,
                        help="main grid size: curve samples, DP grid, verify types or sweep points")
    parser.add_argument("--tolerance", type=float, default=None, help="regret tolerance for verify")
    parser.add_argument("--profile", default=None, help="verify: profile.json to check instead of solving")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.grid is not None and args.grid < 2:
        print("--grid must be at least 2", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(json.dumps(_clean(exc.to_dict())), file=sys.stderr)
        return 2
    out = Path(args.out or cfg.output.get("dir") or "out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        return HANDLERS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(json.dumps(_clean(exc.to_dict())), file=sys.stderr)
        return 2
    except StrategicArrivalsError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("equation", "queue", "iterations", "cycle_length"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        write_json(out / "error.json", err)
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
