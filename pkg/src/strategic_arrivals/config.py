"""JSON scenario files: loading, validation and construction of model objects."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .core_model import CostModel, MWeight, NWeight, PriceLadder, TypeDistribution, WaitCost
from .errors import ConfigError, DomainError
from .single_queue import GradePricing

_TOP_KEYS = {"distribution", "N", "wait_cost", "n_weight", "m_weight", "queues", "grades",
             "solver", "output"}

SOLVER_DEFAULTS = {
    "curve_types": 401,
    "dp_grid": 2001,
    "refine_sweeps": 3,
    "enforce_gap": True,
    "verify_types": 401,
    "verify_times": 4001,
    "tolerance": None,
}


def _fail(msg, path, value=None):
    raise ConfigError(f"{path}: {msg}", field=path, value=value)


def _block(doc, key, path, allowed, required=()):
    blk = doc.get(key)
    if not isinstance(blk, dict):
        _fail("must be an object", path, blk)
    unknown = sorted(set(blk) - set(allowed))
    if unknown:
        _fail(f"unknown key(s) {unknown}", f"{path}.{unknown[0]}", None)
    for r in required:
        if r not in blk:
            _fail("required key missing", f"{path}.{r}")
    return blk


def _number(value, path, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail("must be a finite number", path, value)
    if positive and not value > 0:
        _fail("must be positive", path, value)
    if nonneg and value < 0:
        _fail("must be non-negative", path, value)
    return float(value)


def _int(value, path, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        _fail(f"must be an integer >= {minimum}", path, value)
    return value


def _numbers(value, path):
    if not isinstance(value, list) or not value:
        _fail("must be a non-empty list of numbers", path, value)
    return [_number(x, f"{path}[{i}]") for i, x in enumerate(value)]


def _kind(blk, path, kinds):
    kind = blk.get("kind")
    if kind not in kinds:
        _fail(f"kind must be one of {sorted(kinds)}", f"{path}.kind", kind)
    return kind


def _wrap(path, build):
    try:
        return build()
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}", field=path) from None


@dataclass(frozen=True)
class ScenarioConfig:
    model: CostModel
    prices: Optional[PriceLadder] = None
    optimize: bool = False
    L: tuple = ()
    sweep: Optional[dict] = None
    grade_pricings: tuple = ()
    solver: dict = field(default_factory=lambda: dict(SOLVER_DEFAULTS))
    output: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False, compare=False)


def parse_config(doc: Any) -> ScenarioConfig:
    """Validate a decoded JSON document and build the scenario."""
    if not isinstance(doc, dict):
        _fail("top level must be an object", "$", None)
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        _fail("unknown top-level key", unknown[0])

    d = _block(doc, "distribution", "distribution", {"kind", "A", "B", "breakpoints", "cdf"}, ("kind",))
    kind = _kind(d, "distribution", {"uniform", "tabulated"})
    if kind == "uniform":
        for k in ("A", "B"):
            if k not in d:
                _fail("required key missing", f"distribution.{k}")
        A = _number(d["A"], "distribution.A", nonneg=True)
        B = _number(d["B"], "distribution.B")
        dist = _wrap("distribution", lambda: TypeDistribution.uniform(A, B))
    else:
        bp = _numbers(d.get("breakpoints"), "distribution.breakpoints")
        cv = _numbers(d.get("cdf"), "distribution.cdf")
        dist = _wrap("distribution", lambda: TypeDistribution.tabulated(bp, cv))

    if "N" not in doc:
        _fail("required key missing", "N")
    N = _int(doc["N"], "N")

    wait = WaitCost()
    if "wait_cost" in doc:
        w = _block(doc, "wait_cost", "wait_cost", {"kind", "r", "times", "costs"})
        wk = w.get("kind", "power")
        if wk not in ("power", "tabulated"):
            _fail("kind must be power or tabulated", "wait_cost.kind", wk)
        if wk == "power":
            r = _number(w.get("r", 1.0), "wait_cost.r", positive=True)
            wait = _wrap("wait_cost", lambda: WaitCost("power", r))
        else:
            ts = _numbers(w.get("times"), "wait_cost.times")
            cs = _numbers(w.get("costs"), "wait_cost.costs")
            wait = _wrap("wait_cost", lambda: WaitCost("tabulated", times=tuple(ts), costs=tuple(cs)))

    n = NWeight()
    if "n_weight" in doc:
        nb = _block(doc, "n_weight", "n_weight", {"kind", "coef", "exponent", "points", "values"})
        nk = _kind(nb, "n_weight", {"identity", "power", "tabulated"})
        if nk == "power":
            c = _number(nb.get("coef", 1.0), "n_weight.coef", positive=True)
            e = _number(nb.get("exponent", 1.0), "n_weight.exponent")
            n = _wrap("n_weight", lambda: NWeight("power", c, e))
        elif nk == "tabulated":
            pts = _numbers(nb.get("points"), "n_weight.points")
            vals = _numbers(nb.get("values"), "n_weight.values")
            n = _wrap("n_weight", lambda: NWeight("tabulated", points=tuple(pts), values=tuple(vals)))

    m = MWeight("paper-log", 0.05)
    if "m_weight" in doc:
        mb = _block(doc, "m_weight", "m_weight", {"kind", "delta", "points", "values"})
        mk = _kind(mb, "m_weight", {"paper-log", "paper-linear", "tabulated"})
        if mk == "tabulated":
            pts = _numbers(mb.get("points"), "m_weight.points")
            vals = _numbers(mb.get("values"), "m_weight.values")
            m = _wrap("m_weight", lambda: MWeight("tabulated", points=tuple(pts), values=tuple(vals)))
        else:
            delta = _number(mb.get("delta", 0.05), "m_weight.delta", nonneg=True)
            m = _wrap("m_weight", lambda: MWeight(mk, delta))

    model = _wrap("model", lambda: CostModel(dist, N, wait, n, m))

    prices, optimize, Ls, sweep = None, False, (), None
    if "queues" in doc:
        q = _block(doc, "queues", "queues", {"L", "prices", "sweep"})
        if "L" in q:
            if isinstance(q["L"], list):
                if not q["L"]:
                    _fail("must not be empty", "queues.L", q["L"])
                Ls = tuple(_int(x, f"queues.L[{i}]") for i, x in enumerate(q["L"]))
            else:
                Ls = (_int(q["L"], "queues.L"),)
        if "prices" in q:
            if q["prices"] == "optimize":
                optimize = True
            else:
                ps = _numbers(q["prices"], "queues.prices")
                prices = _wrap("queues.prices", lambda: PriceLadder(tuple(ps)))
                if Ls and Ls != (prices.L,):
                    _fail(f"L={Ls} disagrees with {prices.L} listed prices", "queues.L", q.get("L"))
                Ls = (prices.L,)
        if "sweep" in q:
            s = _block(q, "sweep", "queues.sweep", {"start", "stop", "num", "deltas"},
                       ("start", "stop", "num"))
            start = _number(s["start"], "queues.sweep.start", positive=True)
            stop = _number(s["stop"], "queues.sweep.stop", positive=True)
            if not stop > start:
                _fail("must exceed start", "queues.sweep.stop", s["stop"])
            num = _int(s["num"], "queues.sweep.num", minimum=2)
            deltas = s.get("deltas")
            if deltas is not None:
                deltas = [_number(x, f"queues.sweep.deltas[{i}]", nonneg=True)
                          for i, x in enumerate(_numbers(deltas, "queues.sweep.deltas"))]
                if model.m.kind == "tabulated":
                    _fail("delta sweeps need a paper-log or paper-linear m_weight",
                          "queues.sweep.deltas")
            sweep = {"start": start, "stop": stop, "num": num, "deltas": deltas}

    pricings = ()
    if "grades" in doc:
        g = _block(doc, "grades", "grades", {"pricing"}, ("pricing",))
        if not isinstance(g["pricing"], list) or not g["pricing"]:
            _fail("must be a non-empty list", "grades.pricing", g["pricing"])
        out = []
        for i, spec in enumerate(g["pricing"]):
            path = f"grades.pricing[{i}]"
            if not isinstance(spec, dict):
                _fail("must be an object", path, spec)
            extra = sorted(set(spec) - {"kind", "P_max", "k", "grades", "prices"})
            if extra:
                _fail("unknown key", f"{path}.{extra[0]}")
            pk = _kind(spec, path, {"power", "tabulated"})
            if pk == "power":
                pm = _number(spec.get("P_max"), f"{path}.P_max", positive=True)
                k = _number(spec.get("k", 1.0), f"{path}.k", positive=True)
                out.append(_wrap(path, lambda: GradePricing("power", pm, k)))
            else:
                ws = _numbers(spec.get("grades"), f"{path}.grades")
                ps = _numbers(spec.get("prices"), f"{path}.prices")
                out.append(_wrap(path, lambda: GradePricing("tabulated", grades=tuple(ws),
                                                            prices=tuple(ps))))
        pricings = tuple(out)

    solver = dict(SOLVER_DEFAULTS)
    if "solver" in doc:
        sb = _block(doc, "solver", "solver", set(SOLVER_DEFAULTS))
        for key, val in sb.items():
            path = f"solver.{key}"
            if key == "enforce_gap":
                if not isinstance(val, bool):
                    _fail("must be true or false", path, val)
            elif key == "tolerance":
                if val is not None:
                    val = _number(val, path, positive=True)
            else:
                val = _int(val, path, minimum=2 if key != "refine_sweeps" else 0)
            solver[key] = val

    output = {"dir": None}
    if "output" in doc:
        ob = _block(doc, "output", "output", {"dir"})
        if "dir" in ob:
            if not isinstance(ob["dir"], str) or not ob["dir"]:
                _fail("must be a non-empty string", "output.dir", ob["dir"])
            output["dir"] = ob["dir"]

    return ScenarioConfig(model, prices, optimize, Ls, sweep, pricings, solver, output, doc)


def load_config(path) -> ScenarioConfig:
    """Read and validate a JSON scenario file; errors carry field path or line context."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}", field="$") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        ctx = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise ConfigError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          line=exc.lineno, context=ctx) from None
    return parse_config(doc)
