"""Threshold equilibrium of L strict-priority queues.

Queue l (price P_l) is joined by the types in (v_l, v_{l+1}].  The thresholds
solve, for l = 1..L-1,

    G(v_{l-1}) = G(v_{l+1}) - (P_l - P_{l-1}) m_{v_l} / N - n_{v_l} I(v_l, v_{l+1})

with v_0 = A and v_L = B.  Inside its queue a type arrives at
T_l(v) = g^{-1}(N I(v, v_{l+1})).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core_model import (
    AssumptionReport,
    CostModel,
    PriceLadder,
    _as_output,
    _prep,
    check_assumptions,
)
from .errors import (
    AssumptionWarning,
    DomainError,
    EmptyQueueError,
    NoEquilibriumError,
)

RESIDUAL_TOL = 1e-8
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class EquilibriumProfile:
    """Solved (or hypothesised) threshold profile for a price ladder."""

    model: CostModel
    prices: PriceLadder
    thresholds: tuple
    occupancies: tuple
    assumptions: Optional[AssumptionReport] = None

    @property
    def L(self) -> int:
        return self.prices.L

    @property
    def interior(self) -> tuple:
        return self.thresholds[1:-1]

    @classmethod
    def from_thresholds(cls, model: CostModel, prices, thresholds: Sequence[float]) -> "EquilibriumProfile":
        """Wrap arbitrary ordered thresholds (no equilibrium check); useful for perturbation studies."""
        if not isinstance(prices, PriceLadder):
            prices = PriceLadder(tuple(prices))
        th = _full_thresholds(model, prices.L, thresholds)
        G = np.asarray(model.cdf(np.asarray(th)))
        return cls(model, prices, th, tuple(float(x) for x in np.diff(G)))

    def to_dict(self) -> dict:
        out = {
            "L": self.L,
            "prices": list(self.prices.prices),
            "thresholds": list(self.thresholds),
            "occupancies": list(self.occupancies),
        }
        if self.assumptions is not None:
            out["assumptions"] = self.assumptions.to_dict()
        return out


def _full_thresholds(model: CostModel, L: int, thresholds) -> tuple:
    th = [float(x) for x in thresholds]
    if len(th) == L - 1:
        th = [model.A] + th + [model.B]
    if len(th) != L + 1:
        raise DomainError(f"expected {L - 1} interior or {L + 1} full thresholds, got {len(th)}")
    if th[0] != model.A or th[-1] != model.B:
        raise DomainError("outer thresholds must be the support endpoints")
    if any(b < a for a, b in zip(th, th[1:])):
        raise DomainError(f"thresholds must be ordered, got {th}")
    return tuple(th)


def _rhs(model: CostModel, dP: float, v_l: float, v_next: float) -> float:
    """Right-hand side of the threshold equation: the implied G(v_{l-1})."""
    m = model.m_value(v_l)
    price_term = 0.0 if dP == 0 else dP * m / model.N
    return float(model.cdf(v_next) - price_term - model.n_value(v_l) * model.kernel(v_l, v_next))


def threshold_residual(model: CostModel, prices, thresholds) -> list:
    """LHS - RHS of each threshold equation, l = 1..L-1."""
    if not isinstance(prices, PriceLadder):
        prices = PriceLadder(tuple(prices))
    th = _full_thresholds(model, prices.L, thresholds)
    dP = prices.increments()
    res = []
    for l in range(1, prices.L):
        res.append(float(model.cdf(th[l - 1])) - _rhs(model, float(dP[l - 1]), th[l], th[l + 1]))
    return res


def _shoot(model: CostModel, prices: PriceLadder, top: float):
    """Recurse down from a guess for v_{L-1}.

    Returns (verdict, chain, failed_equation, final_G) where verdict is
    ``"low"``, ``"high"`` or ``"ok"``; ``chain`` holds v_{L-1}, v_{L-2}, ...
    """
    L = prices.L
    dP = prices.increments()
    chain = [model.B, top]
    for l in range(L - 1, 0, -1):
        v_next, v_l = chain[-2], chain[-1]
        target = _rhs(model, float(dP[l - 1]), v_l, v_next)
        if l == 1:
            return ("high" if target > 0 else "low"), chain, l, target
        G_l = float(model.cdf(v_l))
        if not target > 0:
            return "low", chain, l, target
        if target >= G_l:
            return "high", chain, l, target
        chain.append(float(model.dist.quantile(target)))
    raise AssertionError("unreachable")


def solve_thresholds(model: CostModel, prices, warn: bool = True) -> EquilibriumProfile:
    """Equilibrium thresholds for a price ladder, by shooting on v_{L-1}.

    Raises EmptyQueueError when some queue cannot be occupied and
    NoEquilibriumError when no ordered solution exists.
    """
    if not isinstance(prices, PriceLadder):
        prices = PriceLadder(tuple(prices))
    L = prices.L
    A, B, w = model.A, model.B, model.dist.width
    if L == 1:
        profile = EquilibriumProfile(model, prices, (A, B), (1.0,))
        return _attach_report(profile, warn)

    lo, hi = A + 1e-9 * w, B - 1e-12 * w
    v_lo = _shoot(model, prices, lo)
    v_hi = _shoot(model, prices, hi)
    if v_hi[0] == "low":
        raise EmptyQueueError(
            f"queue {L - 1} is empty: prices too high for the top queue "
            f"(equation l={v_hi[2]} unsatisfiable at v_{L - 1} -> B)", queue=L - 1)
    if v_lo[0] == "high":
        if L == 2:
            raise EmptyQueueError("queue 0 is empty: the paid queue is too cheap", queue=0)
        raise NoEquilibriumError(
            f"threshold equation l={v_lo[2]} has no ordered solution", equation=v_lo[2])

    # bisect until the bracket collapses to floating-point resolution
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        verdict = _shoot(model, prices, mid)[0]
        if verdict == "high":
            hi = mid
        else:
            lo = mid
    best = None
    for guess in (lo, hi):
        verdict, chain, eq, final = _shoot(model, prices, guess)
        if eq == 1 and (best is None or abs(final) < abs(best[1])):
            best = (chain, final)
    if best is None:
        raise NoEquilibriumError("shooting did not reach the first threshold equation",
                                 equation=_shoot(model, prices, lo)[2])
    chain = best[0]
    thresholds = tuple([A] + list(reversed(chain)))
    res = threshold_residual(model, prices, thresholds)
    worst = int(np.argmax(np.abs(res)))
    if abs(res[worst]) >= RESIDUAL_TOL:
        raise NoEquilibriumError(
            f"threshold equation l={worst + 1} residual {res[worst]:.3g} above tolerance",
            equation=worst + 1)
    G = np.asarray(model.cdf(np.asarray(thresholds)))
    occ = np.diff(G)
    if np.any(occ <= 1e-12):
        q = int(np.argmin(occ))
        raise EmptyQueueError(f"queue {q} is empty at the solution", queue=q)
    profile = EquilibriumProfile(model, prices, thresholds, tuple(float(x) for x in occ))
    return _attach_report(profile, warn)


def _attach_report(profile: EquilibriumProfile, warn: bool) -> EquilibriumProfile:
    report = check_assumptions(profile.model, profile.prices, profile)
    if warn:
        for check in report.failures():
            warnings.warn(f"assumption {check.name} fails (margin {check.margin}): {check.detail}",
                          AssumptionWarning, stacklevel=3)
    return EquilibriumProfile(profile.model, profile.prices, profile.thresholds,
                              profile.occupancies, report)


def _check_queue(profile: EquilibriumProfile, l: int) -> int:
    if not 0 <= l < profile.L:
        raise DomainError(f"queue index {l} outside 0..{profile.L - 1}")
    return int(l)


def _clamped(profile, l, v):
    model = profile.model
    arr, scalar = _prep(model.dist.check_support(v))
    lo, hi = profile.thresholds[l], profile.thresholds[l + 1]
    return np.clip(arr, lo, hi), hi, scalar


def _tail(profile, l, v):
    """I(clamp(v), v_{l+1}) with +inf where the left endpoint diverges."""
    model = profile.model
    vc, hi, scalar = _clamped(profile, l, v)
    vc = np.atleast_1d(vc)
    bad = (vc <= 0) & (vc < hi)
    if np.any(bad) and model._divergent_at(0.0):
        out = np.full(vc.shape, np.inf)
        ok = ~bad
        if np.any(ok):
            out[ok] = model.kernel(vc[ok], hi)
        return out, vc, scalar, True
    return np.asarray(model.kernel(vc, hi), dtype=float), vc, scalar, False


def arrival_time(profile: EquilibriumProfile, l: int, v):
    """Arrival time of type v if it joins queue l (its optimal time within that queue)."""
    l = _check_queue(profile, l)
    K, _, scalar, diverged = _tail(profile, l, v)
    if diverged:
        warnings.warn("arrival time diverges at the left endpoint; returning inf", RuntimeWarning,
                      stacklevel=2)
    out = np.full(K.shape, np.inf)
    fin = np.isfinite(K)
    out[fin] = profile.model.g_inv(profile.model.N * K[fin])
    return _as_output(out.reshape(np.shape(np.asarray(v, dtype=float))), scalar)


def queue_fraction(profile: EquilibriumProfile, l: int, t):
    """F_l(t): population share in queue l arriving earlier than t."""
    l = _check_queue(profile, l)
    model = profile.model
    arr, scalar = _prep(t)
    if np.any(arr < 0):
        raise DomainError("time must be non-negative")
    v_l, v_next = profile.thresholds[l], profile.thresholds[l + 1]
    G_l = float(model.cdf(v_l))
    occ = float(model.cdf(v_next)) - G_l
    flat = np.atleast_1d(arr).reshape(-1)
    y = np.asarray(model.g(flat), dtype=float) / model.N
    if model.closed_form_kernel and model.dist.kind == "uniform":
        v = v_next * np.exp(-model.dist.width * y)
    else:
        lo = np.full(flat.shape, max(v_l, model.v_min))
        hi = np.full(flat.shape, v_next)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            above = np.asarray(model.kernel(mid, v_next)) > y
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= 1e-13 * model.dist.width):
                break
        v = 0.5 * (lo + hi)
    v = np.clip(v, v_l, v_next)
    out = np.asarray(model.cdf(v)) - G_l
    out = np.clip(out, 0.0, occ)
    out = np.where(flat <= 0.0, occ, out)
    return _as_output(out.reshape(np.shape(arr)), scalar)


def joining_cost(profile: EquilibriumProfile, l: int, v):
    """Optimal cost c_l(v) of type v when it joins queue l."""
    l = _check_queue(profile, l)
    model = profile.model
    N = model.N
    K, vc, scalar, _ = _tail(profile, l, v)
    varr = np.atleast_1d(model.dist.check_support(v)).astype(float).reshape(-1)
    v_l, v_next = profile.thresholds[l], profile.thresholds[l + 1]
    G_vc = np.asarray(model.cdf(vc))
    rank = N * (G_vc - float(model.cdf(v_l))) + N * (1.0 - float(model.cdf(v_next)))
    P = profile.prices[l]
    with np.errstate(invalid="ignore"):
        m = np.asarray(model.m_value(varr), dtype=float)
        price = np.where(P == 0.0, 0.0, m * P)
        n = np.asarray(model.n_value(varr), dtype=float)
        # n_v g(T) with g(T) = N I; the product tends to 0 where n vanishes
        wait = np.where(n == 0.0, 0.0, n * N * K)
    out = rank + price + wait
    return _as_output(out.reshape(np.shape(np.asarray(v, dtype=float))), scalar)


def queue_of(profile: EquilibriumProfile, v):
    """Queue joined by type v: the l with v_l < v <= v_{l+1} (the support minimum joins queue 0)."""
    arr, scalar = _prep(profile.model.dist.check_support(v))
    th = np.asarray(profile.thresholds)
    idx = np.searchsorted(th, arr, side="left") - 1
    out = np.clip(idx, 0, profile.L - 1)
    if scalar:
        return int(out)
    return out
