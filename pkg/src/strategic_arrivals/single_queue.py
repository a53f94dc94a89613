"""Single-queue equilibrium, its boarding-cost generalization, and graded service.

With one queue a type-v customer arriving t time units before service pays
``N F(t) + n_v g(t)``.  The unique equilibrium arrival time is

    T(v) = g^{-1}(N I(v, B)),       I(a, b) = int_a^b dG(x) / n_x

when n is increasing.  For decreasing n the integral runs from A to v and
the profile is non-decreasing instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .core_model import QUAD_EPSABS, QUAD_EPSREL, CostModel, _as_output, _prep, type_grid
from .errors import DomainError, InfeasiblePricingError

__all__ = [
    "BoardingCost",
    "GradePricing",
    "SingleQueueProfile",
    "continuum_revenue",
    "ne_arrival_time",
    "ne_arrival_time_generalized",
    "ne_grade",
    "realized_fraction",
]


def _rank_integral(model: CostModel, v):
    """N * (integral of dG/n over the types that arrive before v)."""
    if model.n.increasing:
        return model.N * np.asarray(model.kernel(v, model.B))
    return model.N * np.asarray(model.kernel(model.A, v))


def ne_arrival_time(model: CostModel, v):
    """Equilibrium arrival time(s) of type(s) ``v`` in a single queue."""
    arr, scalar = _prep(model.dist.check_support(v))
    out = model.g_inv(_rank_integral(model, arr))
    return _as_output(out, scalar)


@dataclass(frozen=True)
class BoardingCost:
    """Boarding-cost transform h(x) = scale * x**exponent of the arrived fraction.

    ``BoardingCost(N, 1)`` is the plain rank cost N x.
    """

    scale: float
    exponent: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0 and self.exponent > 0):
            raise DomainError("boarding cost must be strictly increasing (scale > 0, exponent > 0)")

    def __call__(self, x):
        return self.scale * np.asarray(x, dtype=float) ** self.exponent

    def prime(self, x):
        x = np.asarray(x, dtype=float)
        if self.exponent == 1.0:
            return np.full(x.shape, self.scale)
        with np.errstate(divide="ignore"):
            return self.scale * self.exponent * x ** (self.exponent - 1.0)


def ne_arrival_time_generalized(model: CostModel, v, h: BoardingCost):
    """Equilibrium arrival time when the boarding cost is h(F(t)) instead of N F(t)."""
    if not isinstance(h, BoardingCost):
        raise DomainError("h must be a BoardingCost")
    arr, scalar = _prep(model.dist.check_support(v))
    flat = np.atleast_1d(arr).reshape(-1)
    inc = model.n.increasing
    dist = model.dist
    pts = list(dist.breakpoints[1:-1]) if dist.kind == "tabulated" else []

    def integrand(x):
        G = dist.cdf(x)
        rank = G if inc else 1.0 - G
        return float(h.prime(rank)) * dist.pdf(x) / model.n.value(x)

    vals = np.empty(flat.size)
    for i, vi in enumerate(flat):
        lo, hi = (vi, model.B) if inc else (model.A, vi)
        if hi <= lo:
            vals[i] = 0.0
            continue
        if model.n.value(lo) == 0 and dist.pdf(lo) > 0:
            # same divergence as the plain kernel
            model.kernel(lo, hi)
        inner = [p for p in pts if lo < p < hi] or None
        vals[i], _ = quad(integrand, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                          limit=400, points=inner)
    out = model.g_inv(vals).reshape(np.shape(arr))
    return _as_output(out, scalar)


@dataclass(frozen=True)
class SingleQueueProfile:
    """Equilibrium profile of a single queue, tabulated on a type grid at build time."""

    model: CostModel
    grid_size: int = 401
    types: np.ndarray = field(init=False, repr=False, compare=False)
    times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = type_grid(self.model, self.grid_size)
        object.__setattr__(self, "types", v)
        object.__setattr__(self, "times", np.asarray(ne_arrival_time(self.model, v)))

    @property
    def increasing_n(self) -> bool:
        return self.model.n.increasing

    def arrival_time(self, v):
        return ne_arrival_time(self.model, v)

    def fraction_before(self, t, tol: float = 1e-10):
        """F(t): mass of customers arriving strictly earlier than t before service.

        Found as G(v*) with T(v*) = t, by bisection on the type axis.
        """
        arr, scalar = _prep(t)
        if np.any(arr < 0):
            raise DomainError("time must be non-negative")
        model = self.model
        target = np.atleast_1d(np.asarray(model.g(arr), dtype=float)).reshape(-1)
        lo = np.full(target.shape, model.v_min)
        hi = np.full(target.shape, model.B)
        inc = self.increasing_n
        # grid bracket first, then bisection down to tol on the type scale
        gv, gT = self.types, np.asarray(model.g(self.times))
        if inc:
            k = np.searchsorted(-gT, -target, side="left")
        else:
            k = np.searchsorted(gT, target, side="left")
        lo = np.where(k > 0, gv[np.clip(k - 1, 0, gv.size - 1)], lo)
        hi = np.where(k < gv.size, gv[np.clip(k, 0, gv.size - 1)], hi)
        step = tol * model.dist.width
        for _ in range(200):
            if np.all(hi - lo <= step):
                break
            mid = 0.5 * (lo + hi)
            val = _rank_integral(model, mid)
            above = val > target
            if inc:
                lo = np.where(above, mid, lo)
                hi = np.where(above, hi, mid)
            else:
                hi = np.where(above, mid, hi)
                lo = np.where(above, lo, mid)
        vstar = 0.5 * (lo + hi)
        G = np.asarray(model.cdf(vstar))
        out = G if inc else 1.0 - G
        # outside the realized range of times
        t_max = float(np.max(self.times))
        out = np.where(np.atleast_1d(arr).reshape(-1) >= t_max, 0.0, out)
        out = np.where(np.atleast_1d(arr).reshape(-1) <= 0.0, 1.0, out)
        return _as_output(out.reshape(np.shape(arr)), scalar)

    def cost(self, v, t):
        """c_v(t) = N F(t) + n_v g(t) against the equilibrium arrivals."""
        return self.model.N * np.asarray(self.fraction_before(t)) + \
            self.model.n_value(v) * np.asarray(self.model.g(t))


def realized_fraction(profile: SingleQueueProfile, v):
    """Mass arriving before type v at equilibrium: G(v) (1 - G(v) for decreasing n)."""
    G = profile.model.cdf(v)
    if profile.increasing_n:
        return G
    return 1.0 - np.asarray(G) if np.ndim(G) else 1.0 - G


@dataclass(frozen=True)
class GradePricing:
    """Price P(w) of service grade w in [0, 1].

    ``power``: P(w) = P_max * w**k.  ``tabulated``: piecewise-linear through
    (grades, prices) with grades spanning [0, 1] and prices starting at 0.
    """

    kind: str = "power"
    P_max: float = 1.0
    k: float = 1.0
    grades: tuple = ()
    prices: tuple = ()

    def __post_init__(self):
        if self.kind == "power":
            if not (self.P_max > 0 and self.k > 0):
                raise DomainError("power pricing needs P_max > 0 and k > 0")
        elif self.kind == "tabulated":
            w = np.asarray(self.grades, dtype=float)
            p = np.asarray(self.prices, dtype=float)
            if w.size < 2 or w.shape != p.shape:
                raise DomainError("tabulated pricing needs matching lists of length >= 2")
            if w[0] != 0.0 or w[-1] != 1.0 or p[0] != 0.0:
                raise DomainError("tabulated pricing must run from (0, 0) to w = 1")
            if np.any(np.diff(w) <= 0) or np.any(np.diff(p) <= 0):
                raise DomainError("tabulated pricing must be strictly increasing")
            object.__setattr__(self, "P_max", float(p[-1]))
            object.__setattr__(self, "grades", tuple(w.tolist()))
            object.__setattr__(self, "prices", tuple(p.tolist()))
        else:
            raise DomainError(f"unknown pricing kind {self.kind!r}")

    def __call__(self, w):
        arr, scalar = _prep(w)
        if self.kind == "power":
            out = self.P_max * arr ** self.k
        else:
            out = np.interp(arr, self.grades, self.prices)
        return _as_output(out, scalar)

    def inverse(self, price):
        arr, scalar = _prep(price)
        if self.kind == "power":
            out = (np.clip(arr, 0, None) / self.P_max) ** (1.0 / self.k)
        else:
            out = np.interp(arr, self.prices, self.grades)
        return _as_output(out, scalar)


def _check_feasible(model: CostModel, pricing: GradePricing) -> float:
    need = float(_rank_integral(model, model.v_min if model.n.increasing else model.B))
    if pricing.P_max < need * (1 - 1e-12):
        raise InfeasiblePricingError(
            f"P_max = {pricing.P_max:g} is below the top required price N I = {need:g}")
    return need


def ne_grade(model: CostModel, pricing: GradePricing, v):
    """Grade w(v) = P^{-1}(N I(v, B)) bought by type v with a continuum of grades."""
    _check_feasible(model, pricing)
    return _grade(model, pricing, v)


def _grade(model, pricing, v):
    arr, scalar = _prep(model.dist.check_support(v))
    out = np.clip(pricing.inverse(_rank_integral(model, arr)), 0.0, 1.0)
    return _as_output(out, scalar)


def continuum_revenue(model: CostModel, pricing: GradePricing) -> float:
    """Revenue int P(w(v)) dG(v), in price units; independent of the pricing shape."""
    _check_feasible(model, pricing)
    dist = model.dist

    def integrand(v):
        return float(pricing(_grade(model, pricing, v))) * dist.pdf(v)

    pts = list(dist.breakpoints[1:-1]) if dist.kind == "tabulated" else None
    val, _ = quad(integrand, model.v_min, model.B, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                  limit=400, points=pts)
    return float(val)
