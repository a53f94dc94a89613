"""Scenario primitives: type law, cost weights, price ladder, assumption checks.

Every function here accepts scalars or numpy arrays and returns the same
shape (scalars come back as Python floats).  Prices and revenues are in
units of the price-scale constant epsilon, which is fixed to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import (
    DivergentIntegralError,
    DomainError,
    SingularityError,
)

EPSILON = 1.0

# Quadrature tolerances; threshold root-finding needs integrals well below
# the solver tolerance.
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10

# Relative offset used to step away from a divergent left endpoint.
LEFT_CLAMP = 1e-9

_SUPPORT_SLACK = 1e-12


def _as_output(x, scalar):
    if scalar:
        return float(np.asarray(x).reshape(-1)[0])
    return x


def _prep(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


# ---------------------------------------------------------------------------
# Type distribution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeDistribution:
    """Customer-type law G on [A, B].

    ``kind`` is ``"uniform"`` or ``"tabulated"``; a tabulated law is the
    piecewise-linear interpolation of ``cdf_values`` over ``breakpoints``.
    """

    kind: str
    A: float
    B: float
    breakpoints: tuple = ()
    cdf_values: tuple = ()

    def __post_init__(self):
        if self.kind == "uniform":
            if not (math.isfinite(self.A) and math.isfinite(self.B)):
                raise DomainError("support bounds must be finite")
            if self.A < 0 or not self.A < self.B:
                raise DomainError(f"need 0 <= A < B, got A={self.A}, B={self.B}")
        elif self.kind == "tabulated":
            x = np.asarray(self.breakpoints, dtype=float)
            c = np.asarray(self.cdf_values, dtype=float)
            if x.ndim != 1 or x.size < 2 or x.shape != c.shape:
                raise DomainError("tabulated CDF needs matching breakpoint and CDF lists of length >= 2")
            if np.any(np.diff(x) <= 0):
                raise DomainError("breakpoints must be strictly increasing")
            if np.any(np.diff(c) < 0):
                raise DomainError("CDF values must be non-decreasing")
            if c[0] != 0.0 or c[-1] != 1.0:
                raise DomainError("CDF must start at 0 and end at 1")
            if x[0] < 0:
                raise DomainError("types must be non-negative")
            object.__setattr__(self, "A", float(x[0]))
            object.__setattr__(self, "B", float(x[-1]))
            object.__setattr__(self, "breakpoints", tuple(float(v) for v in x))
            object.__setattr__(self, "cdf_values", tuple(float(v) for v in c))
        else:
            raise DomainError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def uniform(cls, A: float, B: float) -> "TypeDistribution":
        return cls("uniform", float(A), float(B))

    @classmethod
    def tabulated(cls, breakpoints: Sequence[float], cdf_values: Sequence[float]) -> "TypeDistribution":
        return cls("tabulated", 0.0, 1.0, tuple(breakpoints), tuple(cdf_values))

    @property
    def width(self) -> float:
        return self.B - self.A

    def check_support(self, v):
        """Return ``v`` clipped onto [A, B]; raise if it is genuinely outside."""
        arr, scalar = _prep(v)
        slack = _SUPPORT_SLACK * self.width
        if np.any(~np.isfinite(arr)) or np.any(arr < self.A - slack) or np.any(arr > self.B + slack):
            raise DomainError(f"type value outside support [{self.A}, {self.B}]")
        return _as_output(np.clip(arr, self.A, self.B), scalar)

    def cdf(self, v):
        arr, scalar = _prep(self.check_support(v))
        if self.kind == "uniform":
            out = (arr - self.A) / self.width
        else:
            out = np.interp(arr, self.breakpoints, self.cdf_values)
        return _as_output(np.clip(out, 0.0, 1.0), scalar)

    def pdf(self, v):
        """Density; on a tabulated law the slope of the segment to the right."""
        arr, scalar = _prep(self.check_support(v))
        if self.kind == "uniform":
            out = np.full(arr.shape, 1.0 / self.width)
        else:
            x = np.asarray(self.breakpoints)
            c = np.asarray(self.cdf_values)
            slopes = np.diff(c) / np.diff(x)
            idx = np.clip(np.searchsorted(x, arr, side="right") - 1, 0, slopes.size - 1)
            out = slopes[idx]
        return _as_output(out, scalar)

    def quantile(self, p):
        arr, scalar = _prep(p)
        if np.any(~np.isfinite(arr)) or np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
            raise DomainError("quantile level must lie in [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        if self.kind == "uniform":
            out = self.A + arr * self.width
        else:
            x = np.asarray(self.breakpoints)
            c = np.asarray(self.cdf_values)
            # leftmost point where the CDF reaches p
            idx = np.clip(np.searchsorted(c, arr, side="left"), 1, c.size - 1)
            c0, c1 = c[idx - 1], c[idx]
            x0, x1 = x[idx - 1], x[idx]
            with np.errstate(invalid="ignore", divide="ignore"):
                frac = np.where(c1 > c0, (arr - c0) / (c1 - c0), 0.0)
            out = np.where(arr <= 0.0, self.A, x0 + frac * (x1 - x0))
        return _as_output(np.clip(out, self.A, self.B), scalar)


def cdf(dist: TypeDistribution, v):
    return dist.cdf(v)


# ---------------------------------------------------------------------------
# Cost ingredients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WaitCost:
    """Waiting cost g: ``t**r`` or a piecewise-linear table through (0, 0)."""

    kind: str = "power"
    r: float = 1.0
    times: tuple = ()
    costs: tuple = ()

    def __post_init__(self):
        if self.kind == "power":
            if not (self.r > 0 and math.isfinite(self.r)):
                raise DomainError(f"wait-cost exponent must be positive, got {self.r}")
        elif self.kind == "tabulated":
            t = np.asarray(self.times, dtype=float)
            c = np.asarray(self.costs, dtype=float)
            if t.size < 2 or t.shape != c.shape:
                raise DomainError("tabulated wait cost needs matching lists of length >= 2")
            if t[0] != 0.0 or c[0] != 0.0:
                raise DomainError("tabulated wait cost must start at (0, 0)")
            if np.any(np.diff(t) <= 0) or np.any(np.diff(c) <= 0):
                raise DomainError("tabulated wait cost must be strictly increasing")
            object.__setattr__(self, "times", tuple(float(v) for v in t))
            object.__setattr__(self, "costs", tuple(float(v) for v in c))
        else:
            raise DomainError(f"unknown wait-cost kind {self.kind!r}")

    def _extrapolate(self, x, xs, ys):
        xs = np.asarray(xs)
        ys = np.asarray(ys)
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        return np.where(x <= xs[-1], np.interp(x, xs, ys), ys[-1] + slope * (x - xs[-1]))

    def __call__(self, t):
        arr, scalar = _prep(t)
        if np.any(arr < 0):
            raise DomainError("waiting time must be non-negative")
        if self.kind == "power":
            out = arr ** self.r
        else:
            out = self._extrapolate(arr, self.times, self.costs)
        return _as_output(out, scalar)

    def inverse(self, y):
        arr, scalar = _prep(y)
        if np.any(arr < 0):
            raise DomainError("waiting cost must be non-negative")
        if self.kind == "power":
            out = arr ** (1.0 / self.r)
        else:
            out = self._extrapolate(arr, self.costs, self.times)
        return _as_output(out, scalar)


@dataclass(frozen=True)
class NWeight:
    """Waiting-cost weight n_v: identity, ``coef * v**exponent`` or a monotone table."""

    kind: str = "identity"
    coef: float = 1.0
    exponent: float = 1.0
    points: tuple = ()
    values: tuple = ()
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "identity":
            pass
        elif self.kind == "power":
            if not self.coef > 0:
                raise DomainError("power n-weight needs a positive coefficient")
            if self.exponent == 0 or not math.isfinite(self.exponent):
                raise DomainError("power n-weight needs a non-zero exponent")
        elif self.kind == "tabulated":
            x = np.asarray(self.points, dtype=float)
            y = np.asarray(self.values, dtype=float)
            if x.size < 2 or x.shape != y.shape or np.any(np.diff(x) <= 0):
                raise DomainError("tabulated n-weight needs strictly increasing points")
            dy = np.diff(y)
            if not (np.all(dy > 0) or np.all(dy < 0)):
                raise DomainError("tabulated n-weight must be strictly monotone")
            if np.any(y <= 0):
                raise DomainError("tabulated n-weight must be positive")
            object.__setattr__(self, "_interp", PchipInterpolator(x, y, extrapolate=True))
        else:
            raise DomainError(f"unknown n-weight kind {self.kind!r}")

    @property
    def increasing(self) -> bool:
        if self.kind == "identity":
            return True
        if self.kind == "power":
            return self.exponent > 0
        return self.values[-1] > self.values[0]

    def value(self, v):
        arr, scalar = _prep(v)
        if self.kind == "identity":
            out = arr.copy()
        elif self.kind == "power":
            with np.errstate(divide="ignore"):
                out = self.coef * arr ** self.exponent
        else:
            out = self._interp(arr)
        return _as_output(out, scalar)

    def prime(self, v):
        arr, scalar = _prep(v)
        if self.kind == "identity":
            out = np.ones_like(arr)
        elif self.kind == "power":
            with np.errstate(divide="ignore"):
                out = self.coef * self.exponent * arr ** (self.exponent - 1.0)
        else:
            out = self._interp.derivative()(arr)
        return _as_output(out, scalar)


@dataclass(frozen=True)
class MWeight:
    """Price weight m_v.

    ``paper-log``:  N/(eps (B-A)) * (B log(B/v) - (B - v)) + N delta/eps
    ``paper-linear``: (N/eps) ((B - v)/(B - A)) log(B/A) + N delta/eps
    ``tabulated``: monotone cubic through (points, values), strictly decreasing.
    """

    kind: str = "paper-log"
    delta: float = 0.0
    points: tuple = ()
    values: tuple = ()
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind in ("paper-log", "paper-linear"):
            if not (self.delta >= 0 and math.isfinite(self.delta)):
                raise DomainError(f"delta must be non-negative, got {self.delta}")
        elif self.kind == "tabulated":
            x = np.asarray(self.points, dtype=float)
            y = np.asarray(self.values, dtype=float)
            if x.size < 2 or x.shape != y.shape or np.any(np.diff(x) <= 0):
                raise DomainError("tabulated m-weight needs strictly increasing points")
            if np.any(np.diff(y) >= 0):
                raise DomainError("tabulated m-weight must be strictly decreasing")
            if np.any(y < 0):
                raise DomainError("tabulated m-weight must be non-negative")
            object.__setattr__(self, "_interp", PchipInterpolator(x, y, extrapolate=True))
        else:
            raise DomainError(f"unknown m-weight kind {self.kind!r}")


@dataclass(frozen=True)
class CostModel:
    """Population size, cost ingredients and type law of one scenario."""

    dist: TypeDistribution
    N: int
    wait: WaitCost = WaitCost()
    n: NWeight = NWeight()
    m: MWeight = MWeight()

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N <= 0:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if self.m.kind == "paper-linear" and self.dist.A <= 0:
            raise DomainError("the linear m-weight needs A > 0")
        if self.n.kind == "tabulated":
            pts = self.n.points
            if pts[0] > self.dist.A or pts[-1] < self.dist.B:
                raise DomainError("tabulated n-weight must cover the type support")
        if self.m.kind == "tabulated":
            pts = self.m.points
            if pts[0] > self.dist.A or pts[-1] < self.dist.B:
                raise DomainError("tabulated m-weight must cover the type support")

    # -- convenience -------------------------------------------------------
    @property
    def A(self) -> float:
        return self.dist.A

    @property
    def B(self) -> float:
        return self.dist.B

    @property
    def epsilon(self) -> float:
        return EPSILON

    @property
    def closed_form_kernel(self) -> bool:
        return self.n.kind == "identity"

    @property
    def v_min(self) -> float:
        """Smallest type at which equilibrium quantities are evaluated."""
        if self.n.value(self.A) > 0:
            return self.A
        return self.A + LEFT_CLAMP * self.dist.width

    def g(self, t):
        return self.wait(t)

    def g_inv(self, y):
        return self.wait.inverse(y)

    def cdf(self, v):
        return self.dist.cdf(v)

    def n_value(self, v):
        return self.n.value(self.dist.check_support(v))

    def n_prime(self, v):
        return self.n.prime(self.dist.check_support(v))

    def m_value(self, v):
        arr, scalar = _prep(self.dist.check_support(v))
        A, B, N, eps = self.A, self.B, self.N, EPSILON
        spec = self.m
        if spec.kind == "paper-log":
            with np.errstate(divide="ignore"):
                logs = np.where(arr > 0, np.log(B / np.where(arr > 0, arr, 1.0)), np.inf)
            out = N / (eps * (B - A)) * (B * logs - (B - arr)) + N * spec.delta / eps
        elif spec.kind == "paper-linear":
            out = (N / eps) * ((B - arr) / (B - A)) * math.log(B / A) + N * spec.delta / eps
        else:
            out = spec._interp(arr)
        return _as_output(out, scalar)

    def m_prime(self, v):
        arr, scalar = _prep(self.dist.check_support(v))
        A, B, N, eps = self.A, self.B, self.N, EPSILON
        if self.m.kind == "paper-log":
            with np.errstate(divide="ignore"):
                out = -(N / (eps * (B - A))) * (B - arr) / arr
        elif self.m.kind == "paper-linear":
            out = np.full(arr.shape, -(N / eps) * math.log(B / A) / (B - A))
        else:
            out = self.m._interp.derivative()(arr)
        return _as_output(out, scalar)

    def m_second(self, v):
        arr, scalar = _prep(self.dist.check_support(v))
        if self.m.kind == "paper-log":
            with np.errstate(divide="ignore"):
                out = (self.N / (EPSILON * (self.B - self.A))) * self.B / arr ** 2
        elif self.m.kind == "paper-linear":
            out = np.zeros_like(arr)
        else:
            out = self.m._interp.derivative(2)(arr)
        return _as_output(out, scalar)

    # -- kernel integral ---------------------------------------------------
    def _divergent_at(self, a) -> bool:
        if self.n.value(a) != 0:
            return False
        if self.n.kind == "power" and self.n.exponent < 1:
            return False
        return self.dist.pdf(a) > 0

    def _segment_integral(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        if self.n.kind == "identity":
            if self.dist.kind == "uniform":
                return math.log(b / a) / self.dist.width
            x = np.asarray(self.dist.breakpoints)
            c = np.asarray(self.dist.cdf_values)
            total = 0.0
            for k in range(x.size - 1):
                lo, hi = max(a, x[k]), min(b, x[k + 1])
                if hi > lo:
                    slope = (c[k + 1] - c[k]) / (x[k + 1] - x[k])
                    if slope > 0:
                        total += slope * math.log(hi / lo)
            return total
        pts = None
        if self.dist.kind == "tabulated":
            inner = [p for p in self.dist.breakpoints if a < p < b]
            pts = inner or None
        pdf, nval = self.dist.pdf, self.n.value
        val, _ = quad(lambda x: pdf(x) / nval(x), a, b, epsabs=QUAD_EPSABS,
                      epsrel=QUAD_EPSREL, limit=400, points=pts)
        return float(val)

    def kernel(self, a, b):
        """I(a, b) = integral over (a, b] of dG(x) / n_x, broadcasting over a and b."""
        a_arr, a_scalar = _prep(self.dist.check_support(a))
        b_arr, b_scalar = _prep(self.dist.check_support(b))
        a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
        if np.any(a_arr > b_arr + _SUPPORT_SLACK * self.dist.width):
            raise DomainError("kernel integral needs a <= b")
        b_arr = np.maximum(a_arr, b_arr)
        nonempty = b_arr > a_arr
        if np.any(nonempty & (a_arr <= 0)):
            for a0 in np.unique(a_arr[nonempty & (a_arr <= 0)]):
                if self._divergent_at(float(a0)):
                    raise DivergentIntegralError(
                        f"integral of dG/n diverges at the left endpoint v={a0}")
        if self.n.kind == "identity" and self.dist.kind == "uniform":
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(nonempty, np.log(b_arr / np.where(nonempty, a_arr, 1.0)), 0.0)
            out = out / self.dist.width
        else:
            out = np.empty(a_arr.shape)
            flat_a, flat_b, flat_o = a_arr.reshape(-1), b_arr.reshape(-1), out.reshape(-1)
            for i in range(flat_a.size):
                flat_o[i] = self._segment_integral(float(flat_a[i]), float(flat_b[i]))
        return _as_output(out, a_scalar and b_scalar)

    def tail_kernel(self, v):
        """I(v, B) for each v."""
        return self.kernel(v, self.B)

    def tail_kernel_sorted(self, v: np.ndarray) -> np.ndarray:
        """I(v, B) on a sorted grid using additivity over adjacent cells."""
        v = np.asarray(v, dtype=float)
        if self.n.kind == "identity" and self.dist.kind == "uniform":
            return np.asarray(self.kernel(v, self.B))
        pts = np.append(v, self.B)
        seg = np.array([self._segment_integral(float(pts[i]), float(pts[i + 1]))
                        for i in range(v.size)])
        return np.cumsum(seg[::-1])[::-1]


def kernel_integral(model: CostModel, a, b):
    return model.kernel(a, b)


def wait_cost(model: CostModel, t):
    return model.g(t)


def wait_cost_inverse(model: CostModel, y):
    return model.g_inv(y)


def weight_m(model: CostModel, v):
    return model.m_value(v)


def weight_m_prime(model: CostModel, v):
    return model.m_prime(v)


def weight_n(model: CostModel, v):
    return model.n_value(v)


def weight_n_prime(model: CostModel, v):
    return model.n_prime(v)


def y_of_v(model: CostModel, v):
    """y(v) = n'_v / (-m'_v) * I(v, B).

    Where m' vanishes at v = B the L'Hopital limit n'_B pdf(B) / (n_B m''_B)
    is used; anywhere else a vanishing m' raises SingularityError.
    """
    arr, scalar = _prep(model.dist.check_support(v))
    arr = np.atleast_1d(arr)
    mp = np.atleast_1d(np.asarray(model.m_prime(arr), dtype=float))
    npr = np.atleast_1d(np.asarray(model.n_prime(arr), dtype=float))
    K = np.atleast_1d(np.asarray(model.tail_kernel(arr), dtype=float))
    out = np.empty(arr.shape)
    zero = mp == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~zero] = npr[~zero] * K[~zero] / (-mp[~zero])
    for i in np.flatnonzero(zero):
        vi = arr[i]
        m2 = model.m_second(vi)
        if vi == model.B and m2 > 0:
            pdf_b = model.dist.pdf(vi)
            if model.dist.kind == "tabulated":
                x, c = model.dist.breakpoints, model.dist.cdf_values
                pdf_b = (c[-1] - c[-2]) / (x[-1] - x[-2])
            out[i] = npr[i] * pdf_b / (model.n_value(vi) * m2)
        else:
            raise SingularityError(f"m'_v vanishes at v={vi}")
    return _as_output(out, scalar)


def type_grid(model: CostModel, n: int, include_top: bool = True) -> np.ndarray:
    """Quantile-uniform sample of types starting at the clamped left endpoint."""
    p_lo = model.cdf(model.v_min)
    p = np.linspace(p_lo, 1.0, n)
    v = np.asarray(model.dist.quantile(p))
    v[0] = max(v[0], model.v_min)
    if not include_top:
        v = v[:-1]
    return v


def sup_y(model: CostModel, n_grid: int = 2001) -> float:
    v = type_grid(model, n_grid)
    with np.errstate(all="ignore"):
        y = np.asarray(y_of_v(model, v))
    if np.any(np.isnan(y)) or np.any(np.isinf(y)):
        return math.inf
    return float(np.max(y))


def min_price_gap(model: CostModel, n_grid: int = 2001) -> float:
    """N * max{sup y, 2/m_A}: the smallest admissible increment between adjacent prices."""
    mA = model.m_value(model.A)
    second = 0.0 if math.isinf(mA) else 2.0 / mA
    return model.N * max(sup_y(model, n_grid), second)


# ---------------------------------------------------------------------------
# Prices and assumptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriceLadder:
    """Admission prices P_0 = 0 < P_1 < ... < P_{L-1}."""

    prices: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.prices)
        if len(p) == 0:
            raise DomainError("PriceLadder needs at least the free queue price P_0 = 0")
        if p[0] != 0.0:
            raise DomainError(f"PriceLadder must start at P_0 = 0, got {p[0]}")
        if any(not math.isfinite(x) for x in p):
            raise DomainError("PriceLadder prices must be finite")
        if any(b <= a for a, b in zip(p, p[1:])):
            raise DomainError(f"PriceLadder must be strictly increasing, got {p}")
        object.__setattr__(self, "prices", p)

    @property
    def L(self) -> int:
        return len(self.prices)

    def __getitem__(self, l):
        return self.prices[l]

    def __len__(self):
        return len(self.prices)

    def increments(self) -> np.ndarray:
        return np.diff(np.asarray(self.prices))


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: Optional[bool]
    margin: Optional[float]
    detail: str
    values: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "margin": self.margin,
                "detail": self.detail, "values": dict(self.values)}


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple

    def __getitem__(self, name) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        """True unless some evaluated assumption failed."""
        return all(c.passed is not False for c in self.checks)

    def failures(self):
        return [c for c in self.checks if c.passed is False]

    def to_dict(self):
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def check_assumptions(model: CostModel, prices: PriceLadder, profile=None) -> AssumptionReport:
    """Evaluate (A1)-(A3) with margins.  (A3) needs a solved profile.

    Never raises; a failed check is reported with ``passed=False``.
    """
    checks = []

    # A1: bounded y and finite kernel over the (clamped) support
    try:
        sy = sup_y(model)
        total = float(model.tail_kernel(model.v_min))
        ok = math.isfinite(sy) and math.isfinite(total)
        detail = "sup y and I(A, B) finite"
        if model.v_min > model.A:
            detail += f" (left endpoint clamped to {model.v_min:.3g})"
        checks.append(AssumptionCheck("A1", ok, None, detail,
                                      {"sup_y": sy, "kernel_total": total}))
    except (ArithmeticError, ValueError) as exc:
        sy = math.inf
        checks.append(AssumptionCheck("A1", False, None, f"evaluation failed: {exc}", {}))

    # A2: minimum spacing of adjacent prices
    if prices.L <= 1:
        checks.append(AssumptionCheck("A2", True, math.inf, "single queue: vacuous", {}))
    else:
        mA = model.m_value(model.A)
        second = 0.0 if math.isinf(mA) else 2.0 / mA
        required = model.N * max(sy, second)
        margin = float(np.min(prices.increments()) - required)
        checks.append(AssumptionCheck(
            "A2", bool(margin > 0), margin,
            "P_{l+1} - P_l > N max{sup y, 2/m_A}",
            {"required_gap": required, "min_gap": float(np.min(prices.increments()))}))

    # A3: occupied queues and upper price spacing; post-hoc only
    if profile is None:
        checks.append(AssumptionCheck("A3", None, None, "needs a solved profile", {}))
    else:
        occ = np.asarray(profile.occupancies)
        mB = model.m_value(model.B)
        inc = prices.increments()
        if inc.size == 0:
            margin = math.inf
        elif mB == 0:
            margin = math.inf
        else:
            margin = float(np.min(model.N * occ[:-1] / mB - inc))
        ok = bool(np.min(occ) > 0 and margin > 0)
        checks.append(AssumptionCheck(
            "A3", ok, margin, "all queues occupied and P_{l+1} - P_l < N F_l(0) / m_B",
            {"min_occupancy": float(np.min(occ))}))
    return AssumptionReport(tuple(checks))
