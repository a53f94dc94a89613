"""Brute-force oracles used to certify the closed-form and optimized solutions.

* ``verify_epsilon_ne`` evaluates every (queue, time) action on a grid for a
  sample of types and reports the regret of the prescribed action.
* ``brute_force_single_ne`` computes the single-queue equilibrium by
  iterated best responses on a type/time lattice, without using the
  closed form.
* ``brute_force_revenue`` scans ordered threshold tuples exhaustively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core_model import CostModel, PriceLadder, min_price_gap, type_grid
from .errors import DomainError, NonConvergenceError, UnsupportedError
from .multi_queue import EquilibriumProfile, arrival_time, queue_fraction, queue_of
from .revenue_opt import stage_utility
from .single_queue import SingleQueueProfile


def _as_profile(profile) -> EquilibriumProfile:
    if isinstance(profile, EquilibriumProfile):
        return profile
    if isinstance(profile, SingleQueueProfile):
        model = profile.model
        return EquilibriumProfile(model, PriceLadder((0.0,)), (model.A, model.B), (1.0,))
    raise DomainError(f"unsupported profile type {type(profile).__name__}")


def _time_grid(profile: EquilibriumProfile, types: np.ndarray, times) -> np.ndarray:
    if not np.isscalar(times):
        grid = np.asarray(times, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise DomainError("time grid must be increasing and non-negative")
        return grid
    t_max = 0.0
    for l in range(profile.L):
        T = np.asarray(arrival_time(profile, l, types), dtype=float)
        T = T[np.isfinite(T)]
        if T.size:
            t_max = max(t_max, float(T.max()))
    return np.linspace(0.0, t_max if t_max > 0 else 1.0, int(times))


def _action_costs(profile: EquilibriumProfile, v: np.ndarray, grid: np.ndarray, F: np.ndarray,
                  queues) -> np.ndarray:
    """c_v(l, t) for every sampled type, queue in ``queues`` and grid time: shape (types, queues, times)."""
    model = profile.model
    N = model.N
    occ = np.asarray(profile.occupancies)
    ahead = np.array([occ[l + 1:].sum() for l in range(profile.L)])
    m = np.asarray(model.m_value(v), dtype=float)
    n = np.asarray(model.n_value(v), dtype=float)
    g = np.asarray(model.g(grid), dtype=float)
    out = np.empty((v.size, len(queues), grid.size))
    for k, l in enumerate(queues):
        P = profile.prices[l]
        with np.errstate(invalid="ignore"):
            price = np.zeros(v.size) if P == 0 else m * P
        out[:, k, :] = (price + N * ahead[l])[:, None] + N * F[l][None, :] + n[:, None] * g[None, :]
    return out


def best_response_cost(profile, v: float, times=4001, queues=None):
    """Best grid action of type v against the equilibrium occupancy curves.

    Ties go to the lower queue, then to the smaller time.  Returns
    ``(queue, time, cost)``.
    """
    prof = _as_profile(profile)
    v_arr = np.atleast_1d(np.asarray(prof.model.dist.check_support(v), dtype=float))
    queues = list(range(prof.L)) if queues is None else [int(q) for q in queues]
    grid = _time_grid(prof, type_grid(prof.model, 401), times)
    F = {l: np.asarray(queue_fraction(prof, l, grid)) for l in queues}
    costs = _action_costs(prof, v_arr, grid, F, queues)[0]
    k = int(np.argmin(costs))
    qi, ti = divmod(k, grid.size)
    return queues[qi], float(grid[ti]), float(costs[qi, ti])


@dataclass(frozen=True)
class RegretReport:
    types: np.ndarray = field(repr=False)
    regrets: np.ndarray = field(repr=False)
    max_regret: float
    worst_type: float
    worst_prescribed: tuple
    worst_best: tuple
    tolerance: float
    passed: bool
    n_types: int
    n_times: int
    discretization_bound: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_regret": self.max_regret,
            "tolerance": self.tolerance,
            "worst_type": self.worst_type,
            "worst_prescribed": {"queue": self.worst_prescribed[0], "time": self.worst_prescribed[1]},
            "worst_best": {"queue": self.worst_best[0], "time": self.worst_best[1]},
            "n_types": self.n_types,
            "n_times": self.n_times,
            "discretization_bound": self.discretization_bound,
        }


def verify_epsilon_ne(profile, types=401, times=4001, tolerance=None) -> RegretReport:
    """Regret of the prescribed (queue, time) against every grid action.

    ``types`` and ``times`` are sample counts or explicit arrays; types
    default to quantile-uniform spacing on the (clamped) support and times
    to an even grid over [0, max_l T_l(v_l)].  The tolerance defaults to
    1e-3 N.  F is held fixed under deviation (a single type has no mass).
    """
    prof = _as_profile(profile)
    model = prof.model
    if np.isscalar(types):
        v = type_grid(model, int(types))
    else:
        v = np.asarray(model.dist.check_support(types), dtype=float).reshape(-1)
        v = np.maximum(v, model.v_min)
    grid = _time_grid(prof, v, times)
    tol = 1e-3 * model.N if tolerance is None else float(tolerance)

    F = {l: np.asarray(queue_fraction(prof, l, grid)) for l in range(prof.L)}
    costs = _action_costs(prof, v, grid, F, list(range(prof.L)))
    flat = costs.reshape(v.size, -1)
    best_k = np.argmin(flat, axis=1)
    best = flat[np.arange(v.size), best_k]

    # prescribed action, evaluated with the same cost formula
    q = np.atleast_1d(queue_of(prof, v))
    T = np.empty(v.size)
    for l in range(prof.L):
        sel = q == l
        if np.any(sel):
            T[sel] = arrival_time(prof, l, v[sel])
    prescribed = np.empty(v.size)
    for l in range(prof.L):
        sel = q == l
        if not np.any(sel):
            continue
        Fl = np.asarray(queue_fraction(prof, l, T[sel]))
        one = _action_costs(prof, v[sel], np.array([0.0]), {l: np.zeros(1)}, [l])[:, 0, 0]
        prescribed[sel] = one + model.N * Fl + np.asarray(model.n_value(v[sel])) * np.asarray(model.g(T[sel]))
    regrets = prescribed - best

    dF = max(float(np.max(np.abs(np.diff(F[l])))) for l in F)
    dg = float(np.max(np.diff(np.asarray(model.g(grid)))))
    bound = model.N * dF + float(model.n_value(model.B)) * dg

    i = int(np.argmax(regrets))
    qi, ti = divmod(int(best_k[i]), grid.size)
    max_regret = float(regrets[i])
    return RegretReport(
        types=v, regrets=regrets, max_regret=max_regret, worst_type=float(v[i]),
        worst_prescribed=(int(q[i]), float(T[i])), worst_best=(int(qi), float(grid[ti])),
        tolerance=tol, passed=bool(max_regret < tol), n_types=int(v.size),
        n_times=int(grid.size), discretization_bound=bound,
    )


# ---------------------------------------------------------------------------
# Single-queue best-response dynamics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteProfile:
    """Lattice equilibrium: median arrival time of each type cell."""

    types: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    time_step: float
    iterations: int
    max_change: float


def _best_fill(tot: np.ndarray, N: float, n_s: float, w_s: float, g: np.ndarray) -> np.ndarray:
    """Best response of a continuum of mass w_s with weight n_s, as its contribution to F.

    Members spread so that N (F_other + F_own) + n_s g is constant on the
    support and no lower elsewhere.
    """
    h = N * tot + n_s * g
    H = np.minimum.accumulate(h[::-1])[::-1]
    return np.clip((H[0] + N * w_s - H) / N, 0.0, w_s)


def brute_force_single_ne(model: CostModel, n_types: int = 101, n_times: int = 10001,
                          max_iters: int = 200, subcells: int = 8, damping: float = 0.5,
                          tol=None) -> DiscreteProfile:
    """Single-queue equilibrium by iterated best response on a lattice.

    Types are ``n_types`` cells of equal probability, each split into
    ``subcells`` pieces with constant weight n.  A piece's strategy is its
    contribution to F(t) on the time lattice.  The profile starts from one
    undamped pass into an empty queue (high types first) and is then swept
    from high to low types with damped updates until the cell medians move
    less than ``tol`` (default 1e-3 of a time step).
    """
    if not model.n.increasing:
        raise UnsupportedError("the lattice oracle assumes an increasing n-weight")
    N = float(model.N)
    p0 = float(model.cdf(model.v_min))
    G_cells = np.linspace(p0, 1.0, n_types + 1)
    G_sub = np.linspace(p0, 1.0, n_types * subcells + 1)
    w = np.diff(G_sub)
    n_s = np.asarray(model.n_value(model.dist.quantile(0.5 * (G_sub[1:] + G_sub[:-1]))), dtype=float)
    if np.any(n_s <= 0):
        raise DomainError("n-weight must be positive on the lattice")
    t_hi = float(model.g_inv(N * np.sum(w / n_s))) * 1.02
    t = np.linspace(0.0, t_hi, n_times)
    dt = t[1] - t[0]
    g = np.asarray(model.g(t), dtype=float)
    tol = 1e-3 * dt if tol is None else float(tol)

    S = np.zeros((w.size, n_times))
    tot = np.zeros(n_times)
    for s in range(w.size - 1, -1, -1):
        S[s] = _best_fill(tot, N, n_s[s], w[s], g)
        tot += S[s]

    half = 0.5 * np.diff(G_cells)

    def medians():
        C = S.reshape(n_types, subcells, n_times).sum(axis=1)
        out = np.empty(n_types)
        for c in range(n_types):
            k = int(np.clip(np.searchsorted(-C[c], -half[c]), 1, n_times - 1))
            c0, c1 = C[c, k - 1], C[c, k]
            frac = (c0 - half[c]) / (c0 - c1) if c0 != c1 else 0.5
            out[c] = t[k - 1] + frac * dt
        return out

    prev = medians()
    seen = {}
    change = math.inf
    for it in range(1, max_iters + 1):
        for s in range(w.size - 1, -1, -1):
            tot -= S[s]
            S[s] = (1 - damping) * S[s] + damping * _best_fill(tot, N, n_s[s], w[s], g)
            tot += S[s]
        cur = medians()
        change = float(np.max(np.abs(cur - prev)))
        if change < tol:
            types = np.asarray(model.dist.quantile(0.5 * (G_cells[1:] + G_cells[:-1])))
            return DiscreteProfile(types, cur, dt, it, change)
        key = np.round(cur / tol).astype(np.int64).tobytes()
        if key in seen:
            raise NonConvergenceError(
                f"best-response dynamics cycle after {it} sweeps", iterations=it,
                cycle_length=it - seen[key])
        seen[key] = it
        prev = cur
    raise NonConvergenceError(
        f"best-response dynamics did not settle in {max_iters} sweeps (last change {change:.3g})",
        iterations=max_iters)


# ---------------------------------------------------------------------------
# Exhaustive revenue scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    thresholds: tuple
    revenue: float
    discretization_bound: float
    grid: int


def brute_force_revenue(model: CostModel, L: int, grid: int = 500, enforce_gap: bool = True,
                        gap=None) -> ScanResult:
    """Best ordered threshold tuple on an evenly spaced interior grid.

    Supports L <= 3; L = 2 accepts up to 10**6 points, L = 3 up to 500.
    The same price-gap rule as the optimizer applies.  The reported
    discretization bound is the largest revenue change to a neighbouring
    grid tuple at the optimum.
    """
    A, B = model.A, model.B
    if L == 1:
        return ScanResult((A, B), 0.0, 0.0, 0)
    if L > 3:
        raise UnsupportedError("exhaustive scan supports at most three queues")
    limit = 10 ** 6 if L == 2 else 500
    if grid > limit:
        raise UnsupportedError(f"grid of {grid} points exceeds the limit {limit} for L={L}")
    if gap is None:
        gap = min_price_gap(model) if enforce_gap else 0.0
    x = A + (B - A) * np.arange(1, grid + 1) / (grid + 1)
    x = x[x >= model.v_min]
    N = model.N
    G = np.asarray(model.cdf(x))
    m = np.asarray(model.m_value(x), dtype=float)
    n = np.asarray(model.n_value(x), dtype=float)
    if L == 2:
        I = np.asarray(model.kernel(x, B), dtype=float)
        inc = (N / m) * (1.0 - n * I)
        val = np.where(inc > gap, np.asarray(stage_utility(model, x, B)), -np.inf)
        i = int(np.argmax(val))
        if not math.isfinite(val[i]):
            raise UnsupportedError("no feasible threshold on the scan grid")
        nb = [val[j] for j in (i - 1, i + 1) if 0 <= j < x.size and math.isfinite(val[j])]
        bound = max((abs(val[i] - b) for b in nb), default=0.0)
        return ScanResult((A, float(x[i]), B), float(val[i]), float(bound), int(x.size))

    # L == 3: all pairs a < b
    a, b = np.meshgrid(np.arange(x.size), np.arange(x.size), indexing="ij")
    ok = a < b
    va, vb = x[a[ok]], x[b[ok]]
    Iab = np.asarray(model.kernel(va, vb), dtype=float)
    IbB = np.asarray(model.kernel(vb, B), dtype=float)
    inc1 = (N / m[a[ok]]) * (G[b[ok]] - n[a[ok]] * Iab)
    inc2 = (N / m[b[ok]]) * (1.0 - G[a[ok]] - n[b[ok]] * IbB)
    u = np.asarray(stage_utility(model, va, vb)) + np.asarray(stage_utility(model, vb, B))
    vals = np.full(a.shape, -np.inf)
    vals[ok] = np.where((inc1 > gap) & (inc2 > gap), u, -np.inf)
    k = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = float(vals[k])
    if not math.isfinite(best):
        raise UnsupportedError("no feasible threshold pair on the scan grid")
    nb = []
    for d in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        j = (k[0] + d[0], k[1] + d[1])
        if 0 <= j[0] < x.size and 0 <= j[1] < x.size and math.isfinite(vals[j]):
            nb.append(abs(best - vals[j]))
    return ScanResult((A, float(x[k[0]]), float(x[k[1]]), B), best, float(max(nb, default=0.0)),
                      int(x.size))


__all__ = [
    "DiscreteProfile",
    "RegretReport",
    "ScanResult",
    "best_response_cost",
    "brute_force_revenue",
    "brute_force_single_ne",
    "verify_epsilon_ne",
]
