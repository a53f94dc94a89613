"""Revenue of a threshold profile and its maximization over thresholds.

Normalized revenue (revenue / (N eps)) of thresholds v_1 < ... < v_{L-1}
decomposes into stage utilities,

    R = sum_l u(v_l, v_{l+1}),   v_L = B,

so the best ladder is found by a finite-horizon dynamic program over a
threshold grid followed by coordinate-wise refinement.  Prices follow from
the thresholds by telescoping the equilibrium conditions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .core_model import CostModel, PriceLadder, _as_output, _prep, check_assumptions, min_price_gap
from .errors import DomainError, InfeasibleThresholdsError, SingularityError, UnboundedRevenueWarning


def _u_parts(N, Ga, na, ma, Gb, mb, I):
    """Stage utility from pre-evaluated ingredients, with the 0 * inf limits set to 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        wait = np.where(na == 0.0, 0.0, na * I)
        first = np.where(np.isinf(ma), 0.0, (N / ma) * (Gb - wait) * (1.0 - Ga))
        tail = Ga * (1.0 - Gb)
        second = np.where(tail == 0.0, 0.0, (N / mb) * tail)
    return first - second


def stage_utility(model: CostModel, a, b):
    """u(a, b): revenue contribution of the queue whose lower threshold is a and upper is b."""
    a_arr, a_s = _prep(model.dist.check_support(a))
    b_arr, b_s = _prep(model.dist.check_support(b))
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    if np.any(a_arr > b_arr):
        raise DomainError("stage utility needs a <= b")
    Ga = np.asarray(model.cdf(a_arr))
    Gb = np.asarray(model.cdf(b_arr))
    ma = np.asarray(model.m_value(a_arr), dtype=float)
    mb = np.asarray(model.m_value(b_arr), dtype=float)
    if np.any((mb == 0) & (Ga * (1 - Gb) > 0)):
        raise SingularityError("m vanishes at an upper threshold below B")
    na = np.asarray(model.n_value(a_arr), dtype=float)
    I = np.zeros(a_arr.shape)
    need = (na > 0) & (b_arr > a_arr)
    if np.any(need):
        I[need] = model.kernel(a_arr[need], b_arr[need])
    out = _u_parts(model.N, Ga, na, ma, Gb, mb, I)
    return _as_output(out, a_s and b_s)


def _split_thresholds(model: CostModel, thresholds) -> tuple:
    th = [float(x) for x in thresholds]
    if len(th) >= 2 and th[0] == model.A and th[-1] == model.B:
        th = th[1:-1]
    full = [model.A] + th + [model.B]
    if any(b <= a for a, b in zip(full, full[1:])):
        raise DomainError(f"thresholds must be strictly ordered inside (A, B), got {th}")
    return tuple(full)


def price_increments(model: CostModel, thresholds) -> np.ndarray:
    """P_l - P_{l-1} implied by the thresholds, l = 1..L-1 (may be non-positive)."""
    v = np.asarray(_split_thresholds(model, thresholds))
    if v.size <= 2:
        return np.zeros(0)
    mid = v[1:-1]
    G = np.asarray(model.cdf(v))
    m = np.asarray(model.m_value(mid), dtype=float)
    n = np.asarray(model.n_value(mid), dtype=float)
    I = np.asarray(model.kernel(mid, v[2:]), dtype=float)
    return (model.N / m) * (G[2:] - G[:-2] - n * I)


def prices_from_thresholds(model: CostModel, thresholds) -> PriceLadder:
    """Price ladder under which the given thresholds are the equilibrium."""
    inc = price_increments(model, thresholds)
    if np.any(inc <= 0):
        l = int(np.argmax(inc <= 0)) + 1
        raise InfeasibleThresholdsError(
            f"thresholds imply a non-positive price increment at l={l} ({inc[l - 1]:.6g})")
    return PriceLadder(tuple(np.concatenate([[0.0], np.cumsum(inc)]).tolist()))


def revenue_of_thresholds(model: CostModel, thresholds) -> float:
    """Normalized revenue as the sum of stage utilities."""
    v = _split_thresholds(model, thresholds)
    if len(v) <= 2:
        return 0.0
    return float(np.sum(stage_utility(model, np.asarray(v[1:-1]), np.asarray(v[2:]))))


def revenue_from_prices(model: CostModel, prices, occupancies) -> float:
    """Normalized revenue sum_l F_l(0) P_l."""
    P = prices.prices if isinstance(prices, PriceLadder) else tuple(prices)
    return float(np.dot(np.asarray(P, dtype=float), np.asarray(occupancies, dtype=float)))


@dataclass(frozen=True)
class RevenueSolution:
    L: int
    thresholds: tuple
    prices: PriceLadder
    revenue: float
    occupancies: tuple
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "thresholds": list(self.thresholds),
            "prices": list(self.prices.prices),
            "occupancies": list(self.occupancies),
            "revenue": self.revenue,
            "diagnostics": self.diagnostics,
        }


def _grid(model: CostModel, size: int) -> np.ndarray:
    p_min = float(model.cdf(model.v_min))
    p = p_min + (1.0 - p_min) * (np.arange(size) + 0.5) / size
    return np.asarray(model.dist.quantile(p), dtype=float)


def _dp(model: CostModel, L: int, x: np.ndarray, gap: float):
    """Pair-state dynamic program over thresholds drawn from the grid ``x``.

    The state (v_k, v_{k+1}) carries what the price-gap condition on
    P_k - P_{k-1} needs.  Returns (value, grid indices of v_1..v_{L-1}, value
    function of the last stage).
    """
    N = model.N
    M = x.size
    xe = np.append(x, model.B)
    G = np.asarray(model.cdf(xe))
    n = np.asarray(model.n_value(xe), dtype=float)
    m = np.asarray(model.m_value(xe), dtype=float)
    tail = model.tail_kernel_sorted(xe)
    # I[i, j] = I(x_i, x_j) for i < j
    I = np.maximum(tail[:M, None] - tail[None, :], 0.0)
    upper = np.arange(M)[:, None] < np.arange(M + 1)[None, :]
    U = np.where(upper, _u_parts(N, G[:M, None], n[:M, None], m[:M, None],
                                 G[None, :], m[None, :], I), -np.inf)
    # largest admissible G of the threshold below: ΔP_k > gap
    with np.errstate(invalid="ignore"):
        Gcut = G[None, :] - gap * m[:M, None] / N - n[:M, None] * I
    cut = np.searchsorted(G[:M], Gcut, side="left")
    cut = np.minimum(cut, np.arange(M)[:, None])

    # stage 1: only v_0 = A lies below
    W = np.where(upper & (Gcut > 0.0), 0.0, -np.inf)
    args = []
    for _ in range(2, L):
        S = W[:, :M] + U[:, :M]  # S[h, i] for the next stage
        pm_val = np.full((M, M + 1), -np.inf)
        pm_arg = np.zeros((M, M + 1), dtype=np.int64)
        for c in range(M):
            better = S[c, :] > pm_val[:, c]
            pm_val[:, c + 1] = np.where(better, S[c, :], pm_val[:, c])
            pm_arg[:, c + 1] = np.where(better, c, pm_arg[:, c])
        rows = np.arange(M)[:, None]
        W = np.where(upper, pm_val[rows, cut], -np.inf)
        args.append(pm_arg[rows, cut])
    final = W[:, M] + U[:, M]
    i = int(np.argmax(final))
    best = float(final[i])
    if not math.isfinite(best):
        return best, None, final
    idx = [i]
    j = M
    for arg in reversed(args):
        h = int(arg[i, j])
        idx.append(h)
        i, j = h, i
    return best, list(reversed(idx)), final


def _feasible_value(model: CostModel, v: list, gap: float) -> float:
    try:
        inc = price_increments(model, v)
    except DomainError:
        return -math.inf
    if inc.size and np.min(inc) <= gap:
        return -math.inf
    return revenue_of_thresholds(model, v)


def optimize_prices(model: CostModel, L: int, grid: int = 2001, sweeps: int = 3,
                    enforce_gap: bool = True, gap=None, max_sweeps: int = 50) -> RevenueSolution:
    """Revenue-maximizing thresholds and prices for L queues.

    The dynamic program runs on ``grid`` quantile points, then each threshold
    is refined by a bounded scalar search with its neighbours held fixed.
    With ``enforce_gap`` adjacent prices are kept at least the minimum price
    gap apart (``gap`` overrides the computed value); otherwise prices only
    need to increase.
    """
    if int(L) != L or L < 1:
        raise DomainError(f"L must be a positive integer, got {L}")
    L = int(L)
    A, B, w = model.A, model.B, model.dist.width
    if L == 1:
        return RevenueSolution(1, (A, B), PriceLadder((0.0,)), 0.0, (1.0,),
                               {"grid": 0, "sweeps": 0, "gap": 0.0})
    if grid < L + 1:
        raise DomainError("grid too small for the number of queues")
    if gap is None:
        gap = min_price_gap(model) if enforce_gap else 0.0
    gap = float(gap)

    x = _grid(model, grid)
    best, idx, final = _dp(model, L, x, gap)
    if idx is None:
        raise InfeasibleThresholdsError(
            f"no threshold tuple on the grid satisfies the price gap {gap:g}")
    v = [float(x[k]) for k in idx]
    grid_value = best

    m_B = float(model.m_value(B))
    at_top = idx[-1] == grid - 1
    if m_B == 0 and at_top:
        warnings.warn("revenue increases towards the top of the support; returning the boundary "
                      "grid solution", UnboundedRevenueWarning, stacklevel=2)
        n_sweeps = 0
    else:
        n_sweeps = 0
        value = _feasible_value(model, v, gap)
        while n_sweeps < max_sweeps:
            moved = 0.0
            for k in range(L - 1):
                # two grid cells either side, never crossing a neighbour
                pos = int(np.searchsorted(x, v[k]))
                lo = x[pos - 2] if pos >= 2 else model.v_min
                hi = x[pos + 2] if pos + 2 < grid else B
                lo = max(lo, A if k == 0 else v[k - 1], model.v_min)
                hi = min(hi, B if k == L - 2 else v[k + 1])
                span = hi - lo
                if span <= 0:
                    continue
                lo_s, hi_s = lo + 1e-12 * w, hi - 1e-12 * w

                def negative(t, k=k):
                    trial = list(v)
                    trial[k] = t
                    val = _feasible_value(model, trial, gap)
                    return 1e300 if not math.isfinite(val) else -val

                res = minimize_scalar(negative, bounds=(lo_s, hi_s), method="bounded",
                                      options={"xatol": 1e-10 * w, "maxiter": 500})
                if -res.fun > value:
                    moved = max(moved, abs(res.x - v[k]))
                    v[k] = float(res.x)
                    value = -res.fun
            n_sweeps += 1
            if n_sweeps >= sweeps and moved < 1e-6 * w:
                break

    prices = prices_from_thresholds(model, v)
    full = tuple([A] + v + [B])
    occ = tuple(float(o) for o in np.diff(np.asarray(model.cdf(np.asarray(full)))))
    revenue = revenue_of_thresholds(model, v)
    report = check_assumptions(model, prices)
    sample = np.linspace(0, grid - 1, 11).astype(int)
    diagnostics = {
        "grid": int(grid),
        "sweeps": int(n_sweeps),
        "gap": gap,
        "gap_enforced": bool(enforce_gap),
        "grid_revenue": grid_value,
        "value_samples": [[float(x[s]), float(final[s]) if math.isfinite(final[s]) else None]
                          for s in sample],
        "revenue_from_prices": revenue_from_prices(model, prices, occ),
        "assumptions": report.to_dict(),
    }
    return RevenueSolution(L, full, prices, revenue, occ, diagnostics)
