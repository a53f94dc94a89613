"""The ten acceptance criteria, one test each.

Every test records a one-line verdict through the ``acceptance`` fixture;
the lines are printed in the terminal summary.
"""

import math
import time
import warnings

import numpy as np
import pytest
from scipy.integrate import dblquad

from strategic_arrivals import (
    GradePricing,
    arrival_time,
    brute_force_revenue,
    brute_force_single_ne,
    continuum_revenue,
    joining_cost,
    ne_arrival_time,
    optimize_prices,
    prices_from_thresholds,
    revenue_from_prices,
    revenue_of_thresholds,
    solve_thresholds,
    threshold_residual,
    verify_epsilon_ne,
)
from strategic_arrivals.cli import sweep_two_queue
from strategic_arrivals.errors import AssumptionWarning

from conftest import make_model, random_scenarios

LN3 = math.log(3)


def test_criterion_01_single_queue_oracle(acceptance):
    model = make_model(5, 15)
    t0 = time.perf_counter()
    disc = brute_force_single_ne(model, n_types=101, n_times=10001)
    elapsed = time.perf_counter() - t0
    T = np.asarray(ne_arrival_time(model, disc.types))
    steps = float(np.max(np.abs(disc.times - T)) / disc.time_step)
    t_low = float(ne_arrival_time(model, 5.0))
    ok = steps < 2 and abs(t_low - LN3) < 1e-6 and elapsed < 30
    acceptance(1, ok, f"max |T_grid - T_NE| = {steps:.3f} steps, T(5) - ln3 = {t_low - LN3:.1e}, "
                      f"{elapsed:.1f}s")
    assert steps < 2
    assert abs(t_low - LN3) < 1e-6
    assert elapsed < 30


def test_criterion_02_revenue_invariance(acceptance):
    model = make_model(5, 15)
    pricings = [GradePricing("power", LN3, k) for k in (1.0, 2.0, 3.0)]
    revs = [continuum_revenue(model, p) for p in pricings]
    ref, _ = dblquad(lambda x, v: 1.0 / (10 * x), 5, 15, lambda v: v, lambda v: 15, epsabs=1e-13)
    spread = (max(revs) - min(revs)) / revs[0]
    ok = spread < 1e-6 and abs(revs[0] - ref) < 1e-5 and abs(revs[0] - 0.45069) < 1e-5
    acceptance(2, ok, f"revenues {revs[0]:.8f} (spread {spread:.1e}), nested quadrature {ref:.8f}")
    assert spread < 1e-6
    assert revs[0] == pytest.approx(ref, abs=1e-5)
    assert revs[0] == pytest.approx(0.45069, abs=1e-5)


def test_criterion_03_multi_queue_certification(acceptance, u0_20, three_queue_prices):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AssumptionWarning)
        prof = solve_thresholds(u0_20, three_queue_prices)
    res = max(abs(r) for r in threshold_residual(u0_20, three_queue_prices, prof.thresholds))
    rep = verify_epsilon_ne(prof, types=401, times=4001)
    v = np.sort(np.random.default_rng(3).uniform(u0_20.v_min, 20, 500))
    single = np.asarray(ne_arrival_time(u0_20, v))
    monotone = bounded = True
    for l in range(prof.L):
        T = np.asarray(arrival_time(prof, l, v))
        monotone &= bool(np.all(np.diff(T) <= 1e-10))
        bounded &= bool(np.all(T <= single + 1e-10))
    ok = res < 1e-8 and rep.max_regret < 1e-3 * u0_20.N and monotone and bounded
    acceptance(3, ok, f"thresholds {prof.interior[0]:.6f}, {prof.interior[1]:.6f}; residual {res:.1e}; "
                      f"max regret {rep.max_regret:.2e}; monotone and bounded {monotone and bounded}")
    assert res < 1e-8
    assert rep.max_regret < 1e-3 * u0_20.N
    assert monotone and bounded


def test_criterion_04_round_trip(acceptance):
    worst_p = worst_v = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AssumptionWarning)
        for model, th, prices in random_scenarios(20, seed=7):
            prof = solve_thresholds(model, prices)
            worst_v = max(worst_v, float(np.max(np.abs(np.asarray(prof.interior) - th))) / model.dist.width)
            back = np.asarray(prices_from_thresholds(model, prof.interior).prices[1:])
            orig = np.asarray(prices.prices[1:])
            worst_p = max(worst_p, float(np.max(np.abs(back - orig) / orig)))
    ok = worst_p < 1e-6 and worst_v < 1e-6
    acceptance(4, ok, f"20 scenarios: price rel err {worst_p:.1e}, threshold err/(B-A) {worst_v:.1e}")
    assert worst_p < 1e-6
    assert worst_v < 1e-6


def test_criterion_05_optimal_revenue_u0_20(acceptance, u0_20):
    t0 = time.perf_counter()
    revs = [optimize_prices(u0_20, L).revenue for L in (2, 3, 4)]
    elapsed = time.perf_counter() - t0
    target = [2.26, 2.46, 2.50]
    ok = all(abs(r - t) <= 0.03 for r, t in zip(revs, target)) and elapsed < 120
    acceptance(5, ok, "revenues " + " / ".join(f"{r:.4f}" for r in revs) + f", {elapsed:.1f}s")
    for r, t in zip(revs, target):
        assert abs(r - t) <= 0.03
    assert elapsed < 120


def test_criterion_06_published_revenue_arithmetic(acceptance):
    # published thresholds and prices for U[0,150]
    rows = {
        2: ((135.28,), (76.73,), 7.53),
        3: ((134.35, 143.46), (71.68, 79.75), 7.83),
        4: ((134.0, 139.22, 142.52), (69.92, 73.65, 76.58), 7.87),
    }
    got = {}
    for L, (th, P, _) in rows.items():
        G = np.diff(np.array((0.0,) + th + (150.0,)) / 150.0)
        got[L] = revenue_from_prices(None, (0.0,) + P, G)
    ok = all(abs(got[L] - rows[L][2]) <= 0.01 for L in rows)
    acceptance(6, ok, "sums " + " / ".join(f"{got[L]:.3f}" for L in rows) + " vs 7.53 / 7.83 / 7.87")
    for L in rows:
        assert abs(got[L] - rows[L][2]) <= 0.01


@pytest.fixture(scope="module")
def price_sweep():
    model = make_model(5, 15, delta=0.01)
    prices = np.linspace(1.0, 150.0, 150)
    return {d: sweep_two_queue(model, prices, d) for d in (0.0, 0.01)}


def test_criterion_07_threshold_vs_price(acceptance, price_sweep):
    verdict = {}
    for d, rows in price_sweep.items():
        v1 = [r[1] for r in rows if r[3] == "ok"]
        increasing = all(b > a for a, b in zip(v1, v1[1:]))
        saturated = any(r[3] == "paid-queue-empty" for r in rows)
        verdict[d] = (increasing, saturated, len(v1))
    ok = (verdict[0.0][0] and verdict[0.01][0] and verdict[0.01][1] and not verdict[0.0][1])
    sat = next(r[0] for r in price_sweep[0.01] if r[3] == "paid-queue-empty") if verdict[0.01][1] else None
    acceptance(7, ok, f"v1 increasing (delta 0: {verdict[0.0][0]}, 0.01: {verdict[0.01][0]}); "
                      f"v1 = B first at P = {sat} for delta 0.01, never for delta 0")
    assert verdict[0.0][0] and verdict[0.01][0]
    assert verdict[0.01][1]
    assert not verdict[0.0][1]


def test_criterion_08_revenue_vs_price(acceptance, price_sweep):
    r0 = np.array([r[2] for r in price_sweep[0.0]])
    r1 = np.array([r[2] for r in price_sweep[0.01]])
    increasing = bool(np.all(np.diff(r0) > 0))
    d = np.sign(np.diff(r1))
    d = d[d != 0]
    changes = int(np.sum(d[1:] != d[:-1]))
    k = int(np.argmax(r1))
    unimodal = changes == 1 and d[0] > 0 and 0 < k < r1.size - 1
    P = [r[0] for r in price_sweep[0.01]]
    acceptance(8, increasing and unimodal,
               f"delta 0 increasing: {increasing} (R(150) = {r0[-1]:.3f}); delta 0.01 unimodal: {unimodal} "
               f"(peak {r1[k]:.3f} at P = {P[k]:.0f})")
    assert increasing
    assert unimodal


def test_criterion_09_dp_vs_scan(acceptance, u0_20):
    dp2 = optimize_prices(u0_20, 2)
    scan2 = brute_force_revenue(u0_20, 2, grid=100_000)
    dv = abs(dp2.thresholds[1] - scan2.thresholds[1])
    dp3 = optimize_prices(u0_20, 3)
    scan3 = brute_force_revenue(u0_20, 3, grid=200)
    gap3 = dp3.revenue - scan3.revenue
    ok = dv < 1e-4 and -scan3.discretization_bound <= gap3 <= scan3.discretization_bound
    acceptance(9, ok, f"L=2 |dv1| = {dv:.3e}; L=3 DP - scan = {gap3:.1e} "
                      f"(bound {scan3.discretization_bound:.1e})")
    assert dv < 1e-4
    assert abs(gap3) <= scan3.discretization_bound


def test_criterion_10_cost_structure(acceptance):
    failures = []
    worst_identity = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AssumptionWarning)
        scenarios = random_scenarios(20, seed=7)
        for k, (model, th, prices) in enumerate(scenarios):
            prof = solve_thresholds(model, prices)
            full = np.asarray(prof.thresholds)
            L, B = prof.L, model.B
            h = 1e-4 * model.dist.width
            v = np.linspace(model.v_min + 2 * h, B - 2 * h, 200)
            v = v[np.min(np.abs(v[:, None] - full[None, 1:-1]), axis=1) > 2 * h]
            d = np.vstack([(np.asarray(joining_cost(prof, l, v + h)) - np.asarray(joining_cost(prof, l, v - h)))
                           / (2 * h) for l in range(L)])
            if not np.all(d[0][v < full[1]] > 0):
                failures.append((k, "dc_0 > 0"))
            if not np.all(d[1:] < 0):
                failures.append((k, "dc_l < 0"))
            if not all(np.all(d[l] > d[l + 1]) for l in range(1, L - 1)):
                failures.append((k, "slope order"))
            lo = [joining_cost(prof, l, model.v_min) for l in range(L)]
            hi = [joining_cost(prof, l, B) for l in range(L)]
            if not (all(a < b for a, b in zip(lo, lo[1:])) and all(a > b for a, b in zip(hi, hi[1:]))):
                failures.append((k, "boundary order"))
            su = revenue_of_thresholds(model, prof.interior)
            sp = revenue_from_prices(model, prof.prices, prof.occupancies)
            worst_identity = max(worst_identity, abs(su - sp) / max(1.0, abs(su)))
    ok = not failures and worst_identity < 1e-6
    acceptance(10, ok, f"20 scenarios: {len(failures)} ordering failures, revenue identity rel err "
                       f"{worst_identity:.1e}")
    assert not failures, failures
    assert worst_identity < 1e-6
