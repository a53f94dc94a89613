import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from strategic_arrivals import (
    BoardingCost,
    CostModel,
    GradePricing,
    NWeight,
    SingleQueueProfile,
    TypeDistribution,
    continuum_revenue,
    ne_arrival_time,
    ne_arrival_time_generalized,
    ne_grade,
    realized_fraction,
)
from strategic_arrivals.errors import DivergentIntegralError, DomainError, InfeasiblePricingError

from conftest import make_model

LN3 = math.log(3)


def test_arrival_time_examples(u5_15):
    assert ne_arrival_time(u5_15, 15.0) == 0.0
    assert ne_arrival_time(u5_15, 5.0) == pytest.approx(LN3, abs=1e-12)
    assert ne_arrival_time(make_model(5, 15, r=2), 5.0) == pytest.approx(math.sqrt(LN3), abs=1e-12)
    assert ne_arrival_time(make_model(5, 15, r=2), 5.0) == pytest.approx(1.04815, abs=1e-5)


def test_arrival_time_diverges_at_zero(u0_20):
    with pytest.raises(DivergentIntegralError):
        ne_arrival_time(u0_20, 0.0)
    assert math.isfinite(ne_arrival_time(u0_20, u0_20.v_min))


def test_arrival_time_monotone():
    for model in (make_model(5, 15), make_model(0, 20, r=2), make_model(5, 15, n=NWeight("power", 3.0, 2.0))):
        v = np.sort(np.random.default_rng(1).uniform(max(model.v_min, model.A), model.B, 1000))
        T = np.asarray(ne_arrival_time(model, v))
        assert np.all(np.diff(T) <= 1e-12)


def test_decreasing_weight_reverses_profile():
    model = make_model(5, 15, n=NWeight("power", 100.0, -1.0))
    v = np.linspace(5, 15, 200)
    T = np.asarray(ne_arrival_time(model, v))
    assert T[0] == 0.0
    assert np.all(np.diff(T) >= -1e-12)
    ref, _ = quad(lambda x: x / 100 / 10, 5, 15)
    assert T[-1] == pytest.approx(10 * ref, rel=1e-10)
    prof = SingleQueueProfile(model, grid_size=101)
    assert realized_fraction(prof, 7.0) == pytest.approx(0.8)
    assert prof.fraction_before(ne_arrival_time(model, 7.0)) == pytest.approx(0.8, abs=1e-8)


def test_generalized_reduces_to_plain(u5_15):
    v = np.linspace(5, 15, 50)
    plain = np.asarray(ne_arrival_time(u5_15, v))
    gen = np.asarray(ne_arrival_time_generalized(u5_15, v, BoardingCost(10.0, 1.0)))
    assert np.allclose(gen, plain, rtol=1e-10, atol=1e-12)


def test_generalized_quadratic_boarding_cost(u5_15):
    # h(x) = x^2: integral of 2 G(x) / x dG over [5, 15]
    exact = 0.02 * (10 - 5 * LN3)
    ref, _ = quad(lambda x: 2 * (x - 5) / 10 / x / 10, 5, 15, epsabs=1e-14)
    assert exact == pytest.approx(ref, rel=1e-12)
    assert ne_arrival_time_generalized(u5_15, 5.0, BoardingCost(1.0, 2.0)) == pytest.approx(exact, rel=1e-9)
    assert ne_arrival_time_generalized(u5_15, 5.0, BoardingCost(1.0, 2.0)) == pytest.approx(0.0901387711, abs=1e-9)
    assert ne_arrival_time_generalized(u5_15, 15.0, BoardingCost(1.0, 2.0)) == 0.0


def test_generalized_rejects_non_monotone():
    with pytest.raises(DomainError):
        BoardingCost(-1.0, 1.0)
    with pytest.raises(DomainError):
        BoardingCost(1.0, 0.0)


def test_realized_fraction(u5_15):
    prof = SingleQueueProfile(u5_15)
    assert realized_fraction(prof, 5.0) == 0.0
    assert realized_fraction(prof, 15.0) == 1.0
    assert realized_fraction(prof, 10.0) == 0.5
    # F inverted from the profile agrees with G
    v = np.linspace(5.5, 14.5, 19)
    F = np.asarray(prof.fraction_before(np.asarray(ne_arrival_time(u5_15, v))))
    assert np.allclose(F, np.asarray(u5_15.cdf(v)), atol=1e-9)


def test_cost_minimized_at_equilibrium_time():
    for model in (make_model(5, 15), make_model(5, 15, r=2)):
        prof = SingleQueueProfile(model)
        t = np.linspace(0.0, float(ne_arrival_time(model, 5.0)), 2001)
        step = t[1] - t[0]
        F = np.asarray(prof.fraction_before(t))
        g = np.asarray(model.g(t))
        for v in np.linspace(5.0, 15.0, 50):
            cost = model.N * F + v * g
            k = int(np.argmin(cost))
            T = ne_arrival_time(model, v)
            c_T = model.N * prof.fraction_before(T) + v * model.g(T)
            # a flat cost near t = 0 (g = t^2, top type) makes the argmin ambiguous
            assert abs(t[k] - T) <= step + 1e-12 or abs(cost[k] - c_T) < 1e-9 * model.N
            assert cost[k] >= c_T - 1e-9 * model.N


def test_grade_examples(u5_15):
    lin = GradePricing("power", LN3, 1.0)
    quad_p = GradePricing("power", LN3, 2.0)
    assert ne_grade(u5_15, lin, 15.0) == 0.0
    assert ne_grade(u5_15, lin, 5.0) == pytest.approx(1.0, abs=1e-12)
    assert ne_grade(u5_15, quad_p, 5.0) == pytest.approx(1.0, abs=1e-12)
    w = np.asarray(ne_grade(u5_15, quad_p, np.linspace(5, 15, 101)))
    assert np.all(np.diff(w) <= 1e-12)


def test_grade_infeasible(u5_15):
    with pytest.raises(InfeasiblePricingError):
        ne_grade(u5_15, GradePricing("power", 1.0, 1.0), 10.0)
    with pytest.raises(InfeasiblePricingError):
        continuum_revenue(u5_15, GradePricing("power", 1.0, 1.0))


def test_grade_pricing_validation():
    with pytest.raises(DomainError):
        GradePricing("power", 0.0, 1.0)
    with pytest.raises(DomainError):
        GradePricing("tabulated", grades=(0, 0.5, 1), prices=(0, 2, 1))


def test_continuum_revenue_oracle(u5_15):
    exact = (15 - 5 * LN3 - 5) / 10
    # independent nested quadrature of P(w(v)) = N I(v, B) over G
    ref, _ = dblquad(lambda x, v: 10 / (10 * x) / 10, 5, 15, lambda v: v, lambda v: 15, epsabs=1e-13)
    assert exact == pytest.approx(ref, rel=1e-9)
    assert continuum_revenue(u5_15, GradePricing("power", LN3, 1.0)) == pytest.approx(0.450693855666, abs=1e-11)


def test_continuum_revenue_invariant(u5_15):
    pricings = [
        GradePricing("power", LN3, 1.0),
        GradePricing("power", LN3, 2.0),
        GradePricing("power", 3.0, 3.0),
        GradePricing("tabulated", grades=(0, 0.3, 0.6, 1), prices=(0, 0.1, 0.9, 1.2)),
    ]
    revs = [continuum_revenue(u5_15, p) for p in pricings]
    assert max(revs) - min(revs) < 1e-6 * revs[0]


@settings(max_examples=15, deadline=None)
@given(st.floats(1.2, 10.0), st.floats(0.3, 4.0))
def test_continuum_revenue_invariant_property(pmax, k):
    model = make_model(5, 15)
    assert continuum_revenue(model, GradePricing("power", pmax, k)) == pytest.approx(
        (15 - 5 * LN3 - 5) / 10, rel=1e-8)


def test_continuum_revenue_point_mass_limit():
    # I(v, B) = (1 - G(v)) / n_B does not vanish as the law collapses onto B,
    # so the revenue tends to N / (2 B) rather than 0
    model = make_model(15 - 1e-6, 15)
    rev = continuum_revenue(model, GradePricing("power", 1.0, 1.0))
    assert rev == pytest.approx(10 / (2 * 15), rel=1e-6)


def test_tabulated_distribution_profile():
    model = CostModel(TypeDistribution.tabulated([5, 8, 15], [0, 0.6, 1]), 10)
    ref, _ = quad(lambda x: (0.6 / 3 if x < 8 else 0.4 / 7) / x, 5, 15, points=[8])
    assert ne_arrival_time(model, 5.0) == pytest.approx(10 * ref, rel=1e-10)
