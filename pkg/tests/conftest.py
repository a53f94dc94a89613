import numpy as np
import pytest

from strategic_arrivals import CostModel, MWeight, NWeight, PriceLadder, TypeDistribution, WaitCost
from strategic_arrivals.revenue_opt import price_increments, prices_from_thresholds
from strategic_arrivals.core_model import min_price_gap

ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def acceptance():
    return record


def make_model(A, B, N=10, r=1.0, delta=0.05, m_kind="paper-log", n=None):
    return CostModel(TypeDistribution.uniform(A, B), N, WaitCost("power", r),
                     n or NWeight(), MWeight(m_kind, delta))


@pytest.fixture(scope="session")
def u5_15():
    return make_model(5, 15)


@pytest.fixture(scope="session")
def u0_20():
    return make_model(0, 20)


@pytest.fixture(scope="session")
def three_queue_prices():
    return PriceLadder((0.0, 8.75, 11.45))


def random_scenarios(count=20, seed=7):
    """Feasible (model, interior thresholds, prices) triples with the price gap respected."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        A = 0.0 if rng.random() < 0.5 else float(rng.uniform(1, 20))
        B = A + float(rng.uniform(5, 150))
        kind = "paper-linear" if (A > 0 and rng.random() < 0.5) else "paper-log"
        model = make_model(A, B, N=int(rng.integers(5, 21)), r=float(rng.choice([0.5, 1, 2])),
                           delta=float(rng.uniform(0.01, 0.1)), m_kind=kind)
        L = int(rng.integers(2, 5))
        # thresholds concentrated in the upper part of the support where the gap can hold
        th = np.sort(rng.uniform(A + 0.5 * (B - A), B - 1e-3 * (B - A), L - 1))
        if np.any(np.diff(th) < 1e-3 * (B - A)):
            continue
        inc = price_increments(model, th)
        if inc.size and np.min(inc) <= min_price_gap(model):
            continue
        out.append((model, tuple(float(x) for x in th), prices_from_thresholds(model, th)))
    return out
