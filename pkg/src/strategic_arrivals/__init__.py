"""Equilibrium arrival times and priority pricing for strategic customers.

Customers choose when to arrive before a fixed service start and, with
several priority queues, which queue to join.  The package computes the
equilibrium profiles, the revenue-maximizing price ladders, and brute-force
certificates for both.
"""

from .core_model import (
    AssumptionReport,
    CostModel,
    MWeight,
    NWeight,
    PriceLadder,
    TypeDistribution,
    WaitCost,
    cdf,
    check_assumptions,
    kernel_integral,
    min_price_gap,
    sup_y,
    wait_cost,
    wait_cost_inverse,
    weight_m,
    weight_m_prime,
    weight_n,
    weight_n_prime,
    y_of_v,
)
from .errors import *  # noqa: F401,F403
from .multi_queue import (
    EquilibriumProfile,
    arrival_time,
    joining_cost,
    queue_fraction,
    queue_of,
    solve_thresholds,
    threshold_residual,
)
from .revenue_opt import (
    RevenueSolution,
    optimize_prices,
    prices_from_thresholds,
    revenue_from_prices,
    revenue_of_thresholds,
    stage_utility,
)
from .single_queue import (
    BoardingCost,
    GradePricing,
    SingleQueueProfile,
    continuum_revenue,
    ne_arrival_time,
    ne_arrival_time_generalized,
    ne_grade,
    realized_fraction,
)
from .verification import (
    RegretReport,
    best_response_cost,
    brute_force_revenue,
    brute_force_single_ne,
    verify_epsilon_ne,
)

__version__ = "0.1.0"
