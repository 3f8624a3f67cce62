"""Investment decisions of content providers sharing a neutral ISP."""

from .analytics import (
    ComparisonReport,
    NashOutcome,
    SplitPolicy,
    centralized_is_interior,
    centralized_residual,
    gamma_centralized,
    gamma_nash,
    nash_equilibrium,
    optimal_private_given_Q,
    per_cp_marginal,
    price_of_anarchy,
    reduced_utility,
    utility_ratio,
)
from .centralized import SolverConfig, SolverError, bracket_root, compare, solve_centralized
from .model import (
    CpParams,
    GameOutcome,
    InvestmentProfile,
    Market,
    cp_utility,
    load_market,
    market_from_products,
    public_private_tradeoff,
    total_utility,
    validate_market,
)

__version__ = "0.1.0"
