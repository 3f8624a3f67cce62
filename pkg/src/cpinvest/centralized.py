"""Centralized allocation solved by bisection on the first-order condition in Q."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytics import (
    DEFAULT_TIE_TOLERANCE,
    ComparisonReport,
    SplitPolicy,
    centralized_is_interior,
    centralized_residual,
    gamma_centralized,
    gamma_nash,
    nash_equilibrium,
    optimal_private_given_Q,
    price_of_anarchy,
    utility_ratio,
)
from .model import GameOutcome, InvestmentProfile, Market, cp_utility, total_utility

RESIDUAL_LIMIT = 1e-8
GAMMA_IDENTITY_RTOL = 1e-8


class SolverError(RuntimeError):
    """Raised when the centralized solver cannot certify its answer."""


@dataclass(frozen=True)
class SolverConfig:
    abs_tolerance: float = 1e-10
    max_iterations: int = 200
    bracket_growth: float = 2.0

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise ValueError("abs_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.bracket_growth > 1:
            raise ValueError("bracket_growth must exceed 1")


def bracket_root(market: Market, config: SolverConfig = SolverConfig()) -> tuple[float, float]:
    """Interval ``(lo, hi)`` with ``residual(lo) > 0 >= residual(hi)``.

    The optimum lies below ``sum(ra) - 1``, so that is the first upper guess.
    """
    if not centralized_is_interior(market):
        raise ValueError("market is not interior: the centralized optimum has Q = 0")
    lo = 0.0
    hi = max(1.0, math.fsum(market.ra) - 1.0)
    for _ in range(config.max_iterations):
        if centralized_residual(market, hi) <= 0:
            return lo, hi
        lo, hi = hi, hi * config.bracket_growth
    raise SolverError(f"no sign change of the residual below Q = {hi}")


def _bisect(market: Market, lo: float, hi: float, config: SolverConfig) -> tuple[float, int]:
    it = 0
    while hi - lo > config.abs_tolerance and it < config.max_iterations:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if centralized_residual(market, mid) > 0:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), it


def solve_centralized(market: Market, config: SolverConfig = SolverConfig()) -> GameOutcome:
    """Maximize the sum of CP surpluses over total public investment and all
    private investments.

    Only ``Q`` is determined; the per-CP public shares reported are ``Q/N``
    and any other split is equally optimal.
    """
    N = market.n_cps
    diagnostics = {
        "method": "bisection",
        "interior": centralized_is_interior(market),
        "structural_condition_verified": market.structural_condition_verified,
        "q_split": "Q/N per CP; the objective depends only on Q, so the split is arbitrary",
    }
    if diagnostics["interior"]:
        lo, hi = bracket_root(market, config)
        Q, iterations = _bisect(market, lo, hi, config)
        residual = centralized_residual(market, Q)
        if abs(residual) > RESIDUAL_LIMIT:
            raise SolverError(f"residual {residual:.3e} at Q = {Q} exceeds {RESIDUAL_LIMIT}")
        diagnostics.update(bracket=[lo, hi], iterations=iterations, residual=residual)
    else:
        Q = 0.0
        diagnostics.update(iterations=0, residual=centralized_residual(market, 0.0))

    p = tuple(optimal_private_given_Q(cp, Q) for cp in market)
    q = tuple([Q / N] * N)
    profile = InvestmentProfile(q, p)
    P = math.fsum(p)
    gamma = Q / P
    if Q > 0:
        closed = gamma_centralized(market, Q)
        # closed form moves by 2(sum(ra) - 1)/denom^2 per unit of Q error
        denom = math.fsum(market.ra) - (1.0 + Q)
        slack = 2.0 * (denom + 1.0 + Q) / denom**2 * config.abs_tolerance
        if abs(closed - gamma) > GAMMA_IDENTITY_RTOL * abs(gamma) + slack:
            raise SolverError(f"trade-off mismatch: closed form {closed} vs direct {gamma}")
        diagnostics["gamma_closed_form"] = closed
    return GameOutcome(
        market=market,
        q_star=q,
        p_star=p,
        Q_star=Q,
        P_star=P,
        per_cp_utility=tuple(cp_utility(market, profile, n) for n in range(N)),
        total_utility=total_utility(market, profile),
        gamma=gamma,
        diagnostics=diagnostics,
    )


def compare(
    market: Market,
    config: SolverConfig = SolverConfig(),
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    split: SplitPolicy = SplitPolicy.EQUAL,
) -> ComparisonReport:
    """Solve both regimes and report the price of anarchy and utility ratio."""
    cen = solve_centralized(market, config)
    nash = nash_equilibrium(market, tie_tolerance=tie_tolerance, split=split)
    return ComparisonReport(
        eta=price_of_anarchy(cen.Q_star, nash.Q_star),
        capital_gamma=utility_ratio(cen.total_utility, nash.total_utility),
        gamma_c=cen.gamma,
        gamma_n=gamma_nash(market, nash),
        centralized=cen,
        nash=nash,
    )
