"""Closed-form results for the centralized and non-cooperative regimes.

Conventions for degenerate ratios: an unbounded price of anarchy is
``math.inf`` and an undefined ratio is ``math.nan``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

from .model import (
    CpParams,
    GameOutcome,
    InvestmentProfile,
    Market,
    cp_utility,
    total_utility,
)

DEFAULT_TIE_TOLERANCE = 1e-9


def _check_Q(Q: float):
    if not Q >= 0:
        raise ValueError(f"total public investment Q = {Q!r} must be non-negative")


def _root_gap(cp: CpParams, Q: float) -> float:
    # sqrt((1+Q)^2 + 2 b^2 ra) - (1+Q), rationalized to avoid cancellation at large Q
    x = 1.0 + Q
    c = 2.0 * cp.b * cp.b * cp.ra
    return c / (math.sqrt(x * x + c) + x)


def optimal_private_given_Q(cp: CpParams, Q: float) -> float:
    """Private investment maximizing the CP's surplus when total public investment is ``Q``.

    Always strictly positive, and convex decreasing in ``Q``.
    """
    _check_Q(Q)
    return (_root_gap(cp, Q) / (2.0 * cp.b)) ** 2


def per_cp_marginal(cp: CpParams, Q: float) -> float:
    """Marginal revenue of public investment for one CP once its private
    investment has been re-optimized: ``(sqrt((1+Q)^2 + 2 b^2 ra) - (1+Q)) / b^2``.

    Strictly decreasing in ``Q``; equals 1 at ``Q = ra - b^2/2 - 1``.
    """
    _check_Q(Q)
    return _root_gap(cp, Q) / (cp.b * cp.b)


def centralized_residual(market: Market, Q: float) -> float:
    """Derivative of the centralized objective in ``Q`` (private parts optimized)."""
    _check_Q(Q)
    return math.fsum(per_cp_marginal(cp, Q) for cp in market) - 1.0


def centralized_is_interior(market: Market) -> bool:
    """Whether the centralized optimum has strictly positive public investment."""
    return centralized_residual(market, 0.0) > 0.0


def gamma_centralized(market: Market, Q_c_star: float) -> float:
    """Trade-off at the centralized optimum, ``2Q / (sum(ra) - (1+Q))``.

    Raises:
        ValueError: if the denominator is not positive, which means
            ``Q_c_star`` cannot be a centralized optimum.
    """
    _check_Q(Q_c_star)
    if Q_c_star == 0:
        return 0.0
    denom = math.fsum(market.ra) - (1.0 + Q_c_star)
    if denom <= 0:
        raise ValueError(
            f"Q = {Q_c_star} is not a centralized optimum (sum(ra) - (1+Q) = {denom} <= 0)"
        )
    return 2.0 * Q_c_star / denom


def value_function(cp: CpParams, Q: float) -> float:
    """``log((sqrt((1+Q)^2 + 2 b^2 ra) + (1+Q)) / 2)``: log of the effective
    capacity ``1 + Q + b sqrt(p*)`` seen by the CP at its best private response."""
    _check_Q(Q)
    x = 1.0 + Q
    return math.log((math.sqrt(x * x + 2.0 * cp.b * cp.b * cp.ra) + x) / 2.0)


def reduced_utility(cp: CpParams, Q: float, q_n: float) -> float:
    """CP surplus with its private investment already at the best response.

    ``Q`` is the total public investment and ``q_n`` the CP's own share.
    """
    _check_Q(Q)
    if not 0 <= q_n <= Q:
        raise ValueError(f"own contribution q_n = {q_n} must lie in [0, Q = {Q}]")
    return cp.ra * value_function(cp, Q) - optimal_private_given_Q(cp, Q) - q_n


class SplitPolicy(enum.Enum):
    """How equilibrium public investment is divided among tied contributors."""

    EQUAL = "equal"
    LOWEST_INDEX = "lowest"


@dataclass(frozen=True)
class NashOutcome(GameOutcome):
    """Pure-strategy Nash equilibrium.

    ``contributor_set`` holds the 0-based indices of the CPs attaining the
    maximum of ``ra - b^2/2`` (the only possible contributors). When it has
    more than one member, any nonnegative split of ``Q_star`` among them is an
    equilibrium and ``degenerate`` is set.
    """

    contributor_set: frozenset[int] = frozenset()
    q_split_policy: SplitPolicy = SplitPolicy.EQUAL
    degenerate: bool = False

    def to_dict(self) -> dict[str, Any]:
        d = super().to_dict()
        d["contributor_set"] = sorted(n + 1 for n in self.contributor_set)
        d["q_split_policy"] = self.q_split_policy.value
        d["degenerate"] = self.degenerate
        return d


def contribution_index(market: Market) -> list[float]:
    """``ra - b^2/2`` per CP; the largest value minus one is the equilibrium Q."""
    return [cp.ra - cp.b * cp.b / 2.0 for cp in market]


def nash_equilibrium(
    market: Market,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    split: SplitPolicy = SplitPolicy.EQUAL,
) -> NashOutcome:
    """Non-cooperative equilibrium of the public-investment game.

    ``tie_tolerance`` is relative: CPs whose index is within
    ``tie_tolerance * max(1, |best|)`` of the best are treated as tied.
    """
    split = SplitPolicy(split)
    index = contribution_index(market)
    best = max(index)
    band = tie_tolerance * max(1.0, abs(best))
    contributors = frozenset(n for n, v in enumerate(index) if best - v <= band)
    N = market.n_cps

    if best <= 1.0:
        Q = 0.0
        q = [0.0] * N
        contributors_out = frozenset()
    else:
        Q = best - 1.0
        q = [0.0] * N
        members = sorted(contributors)
        if split is SplitPolicy.EQUAL:
            for n in members:
                q[n] = Q / len(members)
        else:
            q[members[0]] = Q
        contributors_out = contributors

    # contributors sit where the root simplifies to b^2/4; use it to avoid an ulp of drift
    p = [
        cp.b * cp.b / 4.0 if n in contributors_out else optimal_private_given_Q(cp, Q)
        for n, cp in enumerate(market)
    ]
    profile = InvestmentProfile(tuple(q), tuple(p))
    per_cp = tuple(cp_utility(market, profile, n) for n in range(N))
    P = math.fsum(p)
    direct_gamma = Q / P
    diagnostics = {
        "method": "closed form",
        "contribution_index": index,
        "structural_condition_verified": market.structural_condition_verified,
    }
    if Q == 0:
        diagnostics["note"] = "no CP contributes"
    outcome = NashOutcome(
        market=market,
        q_star=tuple(q),
        p_star=tuple(p),
        Q_star=Q,
        P_star=P,
        per_cp_utility=per_cp,
        total_utility=total_utility(market, profile),
        gamma=direct_gamma,
        diagnostics=diagnostics,
        contributor_set=contributors_out,
        q_split_policy=split,
        degenerate=len(contributors_out) > 1,
    )
    return outcome


def gamma_nash(market: Market, nash: NashOutcome) -> float:
    """Equilibrium trade-off, using ``b^2/4`` as the private investment of
    every contributor and the best response at ``Q_star`` for free riders."""
    Q = nash.Q_star
    if Q == 0:
        return 0.0
    P = math.fsum(
        cp.b * cp.b / 4.0 if n in nash.contributor_set else optimal_private_given_Q(cp, Q)
        for n, cp in enumerate(market)
    )
    return Q / P


def gamma_nash_symmetric(market: Market, Q_n_star: float) -> float:
    """Trade-off when every CP is a contributor: ``Q / sum(b^2/4)``."""
    return Q_n_star / math.fsum(cp.b * cp.b / 4.0 for cp in market)


def price_of_anarchy(Q_c_star: float, Q_n_star: float) -> float:
    """``Q_C / Q_N``; ``inf`` when the equilibrium has no public investment.

    The ``0/0`` case also returns ``inf``: without public investment in the
    equilibrium the ratio is treated as unbounded regardless of the optimum.
    """
    if Q_c_star < 0 or Q_n_star < 0:
        raise ValueError("public investments must be non-negative")
    if Q_n_star == 0:
        return math.inf
    return Q_c_star / Q_n_star


def utility_ratio(u_c_star: float, u_n_star: float) -> float:
    """``U_C / U_N``; ``nan`` when the equilibrium sum utility is zero."""
    if u_n_star == 0:
        return math.nan
    return u_c_star / u_n_star


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side metrics of the centralized and Nash outcomes of one market."""

    eta: float
    capital_gamma: float
    gamma_c: float
    gamma_n: float
    centralized: GameOutcome
    nash: NashOutcome
    notes: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eta": self.eta,
            "Gamma": self.capital_gamma,
            "gamma_c": self.gamma_c,
            "gamma_n": self.gamma_n,
            "centralized": self.centralized.to_dict(),
            "nash": self.nash.to_dict(),
        }
