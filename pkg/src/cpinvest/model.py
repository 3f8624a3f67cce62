"""Domain types and utility evaluation for content providers sharing a neutral ISP.

Each content provider (CP) ``n`` has a revenue rate ``r``, a consumption scale
``a`` and a private-investment efficiency ``b``. With public investments ``q``
and private investments ``p`` its surplus is::

    U_n = r a log(1 + Q + b sqrt(p_n)) - (p_n + q_n),    Q = sum(q)

Everything downstream depends on ``r`` and ``a`` only through the product
``r * a``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Any, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class CpParams:
    """Primitives of one content provider.

    Attributes:
        revenue_rate: revenue per unit of traffic (``r``), > 0.
        consumption_scale: scale of the traffic gain (``a``), > 0.
        private_efficiency: private-investment efficiency (``b``), >= 1 unless
            the owning market was built with ``allow_b_below_one``.
    """

    revenue_rate: float
    consumption_scale: float
    private_efficiency: float

    @property
    def ra(self) -> float:
        return self.revenue_rate * self.consumption_scale

    @property
    def b(self) -> float:
        return self.private_efficiency

    def consumption_gain(self, x: float) -> float:
        """Traffic gain ``a log(1 + x)`` for an effective investment ``x >= 0``."""
        return self.consumption_scale * math.log1p(x)

    def private_equivalent(self, p: float) -> float:
        """Public-equivalent of a private investment, ``b sqrt(p)``."""
        return self.private_efficiency * math.sqrt(p)


@dataclass(frozen=True)
class Market:
    """Ordered collection of CPs served by one ISP.

    Indices are 0-based in code; human-facing reports print them 1-based.
    """

    cps: tuple[CpParams, ...]
    allow_b_below_one: bool = False

    def __len__(self) -> int:
        return len(self.cps)

    def __iter__(self):
        return iter(self.cps)

    def __getitem__(self, n: int) -> CpParams:
        return self.cps[n]

    @property
    def n_cps(self) -> int:
        return len(self.cps)

    @property
    def ra(self) -> np.ndarray:
        return np.array([cp.ra for cp in self.cps])

    @property
    def b(self) -> np.ndarray:
        return np.array([cp.b for cp in self.cps])

    @property
    def structural_condition_verified(self) -> bool:
        """True when every ``b >= 1``, so ``b sqrt(p) >= p`` holds at ``p = 1``."""
        return all(cp.b >= 1.0 for cp in self.cps)

    def to_dict(self) -> dict[str, Any]:
        return {
            "cps": [
                {"r": cp.revenue_rate, "a": cp.consumption_scale, "b": cp.private_efficiency}
                for cp in self.cps
            ]
        }


@dataclass(frozen=True)
class InvestmentProfile:
    """Per-CP public (``q``) and private (``p``) investments.

    Aggregates are always recomputed from the vectors.
    """

    public: tuple[float, ...]
    private: tuple[float, ...]

    def __post_init__(self):
        if len(self.public) != len(self.private):
            raise ValueError(
                f"public ({len(self.public)}) and private ({len(self.private)}) lengths differ"
            )
        for name, vec in (("public", self.public), ("private", self.private)):
            for i, v in enumerate(vec):
                if not v >= 0.0:
                    raise ValueError(f"{name}[{i}] = {v!r} must be non-negative")

    @classmethod
    def from_arrays(cls, public: Iterable[float], private: Iterable[float]) -> InvestmentProfile:
        return cls(tuple(float(v) for v in public), tuple(float(v) for v in private))

    @property
    def Q(self) -> float:
        return math.fsum(self.public)

    @property
    def P(self) -> float:
        return math.fsum(self.private)

    def Q_minus(self, n: int) -> float:
        """Public investment of everyone except CP ``n``."""
        return math.fsum(q for i, q in enumerate(self.public) if i != n)

    def to_dict(self) -> dict[str, list[float]]:
        return {"q": list(self.public), "p": list(self.private)}


@dataclass(frozen=True)
class GameOutcome:
    """Solved investment profile of one interaction regime.

    ``gamma`` is the public-private trade-off ``Q_star / P_star``.
    ``diagnostics`` carries solver metadata (iterations, residual, notes).
    """

    market: Market
    q_star: tuple[float, ...]
    p_star: tuple[float, ...]
    Q_star: float
    P_star: float
    per_cp_utility: tuple[float, ...]
    total_utility: float
    gamma: float
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def profile(self) -> InvestmentProfile:
        return InvestmentProfile(self.q_star, self.p_star)

    def to_dict(self) -> dict[str, Any]:
        return {
            "market": self.market.to_dict(),
            "q_star": list(self.q_star),
            "p_star": list(self.p_star),
            "Q_star": self.Q_star,
            "P_star": self.P_star,
            "per_cp_utility": list(self.per_cp_utility),
            "total_utility": self.total_utility,
            "gamma": self.gamma,
            "diagnostics": self.diagnostics,
        }


def validate_market(
    raw: Sequence[Sequence[float]], allow_b_below_one: bool = False
) -> Market:
    """Build a :class:`Market` from ``(r, a, b)`` triples.

    Raises:
        ValueError: on an empty list, a non-positive ``r`` or ``a``, or
            ``b < 1`` without ``allow_b_below_one``.
    """
    if len(raw) == 0:
        raise ValueError("market must contain at least one CP")
    cps = []
    for i, triple in enumerate(raw):
        if len(triple) != 3:
            raise ValueError(f"CP {i + 1}: expected (r, a, b), got {triple!r}")
        r, a, b = (float(v) for v in triple)
        if not (math.isfinite(r) and r > 0):
            raise ValueError(f"CP {i + 1}: revenue rate r = {r} must be positive")
        if not (math.isfinite(a) and a > 0):
            raise ValueError(f"CP {i + 1}: consumption scale a = {a} must be positive")
        if not (math.isfinite(b) and b > 0):
            raise ValueError(f"CP {i + 1}: private efficiency b = {b} must be positive")
        if b < 1 and not allow_b_below_one:
            raise ValueError(f"CP {i + 1}: b below 1 (b = {b}); pass allow_b_below_one to override")
        cps.append(CpParams(r, a, b))
    return Market(tuple(cps), allow_b_below_one=allow_b_below_one)


def market_from_products(ra: Iterable[float], b: Iterable[float], **kwargs) -> Market:
    """Market with ``r = ra`` and ``a = 1`` (valid since only ``r a`` matters)."""
    return validate_market([(x, 1.0, y) for x, y in zip(ra, b, strict=True)], **kwargs)


def market_from_dict(data: dict[str, Any], allow_b_below_one: bool = False) -> Market:
    try:
        raw = [(cp["r"], cp["a"], cp["b"]) for cp in data["cps"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed market document: {exc}") from exc
    return validate_market(raw, allow_b_below_one=allow_b_below_one)


def load_market(path: str | PathLike, allow_b_below_one: bool = False) -> Market:
    """Read a market from JSON ``{"cps": [{"r": .., "a": .., "b": ..}, ...]}``."""
    with open(path) as fh:
        data = json.load(fh)
    return market_from_dict(data, allow_b_below_one=allow_b_below_one)


def profile_from_dict(data: dict[str, Any]) -> InvestmentProfile:
    try:
        return InvestmentProfile.from_arrays(data["q"], data["p"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed profile document: {exc}") from exc


def _check_sizes(market: Market, profile: InvestmentProfile):
    if len(profile.public) != market.n_cps:
        raise ValueError(
            f"profile has {len(profile.public)} entries but market has {market.n_cps} CPs"
        )


def cp_utility(market: Market, profile: InvestmentProfile, n: int) -> float:
    """Surplus of CP ``n`` at ``profile``.

    Raises:
        IndexError: if ``n`` is not a valid CP index.
    """
    _check_sizes(market, profile)
    if not 0 <= n < market.n_cps:
        raise IndexError(f"CP index {n} out of range for N = {market.n_cps}")
    cp = market[n]
    p_n = profile.private[n]
    revenue = cp.revenue_rate * cp.consumption_gain(profile.Q + cp.private_equivalent(p_n))
    return revenue - (p_n + profile.public[n])


def total_utility(market: Market, profile: InvestmentProfile) -> float:
    """Sum of CP surpluses, written with the ``-Q`` term counted once."""
    _check_sizes(market, profile)
    Q = profile.Q
    terms = [
        cp.ra * math.log1p(Q + cp.b * math.sqrt(p)) - p
        for cp, p in zip(market, profile.private)
    ]
    return math.fsum(terms) - Q


def public_private_tradeoff(profile: InvestmentProfile) -> float:
    """``Q / P``; ``nan`` when no private investment is made."""
    P = profile.P
    if P == 0:
        return math.nan
    return profile.Q / P
