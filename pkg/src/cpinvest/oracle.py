"""Brute-force cross-checks for the closed-form solvers.

The centralized maximizer here never touches the optimal-private formula or
the first-order residual: it searches the sum utility directly. Best-response
dynamics use :func:`reduced_utility`, whose inner private optimum is checked
separately by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .analytics import (
    contribution_index,
    centralized_residual,
    gamma_centralized,
    nash_equilibrium,
    optimal_private_given_Q,
    reduced_utility,
)
from .centralized import SolverConfig, solve_centralized
from .model import InvestmentProfile, Market, market_from_products, total_utility

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class UnimodalityError(RuntimeError):
    pass


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 200,
    check: bool = True,
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The endpoints are compared against the interior estimate so maxima on the
    boundary are returned exactly. With ``check`` the result is compared to a
    coarse sample of the original interval and a :class:`UnimodalityError` is
    raised if any sample is clearly better.
    """
    if not hi > lo:
        if hi == lo:
            return lo, f(lo)
        raise ValueError(f"empty interval [{lo}, {hi}]")
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        it += 1
    x, fx = (x1, f1) if f1 >= f2 else (x2, f2)
    for edge in (lo, hi):
        fe = f(edge)
        if fe >= fx:
            x, fx = edge, fe
    if check:
        slack = 1e-9 * (1.0 + abs(fx))
        for s in np.linspace(lo, hi, 9):
            if f(float(s)) > fx + slack:
                raise UnimodalityError(f"sample at {s} beats golden-section maximum at {x}")
    return x, fx


class BruteForceResult(NamedTuple):
    Q: float
    p: tuple[float, ...]
    U: float


def _best_private(market: Market, Q: float) -> tuple[list[float], float]:
    # the sum utility is separable in the p_n once Q is fixed, so each slice is
    # maximized on its own; p_n >= ra/2 always has negative slope
    ps = []
    for cp in market:
        x, _ = golden_section_max(
            lambda p, cp=cp: cp.ra * math.log1p(Q + cp.b * math.sqrt(p)) - p,
            0.0,
            cp.ra / 2.0,
            tol=1e-12,
            check=False,
        )
        ps.append(x)
    profile = InvestmentProfile(tuple([Q] + [0.0] * (market.n_cps - 1)), tuple(ps))
    return ps, total_utility(market, profile)


def brute_force_centralized(
    market: Market, coarse_step: float = 0.25, refine_rounds: int = 2
) -> BruteForceResult:
    """Numerically maximize the centralized objective over ``Q`` and all ``p``.

    A coarse scan of ``Q`` over ``[0, max(1, sum(ra))]`` (the objective is
    decreasing beyond ``sum(ra) - 1``) locates the best cell; each refinement
    rescans that cell on a finer grid, then golden-section search finishes.
    """
    if not coarse_step > 0:
        raise ValueError("coarse_step must be positive")
    Q_max = max(1.0, math.fsum(market.ra))
    n_cells = math.ceil(Q_max / coarse_step)
    if n_cells < 2:
        raise ValueError(f"degenerate grid: coarse_step {coarse_step} covers [0, {Q_max}] in one cell")

    def value(Q: float) -> float:
        return _best_private(market, Q)[1]

    grid = np.linspace(0.0, n_cells * coarse_step, n_cells + 1)
    for _ in range(refine_rounds + 1):
        vals = [value(float(Q)) for Q in grid]
        k = int(np.argmax(vals))
        lo = float(grid[max(k - 1, 0)])
        hi = float(grid[min(k + 1, len(grid) - 1)])
        grid = np.linspace(lo, hi, 11)
    Q, _ = golden_section_max(value, lo, hi, tol=1e-11)
    p, U = _best_private(market, Q)
    return BruteForceResult(Q, tuple(p), U)


@dataclass
class DynamicsTrace:
    """Snapshots (profile, Q) after each round, starting with the initial profile."""

    iterations: list[tuple[InvestmentProfile, float]] = field(default_factory=list)
    converged: bool = False
    fixed_point_Q: float = math.nan

    @property
    def final(self) -> InvestmentProfile:
        return self.iterations[-1][0]

    @property
    def rounds(self) -> int:
        return len(self.iterations) - 1


def _with_best_private(market: Market, q: Sequence[float]) -> InvestmentProfile:
    Q = math.fsum(q)
    return InvestmentProfile(tuple(q), tuple(optimal_private_given_Q(cp, Q) for cp in market))


def best_response(market: Market, n: int, Q_others: float, tol: float = 1e-11) -> float:
    """CP ``n``'s utility-maximizing public contribution given the others' total."""
    cp = market[n]
    upper = max(1.0, math.fsum(market.ra))
    q, _ = golden_section_max(
        lambda q: reduced_utility(cp, Q_others + q, q), 0.0, upper, tol=tol, check=False
    )
    return q


def best_response_dynamics(
    market: Market,
    initial: InvestmentProfile | None = None,
    tol: float = 1e-8,
    max_rounds: int = 20000,
) -> DynamicsTrace:
    """Round-robin best responses in public investment.

    A round converges when both total ``Q`` and every individual ``q_n`` move
    by less than ``tol``. ``Q`` alone is not enough: the last CP in a round
    can restore the same total while contributions are still shifting toward
    the CP with the strongest incentive. A runner-up whose index trails the
    leader's by ``m`` sheds only about ``m`` per round, so the round count
    grows like ``q / m``. Running out of rounds is reported
    through ``converged = False``, not raised.
    """
    q = list(initial.public) if initial is not None else [0.0] * market.n_cps
    if len(q) != market.n_cps:
        raise ValueError("initial profile does not match the market size")
    trace = DynamicsTrace()
    Q = math.fsum(q)
    trace.iterations.append((_with_best_private(market, q), Q))
    for _ in range(max_rounds):
        Q_before = Q
        q_before = list(q)
        for n in range(market.n_cps):
            others = math.fsum(q) - q[n]
            q[n] = best_response(market, n, max(others, 0.0))
        Q = math.fsum(q)
        trace.iterations.append((_with_best_private(market, q), Q))
        step = max(abs(a - b) for a, b in zip(q, q_before))
        if abs(Q - Q_before) < tol and step < tol:
            trace.converged = True
            break
    trace.fixed_point_Q = Q
    return trace


def verify_no_deviation(
    market: Market, profile: InvestmentProfile, grid_points: int = 201, tol: float = 1e-8
) -> bool:
    """True iff no CP gains more than ``tol`` from a unilateral change of its
    public investment (re-optimizing its private investment) on a grid over
    ``[0, Q + sum(ra)]``.

    Raises:
        ValueError: if the profile's private investments are not the best
            responses to its total public investment.
    """
    Q = profile.Q
    for n, cp in enumerate(market):
        expected = optimal_private_given_Q(cp, Q)
        if not math.isclose(profile.private[n], expected, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(
                f"CP {n + 1}: private investment {profile.private[n]} is not the best response {expected}"
            )
    deviations = np.linspace(0.0, Q + math.fsum(market.ra), grid_points)
    for n, cp in enumerate(market):
        Q_others = max(Q - profile.public[n], 0.0)
        base = reduced_utility(cp, Q_others + profile.public[n], profile.public[n])
        for qd in deviations:
            qd = float(qd)
            if reduced_utility(cp, Q_others + qd, qd) > base + tol:
                return False
    return True


def finite_difference(f: Callable[[float], float], x: float, h: float = 1e-5) -> tuple[float, float]:
    """Central-difference first and second derivative of ``f`` at ``x``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    fm, f0, fp = f(x - h), f(x), f(x + h)
    return (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)


# --- randomized verification suite -------------------------------------------------


def random_market(
    rng: np.random.Generator,
    n_range: tuple[int, int] = (1, 6),
    ra_range: tuple[float, float] = (0.5, 8.0),
    b_range: tuple[float, float] = (1.0, 3.0),
):
    N = int(rng.integers(n_range[0], n_range[1] + 1))
    ra = rng.uniform(*ra_range, size=N)
    b = rng.uniform(*b_range, size=N)
    return market_from_products(ra, b)


def has_unique_contributor(market: Market, margin: float = 1e-6) -> bool:
    idx = sorted(contribution_index(market), reverse=True)
    return len(idx) == 1 or idx[0] - idx[1] > margin


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: {self.checked} checks{extra}"


def _suite(name, cases, check) -> SuiteResult:
    failures = []
    for i, case in enumerate(cases):
        msg = check(case)
        if msg:
            failures.append(f"case {i}: {msg}")
    return SuiteResult(name, not failures, len(cases), "; ".join(failures[:3]))


def run_verification(
    seed: int,
    n_markets: int = 100,
    n_starts: int = 3,
    q_tol: float = 1e-4,
    u_tol: float = 1e-6,
    dynamics_tol: float = 1e-5,
    config: SolverConfig = SolverConfig(),
) -> list[SuiteResult]:
    """Closed forms against brute force and calculus checks on seeded random markets."""
    rng = np.random.default_rng(seed)
    markets = [random_market(rng) for _ in range(n_markets)]
    results = []

    def centralized_check(m):
        sol = solve_centralized(m, config)
        bf = brute_force_centralized(m)
        if abs(sol.Q_star - bf.Q) > q_tol:
            return f"Q {sol.Q_star} vs brute force {bf.Q}"
        if abs(sol.total_utility - bf.U) > u_tol:
            return f"U {sol.total_utility} vs brute force {bf.U}"

    results.append(_suite("centralized vs brute force", markets, centralized_check))

    def dynamics_check(m):
        if not has_unique_contributor(m):
            return None
        target = nash_equilibrium(m).Q_star
        starts = [None] + [
            InvestmentProfile.from_arrays(rng.uniform(0, 3, m.n_cps), [0.0] * m.n_cps)
            for _ in range(n_starts - 1)
        ]
        for s in starts:
            tr = best_response_dynamics(m, s, tol=dynamics_tol / 100)
            if not tr.converged or abs(tr.fixed_point_Q - target) > dynamics_tol:
                return f"dynamics reached {tr.fixed_point_Q}, equilibrium is {target}"

    results.append(_suite("best-response dynamics", markets, dynamics_check))

    def deviation_check(m):
        if not verify_no_deviation(m, nash_equilibrium(m).profile):
            return "profitable deviation at the equilibrium"

    results.append(_suite("no profitable deviation", markets, deviation_check))

    def stationarity_check(m):
        for cp in m:
            Q = float(rng.uniform(0, 10))
            p = optimal_private_given_Q(cp, Q)
            # step relative to p keeps the truncation error near 1e-7 even for tiny p
            g, _ = finite_difference(lambda x: cp.ra * math.log1p(Q + cp.b * math.sqrt(x)) - x, p, 1e-3 * p)
            if abs(g) > 1e-6:
                return f"gradient {g} at p* = {p}"

    results.append(_suite("private optimum stationarity", markets, stationarity_check))

    def shape_check(m):
        Qs = np.sort(rng.uniform(0, 20, 3))
        for cp in m:
            p0, p1, p2 = (optimal_private_given_Q(cp, float(Q)) for Q in Qs)
            if not p1 < p0:
                return "private optimum not decreasing"
            lam = (Qs[2] - Qs[1]) / (Qs[2] - Qs[0])
            if p1 > lam * p0 + (1 - lam) * p2 + 1e-12:
                return "private optimum not convex"
        r = [centralized_residual(m, float(Q)) for Q in Qs]
        if not (r[0] > r[1] > r[2]):
            return "residual not decreasing"

    results.append(_suite("monotonicity and convexity", markets, shape_check))

    def identity_check(m):
        sol = solve_centralized(m, config)
        if sol.Q_star > 0:
            closed = gamma_centralized(m, sol.Q_star)
            if not math.isclose(closed, sol.gamma, rel_tol=1e-8):
                return f"closed-form trade-off {closed} vs direct {sol.gamma}"
        nash = nash_equilibrium(m)
        if nash.Q_star > 0:
            for n in nash.contributor_set:
                if abs(nash.p_star[n] - m[n].b ** 2 / 4) > 1e-12:
                    return f"contributor {n + 1} private investment {nash.p_star[n]}"

    results.append(_suite("closed-form identities", markets, identity_check))
    return results
