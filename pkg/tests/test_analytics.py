import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cpinvest.analytics import (
    SplitPolicy,
    centralized_is_interior,
    centralized_residual,
    contribution_index,
    gamma_centralized,
    gamma_nash,
    gamma_nash_symmetric,
    nash_equilibrium,
    optimal_private_given_Q,
    per_cp_marginal,
    price_of_anarchy,
    reduced_utility,
    utility_ratio,
)
from cpinvest.centralized import solve_centralized
from cpinvest.model import CpParams, InvestmentProfile, cp_utility, market_from_products, validate_market
from cpinvest.oracle import finite_difference, verify_no_deviation

from conftest import markets


def cp(ra, b):
    return CpParams(ra, 1.0, b)


cps = st.builds(cp, st.floats(0.5, 8.0), st.floats(1.0, 3.0))


class TestOptimalPrivate:
    @pytest.mark.parametrize("ra, b, Q, expected", [(4, 1, 0, 1.0), (4, 1, 2.5, 0.25), (3, 1, 1.5, 0.25)])
    def test_values(self, ra, b, Q, expected):
        assert optimal_private_given_Q(cp(ra, b), Q) == pytest.approx(expected, abs=1e-15)

    def test_negative_Q(self):
        with pytest.raises(ValueError):
            optimal_private_given_Q(cp(4, 1), -0.1)

    def test_positive_at_large_Q(self):
        assert optimal_private_given_Q(cp(1.0, 1.0), 1e8) > 0

    @settings(max_examples=300)
    @given(cps, st.floats(0, 50))
    def test_stationary(self, c, Q):
        p = optimal_private_given_Q(c, Q)
        # relative step: truncation error is then ~1.25e-7 whatever the size of p
        h = 1e-3 * p

        def u(x):
            return c.ra * math.log1p(Q + c.b * math.sqrt(x)) - x

        first, second = finite_difference(u, p, h)
        assert abs(first) <= 1e-6
        assert second < 0 or abs(second) < 1e-3

    @settings(max_examples=300)
    @given(cps, st.lists(st.floats(0, 40), min_size=3, max_size=3, unique=True))
    def test_decreasing_and_convex(self, c, Qs):
        Q0, Q1, Q2 = sorted(Qs)
        assume(Q1 - Q0 > 1e-6 and Q2 - Q1 > 1e-6)
        p0, p1, p2 = (optimal_private_given_Q(c, Q) for Q in (Q0, Q1, Q2))
        assert p1 < p0
        lam = (Q2 - Q1) / (Q2 - Q0)
        assert p1 <= lam * p0 + (1 - lam) * p2 + 1e-12

    def test_second_derivative_positive(self):
        first, second = finite_difference(lambda Q: optimal_private_given_Q(cp(4, 1), Q), 1.0, 1e-4)
        assert first < 0 < second


class TestMarginal:
    @pytest.mark.parametrize(
        "ra, b, Q, expected",
        [(3, 1, 1.5, 1.0), (1, 1, 0, math.sqrt(3) - 1), (2, 2, 0, (math.sqrt(17) - 1) / 4)],
    )
    def test_values(self, ra, b, Q, expected):
        assert per_cp_marginal(cp(ra, b), Q) == pytest.approx(expected, abs=1e-12)

    @given(cps)
    def test_unit_at_contribution_point(self, c):
        Q = c.ra - c.b**2 / 2 - 1
        assume(Q >= 0)
        assert per_cp_marginal(c, Q) == pytest.approx(1.0, abs=1e-12)

    @given(cps, st.floats(0, 30))
    def test_matches_envelope_derivative(self, c, Q):
        # derivative of the revenue term at the re-optimized private investment
        p = optimal_private_given_Q(c, Q)
        assert per_cp_marginal(c, Q) == pytest.approx(c.ra / (1 + Q + c.b * math.sqrt(p)), rel=1e-12)


class TestResidual:
    def test_single_cp_root(self):
        assert abs(centralized_residual(market_from_products([4], [1]), 2.5)) <= 1e-12

    def test_symmetric_root(self):
        # sqrt((1+Q)^2 + 6) = (1+Q) + 1/2  =>  1+Q = 5.75
        assert abs(centralized_residual(market_from_products([3, 3], [1, 1]), 4.75)) <= 1e-12

    def test_positive_at_zero(self):
        r = centralized_residual(market_from_products([1, 1], [1, 1]), 0.0)
        assert r == pytest.approx(2 * math.sqrt(3) - 3, abs=1e-12)

    @given(markets(), st.floats(0, 30), st.floats(1e-3, 10))
    def test_strictly_decreasing(self, m, Q, dQ):
        assert centralized_residual(m, Q + dQ) < centralized_residual(m, Q)

    @pytest.mark.parametrize(
        "ra, b, expected", [([1, 1], [1, 1], True), ([1], [1], False), ([2, 2], [2, 2], True)]
    )
    def test_interior(self, ra, b, expected):
        assert centralized_is_interior(market_from_products(ra, b)) is expected

    @given(markets())
    def test_interior_matches_square_root_form(self, m):
        lhs = sum(math.sqrt(1 + 2 * c.b**2 * c.ra) / c.b**2 for c in m)
        rhs = 1 + sum(1 / c.b**2 for c in m)
        assume(abs(lhs - rhs) > 1e-9)
        assert centralized_is_interior(m) == (lhs > rhs)


class TestGammaCentralized:
    def test_single(self):
        m = market_from_products([4], [1])
        assert gamma_centralized(m, 2.5) == pytest.approx(10.0, abs=1e-12)

    def test_symmetric(self):
        m = market_from_products([3, 3], [1, 1])
        assert gamma_centralized(m, 4.75) == pytest.approx(38.0, abs=1e-9)
        assert 4.75 / (2 * optimal_private_given_Q(m[0], 4.75)) == pytest.approx(38.0, abs=1e-9)

    def test_zero(self):
        assert gamma_centralized(market_from_products([1], [1]), 0.0) == 0.0

    def test_invalid_optimum(self):
        with pytest.raises(ValueError):
            gamma_centralized(market_from_products([1], [1]), 5.0)

    @settings(max_examples=100, deadline=None)
    @given(markets())
    def test_identity_with_direct_ratio(self, m):
        sol = solve_centralized(m)
        assume(sol.Q_star > 1e-3)
        direct = sol.Q_star / math.fsum(optimal_private_given_Q(c, sol.Q_star) for c in m)
        assert gamma_centralized(m, sol.Q_star) == pytest.approx(direct, rel=1e-8)


class TestReducedUtility:
    def test_contributor(self):
        assert reduced_utility(cp(4, 1), 2.5, 2.5) == pytest.approx(4 * math.log(4) - 2.75, abs=1e-12)

    def test_no_public(self):
        assert reduced_utility(cp(4, 1), 0, 0) == pytest.approx(4 * math.log(2) - 1, abs=1e-12)

    def test_free_rider(self):
        assert reduced_utility(cp(3, 1), 1.5, 0) == pytest.approx(3 * math.log(3) - 0.25, abs=1e-12)
        assert reduced_utility(cp(3, 1), 1.5, 0) == pytest.approx(3.045837, abs=1e-6)

    def test_own_share_above_total(self):
        with pytest.raises(ValueError):
            reduced_utility(cp(3, 1), 1.0, 2.0)

    @given(cps, st.floats(0, 20), st.floats(0, 1))
    def test_consistent_with_cp_utility(self, c, Q, frac):
        q = Q * frac
        m = validate_market([(c.ra, 1.0, c.b), (1.0, 1.0, 1.0)])
        pr = InvestmentProfile((q, Q - q), (optimal_private_given_Q(c, Q), 0.0))
        assert reduced_utility(c, Q, q) == pytest.approx(cp_utility(m, pr, 0), abs=1e-10)


class TestNash:
    def test_no_contribution(self, weak11):
        eq = nash_equilibrium(weak11)
        p = ((math.sqrt(3) - 1) / 2) ** 2
        assert eq.Q_star == 0 and eq.q_star == (0.0, 0.0)
        assert eq.p_star == pytest.approx((p, p), abs=1e-15)
        assert eq.p_star[0] == pytest.approx(0.133975, abs=1e-6)
        assert eq.contributor_set == frozenset()
        assert not eq.degenerate

    def test_single_contributor(self, asymmetric32):
        eq = nash_equilibrium(asymmetric32)
        assert eq.contributor_set == {0}
        assert eq.Q_star == 1.5
        assert eq.q_star == (1.5, 0.0)
        # p*_2 from sqrt(2.5^2 + 4) = sqrt(10.25)
        assert eq.p_star[0] == pytest.approx(0.25, abs=1e-15)
        assert eq.p_star[1] == pytest.approx(((math.sqrt(10.25) - 2.5) / 2) ** 2, abs=1e-15)
        assert eq.p_star[1] == pytest.approx(0.123047, abs=1e-6)
        assert not eq.degenerate

    def test_tied_contributors_equal_split(self, symmetric3):
        eq = nash_equilibrium(symmetric3)
        assert eq.contributor_set == {0, 1}
        assert eq.Q_star == 1.5
        assert eq.q_star == (0.75, 0.75)
        assert eq.p_star == (0.25, 0.25)
        assert eq.degenerate

    def test_tied_contributors_lowest_index(self, symmetric3):
        eq = nash_equilibrium(symmetric3, split=SplitPolicy.LOWEST_INDEX)
        assert eq.q_star == (1.5, 0.0)
        assert eq.degenerate

    def test_tie_band(self):
        m = market_from_products([3.0, 3.0 * (1 - 1e-12)], [1, 1])
        assert nash_equilibrium(m).contributor_set == {0, 1}
        assert nash_equilibrium(m, tie_tolerance=0.0).contributor_set == {0}

    @settings(max_examples=100, deadline=None)
    @given(markets(), st.sampled_from(list(SplitPolicy)))
    def test_outcome_invariants(self, m, split):
        eq = nash_equilibrium(m, split=split)
        for n in range(m.n_cps):
            if n not in eq.contributor_set:
                assert eq.q_star[n] == 0
        assert math.fsum(eq.q_star) == pytest.approx(eq.Q_star, abs=1e-12)
        assert math.fsum(eq.p_star) == pytest.approx(eq.P_star, abs=1e-12)
        assert eq.gamma == pytest.approx(eq.Q_star / eq.P_star, abs=1e-12)
        if eq.Q_star > 0:
            assert eq.Q_star == pytest.approx(max(contribution_index(m)) - 1, abs=1e-15)
            for n in eq.contributor_set:
                assert eq.p_star[n] == pytest.approx(m[n].b ** 2 / 4, abs=1e-12)
        assert verify_no_deviation(m, eq.profile, grid_points=101)

    @settings(max_examples=60, deadline=None)
    @given(markets(max_n=6))
    def test_centralized_exceeds_nash(self, m):
        assume(m.n_cps >= 2 and max(contribution_index(m)) > 1 + 1e-6)
        assert solve_centralized(m).Q_star > nash_equilibrium(m).Q_star


class TestGammaNash:
    def test_symmetric(self, symmetric3):
        eq = nash_equilibrium(symmetric3)
        assert gamma_nash(symmetric3, eq) == pytest.approx(3.0, abs=1e-12)
        assert gamma_nash_symmetric(symmetric3, eq.Q_star) == pytest.approx(3.0, abs=1e-12)

    def test_general(self, asymmetric32):
        eq = nash_equilibrium(asymmetric32)
        g = gamma_nash(asymmetric32, eq)
        assert g == pytest.approx(1.5 / (0.25 + ((math.sqrt(10.25) - 2.5) / 2) ** 2), abs=1e-12)
        assert g == pytest.approx(4.020939, abs=1e-5)
        assert g == pytest.approx(eq.Q_star / eq.P_star, abs=1e-12)

    def test_zero(self, weak11):
        assert gamma_nash(weak11, nash_equilibrium(weak11)) == 0.0

    @given(st.integers(1, 6), st.floats(2.0, 8.0), st.floats(1.0, 1.9))
    def test_special_case_agrees(self, n, ra, b):
        m = market_from_products([ra] * n, [b] * n)
        eq = nash_equilibrium(m)
        assume(eq.Q_star > 0)
        assert len(eq.contributor_set) == n
        general = gamma_nash(m, eq)
        assert general == pytest.approx(gamma_nash_symmetric(m, eq.Q_star), abs=1e-12)
        assert general == pytest.approx(eq.Q_star / eq.P_star, abs=1e-12)


class TestRatios:
    def test_price_of_anarchy(self):
        assert price_of_anarchy(4.75, 1.5) == pytest.approx(3.1667, abs=1e-4)
        assert math.isinf(price_of_anarchy(0.75, 0.0))
        assert price_of_anarchy(2.5, 2.5) == 1.0

    def test_price_of_anarchy_both_zero_is_unbounded(self):
        assert math.isinf(price_of_anarchy(0.0, 0.0))

    def test_price_of_anarchy_negative(self):
        with pytest.raises(ValueError):
            price_of_anarchy(-1.0, 1.0)

    def test_utility_ratio(self):
        assert utility_ratio(5.875557, 4.591674) == pytest.approx(1.279610, abs=1e-5)
        assert utility_ratio(2.0, 2.0) == 1.0
        assert math.isnan(utility_ratio(1.0, 0.0))
