import math

import numpy as np
import pytest

from svrisk.errors import ValidationError
from svrisk.geom2d import ConvexCone2D
from svrisk.markets import (
    BALL,
    CONE_DET,
    CONE_HALFPLANE_RANDOM,
    LIQUIDITY_CAPPED,
    SEGMENT_HULL,
    BidAskMatrix,
    ExchangeCone2D,
    ScenarioEnsemble,
    SetPortfolio,
    cone_contains,
    dual_cone,
    solvency_cone,
    support_function,
)


def one_scenario(x1, x2, rate=None):
    rates = None if rate is None else np.array([rate], dtype=float)
    return ScenarioEnsemble(np.array([[x1, x2]], dtype=float), rates=rates)


class TestBidAskMatrix:
    def test_valid_two_by_two(self):
        m = BidAskMatrix(np.array([[1.0, 5.0], [5.0, 1.0]]))
        assert m.dim == 2

    def test_diagonal_must_be_one(self):
        with pytest.raises(ValidationError):
            BidAskMatrix(np.array([[2.0, 5.0], [5.0, 1.0]]))

    def test_nonpositive_entry(self):
        with pytest.raises(ValidationError):
            BidAskMatrix(np.array([[1.0, -5.0], [5.0, 1.0]]))

    def test_round_trip_arbitrage_rejected(self):
        # pi12 * pi21 = 0.25 < 1 beats exchanging nothing
        with pytest.raises(ValidationError):
            BidAskMatrix(np.array([[1.0, 0.5], [0.5, 1.0]]))

    def test_triangle_violation_rejected(self):
        m = np.array(
            [
                [1.0, 2.0, 3.0],
                [2.0, 1.0, 2.0],
                [3.0, 2.0, 1.0],
            ]
        )
        # direct 1->3 at 3 does not beat routing through asset 2 at 4: fine
        BidAskMatrix(m)
        bad = m.copy()
        bad[0, 2] = 5.0
        bad[2, 0] = 5.0
        # a direct price above the routed price is inconsistent
        with pytest.raises(ValidationError):
            BidAskMatrix(bad)


class TestExchangeCone2D:
    def test_generator_pins(self):
        cone = ExchangeCone2D(5.0, 5.0)
        assert np.allclose(cone.b1, [1.0, -5.0])
        assert np.allclose(cone.b2, [-5.0, 1.0])
        assert np.allclose(cone.a1, [5.0, 1.0])
        assert np.allclose(cone.a2, [1.0, 5.0])

    def test_duality_pairing(self):
        cone = ExchangeCone2D(3.0, 2.0)
        assert np.dot(cone.a1, cone.b1) == pytest.approx(0.0)
        assert np.dot(cone.a2, cone.b2) == pytest.approx(0.0)
        assert np.dot(cone.a1, cone.b2) <= 0
        assert np.dot(cone.a2, cone.b1) <= 0

    def test_frictionless_is_halfplane(self):
        cone = ExchangeCone2D.frictionless(1.5)
        assert cone.is_halfplane
        assert cone.pi12 * cone.pi21 == pytest.approx(1.0)

    def test_round_trip_below_one_rejected(self):
        with pytest.raises(ValidationError):
            ExchangeCone2D(0.5, 1.0)

    def test_no_exchange_generators(self):
        cone = ExchangeCone2D.no_exchange()
        assert np.allclose(cone.b1, [0.0, -1.0])
        assert np.allclose(cone.b2, [-1.0, 0.0])
        assert np.allclose(cone.a1, [1.0, 0.0])
        assert np.allclose(cone.a2, [0.0, 1.0])
        assert not cone.is_halfplane

    def test_membership(self):
        cone = ExchangeCone2D(5.0, 5.0)
        assert cone.contains((0.0, 0.0))
        assert cone.contains(cone.b1)
        assert cone.contains(cone.b2)
        assert cone.contains(0.3 * cone.b1 + 0.7 * cone.b2)
        assert not cone.contains((1.0, 1.0))
        assert cone_contains(cone, (-1.0, -1.0))

    def test_from_bidask(self):
        m = BidAskMatrix(np.array([[1.0, 2.0], [3.0, 1.0]]))
        cone = ExchangeCone2D.from_bidask(m)
        assert cone.pi12 == 2.0 and cone.pi21 == 3.0

    def test_from_bidask_wrong_dim(self):
        m = BidAskMatrix(np.ones((3, 3)) * 0.0 + np.eye(3) + (1 - np.eye(3)))
        with pytest.raises(ValidationError):
            ExchangeCone2D.from_bidask(m)


class TestDerivedCones:
    def test_dual_of_no_exchange_is_orthant(self):
        dual = dual_cone(ExchangeCone2D.no_exchange())
        assert dual.approx_equal(ConvexCone2D.nonneg_orthant())

    def test_dual_symmetric(self):
        dual = dual_cone(ExchangeCone2D(5.0, 5.0))
        assert dual.approx_equal(ConvexCone2D.from_rays((5.0, 1.0), (1.0, 5.0)))

    def test_dual_frictionless_is_ray(self):
        dual = dual_cone(ExchangeCone2D.frictionless(2.0))
        assert dual.is_ray
        assert dual.contains(np.array([2.0, 1.0]) / math.sqrt(5.0))

    def test_solvency_no_exchange_is_orthant(self):
        sol = solvency_cone(ExchangeCone2D.no_exchange())
        assert sol.approx_equal(ConvexCone2D.nonneg_orthant())

    def test_solvency_symmetric(self):
        sol = solvency_cone(ExchangeCone2D(5.0, 5.0))
        assert sol.approx_equal(ConvexCone2D.from_rays((5.0, -1.0), (-1.0, 5.0)))

    def test_solvency_frictionless_halfplane(self):
        sol = solvency_cone(ExchangeCone2D.frictionless(2.0))
        assert sol.is_halfplane
        assert sol.contains((1.0, -2.0))
        assert sol.contains((-1.0, 2.0))
        assert not sol.contains((-1.0, 1.9))

    def test_solvency_reflects_exchange_cone(self):
        cone = ExchangeCone2D(3.0, 4.0)
        sol = solvency_cone(cone)
        rng = np.random.default_rng(3)
        for _ in range(20):
            s, t = rng.random(2)
            trade = s * cone.b1 + t * cone.b2
            assert sol.contains(-trade)

    def test_dual_bipolarity(self):
        cone = ExchangeCone2D(2.0, 7.0)
        sol = solvency_cone(cone)
        again = sol.positive_dual().positive_dual()
        assert again.approx_equal(sol)
        # the positive dual of the solvency cone is the dual cone itself
        assert sol.positive_dual().approx_equal(dual_cone(cone))


class TestScenarioEnsemble:
    def test_uniform_weights_default(self):
        e = ScenarioEnsemble(np.zeros((4, 2)))
        assert np.allclose(e.weights, 0.25)
        assert e.n == 4 and e.dim == 2

    def test_rates_shape_checked(self):
        with pytest.raises(ValidationError):
            ScenarioEnsemble(np.zeros((3, 2)), rates=np.ones(2))

    def test_rates_positive(self):
        with pytest.raises(ValidationError):
            ScenarioEnsemble(np.zeros((2, 2)), rates=np.array([1.0, 0.0]))

    def test_weight_sum_policy(self):
        ScenarioEnsemble(np.zeros((2, 2)), weights=np.array([0.5, 0.5 + 4e-10]))
        with pytest.raises(ValidationError):
            ScenarioEnsemble(np.zeros((2, 2)), weights=np.array([0.5, 0.6]))

    def test_require_rates(self):
        e = ScenarioEnsemble(np.zeros((2, 2)))
        with pytest.raises(ValidationError):
            e.require_rates()


class TestSetPortfolioValidation:
    def test_cone_required(self):
        with pytest.raises(ValidationError):
            SetPortfolio(CONE_DET, one_scenario(0.0, 0.0))

    def test_rates_required_for_random(self):
        with pytest.raises(ValidationError):
            SetPortfolio(CONE_HALFPLANE_RANDOM, one_scenario(0.0, 0.0))

    def test_radius_positive(self):
        with pytest.raises(ValidationError):
            SetPortfolio(BALL, one_scenario(0.0, 0.0), radius=0.0)

    def test_cap_positive(self):
        with pytest.raises(ValidationError):
            SetPortfolio(
                LIQUIDITY_CAPPED, one_scenario(0.0, 0.0, rate=2.0), cap=(1.0, 0.0)
            )

    def test_segment_needs_extras(self):
        with pytest.raises(ValidationError):
            SetPortfolio(SEGMENT_HULL, one_scenario(0.0, 0.0))

    def test_segment_extras_shape(self):
        with pytest.raises(ValidationError):
            SetPortfolio(
                SEGMENT_HULL,
                one_scenario(0.0, 0.0),
                extra_gains=(np.zeros((2, 2)),),
            )

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            SetPortfolio("swap", one_scenario(0.0, 0.0))


class TestSupportValues:
    def test_ball_unit(self):
        p = SetPortfolio.ball(one_scenario(0.0, 0.0), radius=1.0)
        assert support_function(p, 0, (1.0, 0.0)) == pytest.approx(1.0)
        assert support_function(p, 0, (3.0, 4.0)) == pytest.approx(5.0)

    def test_cone_det_on_dual_ray(self):
        cone = ExchangeCone2D(5.0, 5.0)
        p = SetPortfolio.cone_det(one_scenario(-2.0, 4.0), cone)
        assert support_function(p, 0, (1.0, 5.0)) == pytest.approx(18.0)

    def test_cone_det_outside_dual_is_inf(self):
        cone = ExchangeCone2D(5.0, 5.0)
        p = SetPortfolio.cone_det(one_scenario(-2.0, 4.0), cone)
        assert support_function(p, 0, (1.0, 0.0)) == math.inf

    def test_negative_direction_rejected(self):
        p = SetPortfolio.ball(one_scenario(0.0, 0.0), radius=1.0)
        with pytest.raises(ValidationError):
            p.support_values((1.0, -1.0))
        with pytest.raises(ValidationError):
            p.support_values((0.0, 0.0))

    def test_liquidity_midpoint(self):
        p = SetPortfolio.liquidity_capped(one_scenario(0.0, 0.0, rate=2.0))
        assert support_function(p, 0, (1.0, 1.0)) == pytest.approx(0.5)

    def test_liquidity_bounded_by_conical_support(self):
        rng = np.random.default_rng(8)
        gains = rng.standard_normal((5, 2))
        rates = rng.uniform(0.5, 2.0, 5)
        liq = SetPortfolio.liquidity_capped(
            ScenarioEnsemble(gains, rates=rates), cap=(0.7, 1.3)
        )
        for _ in range(20):
            u = rng.random(2) + 1e-3
            h_liq = liq.support_values(u)
            base = gains @ u
            assert np.all(h_liq >= base - 1e-12)
            assert np.all(np.isfinite(h_liq))

    def test_random_halfplane_only_on_scenario_ray(self):
        e = ScenarioEnsemble(
            np.array([[1.0, 1.0], [2.0, 0.0]]), rates=np.array([2.0, 0.5])
        )
        p = SetPortfolio.random_halfplane(e)
        vals = p.support_values(np.array([2.0, 1.0]))
        assert vals[0] == pytest.approx(3.0)
        assert vals[1] == math.inf

    def test_segment_hull_max(self):
        e = one_scenario(0.0, 0.0)
        p = SetPortfolio.segment_hull(e, [np.array([[1.0, -1.0]])])
        assert support_function(p, 0, (1.0, 0.0)) == pytest.approx(1.0)
        assert support_function(p, 0, (0.0, 1.0)) == pytest.approx(0.0)

    def test_support_subadditive_homogeneous_in_u(self):
        rng = np.random.default_rng(9)
        e = ScenarioEnsemble(rng.standard_normal((4, 2)), rates=rng.uniform(0.5, 2, 4))
        for p in (
            SetPortfolio.ball(e, radius=0.8),
            SetPortfolio.liquidity_capped(e, cap=(0.5, 2.0)),
        ):
            for _ in range(20):
                u = rng.random(2) + 1e-3
                v = rng.random(2) + 1e-3
                lam = rng.uniform(0.1, 3.0)
                assert np.allclose(
                    p.support_values(lam * u), lam * p.support_values(u)
                )
                assert np.all(
                    p.support_values(u + v)
                    <= p.support_values(u) + p.support_values(v) + 1e-9
                )

    def test_index_bounds(self):
        p = SetPortfolio.ball(one_scenario(0.0, 0.0), radius=1.0)
        with pytest.raises(ValidationError):
            support_function(p, 5, (1.0, 0.0))
