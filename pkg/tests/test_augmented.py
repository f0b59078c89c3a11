import math

import numpy as np
import pytest

from augdist import errors
from augdist.augmented import (
    PiecewiseSpec,
    aug_kl_ball_gauss,
    aug_kl_gauss_1d_nd,
    aug_kl_gauss_gauss,
    aug_w2_dirac_discrete,
    aug_w2_discrete_discrete,
    aug_w2_gauss_1d_nd,
    aug_w2_gauss_gauss,
    gm_value,
    kl_piecewise,
    w2_piecewise,
)
from augdist.base import kl_ball_gaussian, kl_gaussian, w2_gaussian, wp_discrete
from augdist.measures import AffineProjection, DiscreteMeasure, GaussianMeasure, UniformBallMeasure, pushforward
from augdist.stiefel import OptimizerParams, random_projection

FAST = OptimizerParams(restarts=8)


def g1(var, mean=0.0):
    return GaussianMeasure([mean], [[var]])


def gn(diag):
    return GaussianMeasure(np.zeros(len(diag)), np.diag(diag))


@pytest.mark.parametrize(
    "sigma, diag, expected",
    [(1.0, [1.0, 4.0], 0.0), (3.0, [4.0, 1.0], 1.0), (0.5, [1.0, 1.0], 0.5)],
)
def test_w2_one_dim_branches(sigma, diag, expected):
    rep = aug_w2_gauss_1d_nd(g1(sigma**2), gn(diag))
    assert abs(rep.value - expected) <= 1e-14
    # the certificate attains the value
    assert abs(w2_gaussian(g1(sigma**2), pushforward(gn(diag), rep.projection)) - expected) <= 1e-12


def test_kl_one_dim_branches():
    assert kl_piecewise(PiecewiseSpec(4.0, 1.0, 1.5)) == 0.0
    assert abs(aug_kl_gauss_1d_nd(g1(4.0), gn([1.0] * 3)).value - 0.5 * (3 + math.log(0.25))) <= 1e-14
    assert abs(aug_kl_gauss_1d_nd(g1(0.25), gn([1.0, 2.0])).value - 0.5 * (-0.75 + math.log(4))) <= 1e-14


def test_piecewise_matches_optimizer(rng):
    for _ in range(5):
        s2 = rng.uniform(0.05, 5)
        lam = np.sort(rng.uniform(0.1, 4, size=3))
        low, high = g1(s2, 0.3), GaussianMeasure(rng.standard_normal(3), np.diag(lam))
        assert abs(aug_w2_gauss_1d_nd(low, high).value - aug_w2_gauss_gauss(low, high, FAST).value) <= 1e-6
        assert abs(aug_kl_gauss_1d_nd(low, high).value - aug_kl_gauss_gauss(low, high, FAST).value) <= 1e-6


def test_w2_piecewise_continuity():
    for lo, hi in ((1.0, 4.0), (0.25, 0.25)):
        for s in (math.sqrt(lo), math.sqrt(hi)):
            for eps in (-1e-9, 1e-9):
                assert w2_piecewise(PiecewiseSpec(hi, lo, s + eps)) <= 2e-9


def test_gm_value_knots():
    for m in (1, 2, 4):
        knot = 1.0 / (m + 2)
        g = 0.5 * math.log(knot) + 0.5
        assert abs(gm_value(m, knot, knot) - g) <= 1e-15
        assert abs(gm_value(m, 2 * knot, knot) - g) <= 1e-15
    assert abs(gm_value(1, 1.0, 1.0) - 1 / 6) <= 1e-15
    assert abs(gm_value(1, 2.0, 0.1) - (0.5 * math.log(1 / 3) + 0.5)) <= 1e-15


def test_ball_identity_value():
    rep = aug_kl_ball_gauss(UniformBallMeasure(1), gn([1.0] * 3))
    assert rep.method == "closed_form"
    assert abs(rep.value - (0.5 * math.log(math.pi / 2) + 1 / 6)) <= 1e-14


def test_ball_interior_value():
    rep = aug_kl_ball_gauss(UniformBallMeasure(1), gn([2.0, 0.5, 0.1]))
    assert abs(rep.value - (0.5 * math.log(math.pi / 6) + 0.5)) <= 1e-12
    # the certificate attains the value
    assert abs(kl_ball_gaussian(1, pushforward(gn([2.0, 0.5, 0.1]), rep.projection)) - rep.value) <= 1e-12


def test_ball_two_dim_monte_carlo():
    rep = aug_kl_ball_gauss(UniformBallMeasure(2), gn([1.0] * 5))
    assert abs(rep.value - (0.25 + math.log(2))) <= 1e-12
    # KL(U(disc) || N(0, I)) = -log(pi) + log(2 pi) + E|x|^2 / 2
    rng = np.random.default_rng(3)
    r = np.sqrt(rng.random(400_000))
    mc = math.log(2) + 0.5 * np.mean(r**2)
    assert abs(mc - rep.value) <= 1e-3


def test_ball_optimizer_agrees(rng):
    A = rng.standard_normal((4, 4))
    high = GaussianMeasure(np.zeros(4), A @ A.T + 0.2 * np.eye(4))
    closed = aug_kl_ball_gauss(UniformBallMeasure(1), high)
    opt = aug_kl_ball_gauss(UniformBallMeasure(1), high, FAST, force_optimizer=True)
    assert opt.method == "stiefel_multistart"
    assert abs(closed.value - opt.value) <= 1e-6


def test_dirac_values():
    assert aug_w2_dirac_discrete([0.0], DiscreteMeasure([[1.0, 2.0]], [1.0])).value == 0.0
    assert aug_w2_dirac_discrete([5.0], DiscreteMeasure([[1, 0], [-1, 0]], [0.5, 0.5])).value <= 1e-15
    square = DiscreteMeasure([[1, 0], [-1, 0], [0, 1], [0, -1]], np.full(4, 0.25))
    assert abs(aug_w2_dirac_discrete([0.0], square).value - math.sqrt(0.5)) <= 1e-15


def test_discrete_symmetric_pair():
    rho1 = DiscreteMeasure([[-1.0], [1.0]], [0.5, 0.5])
    rho2 = DiscreteMeasure([[-2.0, 0.0], [2.0, 0.0]], [0.5, 0.5])
    assert aug_w2_discrete_discrete(rho1, rho2, 2.0, FAST).value <= 1e-6


def test_discrete_dirac_consistency(rng):
    rho2 = DiscreteMeasure(rng.standard_normal((6, 3)), rng.dirichlet(np.ones(6)))
    closed = aug_w2_dirac_discrete([0.7], rho2)
    alt = aug_w2_discrete_discrete(DiscreteMeasure([[0.7]], [1.0]), rho2, 2.0, FAST)
    assert abs(closed.value - alt.value) <= 1e-6


def test_discrete_zero_distance(rng):
    rho2 = DiscreteMeasure(rng.standard_normal((5, 3)), rng.dirichlet(np.ones(5)))
    V, b = random_projection(2, 3, 17)
    rho1 = pushforward(rho2, AffineProjection(V, b))
    rep = aug_w2_discrete_discrete(rho1, rho2, 2.0, FAST)
    assert rep.value <= 1e-6
    # the certificate and plan reproduce the reported value
    val, _ = wp_discrete(rho1, pushforward(rho2, rep.projection), 2.0)
    assert abs(val - rep.value) <= 1e-9


def test_discrete_w1_not_above_w2(rng):
    rho1 = DiscreteMeasure(rng.standard_normal((3, 1)), np.full(3, 1 / 3))
    rho2 = DiscreteMeasure(rng.standard_normal((4, 2)), np.full(4, 0.25))
    w1 = aug_w2_discrete_discrete(rho1, rho2, 1.0, FAST).value
    w2 = aug_w2_discrete_discrete(rho1, rho2, 2.0, FAST).value
    assert w1 <= w2 + 1e-6


def test_gauss_zero_distance(rng):
    A = rng.standard_normal((4, 4))
    rho2 = GaussianMeasure(rng.standard_normal(4), A @ A.T + 0.1 * np.eye(4))
    V, b = random_projection(2, 4, 5)
    rho1 = pushforward(rho2, AffineProjection(V, b))
    assert aug_w2_gauss_gauss(rho1, rho2, FAST).value <= 1e-6
    assert aug_kl_gauss_gauss(rho1, rho2, FAST).value <= 1e-6


def test_gauss_same_dimension_bound(rng):
    A, B = rng.standard_normal((2, 3, 3))
    rho1 = GaussianMeasure(np.zeros(3), A @ A.T + 0.1 * np.eye(3))
    rho2 = GaussianMeasure(np.ones(3), B @ B.T + 0.1 * np.eye(3))
    assert aug_w2_gauss_gauss(rho1, rho2, FAST).value <= w2_gaussian(rho1, rho2) + 1e-9
    assert aug_kl_gauss_gauss(rho1, rho2, FAST).value <= kl_gaussian(rho1, rho2) + 1e-9


def test_kl_isotropic():
    assert aug_kl_gauss_gauss(gn([1.0, 1.0]), gn([1.0] * 4), FAST).value <= 1e-12


def test_dimension_order():
    with pytest.raises(errors.DimensionMismatch):
        aug_w2_gauss_gauss(gn([1.0] * 3), gn([1.0] * 2), FAST)


def test_determinism(rng):
    rho1 = DiscreteMeasure(rng.standard_normal((3, 2)), np.full(3, 1 / 3))
    rho2 = DiscreteMeasure(rng.standard_normal((5, 3)), np.full(5, 0.2))
    a = aug_w2_discrete_discrete(rho1, rho2, 2.0, FAST)
    b = aug_w2_discrete_discrete(rho1, rho2, 2.0, FAST)
    assert a.value == b.value
    np.testing.assert_array_equal(a.projection.V, b.projection.V)
