import math

import numpy as np
import pytest

from augdist import errors
from augdist.augmented import aug_w2_gauss_1d_nd
from augdist.base import w2_gaussian, wp_discrete
from augdist.measures import AffineProjection, DiscreteMeasure, GaussianMeasure, pushforward, same_atoms
from augdist.stiefel import haar_sample, random_projection
from augdist.witness import (
    ball_gauss_kl_quadrature,
    brute_force_search,
    complete_basis,
    disintegrate,
    gaussian_tv_quadrature,
    witness_tv,
    witness_wp,
)

PAIR = DiscreteMeasure([[1, 0], [-1, 0]], [0.5, 0.5])


def test_complete_basis():
    np.testing.assert_allclose(np.abs(complete_basis(np.array([[1.0, 0.0]])).W), [[0.0, 1.0]], atol=1e-15)
    assert complete_basis(np.eye(3)).W.shape == (0, 3)
    for seed in range(5):
        V = haar_sample(2, 5, seed)
        Q = complete_basis(V).stacked(V)
        assert np.max(np.abs(Q @ Q.T - np.eye(5))) <= 1e-10


def test_disintegrate_injective(rng):
    nu = DiscreteMeasure(rng.standard_normal((4, 3)), np.full(4, 0.25))
    dis = disintegrate(nu, AffineProjection(haar_sample(2, 3, 1), np.zeros(2)))
    assert all(f.size == 1 for f in dis.fibers)


def test_disintegrate_collapse():
    dis = disintegrate(PAIR, AffineProjection([[0.0, 1.0]], [0.0]))
    assert len(dis.fibers) == 1
    assert same_atoms(dis.fibers[0], PAIR)
    np.testing.assert_allclose(dis.beta_points, [[0.0]])


def test_disintegrate_reassembles(rng):
    for seed in range(50):
        V = np.eye(3)[:1] if seed % 2 else haar_sample(1, 3, seed)
        base = rng.integers(0, 3, size=(6, 3)).astype(float)
        nu = DiscreteMeasure(base, rng.dirichlet(np.ones(6)))
        dis = disintegrate(nu, AffineProjection(V, [0.0]))
        assert all(abs(f.weights.sum() - 1) <= 1e-12 for f in dis.fibers)
        assert same_atoms(dis.reassemble(), nu)


def test_witness_single_atom():
    res = witness_wp(DiscreteMeasure([[1.0]], [1.0]), DiscreteMeasure([[0.0, 0.0]], [1.0]),
                     AffineProjection([[1.0, 0.0]], [0.0]))
    assert same_atoms(res.alpha_star, DiscreteMeasure([[1.0, 0.0]], [1.0]))
    assert abs(res.lhs - 1) <= 1e-15 and abs(res.rhs - 1) <= 1e-15


def test_witness_of_projection_is_nu(rng):
    nu = DiscreteMeasure(rng.standard_normal((5, 3)), rng.dirichlet(np.ones(5)))
    phi = AffineProjection(*random_projection(2, 3, 8))
    mu = pushforward(nu, phi)
    for res in (witness_wp(mu, nu, phi), witness_tv(mu, nu, phi)):
        assert same_atoms(res.alpha_star, nu, 1e-12)
        assert res.lhs <= 1e-12 and res.rhs <= 1e-12


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_witness_equality(rng, p):
    for seed in range(20):
        m, n = 1 + seed % 2, 3
        mu = DiscreteMeasure(rng.standard_normal((4, m)), rng.dirichlet(np.ones(4)))
        nu = DiscreteMeasure(rng.standard_normal((5, n)), rng.dirichlet(np.ones(5)))
        phi = AffineProjection(*random_projection(m, n, seed))
        res = witness_wp(mu, nu, phi, p)
        assert res.gap <= 1e-8
        assert same_atoms(pushforward(res.alpha_star, phi), mu, 1e-12)


def test_witness_tv_reweighting():
    nu = DiscreteMeasure([[0, 0], [0, 1], [1, 0], [1, 1]], [0.1, 0.2, 0.3, 0.4])
    phi = AffineProjection([[1.0, 0.0]], [0.0])
    mu = DiscreteMeasure([[0.0], [1.0]], [0.8, 0.2])
    res = witness_tv(mu, nu, phi)
    assert abs(res.lhs - res.rhs) <= 1e-10
    assert abs(res.rhs - 0.5) <= 1e-15
    assert same_atoms(pushforward(res.alpha_star, phi), mu, 1e-12)


def test_witness_tv_support_violation():
    with pytest.raises(errors.SupportViolation):
        witness_tv(DiscreteMeasure([[5.0]], [1.0]), PAIR, AffineProjection([[1.0, 0.0]], [0.0]))


def test_brute_force_single_draw():
    low, high = GaussianMeasure([0.0], [[1.0]]), GaussianMeasure([0.0, 0.0], np.diag([2.0, 0.5]))
    value, phi = brute_force_search(w2_gaussian, low, high, 1, seed=4)
    assert value == w2_gaussian(low, pushforward(high, phi))


def test_brute_force_forced_projection(rng):
    nu = DiscreteMeasure(rng.standard_normal((4, 3)), np.full(4, 0.25))
    phi = AffineProjection(*random_projection(1, 3, 2))
    value, _ = brute_force_search(lambda a, b: wp_discrete(a, b)[0], pushforward(nu, phi), nu, 5, forced=phi)
    assert value <= 1e-12


def test_brute_force_upper_bound(rng):
    low = GaussianMeasure([0.0], [[0.3]])
    high = GaussianMeasure([1.0, 0.0, 0.0], np.diag([2.0, 1.5, 1.0]))
    closed = aug_w2_gauss_1d_nd(low, high).value
    value, _ = brute_force_search(w2_gaussian, low, high, 2000, seed=1)
    assert closed - 1e-6 <= value <= closed + 1e-2


def test_ball_quadrature():
    ref = -math.log(2) + 0.5 * math.log(2 * math.pi) + 1 / 6
    assert abs(ball_gauss_kl_quadrature(1.0) - ref) <= 1e-9
    assert abs(ball_gauss_kl_quadrature(1 / 3) - (0.5 * math.log(math.pi / 6) + 0.5)) <= 1e-9
    vals = [ball_gauss_kl_quadrature(s) for s in (10.0, 100.0, 1000.0)]
    assert vals[0] < vals[1] < vals[2]
    assert abs((vals[2] - vals[1]) - 0.5 * math.log(10)) <= 1e-2


def test_gaussian_tv_quadrature():
    from scipy.stats import norm

    assert gaussian_tv_quadrature(1.0, 1.0) <= 1e-12
    assert abs(gaussian_tv_quadrature(1.0, 1.0, 0.0, 1.0) - (2 * norm.cdf(0.5) - 1)) <= 1e-9
