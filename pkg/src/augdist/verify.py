"""Randomized property batteries behind ``augdist verify``.

Every suite draws its instances from ``numpy.random.default_rng([seed,
crc32(suite name), i])``, so instance ``i`` of a suite can be replayed on its
own.  An instance returns a list of checks ``(label, lhs, rhs, tol)`` that
pass when ``lhs <= rhs + tol``, plus the data needed to rebuild it.
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .augmented import (
    PiecewiseSpec,
    aug_kl_ball_gauss,
    aug_kl_gauss_1d_nd,
    aug_kl_gauss_gauss,
    aug_w2_dirac_discrete,
    aug_w2_discrete_discrete,
    aug_w2_gauss_1d_nd,
    aug_w2_gauss_gauss,
    kl_piecewise,
    w2_piecewise,
)
from .base import (
    KINDS,
    DivergenceGenerator,
    f_divergence_discrete,
    js_discrete,
    tv_discrete,
    w2_gaussian,
    wp_discrete,
)
from .measures import (
    AffineProjection,
    DiscreteMeasure,
    GaussianMeasure,
    UniformBallMeasure,
    measure_to_spec,
    pushforward,
    pushforward_discrete,
    same_atoms,
)
from .ot import MARGINAL_TOL, ot_solve
from .stiefel import OptimizerParams, haar_sample
from .witness import (
    ball_gauss_kl_quadrature,
    brute_force_search,
    complete_basis,
    disintegrate,
    gaussian_tv_quadrature,
    witness_tv,
    witness_wp,
)

DEFAULT_SEED = 20240611


@dataclass
class Violation:
    instance: int
    label: str
    lhs: float
    rhs: float
    tol: float
    data: dict

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "check": self.label,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "tol": self.tol,
            "data": self.data,
        }


@dataclass
class SuiteResult:
    name: str
    description: str
    instances: int
    checks: int = 0
    worst_excess: float = -math.inf
    seconds: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Suite:
    name: str
    description: str
    count: int
    instance: Callable


def _num(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def instance_rng(name: str, seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(name.encode()), int(i)])


def _seed(rng) -> int:
    return int(rng.integers(0, 2**63))


# ---------------------------------------------------------------------------
# random instance builders

def random_discrete(rng, k: int, n: int, scale: float = 1.0) -> DiscreteMeasure:
    return DiscreteMeasure(scale * rng.standard_normal((k, n)), rng.dirichlet(np.ones(k)))


def random_spd(rng, n: int, lo: float = 0.1, hi: float = 3.0) -> np.ndarray:
    Q = haar_sample(n, n, _seed(rng))
    lam = rng.uniform(lo, hi, n)
    S = (Q.T * lam) @ Q
    return 0.5 * (S + S.T)


def random_phi(rng, m: int, n: int) -> AffineProjection:
    return AffineProjection(haar_sample(m, n, _seed(rng)), rng.standard_normal(m))


def fibered_atoms(rng, phi: AffineProjection, bases: int, per_fiber: int) -> np.ndarray:
    """Atoms arranged so that several of them share each image under phi."""
    W = complete_basis(phi.V).W
    pts = []
    for _ in range(bases):
        c = rng.standard_normal(phi.m)
        for _ in range(per_fiber):
            d = rng.standard_normal(W.shape[0])
            pts.append(phi.V.T @ (c - phi.b) + W.T @ d)
    return np.array(pts)


def _weights_on(rng, k: int, keep_all: bool = True) -> np.ndarray:
    w = rng.dirichlet(np.ones(k))
    if not keep_all:
        mask = rng.random(k) < 0.7
        mask[rng.integers(k)] = True
        w = np.where(mask, w, 0.0)
        w /= w.sum()
    return w


def _spec(measure):
    return measure_to_spec(measure)


def _phi_dict(phi):
    return {"V": phi.V.tolist(), "b": phi.b.tolist()}


# ---------------------------------------------------------------------------
# instance functions

def _ball_closed_form(rng, i):
    if i == 0:
        value = aug_kl_ball_gauss(UniformBallMeasure(1), GaussianMeasure(np.zeros(3), np.eye(3))).value
        exact = 0.5 * math.log(math.pi / 2) + 1 / 6
        return [
            ("closed form vs quadrature, Sigma = I", abs(value - ball_gauss_kl_quadrature(1.0)), 0.0, 1e-9),
            ("closed form vs log(pi/2)/2 + 1/6", abs(value - exact), 0.0, 1e-9),
        ], {"sigma": "identity", "n": 3}
    if i == 1:
        S = np.diag([2.0, 0.5, 0.1])
        value = aug_kl_ball_gauss(UniformBallMeasure(1), GaussianMeasure(np.zeros(3), S)).value
        exact = 0.5 * math.log(math.pi / 6) + 0.5
        return [("interior branch vs log(pi/6)/2 + 1/2", abs(value - exact), 0.0, 1e-12)], {"cov": S.tolist()}
    n = int(rng.integers(1, 6))
    S = random_spd(rng, n, 0.05, 2.0)
    mean = rng.standard_normal(n)
    value = aug_kl_ball_gauss(UniformBallMeasure(1), GaussianMeasure(mean, S)).value
    lam = np.linalg.eigvalsh(S)
    s = min(max(1 / 3, lam[0]), lam[-1])
    return [("closed form vs quadrature at clamped variance", abs(value - ball_gauss_kl_quadrature(s)), 0.0, 1e-9)], {
        "mean": mean.tolist(),
        "cov": S.tolist(),
    }


def _closed_vs_optimizer(rng, i):
    n = int(rng.integers(2, 7))
    S = random_spd(rng, n, 0.1, 4.0)
    lam = np.linalg.eigvalsh(S)
    branch = i % 3
    if branch == 0:
        s2 = rng.uniform(0.05, 1.0) * lam[0]
    elif branch == 1:
        s2 = rng.uniform(lam[0], lam[-1])
    else:
        s2 = rng.uniform(1.0, 3.0) * lam[-1]
    rho1 = GaussianMeasure(rng.standard_normal(1), [[s2]])
    rho2 = GaussianMeasure(rng.standard_normal(n), S)
    params = OptimizerParams(restarts=32, seed=_seed(rng) % 2**32)
    w2c, w2o = aug_w2_gauss_1d_nd(rho1, rho2).value, aug_w2_gauss_gauss(rho1, rho2, params).value
    klc, klo = aug_kl_gauss_1d_nd(rho1, rho2).value, aug_kl_gauss_gauss(rho1, rho2, params).value
    return [
        ("aug W2: |closed form - multistart|", abs(w2c - w2o), 0.0, 1e-6),
        ("aug KL: |closed form - multistart|", abs(klc - klo), 0.0, 1e-6),
    ], {"rho1": _spec(rho1), "rho2": _spec(rho2), "seed": params.seed}


def _dirac_vs_alternating(rng, i):
    n = int(rng.integers(1, 6))
    m = int(rng.integers(1, n + 1))
    k = int(rng.integers(1, 9))
    rho2 = random_discrete(rng, k, n)
    y = rng.standard_normal(m)
    params = OptimizerParams(restarts=32, seed=_seed(rng) % 2**32)
    closed = aug_w2_dirac_discrete(y, rho2).value
    alt = aug_w2_discrete_discrete(DiscreteMeasure.dirac(y), rho2, 2.0, params).value
    return [("|eigenvalue formula - alternating|", abs(closed - alt), 0.0, 1e-6)], {
        "y": y.tolist(),
        "rho2": _spec(rho2),
        "seed": params.seed,
    }


def _witness_wp(rng, i):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, n))
    p = 1.0 if i % 2 == 0 else 2.0
    phi = random_phi(rng, m, n)
    if i % 4 < 2:
        nu = random_discrete(rng, int(rng.integers(1, 7)), n)
    else:
        pts = fibered_atoms(rng, phi, int(rng.integers(1, 4)), 2)[:6]
        nu = DiscreteMeasure(pts, _weights_on(rng, len(pts)))
    mu = random_discrete(rng, int(rng.integers(1, 7)), m)
    res = witness_wp(mu, nu, phi, p)
    pushed_ok = same_atoms(pushforward_discrete(res.alpha_star, phi), mu, 1e-12)
    return [
        ("|W_p(alpha*, nu) - W_p(mu, phi(nu))|", res.gap, 0.0, 1e-8),
        ("W_p(alpha*, nu) >= W_p(mu, phi(nu))", res.rhs, res.lhs, 1e-9),
        ("phi(alpha*) == mu after merge", 0.0 if pushed_ok else 1.0, 0.0, 0.0),
    ], {"mu": _spec(mu), "nu": _spec(nu), "phi": _phi_dict(phi), "p": p}


def _witness_tv(rng, i):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, n))
    phi = random_phi(rng, m, n)
    pts = fibered_atoms(rng, phi, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    nu = DiscreteMeasure(pts, _weights_on(rng, len(pts)))
    beta = pushforward_discrete(nu, phi)
    mu = DiscreteMeasure(beta.points, _weights_on(rng, beta.size, keep_all=False))
    res = witness_tv(mu, nu, phi)
    return [("|TV(alpha*, nu) - TV(mu, phi(nu))|", res.gap, 0.0, 1e-10)], {
        "mu": _spec(mu),
        "nu": _spec(nu),
        "phi": _phi_dict(phi),
    }


def _dpi_pair(rng, i):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, n))
    phi = random_phi(rng, m, n)
    if i % 2 == 0:
        a = random_discrete(rng, int(rng.integers(1, 7)), n)
        b = random_discrete(rng, int(rng.integers(1, 7)), n)
    else:
        pts = fibered_atoms(rng, phi, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        a = DiscreteMeasure(pts, _weights_on(rng, len(pts), keep_all=False))
        b = DiscreteMeasure(pts, _weights_on(rng, len(pts), keep_all=False))
    return a, b, phi


def _dpi_wp(rng, i):
    a, b, phi = _dpi_pair(rng, i)
    p = float(rng.choice([1.0, 2.0, rng.uniform(1.0, 3.0)]))
    before = wp_discrete(a, b, p)[0]
    after = wp_discrete(pushforward(a, phi), pushforward(b, phi), p)[0]
    return [("W_p after projection <= before", after, before, 1e-9)], {
        "alpha": _spec(a),
        "nu": _spec(b),
        "phi": _phi_dict(phi),
        "p": p,
    }


def _dpi_js(rng, i):
    a, b, phi = _dpi_pair(rng, i)
    theta = float(rng.uniform(0.01, 0.99))
    before = js_discrete(a, b, theta)
    after = js_discrete(pushforward(a, phi), pushforward(b, phi), theta)
    return [("JS after projection <= before", after, before, 1e-9)], {
        "alpha": _spec(a),
        "nu": _spec(b),
        "phi": _phi_dict(phi),
        "theta": theta,
    }


def _dpi_tv(rng, i):
    a, b, phi = _dpi_pair(rng, i)
    before = tv_discrete(a, b).value
    after = tv_discrete(pushforward(a, phi), pushforward(b, phi)).value
    return [("TV after projection <= before", after, before, 1e-9)], {
        "alpha": _spec(a),
        "nu": _spec(b),
        "phi": _phi_dict(phi),
    }


def product_measures(rng, m: int, n: int):
    """Two product measures on a common grid A x B with A in R^m, B in R^(n-m)."""
    k1, k2 = int(rng.integers(1, 5)), int(rng.integers(2, 5))
    A = rng.standard_normal((k1, m))
    B = rng.standard_normal((k2, n - m))
    grid = np.array([np.concatenate([a, c]) for a in A for c in B])
    mu = np.outer(rng.dirichlet(np.ones(k1)), rng.dirichlet(np.ones(k2))).ravel()
    nu = np.outer(rng.dirichlet(np.ones(k1)), rng.dirichlet(np.ones(k2))).ravel()
    return DiscreteMeasure(grid, mu), DiscreteMeasure(grid, nu)


def _dpi_fdiv(rng, i):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, n))
    a, b = product_measures(rng, m, n)
    theta, phi_ = (float(x) for x in rng.uniform(0.01, 0.99, 2))
    proj = AffineProjection(np.eye(n)[:m], np.zeros(m))
    pa, pb = pushforward(a, proj), pushforward(b, proj)
    checks = []
    for kind in KINDS:
        g = DivergenceGenerator(kind, theta, phi_)
        checks.append(
            (f"{kind} after coordinate deletion <= before", f_divergence_discrete(pa, pb, g), f_divergence_discrete(a, b, g), 1e-9)
        )
    return checks, {"alpha": _spec(a), "nu": _spec(b), "m": m, "theta": theta, "phi": phi_}


def same_support_pair(rng):
    k = int(rng.integers(2, 9))
    n = int(rng.integers(1, 4))
    pts = rng.standard_normal((k, n))
    return DiscreteMeasure(pts, rng.dirichlet(np.ones(k))), DiscreteMeasure(pts, rng.dirichlet(np.ones(k)))


def _pinsker(rng, i):
    a, b = same_support_pair(rng)
    tv = tv_discrete(a, b).value
    kl = f_divergence_discrete(a, b, DivergenceGenerator("kl"))
    return [("TV^2 <= KL/2", tv**2, 0.5 * kl, 0.0)], {"mu": _spec(a), "nu": _spec(b)}


def _hellinger(rng, i):
    a, b = same_support_pair(rng)
    tv = tv_discrete(a, b).value
    h2 = f_divergence_discrete(a, b, DivergenceGenerator("hellinger"))
    return [
        ("Hl^2 <= 2 TV", h2, 2 * tv, 0.0),
        ("2 TV <= sqrt(2) Hl", 2 * tv, math.sqrt(2) * math.sqrt(h2), 0.0),
    ], {"mu": _spec(a), "nu": _spec(b)}


def _pinsker_gauss(rng, i):
    n = int(rng.integers(2, 6))
    S = random_spd(rng, n, 0.1, 4.0)
    s2 = float(rng.uniform(0.02, 6.0))
    rho1 = GaussianMeasure([0.0], [[s2]])
    rho2 = GaussianMeasure(np.zeros(n), S)
    lam = np.linalg.eigvalsh(S)
    tv = gaussian_tv_quadrature(s2, min(max(s2, lam[0]), lam[-1]))
    kl = aug_kl_gauss_1d_nd(rho1, rho2).value
    return [("aug TV^2 <= aug KL / 2", tv**2, 0.5 * kl, 1e-8)], {"sigma2": s2, "cov": S.tolist()}


def _ot_exactness(rng, i):
    k = int(rng.integers(1, 7))
    C = rng.random((k, k))
    if i % 3 == 0:
        C = np.round(3 * C)  # ties and degenerate pivots
    w = np.full(k, 1.0 / k)
    value, plan = ot_solve(C, w, w)
    brute = min(C[np.arange(k), list(perm)].sum() / k for perm in itertools.permutations(range(k)))
    row_err = float(np.max(np.abs(plan.plan.sum(axis=1) - w)))
    col_err = float(np.max(np.abs(plan.plan.sum(axis=0) - w)))
    return [
        ("|network simplex - permutation brute force|", abs(value - brute), 0.0, 1e-9),
        ("row marginal error", row_err, 0.0, MARGINAL_TOL),
        ("column marginal error", col_err, 0.0, MARGINAL_TOL),
        ("plan entries >= 0", -float(plan.plan.min()), 0.0, 0.0),
        ("support size <= k + l - 1", float(np.count_nonzero(plan.plan)), 2.0 * k - 1, 0.0),
    ], {"cost": C.tolist()}


def _w1_below_w2(rng, i):
    n = int(rng.integers(2, 4))
    m = int(rng.integers(1, n))
    rho1 = random_discrete(rng, int(rng.integers(1, 5)), m)
    rho2 = random_discrete(rng, int(rng.integers(1, 5)), n)
    params = OptimizerParams(seed=_seed(rng) % 2**32)
    w1 = aug_w2_discrete_discrete(rho1, rho2, 1.0, params).value
    w2 = aug_w2_discrete_discrete(rho1, rho2, 2.0, params).value
    return [("aug W1 <= aug W2", w1, w2, 1e-6)], {"rho1": _spec(rho1), "rho2": _spec(rho2), "seed": params.seed}


def _zero_distance(rng, i):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, n))
    phi = random_phi(rng, m, n)
    nu = random_discrete(rng, int(rng.integers(1, 6)), n)
    mu = pushforward(nu, phi)
    params = OptimizerParams(seed=_seed(rng) % 2**32)
    disc = aug_w2_discrete_discrete(mu, nu, 2.0, params).value
    g2 = GaussianMeasure(rng.standard_normal(n), random_spd(rng, n))
    g1 = pushforward(g2, phi)
    gauss = aug_w2_gauss_gauss(g1, g2, params).value
    return [
        ("aug W2(phi(nu), nu), discrete", disc, 0.0, 1e-6),
        ("aug W2(phi(rho), rho), Gaussian", gauss, 0.0, 1e-6),
    ], {"nu": _spec(nu), "gauss": _spec(g2), "phi": _phi_dict(phi), "seed": params.seed}


def _wp_metric(rng, i):
    n = int(rng.integers(1, 4))
    p = float(rng.choice([1.0, 2.0, rng.uniform(1.0, 3.0)]))
    a, b, c = (random_discrete(rng, int(rng.integers(1, 6)), n) for _ in range(3))
    ab, ba = wp_discrete(a, b, p)[0], wp_discrete(b, a, p)[0]
    ac, cb = wp_discrete(a, c, p)[0], wp_discrete(c, b, p)[0]
    return [
        ("|W_p(a,b) - W_p(b,a)|", abs(ab - ba), 0.0, 1e-10),
        ("W_p(a,b) <= W_p(a,c) + W_p(c,b)", ab, ac + cb, 1e-8),
    ], {"a": _spec(a), "b": _spec(b), "c": _spec(c), "p": p}


def _wp_monotone(rng, i):
    n = int(rng.integers(1, 4))
    a, b = (random_discrete(rng, int(rng.integers(1, 6)), n) for _ in range(2))
    p, q = sorted(rng.uniform(1.0, 4.0, 2))
    return [("W_p <= W_q for p <= q", wp_discrete(a, b, p)[0], wp_discrete(a, b, q)[0], 1e-9)], {
        "a": _spec(a),
        "b": _spec(b),
        "p": float(p),
        "q": float(q),
    }


def _js_swap(rng, i):
    a, b = (random_discrete(rng, int(rng.integers(1, 6)), 2) for _ in range(2))
    if i % 2:
        b = DiscreteMeasure(np.vstack([a.points[:1], b.points]), np.concatenate([[0.5], 0.5 * b.weights]))
    theta = float(rng.uniform(0.01, 0.99))
    return [("|JS(a,b,t) - JS(b,a,t)|", abs(js_discrete(a, b, theta) - js_discrete(b, a, theta)), 0.0, 1e-12)], {
        "a": _spec(a),
        "b": _spec(b),
        "theta": theta,
    }


def _disintegrate(rng, i):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, n))
    phi = random_phi(rng, m, n)
    pts = fibered_atoms(rng, phi, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    nu = DiscreteMeasure(pts, _weights_on(rng, len(pts)))
    d = disintegrate(nu, phi)
    fiber_err = max(abs(float(f.weights.sum()) - 1.0) for f in d.fibers)
    ok = same_atoms(d.reassemble(), nu, 1e-12)
    return [
        ("fiber mass error", fiber_err, 0.0, 1e-12),
        ("reassembly equals nu", 0.0 if ok else 1.0, 0.0, 0.0),
    ], {"nu": _spec(nu), "phi": _phi_dict(phi)}


def _brute_force_upper(rng, i):
    n = int(rng.integers(2, 4))
    rho1 = GaussianMeasure(rng.standard_normal(1), [[float(rng.uniform(0.1, 4.0))]])
    rho2 = GaussianMeasure(rng.standard_normal(n), random_spd(rng, n, 0.2, 3.0))
    closed = aug_w2_gauss_1d_nd(rho1, rho2).value
    brute, _ = brute_force_search(
        lambda a, b: w2_gaussian(a, b), rho1, rho2, 2000, _seed(rng) % 2**32, refine=True
    )
    return [
        ("brute force >= closed form", closed, brute, 1e-6),
        ("brute force - closed form", brute - closed, 0.0, 1e-2),
    ], {"rho1": _spec(rho1), "rho2": _spec(rho2)}


def _knots(rng, i):
    lam_min, lam_max = sorted(rng.uniform(0.05, 4.0, 2))
    checks = []
    for s in (math.sqrt(lam_min), math.sqrt(lam_max)):
        for f, label in ((w2_piecewise, "W2"), (kl_piecewise, "KL")):
            lo = f(PiecewiseSpec(lam_max, lam_min, s * (1 - 1e-15)))
            hi = f(PiecewiseSpec(lam_max, lam_min, s * (1 + 1e-15)))
            checks.append((f"{label} branch jump at sigma = {s:.3g}", abs(lo - hi), 0.0, 1e-12))
    return checks, {"lambda_min": float(lam_min), "lambda_max": float(lam_max)}


SUITES = {
    s.name: s
    for s in [
        Suite("ball_closed_form", "uniform ball vs Gaussian KL closed form against quadrature", 22, _ball_closed_form),
        Suite("closed_form_vs_optimizer", "1-d vs n-d Gaussian W2/KL closed forms against multistart", 50, _closed_vs_optimizer),
        Suite("dirac_vs_alternating", "Dirac vs discrete eigenvalue formula against alternating solver", 30, _dirac_vs_alternating),
        Suite("witness_wp", "W_p embedding witness equality and phi(alpha*) = mu", 100, _witness_wp),
        Suite("witness_tv", "TV embedding witness equality", 100, _witness_tv),
        Suite("dpi_wp", "W_p does not increase under random projections", 200, _dpi_wp),
        Suite("dpi_js", "JS does not increase under random projections", 200, _dpi_js),
        Suite("dpi_tv", "TV does not increase under random projections", 200, _dpi_tv),
        Suite("dpi_fdiv", "all ten generators, product measures, coordinate deletion", 200, _dpi_fdiv),
        Suite("pinsker", "TV^2 <= KL/2 on same-support pairs", 500, _pinsker),
        Suite("hellinger", "Hl^2 <= 2 TV <= sqrt(2) Hl on same-support pairs", 500, _hellinger),
        Suite("pinsker_gauss", "Pinsker on augmented 1-d vs n-d Gaussians", 50, _pinsker_gauss),
        Suite("ot_exactness", "network simplex against permutation brute force", 100, _ot_exactness),
        Suite("w1_below_w2", "aug W1 <= aug W2 on discrete pairs", 30, _w1_below_w2),
        Suite("zero_distance", "aug W2 vanishes on exact projections", 30, _zero_distance),
        Suite("wp_metric", "W_p symmetry and triangle inequality", 50, _wp_metric),
        Suite("wp_monotone_p", "W_p nondecreasing in p", 50, _wp_monotone),
        Suite("js_swap", "JS(a, b, t) = JS(b, a, t)", 100, _js_swap),
        Suite("disintegrate", "fibers are probabilities and reassemble exactly", 50, _disintegrate),
        Suite("brute_force_upper", "random projection search bounds the W2 closed form", 5, _brute_force_upper),
        Suite("knot_continuity", "closed-form branches agree at their knots", 20, _knots),
    ]
}


def run_suite(
    name: str,
    seed: int = DEFAULT_SEED,
    count: Optional[int] = None,
    instances: Optional[list] = None,
) -> SuiteResult:
    """Run one suite; ``instances`` restricts it to the given indices (replay)."""
    suite = SUITES[name]
    idx = list(range(suite.count if count is None else count)) if instances is None else list(instances)
    result = SuiteResult(name, suite.description, len(idx))
    start = time.perf_counter()
    for i in idx:
        checks, data = suite.instance(instance_rng(name, seed, i), i)
        for label, lhs, rhs, tol in checks:
            result.checks += 1
            excess = lhs - rhs
            if not math.isnan(excess):
                result.worst_excess = max(result.worst_excess, excess)
            if not lhs <= rhs + tol:
                result.violations.append(Violation(i, label, lhs, rhs, tol, {"suite": name, "seed": seed, **data}))
    result.seconds = time.perf_counter() - start
    return result
