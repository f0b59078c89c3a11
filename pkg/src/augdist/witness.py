"""Constructive lifts behind the projection/embedding equality, and oracles.

Given mu on R^m, nu on R^n and a projection phi(x) = Vx + b, the lifts build a
measure alpha on R^n with phi(alpha) = mu whose distance to nu equals the
distance between mu and phi(nu).  The module also holds the independent
estimators used to cross-check the closed forms: a random projection search
and two 1-d quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .base import tv_discrete, wp_discrete
from .errors import DimensionMismatch, SupportViolation
from .measures import (
    AffineProjection,
    DiscreteMeasure,
    GaussianMeasure,
    UniformBallMeasure,
    merge_tolerance,
    project_atoms,
    pushforward,
)
from .stiefel import SEED_MODULUS, haar_sample


@dataclass(frozen=True, eq=False)
class CompletionBasis:
    W: np.ndarray

    def stacked(self, V: np.ndarray) -> np.ndarray:
        return np.vstack([V, self.W])


def complete_basis(V: np.ndarray) -> CompletionBasis:
    """Rows spanning the orthogonal complement of the row space of V."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    m, n = V.shape
    if m > n:
        raise DimensionMismatch(f"V is {m}x{n}")
    if m == n:
        return CompletionBasis(np.zeros((0, n)))
    Q, _ = np.linalg.qr(V.T, mode="complete")
    W = Q[:, m:].T
    # drop the leftover component along V for full orthogonality at 1e-16
    W = W - (W @ V.T) @ V
    W, _ = np.linalg.qr(W.T)
    W = W.T
    idx = np.argmax(np.abs(W), axis=1)
    signs = np.sign(W[np.arange(W.shape[0]), idx])
    return CompletionBasis(W * signs[:, None])


@dataclass(frozen=True, eq=False)
class Disintegration:
    """Image measure beta = phi(nu) and the conditional law of nu on each fiber.

    ``fibers[j]`` is a DiscreteMeasure on R^n supported on the atoms of nu that
    map to ``beta.points[j]``; ``members[j]`` lists their indices in nu.
    """

    beta_points: np.ndarray
    beta_weights: np.ndarray
    fibers: tuple
    members: tuple

    @property
    def beta(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.beta_points, self.beta_weights)

    def reassemble(self) -> DiscreteMeasure:
        pts = np.vstack([f.points for f in self.fibers])
        w = np.concatenate([bw * f.weights for bw, f in zip(self.beta_weights, self.fibers)])
        return DiscreteMeasure(pts, w / w.sum())


def disintegrate(nu: DiscreteMeasure, phi: AffineProjection) -> Disintegration:
    beta_pts, beta_w, labels = project_atoms(nu, phi)
    fibers = []
    members = []
    for j in range(beta_pts.shape[0]):
        idx = np.flatnonzero(labels == j)
        w = nu.weights[idx] / beta_w[j]
        fibers.append(DiscreteMeasure(nu.points[idx], w / w.sum()))
        members.append(tuple(int(i) for i in idx))
    return Disintegration(beta_pts, beta_w, tuple(fibers), tuple(members))


@dataclass(frozen=True, eq=False)
class WitnessResult:
    alpha_star: DiscreteMeasure
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def _lift(x: np.ndarray, u: np.ndarray, phi: AffineProjection) -> np.ndarray:
    """Point z with phi(z) = u sharing the complement component of x.

    Equal to V^T (u - b) + W^T W x because V^T V + W^T W = I; the residual form
    returns x itself when phi(x) = u.
    """
    return x + phi.V.T @ (u - phi.V @ x - phi.b)


def witness_wp(mu: DiscreteMeasure, nu: DiscreteMeasure, phi: AffineProjection, p: float = 2.0) -> WitnessResult:
    """Lift mu to R^n through an optimal plan between mu and phi(nu)."""
    if mu.dim > nu.dim:
        raise DimensionMismatch(f"mu lives in R^{mu.dim}, nu in R^{nu.dim}")
    if phi.m != mu.dim or phi.n != nu.dim:
        raise DimensionMismatch(f"projection is {phi.m}x{phi.n}, measures are in R^{mu.dim}, R^{nu.dim}")
    beta_pts, beta_w, labels = project_atoms(nu, phi)
    beta = DiscreteMeasure(beta_pts, beta_w)
    rhs, gamma = wp_discrete(mu, beta, p)
    pts, wts = [], []
    for xi, x in enumerate(nu.points):
        y = labels[xi]
        cond = nu.weights[xi] / beta_w[y]
        for ui in np.flatnonzero(gamma.plan[:, y] > 0):
            pts.append(_lift(x, mu.points[ui], phi))
            wts.append(gamma.plan[ui, y] * cond)
    w = np.array(wts)
    alpha = DiscreteMeasure(np.array(pts), w / w.sum())
    lhs, _ = wp_discrete(alpha, nu, p)
    return WitnessResult(alpha, lhs, rhs)


def witness_tv(mu: DiscreteMeasure, nu: DiscreteMeasure, phi: AffineProjection) -> WitnessResult:
    """Reweight the fibers of nu by the mass mu gives to their image point."""
    if phi.m != mu.dim or phi.n != nu.dim:
        raise DimensionMismatch(f"projection is {phi.m}x{phi.n}, measures are in R^{mu.dim}, R^{nu.dim}")
    beta_pts, beta_w, labels = project_atoms(nu, phi)
    tol = max(merge_tolerance(beta_pts), merge_tolerance(mu.points))
    mu_on_beta = np.zeros(beta_pts.shape[0])
    for u, w in zip(mu.points, mu.weights):
        d = np.linalg.norm(beta_pts - u, axis=1)
        j = int(np.argmin(d))
        if d[j] > tol:
            raise SupportViolation(f"mu has an atom at {u.tolist()} outside the support of phi(nu)")
        mu_on_beta[j] += w
    w = mu_on_beta[labels] * nu.weights / beta_w[labels]
    keep = w > 0
    alpha = DiscreteMeasure(nu.points[keep], w[keep] / w[keep].sum())
    beta = DiscreteMeasure(beta_pts, beta_w)
    return WitnessResult(alpha, tv_discrete(alpha, nu).value, tv_discrete(mu, beta).value)


# ---------------------------------------------------------------------------
# projection search

def _anchors(measure) -> np.ndarray:
    if isinstance(measure, DiscreteMeasure):
        return measure.points
    if isinstance(measure, GaussianMeasure):
        return measure.mean.reshape(1, -1)
    if isinstance(measure, UniformBallMeasure):
        return np.vstack([np.ones(measure.dim), -np.ones(measure.dim)])
    raise TypeError(f"no anchor points for {type(measure).__name__}")


def _project_anchors(measure, V):
    if isinstance(measure, GaussianMeasure):
        return (V @ measure.mean).reshape(1, -1)
    return _anchors(measure) @ V.T


def _refine_b(fun, b, lo, hi, sweeps=3):
    """Cyclic bounded line search on each coordinate of b inside [lo, hi].

    Stops early once a sweep brings no improvement; with one coordinate a
    single sweep is already exact.
    """
    b = b.copy()
    best = fun(b)
    for _ in range(1 if b.size == 1 else sweeps):
        start = best
        for i in range(b.size):
            def along(t, i=i):
                c = b.copy()
                c[i] = t
                return fun(c)

            res = minimize_scalar(along, bounds=(lo[i], hi[i]), method="bounded", options={"xatol": 1e-10})
            if res.fun < best:
                best = float(res.fun)
                b[i] = res.x
        if best >= start:
            break
    return b, best


def brute_force_search(
    base_distance: Callable,
    mu,
    nu,
    samples: int,
    seed: int = 0,
    *,
    refine: bool = False,
    forced: Optional[AffineProjection] = None,
):
    """Smallest ``base_distance(mu, phi(nu))`` over random projections phi.

    Draw ``i`` uses Haar V seeded by ``seed + i``.  The offset is set so that
    the centroid of nu's projected anchor points lands at a point c drawn
    uniformly from the box spanned by mu's anchors and those projected anchors,
    inflated 1.5 times about its centre.  Drawing c rather than b itself keeps
    the aligning offset (a difference of locations) reachable.  Draws are
    nested in ``samples``, so the result never increases with more samples.
    ``forced`` is evaluated as an extra candidate before the random draws.
    """
    m, n = mu.dim, nu.dim
    if m > n:
        raise DimensionMismatch(f"mu lives in R^{m}, nu in R^{n}")
    best_val, best_phi = math.inf, None
    if forced is not None:
        best_val, best_phi = float(base_distance(mu, pushforward(nu, forced))), forced
    mu_anchor = _anchors(mu)
    for i in range(samples):
        s = (int(seed) + i) % SEED_MODULUS
        V = haar_sample(m, n, s)
        projected = _project_anchors(nu, V)
        centre = projected.mean(axis=0)
        box = np.vstack([mu_anchor, projected])
        lo, hi = box.min(axis=0), box.max(axis=0)
        mid, half = 0.5 * (lo + hi), 0.75 * (hi - lo)
        lo, hi = mid - half, mid + half
        c = np.random.default_rng([s, 2]).uniform(lo, hi)

        def at(c):
            return float(base_distance(mu, pushforward(nu, AffineProjection(V, c - centre))))

        if refine:
            c, val = _refine_b(at, c, lo, hi)
        else:
            val = at(c)
        if val < best_val:
            best_val, best_phi = val, AffineProjection(V, c - centre)
    return best_val, best_phi


# ---------------------------------------------------------------------------
# 1-d quadrature oracles

def adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, depth: int = 50, min_depth: int = 6
) -> float:
    """Adaptive Simpson rule; the first ``min_depth`` levels always subdivide."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth, forced):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or (forced <= 0 and abs(left + right - whole) <= 15.0 * tol):
            return left + right + (left + right - whole) / 15.0
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1, forced - 1) + rec(
            m, b, fm, frm, fb, right, tol / 2, depth - 1, forced - 1
        )

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth, min_depth)


def ball_gauss_kl_quadrature(sigma2: float) -> float:
    """KL(U[-1, 1] || N(0, sigma2)) integrated numerically."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")

    def integrand(x):
        p = 0.5
        q = math.exp(-x * x / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)
        return p * math.log(p / q)

    return adaptive_simpson(integrand, -1.0, 1.0, 1e-10)


def gaussian_tv_quadrature(var1: float, var2: float, mean1: float = 0.0, mean2: float = 0.0) -> float:
    """Total variation between two 1-d Gaussians, 0.5 * integral |p - q|."""

    def pdf(x, m, v):
        return math.exp(-(x - m) ** 2 / (2 * v)) / math.sqrt(2 * math.pi * v)

    def integrand(x):
        return 0.5 * abs(pdf(x, mean1, var1) - pdf(x, mean2, var2))

    sd = math.sqrt(max(var1, var2))
    lo = min(mean1, mean2) - 14 * sd
    hi = max(mean1, mean2) + 14 * sd
    # split at the density crossings, where |p - q| has kinks
    cuts = _crossings(mean1, var1, mean2, var2)
    knots = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    return sum(adaptive_simpson(integrand, a, b, 1e-12) for a, b in zip(knots[:-1], knots[1:]))


def _crossings(m1, v1, m2, v2):
    # log p - log q is quadratic in x
    a = 1 / (2 * v2) - 1 / (2 * v1)
    b = m1 / v1 - m2 / v2
    c = m2**2 / (2 * v2) - m1**2 / (2 * v1) + 0.5 * math.log(v2 / v1)
    if abs(a) < 1e-300:
        return [] if abs(b) < 1e-300 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return sorted([(-b - r) / (2 * a), (-b + r) / (2 * a)])
