"""Distances between a measure on R^m and a measure on R^n, m <= n.

The augmented distance is the infimum of the base distance between the
low-dimensional measure and every affine orthonormal projection x -> Vx + b
of the high-dimensional one.  Closed forms are used where they exist; the
remaining cases go through the Stiefel multistart optimizer.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .base import (
    ball_log_constant,
    bures_from_roots,
    pairwise_cost,
    sqrtm_psd,
    _chol,
)
from .errors import DimensionMismatch, InvalidParameter
from .measures import AffineProjection, DiscreteMeasure, GaussianMeasure, UniformBallMeasure
from .ot import Coupling, ot_solve
from .stiefel import OptimizerParams, fd_gradient, haar_sample, minimize

METHODS = ("closed_form", "alternating", "stiefel_multistart", "base", "fixed_projection", "brute_force")


@dataclass(frozen=True, eq=False)
class DistanceReport:
    value: float
    method: str
    projection: Optional[AffineProjection] = None
    plan: Optional[Coupling] = None
    restarts_agreeing: int = 0
    iterations: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameter(f"unknown method label {self.method!r}")
        if math.isnan(self.value) or self.value < 0:
            raise ValueError(f"distance value {self.value!r} is not >= 0")


@dataclass(frozen=True)
class PiecewiseSpec:
    """Extreme eigenvalues of the high-dimensional covariance and the 1-d scale."""

    lambda_max: float
    lambda_min: float
    sigma: float

    def __post_init__(self):
        if not self.lambda_max >= self.lambda_min >= 0 or self.sigma < 0:
            raise InvalidParameter(f"invalid piecewise spec {self}")


def w2_piecewise(spec: PiecewiseSpec) -> float:
    lo, hi = math.sqrt(spec.lambda_min), math.sqrt(spec.lambda_max)
    if spec.sigma < lo:
        return lo - spec.sigma
    if spec.sigma > hi:
        return spec.sigma - hi
    return 0.0


def kl_piecewise(spec: PiecewiseSpec) -> float:
    s2 = spec.sigma**2
    if s2 < spec.lambda_min:
        lam = spec.lambda_min
    elif s2 > spec.lambda_max:
        lam = spec.lambda_max
    else:
        return 0.0
    return 0.5 * (s2 / lam - 1.0 + math.log(lam / s2))


def _sign_fix(Q: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column positive."""
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return Q * signs


def _eigh(S: np.ndarray):
    lam, Q = np.linalg.eigh(0.5 * (S + S.T))
    return lam, _sign_fix(Q)


def _blend(q_hi: np.ndarray, q_lo: np.ndarray, lam_hi: float, lam_lo: float, target: float) -> np.ndarray:
    """Unit vector v in span(q_hi, q_lo) with v^T S v = target."""
    if lam_hi - lam_lo <= 0:
        return q_hi
    s2 = min(max((target - lam_lo) / (lam_hi - lam_lo), 0.0), 1.0)
    return math.sqrt(s2) * q_hi + math.sqrt(1.0 - s2) * q_lo


def _require_order(m: int, n: int):
    if m > n:
        raise DimensionMismatch(f"first measure must not have higher dimension ({m} > {n})")


def _one_dim_certificate(rho1: GaussianMeasure, rho2: GaussianMeasure):
    if rho1.dim != 1:
        raise DimensionMismatch("first Gaussian must be one-dimensional")
    s2 = float(rho1.cov[0, 0])
    lam, Q = _eigh(rho2.cov)
    lam_min, lam_max = max(lam[0], 0.0), max(lam[-1], 0.0)
    i_min = 0
    i_max = int(np.flatnonzero(lam == lam[-1])[0])
    x = _blend(Q[:, i_max], Q[:, i_min], lam_max, lam_min, min(max(s2, lam_min), lam_max))
    V = x.reshape(1, -1)
    b = rho1.mean - V @ rho2.mean
    return PiecewiseSpec(lam_max, lam_min, math.sqrt(s2)), AffineProjection(V, b)


def aug_w2_gauss_1d_nd(rho1: GaussianMeasure, rho2: GaussianMeasure) -> DistanceReport:
    spec, phi = _one_dim_certificate(rho1, rho2)
    return DistanceReport(w2_piecewise(spec), "closed_form", phi)


def aug_kl_gauss_1d_nd(rho1: GaussianMeasure, rho2: GaussianMeasure) -> DistanceReport:
    _chol(rho2.cov, "second")
    if rho1.cov[0, 0] <= 0:
        _chol(rho1.cov, "first")
    spec, phi = _one_dim_certificate(rho1, rho2)
    return DistanceReport(kl_piecewise(spec), "closed_form", phi)


# ---------------------------------------------------------------------------
# uniform ball vs Gaussian

def gm_value(m: int, alpha: float, beta: float) -> float:
    """Minimum over s in [beta, alpha] of log(s)/2 + 1/(2(m+2)s)."""
    if alpha < beta or beta < 0:
        raise InvalidParameter(f"need alpha >= beta >= 0, got {alpha}, {beta}")
    knot = 1.0 / (m + 2)

    def g(s):
        if s <= 0:
            return math.inf
        return 0.5 * math.log(s) + 1.0 / (2 * (m + 2) * s)

    if beta > knot:
        return g(beta)
    if alpha >= knot:
        return g(knot)
    return g(alpha)


def has_ball_closed_form(m: int, n: int) -> bool:
    return m < n / 2 or m == 1


def _ball_objective(m: int, S: np.ndarray):
    c = 1.0 / (m + 2)

    def f(V, b):
        A = V @ S @ V.T
        sign, logdet = np.linalg.slogdet(A)
        if sign <= 0:
            return math.inf
        return 0.5 * (logdet + c * float(np.trace(np.linalg.inv(A))))

    def grad(V, b):
        Ainv = np.linalg.inv(V @ S @ V.T)
        return (Ainv - c * Ainv @ Ainv) @ V @ S, np.zeros_like(b)

    return f, grad


def aug_kl_ball_gauss(
    rho1: UniformBallMeasure,
    rho2: GaussianMeasure,
    params: OptimizerParams = OptimizerParams(),
    *,
    force_optimizer: bool = False,
) -> DistanceReport:
    """KL from the uniform ball on R^m to a Gaussian on R^n.

    Uses the interlacing closed form when m < n/2 (or m = 1); otherwise, or
    when ``force_optimizer`` is set, minimizes over V with b = -V mean.
    """
    m, n = rho1.dim, rho2.dim
    _require_order(m, n)
    _chol(rho2.cov, "Gaussian")
    const = ball_log_constant(m)
    if has_ball_closed_form(m, n) and not force_optimizer:
        lam, Q = _eigh(rho2.cov)
        lam, Q = lam[::-1], Q[:, ::-1]  # descending
        knot = 1.0 / (m + 2)
        rows = []
        value = const
        for i in range(m):
            hi, lo = i, n - m + i
            value += gm_value(m, lam[hi], lam[lo])
            target = min(max(knot, lam[lo]), lam[hi])
            rows.append(_blend(Q[:, hi], Q[:, lo], lam[hi], lam[lo], target) if hi != lo else Q[:, hi])
        V = np.array(rows)
        return DistanceReport(value, "closed_form", AffineProjection(V, -V @ rho2.mean))
    f, grad = _ball_objective(m, rho2.cov)
    out = _minimize_polished(f, grad, m, n, params)
    return DistanceReport(
        out.value + const,
        "stiefel_multistart",
        AffineProjection(out.V, -out.V @ rho2.mean),
        restarts_agreeing=out.restarts_agreeing,
        iterations=out.iterations,
    )


# ---------------------------------------------------------------------------
# Gaussian vs Gaussian through the optimizer

POLISH_FACTOR = 10


def _minimize_polished(f, grad, m, n, params: OptimizerParams):
    """Multistart with b frozen, then continue the best restart if it stalled.

    Ill-conditioned covariances slow the descent; the extra budget goes only
    to the single best start.
    """
    out = minimize(f, grad, m, n, params, optimize_b=False)
    if out.converged or params.max_iters == 0:
        return out
    more = replace(params, restarts=1, max_iters=POLISH_FACTOR * params.max_iters)
    again = minimize(f, grad, m, n, more, optimize_b=False, initial=[(out.V, out.b)])
    if again.value <= out.value:
        values = list(out.restart_values)
        values[out.restart_index] = again.value
        out = replace(
            again,
            iterations=out.iterations + again.iterations,
            restart_index=out.restart_index,
            restart_values=values,
        )
    return out


def aug_w2_gauss_gauss(
    rho1: GaussianMeasure, rho2: GaussianMeasure, params: OptimizerParams = OptimizerParams()
) -> DistanceReport:
    m, n = rho1.dim, rho2.dim
    _require_order(m, n)
    S1, S2 = rho1.cov, rho2.cov

    R = sqrtm_psd(S1)

    def f(V, b):
        return bures_from_roots(R, sqrtm_psd(V @ S2 @ V.T))

    def grad(V, b):
        # d tr (R A R)^(1/2) = 1/2 tr (R A R)^(-1/2) R dA R, with A = V S2 V^T
        lam, Q = np.linalg.eigh(R @ V @ S2 @ V.T @ R)
        if lam[0] <= 1e-12 * max(lam[-1], 1e-300):
            return fd_gradient(f, V, b, with_b=False)
        inv_root = (Q / np.sqrt(lam)) @ Q.T
        return 2.0 * (np.eye(m) - R @ inv_root @ R) @ V @ S2, np.zeros_like(b)

    out = _minimize_polished(f, grad, m, n, params)
    V = out.V
    return DistanceReport(
        math.sqrt(max(out.value, 0.0)),
        "stiefel_multistart",
        AffineProjection(V, rho1.mean - V @ rho2.mean),
        restarts_agreeing=out.restarts_agreeing,
        iterations=out.iterations,
    )


def aug_kl_gauss_gauss(
    rho1: GaussianMeasure, rho2: GaussianMeasure, params: OptimizerParams = OptimizerParams()
) -> DistanceReport:
    m, n = rho1.dim, rho2.dim
    _require_order(m, n)
    S1, S2 = rho1.cov, rho2.cov
    L1 = _chol(S1, "first")
    _chol(S2, "second")
    logdet1 = 2.0 * float(np.sum(np.log(np.diag(L1))))

    def f(V, b):
        A = V @ S2 @ V.T
        sign, logdet = np.linalg.slogdet(A)
        if sign <= 0:
            return math.inf
        return 0.5 * (float(np.trace(np.linalg.solve(A, S1))) - m + logdet - logdet1)

    def grad(V, b):
        Ainv = np.linalg.inv(V @ S2 @ V.T)
        return (Ainv - Ainv @ S1 @ Ainv) @ V @ S2, np.zeros_like(b)

    out = _minimize_polished(f, grad, m, n, params)
    V = out.V
    return DistanceReport(
        max(out.value, 0.0),
        "stiefel_multistart",
        AffineProjection(V, rho1.mean - V @ rho2.mean),
        restarts_agreeing=out.restarts_agreeing,
        iterations=out.iterations,
    )


# ---------------------------------------------------------------------------
# discrete measures

def aug_w2_dirac_discrete(y, rho2: DiscreteMeasure) -> DistanceReport:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    m, n = y.size, rho2.dim
    _require_order(m, n)
    xbar = rho2.mean()
    Xc = rho2.points - xbar
    X = (Xc * rho2.weights[:, None]).T @ Xc
    lam, Q = _eigh(X)
    value = math.sqrt(max(float(np.sum(lam[:m])), 0.0))
    V = Q[:, :m].T
    plan = Coupling(rho2.weights.reshape(1, -1), [1.0], rho2.weights)
    return DistanceReport(value, "closed_form", AffineProjection(V, y - V @ xbar), plan)


def _projected_cost(V, b, u, x, p):
    return pairwise_cost(u, x @ V.T + b, p)


JOINT_WARMUP_ITERS = 25


def _alternate(V, rho1, rho2, S, Uc, Xc, ubar, xbar, params, max_rounds=200):
    """Alternate exact OT and the unbalanced Procrustes V-step from V."""
    prev = math.inf
    rounds = 0
    while True:
        b = ubar - V @ xbar
        value, plan = ot_solve(_projected_cost(V, b, rho1.points, rho2.points, 2), rho1.weights, rho2.weights)
        value = max(value, 0.0)
        rounds += 1
        if value <= 1e-300 or prev - value < 1e-12 * prev or rounds >= max_rounds:
            return V, b, value, plan, rounds
        prev = value
        C = Xc.T @ plan.plan.T @ Uc  # n x m

        def f(W, _b):
            return float(np.sum((W @ S) * W) - 2.0 * np.trace(W @ C))

        def grad(W, _b):
            return 2.0 * W @ S - 2.0 * C.T, np.zeros(W.shape[0])

        inner = OptimizerParams(
            restarts=1,
            max_iters=params.max_iters,
            grad_tol=params.grad_tol,
            armijo_c=params.armijo_c,
            backtrack=params.backtrack,
            seed=params.seed,
        )
        V = minimize(f, grad, V.shape[0], V.shape[1], inner, optimize_b=False, initial=[(V, np.zeros(V.shape[0]))]).V


def _transport_objective(rho1: DiscreteMeasure, rho2: DiscreteMeasure, p: float):
    """W_p^p(rho1, phi(rho2)) as a function of (V, b), with the fixed-plan gradient."""
    u, x = rho1.points, rho2.points
    last = threading.local()  # the gradient is asked for at the point just evaluated

    def solve(W, c):
        key = (W.tobytes(), c.tobytes())
        if getattr(last, "key", None) != key:
            last.key = key
            last.sol = ot_solve(_projected_cost(W, c, u, x, p), rho1.weights, rho2.weights)
        return last.sol

    def f(W, c):
        return solve(W, c)[0]

    def grad(W, c):
        pl = solve(W, c)[1]
        R = (x @ W.T + c)[None, :, :] - u[:, None, :]  # k x l x m
        norms = np.linalg.norm(R, axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(norms > 0, p * norms ** (p - 2), 0.0) * pl.plan
        wR = scale[:, :, None] * R
        return np.einsum("klm,ln->mn", wR, x), wR.sum(axis=(0, 1))

    return f, grad


def aug_w2_discrete_discrete(
    rho1: DiscreteMeasure,
    rho2: DiscreteMeasure,
    p: float = 2.0,
    params: OptimizerParams = OptimizerParams(),
) -> DistanceReport:
    """Augmented p-Wasserstein distance between two discrete measures.

    For p = 2 each restart takes a short joint descent on (V, b) from its Haar
    start, then alternates an exact transport plan with a Stiefel descent on
    the V-subproblem (b is eliminated exactly) until the value settles.
    Neither phase can increase the objective.  Other p use the multistart
    optimizer on the full transport objective, with the p = 2 solution as the
    first starting point.
    """
    m, n = rho1.dim, rho2.dim
    _require_order(m, n)
    if not p >= 1 or not np.isfinite(p):
        raise InvalidParameter(f"p must be a finite number >= 1, got {p!r}")
    ubar, xbar = rho1.mean(), rho2.mean()
    Uc, Xc = rho1.points - ubar, rho2.points - xbar
    S = (Xc * rho2.weights[:, None]).T @ Xc
    f2, grad2 = _transport_objective(rho1, rho2, 2.0)
    warmup = OptimizerParams(
        restarts=1,
        max_iters=min(JOINT_WARMUP_ITERS, params.max_iters),
        grad_tol=params.grad_tol,
        armijo_c=params.armijo_c,
        backtrack=params.backtrack,
    )

    best = None
    values = []
    for r in range(params.restarts):
        V0 = haar_sample(m, n, params.seed + r)
        V0 = minimize(f2, grad2, m, n, warmup, initial=[(V0, ubar - V0 @ xbar)]).V
        res = _alternate(V0, rho1, rho2, S, Uc, Xc, ubar, xbar, params)
        values.append(res[2])
        if best is None or res[2] < best[2]:
            best = res
    V, b, value, plan, rounds = best
    tol = 1e-8 * (1.0 + value)
    agreeing = sum(1 for v in values if v - value <= tol)
    if p == 2:
        return DistanceReport(
            math.sqrt(value), "alternating", AffineProjection(V, b), plan, agreeing, rounds
        )

    f, grad = _transport_objective(rho1, rho2, p)
    starts = [(V, b)]
    for r in range(1, params.restarts):
        Vr = haar_sample(m, n, params.seed + r)
        starts.append((Vr, ubar - Vr @ xbar))
    out = minimize(f, grad, m, n, params, initial=starts)
    _, plan = ot_solve(_projected_cost(out.V, out.b, rho1.points, rho2.points, p), rho1.weights, rho2.weights)
    return DistanceReport(
        max(out.value, 0.0) ** (1.0 / p),
        "stiefel_multistart",
        AffineProjection(out.V, out.b),
        plan,
        out.restarts_agreeing,
        out.iterations,
    )
