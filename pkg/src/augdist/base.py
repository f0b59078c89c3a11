"""Distances between measures of the same dimension.

Covers discrete p-Wasserstein (exact OT), the Gaussian closed forms for W2 and
KL, total variation with its positive-set certificate, the skewed
Jensen-Shannon divergence and a family of f-divergence generators.  All
logarithms are natural; +inf is a legitimate return value for divergences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, SingularCovariance
from .measures import DiscreteMeasure, GaussianMeasure, merge_atoms, merge_tolerance
from .ot import Coupling, ot_solve


def _same_dim(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f"measures live in R^{a.dim} and R^{b.dim}")


# ---------------------------------------------------------------------------
# Wasserstein

def pairwise_cost(x: np.ndarray, y: np.ndarray, p: float) -> np.ndarray:
    d = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=2)
    return d if p == 1 else d**p


def wp_discrete(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0):
    """p-Wasserstein distance and an optimal coupling (rows: mu, columns: nu)."""
    _same_dim(mu, nu)
    if not p >= 1 or not np.isfinite(p):
        raise InvalidParameter(f"p must be a finite number >= 1, got {p!r}")
    cost, plan = ot_solve(pairwise_cost(mu.points, nu.points, p), mu.weights, nu.weights)
    return max(cost, 0.0) ** (1.0 / p), plan


def sqrtm_psd(A: np.ndarray) -> np.ndarray:
    A = 0.5 * (A + A.T)
    lam, Q = np.linalg.eigh(A)
    return (Q * np.sqrt(np.clip(lam, 0.0, None))) @ Q.T


def bures_from_roots(R1: np.ndarray, R2: np.ndarray) -> float:
    """Bures term from the PSD square roots of the two covariances.

    Evaluated as min over orthogonal U of ||R1 - R2 U||_F^2, which equals
    tr(S1 + S2 - 2 (S2^1/2 S1 S2^1/2)^1/2) but keeps full relative accuracy
    when the two covariances nearly coincide.
    """
    P, _, Qt = np.linalg.svd(R2 @ R1)
    return float(np.sum((R1 - R2 @ P @ Qt) ** 2))


def bures_sq(S1: np.ndarray, S2: np.ndarray) -> float:
    return bures_from_roots(sqrtm_psd(S1), sqrtm_psd(S2))


def w2_gaussian_sq(m1, S1, m2, S2) -> float:
    d = np.asarray(m1) - np.asarray(m2)
    return max(float(d @ d) + bures_sq(S1, S2), 0.0)


def w2_gaussian(rho1: GaussianMeasure, rho2: GaussianMeasure) -> float:
    _same_dim(rho1, rho2)
    return math.sqrt(w2_gaussian_sq(rho1.mean, rho1.cov, rho2.mean, rho2.cov))


# ---------------------------------------------------------------------------
# Gaussian KL

def _chol(S: np.ndarray, what: str) -> np.ndarray:
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise SingularCovariance(f"{what} covariance is not positive definite") from None
    if np.min(np.diag(L)) <= 0:
        raise SingularCovariance(f"{what} covariance is not positive definite")
    return L


def kl_gaussian_arrays(m1, S1, m2, S2) -> float:
    L1 = _chol(S1, "first")
    L2 = _chol(S2, "second")
    n = S1.shape[0]
    A = np.linalg.solve(L2, L1)
    d = np.linalg.solve(L2, np.asarray(m2) - np.asarray(m1))
    logdet = 2.0 * (np.sum(np.log(np.diag(L2))) - np.sum(np.log(np.diag(L1))))
    return 0.5 * (float(np.sum(A * A)) + float(d @ d) - n + logdet)


def kl_gaussian(rho1: GaussianMeasure, rho2: GaussianMeasure) -> float:
    _same_dim(rho1, rho2)
    return kl_gaussian_arrays(rho1.mean, rho1.cov, rho2.mean, rho2.cov)


def ball_log_constant(m: int) -> float:
    """log Gamma(m/2 + 1) + (m/2) log 2."""
    return math.lgamma(m / 2 + 1) + 0.5 * m * math.log(2.0)


def kl_ball_gaussian_arrays(m: int, mean, cov) -> float:
    """KL(U(B^m) || N_m(mean, cov))."""
    L = _chol(np.asarray(cov, dtype=float), "Gaussian")
    Linv = np.linalg.inv(L)
    d = Linv @ np.asarray(mean, dtype=float)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return ball_log_constant(m) + 0.5 * (logdet + float(np.sum(Linv * Linv)) / (m + 2) + float(d @ d))


def kl_ball_gaussian(m: int, rho: GaussianMeasure) -> float:
    if rho.dim != m:
        raise DimensionMismatch(f"ball in R^{m} vs Gaussian in R^{rho.dim}")
    return kl_ball_gaussian_arrays(m, rho.mean, rho.cov)


# ---------------------------------------------------------------------------
# Discrete divergences on a common support

def union_support(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Atoms of mu and nu matched up to the merge tolerance.

    Returns ``(points, p, q)`` with ``p``/``q`` the masses mu/nu put on each
    union atom.
    """
    _same_dim(mu, nu)
    pts = np.vstack([mu.points, nu.points])
    w = np.concatenate([mu.weights, nu.weights])
    support, _, labels = merge_atoms(pts, w, merge_tolerance(pts))
    p = np.zeros(len(support))
    q = np.zeros(len(support))
    np.add.at(p, labels[: mu.size], mu.weights)
    np.add.at(q, labels[mu.size:], nu.weights)
    return support, p, q


@dataclass(frozen=True, eq=False)
class TvCertificate:
    value: float
    positive_set: tuple
    support: np.ndarray

    def __post_init__(self):
        if not -1e-12 <= self.value <= 1 + 1e-12:
            raise ValueError(f"total variation {self.value} outside [0, 1]")


def tv_discrete(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TvCertificate:
    support, p, q = union_support(mu, nu)
    S = np.flatnonzero(p > q)
    value = float(np.sum(p[S]) - np.sum(q[S]))
    return TvCertificate(min(max(value, 0.0), 1.0), tuple(int(i) for i in S), support)


def _kl_masses(p: np.ndarray, q: np.ndarray) -> float:
    pos = p > 0
    if np.any(q[pos] <= 0):
        return math.inf
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))


def js_discrete(mu: DiscreteMeasure, nu: DiscreteMeasure, theta: float = 0.5) -> float:
    """Half KL to each skewed mixture; finite for any pair of measures."""
    if not 0 < theta < 1:
        raise InvalidParameter(f"theta must lie in (0, 1), got {theta!r}")
    _, p, q = union_support(mu, nu)
    zeta = (1 - theta) * p + theta * q
    eta = (1 - theta) * q + theta * p
    return max(0.5 * _kl_masses(p, zeta) + 0.5 * _kl_masses(q, eta), 0.0)


KINDS = (
    "kl",
    "exponential",
    "pearson",
    "hellinger",
    "jeffreys",
    "renyi",
    "chernoff",
    "alphabeta",
    "jensen_shannon",
    "total_variation",
)
_ONE_PARAM = {"renyi", "chernoff", "jensen_shannon"}


@dataclass(frozen=True)
class DivergenceGenerator:
    """A convex-style generator f with f(1) = 0, plus its boundary limits.

    ``at_zero`` is the right limit f(0+) and ``slope_at_infinity`` is
    lim f(t)/t as t -> inf; both may be +inf.
    """

    kind: str
    theta: float = 0.5
    phi: float = 0.5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown generator {self.kind!r}")
        needs = ("theta", "phi") if self.kind == "alphabeta" else ("theta",) if self.kind in _ONE_PARAM else ()
        for name in needs:
            val = getattr(self, name)
            if not 0 < val < 1:
                raise InvalidParameter(f"{self.kind} requires {name} in (0, 1), got {val!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        th, ph = self.theta, self.phi
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "kl":
                return t * np.log(t)
            if self.kind == "exponential":
                return t * np.log(t) ** 2
            if self.kind == "pearson":
                return (t - 1) ** 2
            if self.kind == "hellinger":
                return (np.sqrt(t) - 1) ** 2
            if self.kind == "jeffreys":
                return (t - 1) * np.log(t)
            if self.kind == "renyi":
                return (t**th - t) / (th * (th - 1))
            if self.kind == "chernoff":
                return 4 * (1 - t ** ((1 + th) / 2)) / (1 - th**2)
            if self.kind == "alphabeta":
                return 2 * (1 - t ** ((1 - th) / 2)) * (1 - t ** ((1 - ph) / 2)) / ((1 - th) * (1 - ph))
            if self.kind == "jensen_shannon":
                return 0.5 * t * np.log(t / ((1 - th) * t + th)) + 0.5 * np.log(1 / (1 - th + th * t))
            return 0.5 * np.abs(t - 1)

    @property
    def at_zero(self) -> float:
        th, ph = self.theta, self.phi
        return {
            "kl": 0.0,
            "exponential": 0.0,
            "pearson": 1.0,
            "hellinger": 1.0,
            "jeffreys": math.inf,
            "renyi": 0.0,
            "chernoff": 4 / (1 - th**2),
            "alphabeta": 2 / ((1 - th) * (1 - ph)),
            "jensen_shannon": -0.5 * math.log(1 - th),
            "total_variation": 0.5,
        }[self.kind]

    @property
    def slope_at_infinity(self) -> float:
        th = self.theta
        return {
            "kl": math.inf,
            "exponential": math.inf,
            "pearson": math.inf,
            "hellinger": 1.0,
            "jeffreys": math.inf,
            "renyi": 1 / (th * (1 - th)),
            "chernoff": 0.0,
            "alphabeta": 0.0,
            "jensen_shannon": -0.5 * math.log(1 - th),
            "total_variation": 0.5,
        }[self.kind]


def f_divergence_masses(p: np.ndarray, q: np.ndarray, g: DivergenceGenerator) -> float:
    """sum q f(p/q) over a shared support with the boundary conventions."""
    total = 0.0
    both = (p > 0) & (q > 0)
    if np.any(both):
        total += float(np.sum(q[both] * g(p[both] / q[both])))
    only_q = (p <= 0) & (q > 0)
    if np.any(only_q):
        total += float(np.sum(q[only_q])) * g.at_zero
    only_p = (p > 0) & (q <= 0)
    if np.any(only_p):
        total += float(np.sum(p[only_p])) * g.slope_at_infinity
    return total


def f_divergence_discrete(mu: DiscreteMeasure, nu: DiscreteMeasure, g: DivergenceGenerator) -> float:
    _, p, q = union_support(mu, nu)
    return f_divergence_masses(p, q, g)


__all__ = [
    "Coupling",
    "DivergenceGenerator",
    "TvCertificate",
    "f_divergence_discrete",
    "js_discrete",
    "kl_ball_gaussian",
    "kl_gaussian",
    "tv_discrete",
    "w2_gaussian",
    "wp_discrete",
]
