"""Measure families and the affine pushforward x -> Vx + b.

Every measure is validated on construction and immutable afterwards; the
numpy arrays they hold are flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from .errors import (
    AugDistError,
    DimensionMismatch,
    InvalidParameter,
    NonFiniteEntry,
    NotPositiveSemidefinite,
    WeightSumViolation,
)

WEIGHT_RENORM_BAND = 1e-9
STIEFEL_TOL = 1e-10
PSD_REL_TOL = 1e-10
SYM_REL_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise NonFiniteEntry(f"{what} contains NaN or Inf")


def merge_tolerance(points: np.ndarray) -> float:
    """Distance below which two atoms are treated as the same point."""
    if points.size == 0:
        return 1e-9
    return 1e-9 * (1.0 + float(np.max(np.linalg.norm(points, axis=1))))


def merge_atoms(points: np.ndarray, weights: np.ndarray, tol: float = 0.0):
    """Group atoms lying within ``tol`` of an earlier representative.

    Returns ``(points, weights, labels)`` where ``labels[i]`` is the index of
    the merged atom that input atom ``i`` was assigned to.  Representatives
    keep the coordinates of the first atom of their group, so the output
    order follows first occurrence.
    """
    k = points.shape[0]
    labels = np.empty(k, dtype=int)
    reps: list[int] = []
    if tol <= 0.0:
        seen: dict[bytes, int] = {}
        for i in range(k):
            key = np.ascontiguousarray(points[i]).tobytes()
            j = seen.get(key)
            if j is None:
                j = seen[key] = len(reps)
                reps.append(i)
            labels[i] = j
    else:
        for i in range(k):
            if reps:
                d = np.linalg.norm(points[reps] - points[i], axis=1)
                j = int(np.argmin(d))
                if d[j] <= tol:
                    labels[i] = j
                    continue
            labels[i] = len(reps)
            reps.append(i)
    merged_w = np.zeros(len(reps))
    np.add.at(merged_w, labels, weights)
    return points[reps], merged_w, labels


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely many atoms ``points[i]`` carrying mass ``weights[i]``.

    Exact duplicate points are merged and zero-weight atoms dropped, so two
    measures built from the same data compare equal atom-for-atom.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if w.size == pts.size else pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DimensionMismatch(f"points must be a non-empty k x n array, got shape {pts.shape}")
        if pts.shape[0] != w.size:
            raise DimensionMismatch(f"{pts.shape[0]} points but {w.size} weights")
        _check_finite(pts, "points")
        _check_finite(w, "weights")
        if np.any(w < 0):
            raise WeightSumViolation("negative weight")
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_RENORM_BAND:
            raise WeightSumViolation(f"weights sum to {total!r}, not 1")
        w = w / total
        keep = w > 0
        pts, w, _ = merge_atoms(pts[keep], w[keep])
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    @classmethod
    def dirac(cls, y) -> "DiscreteMeasure":
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return cls(y.reshape(1, -1), [1.0])

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dim={self.dim}, atoms={self.size})"


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if mu.ndim != 1 or cov.shape != (mu.size, mu.size):
            raise DimensionMismatch(f"mean of dim {mu.size} but covariance of shape {cov.shape}")
        _check_finite(mu, "mean")
        _check_finite(cov, "covariance")
        object.__setattr__(self, "mean", _frozen(mu))
        object.__setattr__(self, "cov", _frozen(check_covariance(cov)))

    @property
    def dim(self) -> int:
        return self.mean.size

    def __repr__(self) -> str:
        return f"GaussianMeasure(dim={self.dim})"


@dataclass(frozen=True)
class UniformBallMeasure:
    """Uniform probability on the closed unit Euclidean ball of R^dim."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidParameter(f"ball dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))


Measure = Union[DiscreteMeasure, GaussianMeasure, UniformBallMeasure]


def check_covariance(cov: np.ndarray) -> np.ndarray:
    """Symmetrize ``cov`` and clamp tiny negative eigenvalues to zero."""
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > SYM_REL_TOL * scale:
        raise NotPositiveSemidefinite("covariance is not symmetric")
    cov = 0.5 * (cov + cov.T)
    lam, Q = np.linalg.eigh(cov)
    lam_max = max(float(lam[-1]), 0.0)
    if lam[0] < -PSD_REL_TOL * lam_max or (lam_max == 0.0 and lam[0] < 0):
        raise NotPositiveSemidefinite(f"covariance has eigenvalue {lam[0]:.3g}")
    if lam[0] < 0:
        cov = (Q * np.clip(lam, 0.0, None)) @ Q.T
        cov = 0.5 * (cov + cov.T)
    return cov


@dataclass(frozen=True, eq=False)
class AffineProjection:
    """The map x -> V x + b with V having orthonormal rows (m <= n)."""

    V: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        _check_finite(V, "V")
        _check_finite(b, "b")
        m, n = V.shape
        if m > n:
            raise DimensionMismatch(f"projection V has {m} rows but only {n} columns")
        if b.shape != (m,):
            raise DimensionMismatch(f"offset b must have length {m}, got {b.shape}")
        err = np.max(np.abs(V @ V.T - np.eye(m)))
        if err > STIEFEL_TOL:
            raise InvalidParameter(f"rows of V are not orthonormal (error {err:.3g})")
        object.__setattr__(self, "V", _frozen(V))
        object.__setattr__(self, "b", _frozen(b))

    @property
    def m(self) -> int:
        return self.V.shape[0]

    @property
    def n(self) -> int:
        return self.V.shape[1]

    @classmethod
    def identity(cls, n: int) -> "AffineProjection":
        return cls(np.eye(n), np.zeros(n))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Map a point (n,) or a stack of points (k, n)."""
        return np.asarray(x, dtype=float) @ self.V.T + self.b

    def compose(self, inner: "AffineProjection") -> "AffineProjection":
        """Return ``self o inner``."""
        if inner.m != self.n:
            raise DimensionMismatch(f"cannot compose {self.m}x{self.n} after {inner.m}x{inner.n}")
        return AffineProjection(self.V @ inner.V, self.V @ inner.b + self.b)


def project_atoms(nu: DiscreteMeasure, phi: AffineProjection):
    """Project the atoms of ``nu`` and merge collisions.

    Returns ``(points, weights, labels)``; ``labels[i]`` is the image atom of
    ``nu.points[i]``.
    """
    if nu.dim != phi.n:
        raise DimensionMismatch(f"measure of dim {nu.dim} cannot be projected by a {phi.m}x{phi.n} map")
    img = phi.apply(nu.points)
    return merge_atoms(img, nu.weights, merge_tolerance(img))


def pushforward_discrete(nu: DiscreteMeasure, phi: AffineProjection) -> DiscreteMeasure:
    pts, w, _ = project_atoms(nu, phi)
    return DiscreteMeasure(pts, w)


def pushforward_gaussian(nu: GaussianMeasure, phi: AffineProjection) -> GaussianMeasure:
    if nu.dim != phi.n:
        raise DimensionMismatch(f"Gaussian of dim {nu.dim} cannot be projected by a {phi.m}x{phi.n} map")
    cov = phi.V @ nu.cov @ phi.V.T
    return GaussianMeasure(phi.V @ nu.mean + phi.b, 0.5 * (cov + cov.T))


def pushforward(nu, phi: AffineProjection):
    if isinstance(nu, DiscreteMeasure):
        return pushforward_discrete(nu, phi)
    if isinstance(nu, GaussianMeasure):
        return pushforward_gaussian(nu, phi)
    raise TypeError(f"pushforward is not implemented for {type(nu).__name__}")


def same_atoms(a: DiscreteMeasure, b: DiscreteMeasure, weight_tol: float = 1e-12) -> bool:
    """True when the two measures agree atom-for-atom up to the merge tolerance."""
    if a.dim != b.dim or a.size != b.size:
        return False
    tol = max(merge_tolerance(a.points), merge_tolerance(b.points))
    used = np.zeros(b.size, dtype=bool)
    for x, w in zip(a.points, a.weights):
        d = np.linalg.norm(b.points - x, axis=1)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol or abs(b.weights[j] - w) > weight_tol:
            return False
        used[j] = True
    return True


def validate(measure: Any) -> Measure:
    """Check a measure, or build one from raw fields.

    Accepts an existing measure (re-validated from its fields) or a mapping in
    the measure-spec layout ``{"type": ..., ...}``.
    """
    if isinstance(measure, DiscreteMeasure):
        return DiscreteMeasure(measure.points, measure.weights)
    if isinstance(measure, GaussianMeasure):
        return GaussianMeasure(measure.mean, measure.cov)
    if isinstance(measure, UniformBallMeasure):
        return UniformBallMeasure(measure.dim)
    if isinstance(measure, dict):
        return measure_from_spec(measure)
    raise TypeError(f"cannot validate {type(measure).__name__}")


def measure_from_spec(spec: dict) -> Measure:
    kind = spec.get("type")
    try:
        if kind == "gaussian":
            return GaussianMeasure(spec["mean"], spec["cov"])
        if kind == "discrete":
            pts = np.asarray(spec["points"], dtype=float)
            if pts.ndim == 1:
                pts = pts.reshape(-1, 1)
            return DiscreteMeasure(pts, spec["weights"])
        if kind == "uniform_ball":
            return UniformBallMeasure(spec["dim"])
    except KeyError as exc:
        raise InvalidParameter(f"measure spec of type {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, AugDistError):
            raise
        raise InvalidParameter(f"malformed measure spec: {exc}") from None
    raise InvalidParameter(f"unknown measure type {kind!r}")


def measure_to_spec(measure: Measure) -> dict:
    if isinstance(measure, DiscreteMeasure):
        return {"type": "discrete", "points": measure.points.tolist(), "weights": measure.weights.tolist()}
    if isinstance(measure, GaussianMeasure):
        return {"type": "gaussian", "mean": measure.mean.tolist(), "cov": measure.cov.tolist()}
    if isinstance(measure, UniformBallMeasure):
        return {"type": "uniform_ball", "dim": measure.dim}
    raise TypeError(f"unknown measure {type(measure).__name__}")

