"""Metric names, same-dimension dispatch and the routing table used by the CLI.

Routing for ``method="auto"`` (first matching row wins):

    equal dimensions                         -> base distance, identity certificate
    1-d Gaussian vs n-d Gaussian, w2 | kl    -> closed form
    uniform ball vs Gaussian, kl             -> ball/Gaussian path (closed form or optimizer)
    discrete vs discrete, wp                 -> alternating OT / Stiefel solver
    Gaussian vs Gaussian, w2 | kl            -> Stiefel multistart
    anything else                            -> UnsupportedCombination

Only W_p and total variation are symmetric; for them a request with the
higher-dimensional measure first is served by swapping the arguments.  Every
other metric raises DimensionOrder in that situation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .augmented import (
    DistanceReport,
    aug_kl_ball_gauss,
    aug_kl_gauss_1d_nd,
    aug_kl_gauss_gauss,
    aug_w2_dirac_discrete,
    aug_w2_discrete_discrete,
    aug_w2_gauss_1d_nd,
    aug_w2_gauss_gauss,
    has_ball_closed_form,
)
from .base import (
    DivergenceGenerator,
    f_divergence_discrete,
    js_discrete,
    kl_ball_gaussian,
    kl_gaussian,
    tv_discrete,
    w2_gaussian,
    wp_discrete,
)
from .errors import DimensionOrder, InvalidParameter, UnsupportedCombination
from .measures import AffineProjection, DiscreteMeasure, GaussianMeasure, UniformBallMeasure, pushforward
from .stiefel import OptimizerParams
from .witness import brute_force_search

ROUTING_METHODS = ("auto", "closed-form", "optimize", "brute-force")
_GENERATOR_NAMES = {
    "kl": "kl",
    "hellinger": "hellinger",
    "pearson": "pearson",
    "jeffreys": "jeffreys",
    "renyi": "renyi",
    "chernoff": "chernoff",
    "alphabeta": "alphabeta",
    "exponential": "exponential",
}


@dataclass(frozen=True)
class Metric:
    name: str  # "wp", "tv", "js" or a generator name
    p: float = 2.0
    theta: float = 0.5
    phi: float = 0.5

    @property
    def symmetric(self) -> bool:
        return self.name in ("wp", "tv")

    @property
    def generator(self) -> DivergenceGenerator:
        return DivergenceGenerator(_GENERATOR_NAMES[self.name], self.theta, self.phi)

    def label(self) -> str:
        if self.name == "wp":
            return f"w{self.p:g}" if self.p in (1, 2) else f"wp:{self.p:g}"
        if self.name in ("js", "renyi", "chernoff"):
            return f"{self.name}:{self.theta:g}"
        if self.name == "alphabeta":
            return f"alphabeta:{self.theta:g}:{self.phi:g}"
        return self.name


def parse_metric(text: str) -> Metric:
    """Parse names such as ``w2``, ``wp:1.5``, ``js:0.3`` or ``alphabeta:0.2:0.7``."""
    parts = text.strip().lower().split(":")
    head, args = parts[0], parts[1:]
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise InvalidParameter(f"bad metric parameters in {text!r}") from None
    if head in ("w1", "w2") and not args:
        return Metric("wp", p=float(head[1]))
    if head == "wp" and len(nums) == 1:
        if not nums[0] >= 1 or not math.isfinite(nums[0]):
            raise InvalidParameter(f"wp needs a finite p >= 1, got {args[0]}")
        return Metric("wp", p=nums[0])
    if head == "tv" and not args:
        return Metric("tv")
    if head == "js" and len(nums) <= 1:
        theta = nums[0] if nums else 0.5
        if not 0 < theta < 1:
            raise InvalidParameter("js needs theta in (0, 1)")
        return Metric("js", theta=theta)
    if head in ("kl", "hellinger", "pearson", "jeffreys", "exponential") and not args:
        return Metric(head)
    if head in ("renyi", "chernoff") and len(nums) == 1:
        metric = Metric(head, theta=nums[0])
        metric.generator  # validates the range
        return metric
    if head == "alphabeta" and len(nums) == 2:
        metric = Metric(head, theta=nums[0], phi=nums[1])
        metric.generator
        return metric
    raise InvalidParameter(f"unknown metric {text!r}")


def _family(measure) -> str:
    if isinstance(measure, DiscreteMeasure):
        return "discrete"
    if isinstance(measure, GaussianMeasure):
        return "gaussian"
    if isinstance(measure, UniformBallMeasure):
        return "uniform_ball"
    raise TypeError(f"unknown measure {type(measure).__name__}")


def base_distance(metric: Metric, a, b) -> float:
    """Same-dimension distance d(a, b); +inf is a valid result for divergences."""
    return _base(metric, a, b)[0]


def _base(metric: Metric, a, b):
    fa, fb = _family(a), _family(b)
    if a.dim != b.dim:
        raise InvalidParameter(f"base distance needs equal dimensions, got {a.dim} and {b.dim}")
    if fa == fb == "discrete":
        if metric.name == "wp":
            return wp_discrete(a, b, metric.p)
        if metric.name == "tv":
            return tv_discrete(a, b).value, None
        if metric.name == "js":
            return js_discrete(a, b, metric.theta), None
        return f_divergence_discrete(a, b, metric.generator), None
    if fa == fb == "gaussian":
        if metric.name == "wp" and metric.p == 2:
            return w2_gaussian(a, b), None
        if metric.name == "kl":
            return kl_gaussian(a, b), None
    if fa == "uniform_ball" and fb == "gaussian" and metric.name == "kl":
        return kl_ball_gaussian(a.dim, b), None
    raise UnsupportedCombination(f"{metric.label()} between {fa} and {fb} measures is not supported")


def distance_at(metric: Metric, rho1, rho2, phi: AffineProjection) -> DistanceReport:
    """d(rho1, phi(rho2)) for one fixed projection."""
    value, plan = _base(metric, rho1, pushforward(rho2, phi))
    return DistanceReport(value, "fixed_projection", phi, plan)


def orient(metric: Metric, rho1, rho2):
    """Return ``(low, high, swapped)`` with low the lower-dimensional measure."""
    if rho1.dim <= rho2.dim:
        return rho1, rho2, False
    if metric.symmetric and not isinstance(rho2, UniformBallMeasure):
        return rho2, rho1, True
    raise DimensionOrder(
        f"{metric.label()} needs the lower-dimensional measure first (got dims {rho1.dim} > {rho2.dim})"
    )


def compute_distance(
    metric: Metric,
    rho1,
    rho2,
    method: str = "auto",
    params: OptimizerParams = OptimizerParams(),
    samples: int = 2000,
    projection: Optional[AffineProjection] = None,
) -> "tuple[DistanceReport, bool]":
    """Route a request; returns the report and whether the arguments were swapped."""
    if method not in ROUTING_METHODS:
        raise InvalidParameter(f"unknown method {method!r}")
    low, high, swapped = orient(metric, rho1, rho2)
    if isinstance(high, UniformBallMeasure):
        raise UnsupportedCombination("the uniform ball is only supported as the first (low-dimensional) measure")
    if projection is not None:
        return distance_at(metric, low, high, projection), swapped
    fl, fh = _family(low), _family(high)
    m, n = low.dim, high.dim
    gauss_pair = fl == fh == "gaussian"
    w2, kl = metric.name == "wp" and metric.p == 2, metric.name == "kl"

    if method == "brute-force":
        value, phi = brute_force_search(
            lambda a, b: base_distance(metric, a, b), low, high, samples, params.seed, refine=True
        )
        return DistanceReport(value, "brute_force", phi), swapped

    if method == "auto":
        if m == n:
            value, plan = _base(metric, low, high)
            return DistanceReport(value, "base", AffineProjection.identity(n), plan), swapped
        if gauss_pair and m == 1 and (w2 or kl):
            return (aug_w2_gauss_1d_nd if w2 else aug_kl_gauss_1d_nd)(low, high), swapped
        if fl == "uniform_ball" and fh == "gaussian" and kl:
            return aug_kl_ball_gauss(low, high, params), swapped
        if fl == fh == "discrete" and metric.name == "wp":
            return aug_w2_discrete_discrete(low, high, metric.p, params), swapped
        if gauss_pair and (w2 or kl):
            return (aug_w2_gauss_gauss if w2 else aug_kl_gauss_gauss)(low, high, params), swapped

    elif method == "closed-form":
        if m == n:
            value, plan = _base(metric, low, high)
            return DistanceReport(value, "base", AffineProjection.identity(n), plan), swapped
        if gauss_pair and m == 1 and (w2 or kl):
            return (aug_w2_gauss_1d_nd if w2 else aug_kl_gauss_1d_nd)(low, high), swapped
        if fl == "uniform_ball" and fh == "gaussian" and kl and has_ball_closed_form(m, n):
            return aug_kl_ball_gauss(low, high, params), swapped
        if fl == fh == "discrete" and w2 and low.size == 1:
            return aug_w2_dirac_discrete(low.points[0], high), swapped

    elif method == "optimize":
        if gauss_pair and (w2 or kl):
            return (aug_w2_gauss_gauss if w2 else aug_kl_gauss_gauss)(low, high, params), swapped
        if fl == "uniform_ball" and fh == "gaussian" and kl:
            return aug_kl_ball_gauss(low, high, params, force_optimizer=True), swapped
        if fl == fh == "discrete" and metric.name == "wp":
            return aug_w2_discrete_discrete(low, high, metric.p, params), swapped

    raise UnsupportedCombination(
        f"no {method} route for {metric.label()} between {fl} (dim {m}) and {fh} (dim {n}) measures"
    )
