"""Distances between probability measures living in different dimensions."""

from .augmented import (
    DistanceReport,
    aug_kl_ball_gauss,
    aug_kl_gauss_1d_nd,
    aug_kl_gauss_gauss,
    aug_w2_dirac_discrete,
    aug_w2_discrete_discrete,
    aug_w2_gauss_1d_nd,
    aug_w2_gauss_gauss,
)
from .base import (
    DivergenceGenerator,
    f_divergence_discrete,
    js_discrete,
    kl_gaussian,
    tv_discrete,
    w2_gaussian,
    wp_discrete,
)
from .dispatch import compute_distance, parse_metric
from .errors import AugDistError
from .measures import (
    AffineProjection,
    DiscreteMeasure,
    GaussianMeasure,
    UniformBallMeasure,
    measure_from_spec,
    pushforward,
)
from .ot import Coupling, ot_solve
from .stiefel import OptimizerParams, haar_sample, minimize
from .witness import witness_tv, witness_wp

__version__ = "0.1.0"
