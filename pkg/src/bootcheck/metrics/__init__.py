"""Kolmogorov and bounded-Lipschitz distances between discrete measures."""
from .bounded_lipschitz import (
    LPProblem,
    SupportTooLargeError,
    bl_distance,
    bl_distance_oracle,
    build_lp,
    solve_lp,
)
from .kolmogorov import (
    MarginalMismatchError,
    joint_product_gap,
    kolmogorov_distance,
    kolmogorov_distance_to_cdf,
    product_gap,
)
from .measures import DimensionMismatchError, DiscreteMeasure, total_variation, union_support
from .thinning import thin_pair

__all__ = [
    "DiscreteMeasure",
    "DimensionMismatchError",
    "LPProblem",
    "MarginalMismatchError",
    "SupportTooLargeError",
    "bl_distance",
    "bl_distance_oracle",
    "build_lp",
    "joint_product_gap",
    "kolmogorov_distance",
    "kolmogorov_distance_to_cdf",
    "product_gap",
    "solve_lp",
    "thin_pair",
    "total_variation",
    "union_support",
]
