"""Rate reduction: coding rates, synthetic data, optimizers and clustering metrics."""

from ._core import (
    acc,
    ari,
    coding_rate,
    corrupt_labels,
    gen_gaussian,
    gen_subspace_mixture,
    gen_two_circles,
    grad_rate_reduction,
    kmeans,
    nearest_subspace_predict,
    nmi,
    optimal_singular_values,
    optimize,
    rate_reduction,
    scaled_rate,
    segmented_rate,
)

__all__ = [
    "acc",
    "ari",
    "coding_rate",
    "corrupt_labels",
    "gen_gaussian",
    "gen_subspace_mixture",
    "gen_two_circles",
    "grad_rate_reduction",
    "kmeans",
    "nearest_subspace_predict",
    "nmi",
    "optimal_singular_values",
    "optimize",
    "rate_reduction",
    "scaled_rate",
    "segmented_rate",
]
