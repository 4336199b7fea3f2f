"""Subspace recovery from the AGOP of kernel ridge regression."""

from ._core import (
    AgopfitError,
    InvalidArgument,
    KrrModel,
    coherence,
    csv_header,
    davis_kahan_bound,
    empirical_agop,
    gaussian_l2_norm_sq,
    haar_subspace,
    hermite_eval,
    kernel_matrix,
    latent_sigma,
    lemma32_gap,
    metric_update,
    population_agop,
    run_experiment,
    run_rfm,
    sample_dataset,
    sin_theta,
    sparse_subspace,
    top_subspace,
    verify_suite,
)

__all__ = [
    "AgopfitError",
    "InvalidArgument",
    "KrrModel",
    "coherence",
    "csv_header",
    "davis_kahan_bound",
    "empirical_agop",
    "gaussian_l2_norm_sq",
    "haar_subspace",
    "hermite_eval",
    "kernel_matrix",
    "latent_sigma",
    "lemma32_gap",
    "metric_update",
    "population_agop",
    "run_experiment",
    "run_rfm",
    "sample_dataset",
    "sin_theta",
    "sparse_subspace",
    "top_subspace",
    "verify_suite",
]
