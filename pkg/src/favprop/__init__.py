"""Favorable-propagation audit toolkit for massive MIMO channel ensembles."""

__version__ = "0.1.0"

from .channels import (ChannelEnsemble, GainMatrix, UserFactor, counterexample_ensemble,
                       gen_counterexample, gen_gains_factorized, gen_gains_iid, sample_channel)
from .convergence import (FOOTNOTE_ENSEMBLE, SweepResult, SyntheticZEnsemble,
                          enumerate_exact_mean, footnote_ensemble, sweep_over_m,
                          tail_probability)
from .errors import ArgumentError, ConfigurationError, HypothesisViolation
from .geometry import (ArrayGeometry, SteeringMatrix, check_normalization, steering_matrix,
                       steering_vector)
from .metrics import (Estimate, FPReport, bound_rhs_21, cosine_similarity, decompose_mean_z,
                      estimate_mean_z, fp_report, inner_product_z, steering_cross_term)
from .streams import SeedStreams

__all__ = [
    "ArgumentError", "ArrayGeometry", "ChannelEnsemble", "ConfigurationError", "Estimate",
    "FOOTNOTE_ENSEMBLE", "FPReport", "GainMatrix", "HypothesisViolation", "SeedStreams",
    "SteeringMatrix", "SweepResult", "SyntheticZEnsemble", "UserFactor", "bound_rhs_21",
    "check_normalization", "cosine_similarity", "counterexample_ensemble", "decompose_mean_z",
    "enumerate_exact_mean", "estimate_mean_z", "footnote_ensemble", "fp_report",
    "gen_counterexample", "gen_gains_factorized", "gen_gains_iid", "inner_product_z",
    "sample_channel", "steering_cross_term", "steering_matrix", "steering_vector",
    "sweep_over_m", "tail_probability",
]
