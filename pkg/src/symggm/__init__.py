"""Penalized composite-likelihood estimation of colored Gaussian graphical models.

Two symmetry models are supported: RCON (equal concentrations within each
vertex and edge color class) and RCOR (equal partial correlations within
edge classes, equal conditional variances within vertex classes).  Fits
use coordinate descent on the negative conditional composite
log-likelihood with an optional L1 or SCAD penalty on the edge classes.
"""

from .coloring import (
    ColoringScheme,
    atomic_coloring,
    edge_generator,
    load_coloring,
    structural_zero_indicator,
    validate_coloring,
    vertex_generator,
)
from .covariance import SampleCovariance, naive_estimator, sample_covariance
from .exceptions import ColoringError, DataError, NumericalError, SymGGMError
from .inference import (
    InferenceReport,
    bootstrap_variability,
    godambe_covariance,
    hessian_zz,
    per_observation_scores,
    sandwich_inference,
)
from .objective import (
    grad_rcon,
    grad_rcor,
    neg_comp_loglik,
    neg_comp_loglik_rcon,
    neg_comp_loglik_rcor,
    score_vector,
)
from .params import (
    RconParams,
    RcorParams,
    assemble_concentration,
    assemble_from_rcor,
    disassemble_concentration,
    partial_correlations,
)
from .penalty import (
    PenaltySpec,
    TuningReport,
    composite_bic,
    default_grid,
    fit,
    fit_penalized,
    lambda_max,
    lla_weights,
    scad_derivative,
    tune_lambda,
)
from .rcon import fit_rcon, update_edge_class, update_vertex_class
from .rcor import fit_rcor, update_corr_class, update_vertex_class_rcor
from .simulation import (
    ExperimentReport,
    ScenarioConfig,
    build_true_model,
    evaluate_fit,
    preset,
    random_coloring,
    run_experiment,
    sample_gaussian,
)
from .solver import FitResult, SolverConfig, soft_threshold

__version__ = "0.1.0"

__all__ = [
    "ColoringScheme", "atomic_coloring", "edge_generator", "load_coloring",
    "structural_zero_indicator", "validate_coloring", "vertex_generator",
    "SampleCovariance", "naive_estimator", "sample_covariance",
    "ColoringError", "DataError", "NumericalError", "SymGGMError",
    "InferenceReport", "bootstrap_variability", "godambe_covariance", "hessian_zz",
    "per_observation_scores", "sandwich_inference",
    "grad_rcon", "grad_rcor", "neg_comp_loglik", "neg_comp_loglik_rcon",
    "neg_comp_loglik_rcor", "score_vector",
    "RconParams", "RcorParams", "assemble_concentration", "assemble_from_rcor",
    "disassemble_concentration", "partial_correlations",
    "PenaltySpec", "TuningReport", "composite_bic", "default_grid", "fit", "fit_penalized",
    "lambda_max", "lla_weights", "scad_derivative", "tune_lambda",
    "fit_rcon", "update_edge_class", "update_vertex_class",
    "fit_rcor", "update_corr_class", "update_vertex_class_rcor",
    "ExperimentReport", "ScenarioConfig", "build_true_model", "evaluate_fit", "preset",
    "random_coloring", "run_experiment", "sample_gaussian",
    "FitResult", "SolverConfig", "soft_threshold",
]
