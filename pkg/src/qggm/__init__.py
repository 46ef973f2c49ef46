"""Quasi-Bayesian sparse precision-matrix estimation with a horseshoe prior.

A column-wise pseudo-likelihood replaces the joint Gaussian likelihood, so
the posterior factorizes over columns and the Gibbs sampler needs no matrix
inversions.  The package covers the full workflow: synthetic truth
generation, the sampler, plug-in diagonal estimation, l1-operator-norm
symmetrization, and the evaluation / diagnostic metrics.
"""

__version__ = "0.1.0"

from .diagonal import DiagonalEstimate, LassoFit, estimate_diagonal, lasso_cd
from .errors import ArtifactError, NumericalError, QggmError, ValidationError
from .gibbs import (
    GibbsConfig,
    HorseshoeState,
    PosteriorSummary,
    credible_interval,
    run_chain,
    update_global_scale,
    update_local_scales,
    update_omega_column,
)
from .metrics import (
    EvalReport,
    contraction_rates,
    frobenius_error,
    gelman_rubin,
    roc_sweep,
    select_edges,
    tpr_fpr,
)
from .model import PrecisionDraw, gram, log_pseudo_likelihood, log_pseudo_likelihood_column
from .prior import (
    PriorConditionSpec,
    check_concentration,
    check_thickness,
    horseshoe_marginal_density,
    sample_exponential,
    sample_gamma,
    sample_normal,
)
from .rng import RngStream
from .simgen import GroundTruth, PatternSpec, check_pd, generate_pattern, sample_mvn
from .symmetrize import operator_l1_norm, spectral_norm, symmetrize_l1

def version_string() -> str:
    """Version tag embedded in every report artifact."""
    return f"qggm {__version__}"

__all__ = [
    "__version__",
    "version_string",
    "ArtifactError",
    "NumericalError",
    "QggmError",
    "ValidationError",
    "RngStream",
    "PrecisionDraw",
    "gram",
    "log_pseudo_likelihood",
    "log_pseudo_likelihood_column",
    "PriorConditionSpec",
    "check_concentration",
    "check_thickness",
    "horseshoe_marginal_density",
    "sample_normal",
    "sample_exponential",
    "sample_gamma",
    "HorseshoeState",
    "GibbsConfig",
    "PosteriorSummary",
    "run_chain",
    "credible_interval",
    "update_omega_column",
    "update_local_scales",
    "update_global_scale",
    "LassoFit",
    "DiagonalEstimate",
    "lasso_cd",
    "estimate_diagonal",
    "operator_l1_norm",
    "spectral_norm",
    "symmetrize_l1",
    "PatternSpec",
    "GroundTruth",
    "generate_pattern",
    "sample_mvn",
    "check_pd",
    "EvalReport",
    "frobenius_error",
    "select_edges",
    "tpr_fpr",
    "roc_sweep",
    "gelman_rubin",
    "contraction_rates",
]
