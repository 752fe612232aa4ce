"""Failure probability estimation for truncated densities.

Samples the unnormalized truncated target g'(x) = C(x) f(x) with random-walk
Metropolis or Hamiltonian Monte Carlo, fits a boundary-corrected kernel
density surrogate to the chain, and recovers the normalizing constant
lambda = 1/P by direct or variational estimation.  Classic baselines
(Monte Carlo simulation, MCMC counting, importance-sampling MCMC) and a
repeated-run benchmark harness are included for comparison.
"""

from .densities import (
    CriteriaFunction,
    GammaGaussianMixture,
    Normal,
    TargetDensity,
    truncated_mixture,
    truncated_normal,
)
from .metropolis import Chain, ProposalSpec, run_chain, tune_proposal_scale
from .hmc import HmcParams, PhasePoint, run_hmc_chain, tune_step_size
from .kde import KdeModel, fit_kde, silverman_bandwidth
from .estimators import (
    LambdaEstimate,
    estimate_direct,
    estimate_is_mcmc,
    estimate_mcmc_count,
    estimate_mcs,
    estimate_variational,
    run_psv,
)
from .diagnostics import RepeatedRunReport, aggregate, convergence_profile, run_benchmark

__version__ = "0.1.0"

__all__ = [
    "CriteriaFunction",
    "Normal",
    "GammaGaussianMixture",
    "TargetDensity",
    "truncated_normal",
    "truncated_mixture",
    "ProposalSpec",
    "Chain",
    "run_chain",
    "tune_proposal_scale",
    "HmcParams",
    "PhasePoint",
    "run_hmc_chain",
    "tune_step_size",
    "KdeModel",
    "silverman_bandwidth",
    "fit_kde",
    "LambdaEstimate",
    "estimate_direct",
    "estimate_variational",
    "estimate_mcs",
    "estimate_mcmc_count",
    "estimate_is_mcmc",
    "run_psv",
    "RepeatedRunReport",
    "aggregate",
    "run_benchmark",
    "convergence_profile",
    "__version__",
]
