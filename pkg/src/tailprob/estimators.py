"""Failure probability estimators.

The post-sampling variational route draws from the unnormalized truncated
target g', fits the normalized surrogate h and identifies the normalizing
constant lambda = 1/P from h ~ lambda g'.  Two identifications are provided:

- direct:       lambda = (1/N) sum_i h(x_i) / g'(x_i)
- variational:  lambda = sum_i h(x_i) g'(x_i) / sum_i g'(x_i)^2

the latter being the least-squares fit of h against g' over the chain.
Baselines: crude Monte Carlo counting on the base density, Metropolis
counting on the base density, and importance-sampling MCMC with a Gaussian
weighting density centered at the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densities import Normal, TargetDensity
from .hmc import HmcParams, run_hmc_chain, tune_step_size
from .kde import KdeModel, fit_kde
from .metropolis import Chain, ProposalSpec, metropolis_chain, run_chain, tune_proposal_scale

__all__ = [
    "ChainConsistencyError",
    "LambdaEstimate",
    "PsvResult",
    "estimate_direct",
    "estimate_variational",
    "estimate_mcs",
    "estimate_mcmc_count",
    "estimate_is_mcmc",
    "run_psv",
    "default_proposal",
    "default_hmc_params",
]


class ChainConsistencyError(RuntimeError):
    """A chain sample lies outside the support of the target."""


@dataclass(frozen=True)
class LambdaEstimate:
    """Point estimate of the normalizing constant and its probability.

    probability = 1/lam; a degenerate estimate (no failure samples seen)
    carries probability 0 and infinite lam.
    """

    lam: float
    probability: float
    method: str
    n_used: int

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(
                f"probability must lie in [0, 1], got {self.probability}"
            )

    @property
    def degenerate(self) -> bool:
        return self.probability == 0.0


def _gprime_values(chain: Chain, d: TargetDensity) -> np.ndarray:
    xs = chain.kept()
    g = d.gprime(xs)
    if not np.all(g > 0.0):
        bad = xs[g <= 0.0][0]
        raise ChainConsistencyError(
            f"chain sample {bad!r} has zero target density (x_T={d.threshold})"
        )
    return g


def _lambda_direct(h: np.ndarray, g: np.ndarray) -> float:
    return float(np.mean(h / g))


def _lambda_variational(h: np.ndarray, g: np.ndarray) -> float:
    return float(np.sum(h * g) / np.sum(g * g))


def estimate_direct(chain: Chain, surrogate, d: TargetDensity) -> LambdaEstimate:
    """lambda as the chain average of h/g'."""
    g = _gprime_values(chain, d)
    h = surrogate(chain.kept())
    lam = _lambda_direct(np.asarray(h, dtype=float), g)
    return LambdaEstimate(
        lam=lam, probability=1.0 / lam, method="direct", n_used=g.size
    )


def estimate_variational(chain: Chain, surrogate, d: TargetDensity) -> LambdaEstimate:
    """lambda as the least-squares slope of h against g' over the chain."""
    g = _gprime_values(chain, d)
    h = surrogate(chain.kept())
    lam = _lambda_variational(np.asarray(h, dtype=float), g)
    return LambdaEstimate(
        lam=lam, probability=1.0 / lam, method="variational", n_used=g.size
    )


def estimate_mcs(d: TargetDensity, n: int, seed: int) -> LambdaEstimate:
    """Crude Monte Carlo: fraction of base-density draws in the failure domain."""
    rng = np.random.default_rng(seed)
    xs = d.base.sample(rng, n)
    p_hat = float(d.criteria(xs).mean())
    lam = math.inf if p_hat == 0.0 else 1.0 / p_hat
    return LambdaEstimate(lam=lam, probability=p_hat, method="mcs", n_used=n)


def _typical_point(d: TargetDensity) -> float:
    base = d.base
    if hasattr(base, "nu"):
        return base.nu / base.alpha
    return base.mu


def estimate_mcmc_count(
    d: TargetDensity,
    n: int,
    burn_in: int,
    seed: int,
    proposal: ProposalSpec | None = None,
) -> tuple[LambdaEstimate, Chain]:
    """Failure fraction along a Metropolis chain targeting the full base density."""
    if proposal is None:
        proposal = ProposalSpec(scale=d.scale)
    chain = metropolis_chain(
        d.base.log_pdf_at, _typical_point(d), proposal.scale, n, seed, burn_in=burn_in
    )
    p_hat = float(d.criteria(chain.kept()).mean())
    lam = math.inf if p_hat == 0.0 else 1.0 / p_hat
    est = LambdaEstimate(
        lam=lam, probability=p_hat, method="mcmc", n_used=chain.kept().size
    )
    return est, chain


def estimate_is_mcmc(
    d: TargetDensity,
    n: int,
    burn_in: int,
    seed: int,
    sigma: float | None = None,
    direct_sampling: bool = False,
    proposal: ProposalSpec | None = None,
) -> tuple[LambdaEstimate, Chain | None]:
    """Importance sampling with weighting density N(x_T, sigma).

    Draws come from the weighting density, via a Metropolis chain by default
    or iid when direct_sampling is set; the estimate is the average of
    C(x) f(x) / rho(x).
    """
    if sigma is None:
        sigma = d.scale
    rho = Normal(d.threshold, sigma)
    if direct_sampling:
        rng = np.random.default_rng(seed)
        xs = rho.sample(rng, n)
        chain = None
        n_used = n
    else:
        if proposal is None:
            proposal = ProposalSpec(scale=sigma)
        chain = metropolis_chain(
            rho.log_pdf_at, d.threshold, proposal.scale, n, seed, burn_in=burn_in
        )
        xs = chain.kept()
        n_used = xs.size
    log_w = d.base.log_pdf(xs) - rho.log_pdf(xs)
    integrand = np.where(
        d.criteria(xs) > 0.0, np.exp(log_w), 0.0
    )
    p_hat = float(integrand.mean())
    lam = math.inf if p_hat == 0.0 else 1.0 / p_hat
    est = LambdaEstimate(
        lam=lam, probability=p_hat, method="is-mcmc", n_used=n_used
    )
    return est, chain


def default_proposal(d: TargetDensity, scale: float | None = None) -> ProposalSpec:
    """Random-walk proposal defaulting to the base density's length scale."""
    return ProposalSpec(scale=d.scale if scale is None else scale)


def default_hmc_params(
    d: TargetDensity,
    epsilon: float | None = None,
    ell: float | None = None,
    mass: float = 1.0,
) -> HmcParams:
    """Leapfrog defaults: ell = scale, epsilon = scale/10 (10 steps)."""
    if ell is None:
        ell = d.scale
    if epsilon is None:
        epsilon = 0.1 * d.scale
    return HmcParams(epsilon=epsilon, ell=ell, mass=mass)


@dataclass(frozen=True)
class PsvResult:
    """Output of one post-sampling variational run."""

    direct: LambdaEstimate
    variational: LambdaEstimate
    chain: Chain
    kde: KdeModel

    @property
    def probability(self) -> float:
        """Headline estimate: the direct expectation value."""
        return self.direct.probability

    @property
    def mean_probability(self) -> float:
        """Average of the direct and variational values."""
        return 0.5 * (self.direct.probability + self.variational.probability)


def run_psv(
    d: TargetDensity,
    sampler_kind: str,
    config,
    n: int | None = None,
    seed: int | None = None,
    tuned=None,
) -> PsvResult:
    """Sample g', fit the surrogate, estimate lambda both ways.

    sampler_kind is "mcmc" (random-walk Metropolis) or "hmc".  config supplies
    chain sizes, kernel settings and KDE options; n and seed override the
    per-repeat budget and master seed.  A pre-tuned kernel (ProposalSpec or
    HmcParams) skips tuning, which benchmark drivers use to tune once and
    reuse across repeats.
    """
    if sampler_kind not in ("mcmc", "hmc"):
        raise ValueError(f"sampler_kind must be 'mcmc' or 'hmc', got '{sampler_kind}'")
    n_chain = int(config.psv_n_per_repeat if n is None else n)
    seed = int(config.master_seed if seed is None else seed)
    burn_in = int(round(config.burn_in_fraction * n_chain))
    if sampler_kind == "mcmc":
        if tuned is not None:
            proposal = tuned
        else:
            proposal = default_proposal(d, config.proposal_scale)
            if config.tune:
                proposal, _ = tune_proposal_scale(
                    d, proposal, config.target_accept_mcmc, seed + 1
                )
        chain = run_chain(d, proposal, n_chain, burn_in, seed)
    else:
        if tuned is not None:
            params = tuned
        else:
            params = default_hmc_params(d, config.epsilon, config.ell, config.mass)
            if config.tune:
                params, _ = tune_step_size(
                    d, params, config.target_accept_hmc, seed + 1
                )
        chain = run_hmc_chain(d, params, n_chain, burn_in, seed)
    kde = fit_kde(
        chain,
        edge_mode=config.edge_mode,
        boundary=d.threshold,
        bandwidth=config.bandwidth,
        truncate_radius=config.truncate_radius,
    )
    xs = chain.kept()
    g = _gprime_values(chain, d)
    h = kde.evaluate(xs)
    lam_d = _lambda_direct(h, g)
    lam_v = _lambda_variational(h, g)
    direct = LambdaEstimate(
        lam=lam_d, probability=1.0 / lam_d, method="direct", n_used=g.size
    )
    variational = LambdaEstimate(
        lam=lam_v, probability=1.0 / lam_v, method="variational", n_used=g.size
    )
    return PsvResult(direct=direct, variational=variational, chain=chain, kde=kde)
