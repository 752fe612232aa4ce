"""Repeated-run benchmarks and convergence diagnostics.

Every method is run `repeats` times with independent derived seeds; the
spread across repeats is summarized by the coefficient of variation
delta = std/mean and the budget-normalized Delta = delta * sqrt(N), where N
is the total sample budget n_per_repeat * repeats.  Delta is invariant under
re-splitting the same budget into a different repeats/n combination, which
is what makes methods with different per-run costs comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .densities import TargetDensity
from .estimators import (
    default_hmc_params,
    default_proposal,
    estimate_is_mcmc,
    estimate_mcmc_count,
    estimate_mcs,
    run_psv,
    _typical_point,
)
from .hmc import tune_step_size
from .kde import KdeModel, fit_kde
from .metropolis import Chain, ProposalSpec, tune_proposal_scale, tune_scale_on

__all__ = [
    "RepeatedRunReport",
    "ConvergenceProfile",
    "aggregate",
    "run_benchmark",
    "convergence_profile",
    "derive_seed",
]

_METHOD_IDS = {"MCS": 0, "MCMC": 1, "IS-MCMC": 2, "PSV-MCMC": 3, "PSV-HMC": 4}


@dataclass(frozen=True)
class RepeatedRunReport:
    """Summary of one method over repeated runs.

    n_per_repeat and repeats are None for the analytic reference row; delta
    and big_delta are None when the spread is undefined (analytic row, zero
    mean, or a failed method).  PSV reports carry companion summaries (the
    variational estimate and the direct/variational average) that accompany
    the headline direct estimate without becoming rows of their own.
    """

    method: str
    estimates: tuple[float, ...]
    n_per_repeat: int | None
    repeats: int | None
    p_mean: float
    delta: float | None
    big_delta: float | None
    acceptance_rate: float | None = None
    error: str | None = None
    companions: tuple["RepeatedRunReport", ...] = ()

    @property
    def n_total(self) -> int | None:
        if self.n_per_repeat is None or self.repeats is None:
            return None
        return self.n_per_repeat * self.repeats


def aggregate(
    estimates,
    n_total: int,
    method: str = "",
    acceptance_rate: float | None = None,
) -> RepeatedRunReport:
    """Summarize repeated estimates under a total budget of n_total samples."""
    est = tuple(float(e) for e in estimates)
    if not est:
        raise ValueError("need at least one estimate")
    repeats = len(est)
    if n_total % repeats != 0:
        raise ValueError(
            f"n_total={n_total} must be divisible by the number of repeats {repeats}"
        )
    arr = np.asarray(est)
    p_mean = float(arr.mean())
    if p_mean == 0.0:
        delta = None
        big_delta = None
    else:
        delta = float(arr.std() / p_mean)
        big_delta = delta * math.sqrt(n_total)
    return RepeatedRunReport(
        method=method,
        estimates=est,
        n_per_repeat=n_total // repeats,
        repeats=repeats,
        p_mean=p_mean,
        delta=delta,
        big_delta=big_delta,
        acceptance_rate=acceptance_rate,
    )


def derive_seed(master_seed: int, method: str, repeat: int) -> int:
    """Deterministic per-(method, repeat) stream seed from the master seed."""
    method_id = _METHOD_IDS.get(method, 99)
    ss = np.random.SeedSequence([int(master_seed), method_id, int(repeat)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _failed_report(method: str, err: Exception) -> RepeatedRunReport:
    return RepeatedRunReport(
        method=method,
        estimates=(),
        n_per_repeat=None,
        repeats=None,
        p_mean=math.nan,
        delta=None,
        big_delta=None,
        acceptance_rate=None,
        error=f"{type(err).__name__}: {err}",
    )


def _bench_mcs(d, cfg: RunConfig) -> list[RepeatedRunReport]:
    probs = [
        estimate_mcs(d, cfg.n_per_repeat, derive_seed(cfg.master_seed, "MCS", r)).probability
        for r in range(cfg.repeats)
    ]
    return [aggregate(probs, cfg.n_per_repeat * cfg.repeats, method="MCS")]


def _bench_mcmc(d, cfg: RunConfig) -> list[RepeatedRunReport]:
    burn = int(round(cfg.burn_in_fraction * cfg.n_per_repeat))
    scale0 = cfg.proposal_scale if cfg.proposal_scale is not None else d.scale
    if cfg.tune:
        scale, _ = tune_scale_on(
            d.base.log_pdf_at,
            _typical_point(d),
            scale0,
            cfg.target_accept_mcmc,
            derive_seed(cfg.master_seed, "MCMC", 10_000),
        )
    else:
        scale = scale0
    proposal = ProposalSpec(scale=scale)
    probs = []
    rates = []
    for r in range(cfg.repeats):
        est, chain = estimate_mcmc_count(
            d,
            cfg.n_per_repeat,
            burn,
            derive_seed(cfg.master_seed, "MCMC", r),
            proposal=proposal,
        )
        probs.append(est.probability)
        rates.append(chain.acceptance_rate)
    return [
        aggregate(
            probs,
            cfg.n_per_repeat * cfg.repeats,
            method="MCMC",
            acceptance_rate=float(np.mean(rates)),
        )
    ]


def _bench_is_mcmc(d, cfg: RunConfig) -> list[RepeatedRunReport]:
    burn = int(round(cfg.burn_in_fraction * cfg.n_per_repeat))
    sigma = cfg.is_sigma if cfg.is_sigma is not None else d.scale
    proposal = None
    if not cfg.is_direct_sampling:
        scale0 = sigma
        if cfg.tune:
            from .densities import Normal

            rho = Normal(d.threshold, sigma)
            scale, _ = tune_scale_on(
                rho.log_pdf_at,
                d.threshold,
                scale0,
                cfg.target_accept_mcmc,
                derive_seed(cfg.master_seed, "IS-MCMC", 10_000),
            )
        else:
            scale = scale0
        proposal = ProposalSpec(scale=scale)
    probs = []
    rates = []
    for r in range(cfg.repeats):
        est, chain = estimate_is_mcmc(
            d,
            cfg.n_per_repeat,
            burn,
            derive_seed(cfg.master_seed, "IS-MCMC", r),
            sigma=sigma,
            direct_sampling=cfg.is_direct_sampling,
            proposal=proposal,
        )
        probs.append(est.probability)
        if chain is not None:
            rates.append(chain.acceptance_rate)
    rate = float(np.mean(rates)) if rates else None
    return [
        aggregate(
            probs,
            cfg.n_per_repeat * cfg.repeats,
            method="IS-MCMC",
            acceptance_rate=rate,
        )
    ]


def _bench_psv(d, cfg: RunConfig, method: str) -> list[RepeatedRunReport]:
    kind = "mcmc" if method == "PSV-MCMC" else "hmc"
    tune_seed = derive_seed(cfg.master_seed, method, 10_000)
    if kind == "mcmc":
        tuned = default_proposal(d, cfg.proposal_scale)
        if cfg.tune:
            tuned, _ = tune_proposal_scale(
                d, tuned, cfg.target_accept_mcmc, tune_seed
            )
    else:
        tuned = default_hmc_params(d, cfg.epsilon, cfg.ell, cfg.mass)
        if cfg.tune:
            tuned, _ = tune_step_size(d, tuned, cfg.target_accept_hmc, tune_seed)
    direct = []
    variational = []
    mean_both = []
    rates = []
    for r in range(cfg.repeats):
        res = run_psv(
            d,
            kind,
            cfg,
            n=cfg.psv_n_per_repeat,
            seed=derive_seed(cfg.master_seed, method, r),
            tuned=tuned,
        )
        direct.append(res.direct.probability)
        variational.append(res.variational.probability)
        mean_both.append(res.mean_probability)
        rates.append(res.chain.acceptance_rate)
    n_total = cfg.psv_n_per_repeat * cfg.repeats
    rate = float(np.mean(rates))
    # headline report carries the direct estimate; the variational value and
    # the average of the two ride along as companions
    head = aggregate(direct, n_total, method=method, acceptance_rate=rate)
    comp = (
        aggregate(
            variational, n_total, method=f"{method}-variational", acceptance_rate=rate
        ),
        aggregate(mean_both, n_total, method=f"{method}-mean", acceptance_rate=rate),
    )
    return [replace(head, companions=comp)]


def run_benchmark(cfg: RunConfig) -> list[RepeatedRunReport]:
    """Run every configured method; failures are recorded, not raised.

    Returns the analytic reference row first (when the base density has a
    closed-form tail), then exactly one report per method in configured
    order; PSV reports carry their variational and averaged companions.
    """
    d = cfg.build_density()
    reports: list[RepeatedRunReport] = []
    analytic = d.analytic_tail()
    if analytic is not None:
        reports.append(
            RepeatedRunReport(
                method="analytic",
                estimates=(analytic,),
                n_per_repeat=None,
                repeats=None,
                p_mean=analytic,
                delta=None,
                big_delta=None,
            )
        )
    runners = {
        "MCS": _bench_mcs,
        "MCMC": _bench_mcmc,
        "IS-MCMC": _bench_is_mcmc,
    }
    for method in cfg.methods:
        try:
            if method in runners:
                reports.extend(runners[method](d, cfg))
            else:
                reports.extend(_bench_psv(d, cfg, method))
        except Exception as err:  # record and continue with remaining methods
            reports.append(_failed_report(method, err))
    return reports


@dataclass(frozen=True)
class ConvergenceProfile:
    """Surrogate vs analytic truncated density on a grid."""

    x: np.ndarray
    h_kde: np.ndarray
    analytic: np.ndarray
    sup_error: float
    l1_error: float


def convergence_profile(
    source,
    d: TargetDensity,
    grid=None,
    edge_mode: str = "reflection",
    bandwidth: float | None = None,
) -> ConvergenceProfile:
    """Compare a fitted surrogate against the normalized truncated density.

    source is a fitted KdeModel or a Chain (fitted here with the given
    options).  The analytic reference is g(x) = g'(x)/P and requires the
    base density to have a closed-form tail.
    """
    tail = d.analytic_tail()
    if tail is None:
        raise ValueError("convergence profile needs a closed-form tail probability")
    if isinstance(source, KdeModel):
        model = source
    elif isinstance(source, Chain):
        model = fit_kde(
            source, edge_mode=edge_mode, boundary=d.threshold, bandwidth=bandwidth
        )
    else:
        raise TypeError(f"source must be a Chain or KdeModel, got {type(source).__name__}")
    if grid is None:
        xs = np.linspace(d.threshold, d.threshold + 8.0 * d.scale, 201)
    elif isinstance(grid, tuple):
        lo, hi, n = grid
        xs = np.linspace(lo, hi, int(n))
    else:
        xs = np.asarray(grid, dtype=float)
    h = model.evaluate(xs)
    g = d.gprime(xs) / tail
    diff = np.abs(h - g)
    return ConvergenceProfile(
        x=xs,
        h_kde=h,
        analytic=g,
        sup_error=float(diff.max()),
        l1_error=float(np.trapezoid(diff, xs)),
    )
