"""Hamiltonian Monte Carlo for truncated targets.

Position q carries potential energy U(q) = -log g'(q); momentum p is drawn
from N(0, sqrt(mass)) and carries kinetic energy p^2 / (2 mass).  Trajectories
are integrated with the leapfrog scheme

    p_half = p - (eps/2) U'(q)
    q_next = q + eps p_half / mass
    p_next = p_half - (eps/2) U'(q_next)

iterated n_steps = round(ell / eps) times.  A drift that leaves the support
of g' marks the trajectory divergent: the potential is infinite there, so the
proposal is rejected and the chain stays put.  This keeps the kernel valid on
the truncated domain without reflecting at the boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .metropolis import (
    Chain,
    InitializationError,
    ProposalSpec,
    ProposalTuningWarning,
    _find_start,
)

__all__ = [
    "HmcParams",
    "PhasePoint",
    "hamiltonian",
    "leapfrog",
    "hmc_step",
    "run_hmc_chain",
    "tune_step_size",
]


@dataclass(frozen=True)
class HmcParams:
    """Leapfrog integration settings.

    epsilon is the step size, ell the nominal trajectory length and mass the
    momentum variance; the number of leapfrog steps is round(ell / epsilon),
    at least 1.
    """

    epsilon: float
    ell: float
    mass: float = 1.0

    def __post_init__(self):
        if not (self.epsilon > 0.0) or not math.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (self.ell > 0.0) or not math.isfinite(self.ell):
            raise ValueError(f"ell must be positive, got {self.ell}")
        if not (self.mass > 0.0) or not math.isfinite(self.mass):
            raise ValueError(f"mass must be positive, got {self.mass}")

    @property
    def n_steps(self) -> int:
        return max(1, round(self.ell / self.epsilon))


@dataclass(frozen=True)
class PhasePoint:
    """A point (q, p) in phase space; divergent marks a support exit."""

    q: float
    p: float
    divergent: bool = False


def hamiltonian(d, pt: PhasePoint, params: HmcParams) -> float:
    """Total energy H = p^2/(2 mass) - log g'(q); +inf off the support."""
    if pt.divergent:
        return math.inf
    lg = d.log_gprime_at(pt.q)
    if lg == -math.inf:
        return math.inf
    return pt.p * pt.p / (2.0 * params.mass) - lg


def _integrate(grad_u, in_support, q, p, eps, n_steps, mass):
    """Leapfrog with merged inner kicks; returns (q, p, divergent)."""
    p = p - 0.5 * eps * grad_u(q)
    for step in range(n_steps):
        q = q + eps * p / mass
        if not in_support(q):
            return q, p, True
        g = grad_u(q)
        if step < n_steps - 1:
            p = p - eps * g
        else:
            p = p - 0.5 * eps * g
    return q, p, False


def leapfrog(d, pt: PhasePoint, params: HmcParams) -> PhasePoint:
    """Integrate one trajectory of n_steps leapfrog steps from pt."""
    if pt.divergent or not d.in_support(pt.q):
        return PhasePoint(pt.q, pt.p, divergent=True)

    def grad_u(q):
        return -d.grad_log_gprime_at(q)

    q, p, div = _integrate(
        grad_u, d.in_support, pt.q, pt.p, params.epsilon, params.n_steps, params.mass
    )
    return PhasePoint(q, p, divergent=div)


def hmc_step(
    d, q: float, params: HmcParams, rng: np.random.Generator
) -> tuple[float, bool, float]:
    """One HMC transition from q; returns (q_next, accepted, delta_h)."""
    p = rng.normal(0.0, math.sqrt(params.mass))
    start = PhasePoint(q, p)
    end = leapfrog(d, start, params)
    h0 = hamiltonian(d, start, params)
    h1 = hamiltonian(d, end, params)
    dh = h1 - h0
    if dh <= 0.0:
        return end.q, True, dh
    if math.isinf(dh):
        return q, False, dh
    if rng.random() < math.exp(-dh):
        return end.q, True, dh
    return q, False, dh


def run_hmc_chain(
    d,
    params: HmcParams,
    n: int,
    burn_in: int,
    seed: int,
    initial: float | None = None,
    probe_budget: int = 64,
) -> Chain:
    """Sample the truncated target g' with HMC.

    The chain starts at x_T + epsilon by default, probing upward when the
    base density vanishes there, mirroring the random-walk initializer.
    """
    if n <= burn_in:
        raise ValueError(f"need n > burn_in, got n={n}, burn_in={burn_in}")
    probe = ProposalSpec(scale=params.epsilon)
    x0 = _find_start(d, probe, initial, probe_budget)
    rng = np.random.default_rng(seed)
    sqrt_m = math.sqrt(params.mass)
    momenta = rng.standard_normal(n) * sqrt_m
    unifs = rng.random(n)

    log_g = d.log_gprime_at
    in_support = d.in_support
    grad_log = d.grad_log_gprime_at
    eps = params.epsilon
    mass = params.mass
    n_steps = params.n_steps
    half_eps = 0.5 * eps
    inv_mass = 1.0 / mass
    two_mass = 2.0 * mass

    samples = np.empty(n)
    accepted = np.empty(n, dtype=bool)
    q = x0
    lg = log_g(q)
    for k in range(n):
        p = momenta[k]
        h0 = p * p / two_mass - lg
        # inline leapfrog over the trajectory
        qq = q
        pp = p - half_eps * (-grad_log(qq))
        div = False
        for step in range(n_steps):
            qq = qq + eps * pp * inv_mass
            if not in_support(qq):
                div = True
                break
            g = -grad_log(qq)
            if step < n_steps - 1:
                pp = pp - eps * g
            else:
                pp = pp - half_eps * g
        take = False
        if not div:
            lg_new = log_g(qq)
            h1 = pp * pp / two_mass - lg_new
            dh = h1 - h0
            if dh <= 0.0 or unifs[k] < math.exp(-dh):
                take = True
                q = qq
                lg = lg_new
        samples[k] = q
        accepted[k] = take
    return Chain(samples=samples, accepted=accepted, burn_in=burn_in, seed=seed)


def tune_step_size(
    d,
    initial: HmcParams,
    target_rate: float,
    seed: int,
    block: int = 25,
    window: int = 500,
    tol: float = 0.10,
    max_trajectories: int = 6000,
    gain: float = 1.0,
) -> tuple[HmcParams, bool]:
    """Stochastic-approximation tuning of the leapfrog step size.

    The number of leapfrog steps is frozen at the initial round(ell/epsilon)
    and ell is rescaled with epsilon, so shrinking the step shortens the
    trajectory and acceptance responds monotonically.  Same two-phase scheme
    as the random-walk tuner: constant gain until the acceptance rate first
    crosses the target, then gain decaying as 1/k; converged when the
    trailing-window acceptance is within tol of the target.
    """
    if not (0.0 < target_rate < 1.0):
        raise ValueError(f"target_rate must lie in (0, 1), got {target_rate}")
    rng = np.random.default_rng(seed)
    n_steps = initial.n_steps
    eps = initial.epsilon
    mass = initial.mass
    sqrt_m = math.sqrt(mass)
    probe = ProposalSpec(scale=eps)
    q = _find_start(d, probe, None, 64)
    lg = d.log_gprime_at(q)
    log_g = d.log_gprime_at
    in_support = d.in_support
    grad_log = d.grad_log_gprime_at
    recent = np.zeros(window, dtype=bool)
    filled = 0
    pos = 0
    best_eps = eps
    best_gap = math.inf
    done = 0
    bracketed = False
    last_sign = 0
    k = 0
    while done < max_trajectories:
        momenta = rng.standard_normal(block) * sqrt_m
        unifs = rng.random(block)
        taken = 0
        for j in range(block):
            p = momenta[j]
            h0 = p * p / (2.0 * mass) - lg
            qq = q
            pp = p + 0.5 * eps * grad_log(qq)
            div = False
            for step in range(n_steps):
                qq = qq + eps * pp / mass
                if not in_support(qq):
                    div = True
                    break
                g = grad_log(qq)
                if step < n_steps - 1:
                    pp = pp + eps * g
                else:
                    pp = pp + 0.5 * eps * g
            take = False
            if not div:
                lg_new = log_g(qq)
                dh = pp * pp / (2.0 * mass) - lg_new - h0
                if dh <= 0.0 or unifs[j] < math.exp(-dh):
                    take = True
                    q = qq
                    lg = lg_new
            if take:
                taken += 1
            recent[pos] = take
            pos = (pos + 1) % window
            filled = min(filled + 1, window)
        done += block
        err = taken / block - target_rate
        if not bracketed:
            sign = (err > 0) - (err < 0)
            if sign != 0:
                if last_sign != 0 and sign != last_sign:
                    bracketed = True
                last_sign = sign
        if bracketed:
            k += 1
            eps *= math.exp((gain / k) * err)
        else:
            eps *= math.exp(gain * err)
        eps = min(max(eps, 1e-12), 1e6)
        if filled == window:
            gap = abs(recent.mean() - target_rate)
            if gap < best_gap:
                best_gap = gap
                best_eps = eps
            if bracketed and gap <= tol:
                return (
                    HmcParams(epsilon=eps, ell=eps * n_steps, mass=mass),
                    True,
                )
    warnings.warn(
        f"step-size tuning did not reach target {target_rate:.2f} +/- {tol:.2f} "
        f"within {max_trajectories} trajectories; using best epsilon {best_eps:.4g}",
        ProposalTuningWarning,
    )
    return HmcParams(epsilon=best_eps, ell=best_eps * n_steps, mass=mass), False
