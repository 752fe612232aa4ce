"""Random-walk Metropolis sampling of truncated targets.

The proposal is a symmetric Gaussian random walk, so the Metropolis ratio
r = g'(x') / g'(x) suffices; the general Metropolis-Hastings acceptance with
asymmetric transition densities is provided for completeness and reduces to
the Metropolis rule when the transition terms cancel.  Proposals that land
below the failure threshold have g' = 0 and are rejected, which keeps the
chain inside the failure domain once it has entered it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ProposalSpec",
    "Chain",
    "InitializationError",
    "ProposalTuningWarning",
    "metropolis_acceptance",
    "mh_acceptance",
    "metropolis_chain",
    "run_chain",
    "tune_proposal_scale",
    "tune_scale_on",
]


class InitializationError(RuntimeError):
    """The chain could not find a starting point with positive density."""


class ProposalTuningWarning(UserWarning):
    """Stochastic-approximation tuning stopped before reaching its target."""


@dataclass(frozen=True)
class ProposalSpec:
    """Symmetric random-walk proposal x' = x + scale * xi, xi ~ N(0, 1).

    Scale 0 is legal and degenerates to a constant chain (every proposal
    equals the current state and is accepted).
    """

    scale: float
    kind: str = "gaussian_random_walk"

    def __post_init__(self):
        if not (self.scale >= 0.0) or not math.isfinite(self.scale):
            raise ValueError(f"proposal scale must be >= 0, got {self.scale}")
        if self.kind != "gaussian_random_walk":
            raise ValueError(f"unknown proposal kind '{self.kind}'")


@dataclass
class Chain:
    """A realized chain with per-step acceptance flags.

    samples[k] is the state after step k; accepted[k] says whether the k-th
    proposal was taken.  The first burn_in states are discarded by kept().
    Treat instances as immutable once constructed.
    """

    samples: np.ndarray
    accepted: np.ndarray
    burn_in: int
    seed: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.accepted = np.asarray(self.accepted, dtype=bool)
        if self.samples.shape != self.accepted.shape:
            raise ValueError("samples and accepted must have equal length")
        if not (0 <= self.burn_in < len(self.samples)):
            raise ValueError(
                f"burn_in must lie in [0, n), got {self.burn_in} for n={len(self.samples)}"
            )

    @property
    def proposals_made(self) -> int:
        return len(self.samples)

    @property
    def accepts(self) -> int:
        return int(self.accepted.sum())

    @property
    def acceptance_rate(self) -> float:
        return self.accepts / self.proposals_made

    def kept(self) -> np.ndarray:
        """Post-burn-in samples."""
        return self.samples[self.burn_in :]


def metropolis_acceptance(r: float) -> float:
    """Acceptance probability min(1, r) for a symmetric proposal."""
    if math.isnan(r) or r < 0.0:
        return 0.0
    return min(1.0, r)


def mh_acceptance(pi_x: float, pi_xp: float, t_fwd: float, t_rev: float) -> float:
    """Metropolis-Hastings acceptance min(1, pi(x') T(x',x) / (pi(x) T(x,x'))).

    t_fwd is the transition density T(x, x') of proposing x' from x and
    t_rev is T(x', x).  With a symmetric proposal t_fwd == t_rev and the
    rule reduces to metropolis_acceptance(pi_xp / pi_x).
    """
    if t_fwd == t_rev and t_fwd > 0.0:
        # symmetric proposal: cancel the transition terms exactly
        if pi_x <= 0.0:
            return 1.0 if pi_xp > 0.0 else 0.0
        return metropolis_acceptance(pi_xp / pi_x)
    den = pi_x * t_fwd
    num = pi_xp * t_rev
    if den <= 0.0:
        # current state has zero density: always move
        return 1.0 if num > 0.0 else 0.0
    return metropolis_acceptance(num / den)


def metropolis_chain(
    log_density,
    x0: float,
    scale: float,
    n: int,
    seed: int,
    burn_in: int = 0,
) -> Chain:
    """Run a random-walk Metropolis chain on an arbitrary scalar log-density.

    Parameters
    ----------
    log_density : callable
        Scalar function returning log pi(x) up to a constant, -inf outside
        the support.
    x0 : float
        Starting state; must have finite log-density.
    scale : float
        Random-walk standard deviation.
    n : int
        Number of proposals (chain length).
    seed : int
        Seed for the per-chain generator.
    burn_in : int
        Number of leading states excluded by Chain.kept().
    """
    lp0 = log_density(x0)
    if not math.isfinite(lp0):
        raise InitializationError(f"starting point {x0!r} has zero density")
    if n <= burn_in:
        raise ValueError(f"need n > burn_in, got n={n}, burn_in={burn_in}")
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal(n) * scale
    unifs = rng.random(n)
    samples = np.empty(n)
    accepted = np.empty(n, dtype=bool)
    x = float(x0)
    lp = float(lp0)
    for k in range(n):
        xp = x + steps[k]
        lpp = log_density(xp)
        if lpp >= lp:
            take = True
        elif lpp == -math.inf:
            take = False
        else:
            take = unifs[k] < metropolis_acceptance(math.exp(lpp - lp))
        if take:
            x = xp
            lp = lpp
        samples[k] = x
        accepted[k] = take
    return Chain(samples=samples, accepted=accepted, burn_in=burn_in, seed=seed)


def _find_start(d, proposal: ProposalSpec, initial, probe_budget: int) -> float:
    """Default start x_T + scale; probe upward if the density is zero there."""
    if initial is not None:
        if math.isfinite(d.log_gprime_at(initial)):
            return float(initial)
        raise InitializationError(
            f"initial state {initial!r} has zero density for target with "
            f"threshold x_T={d.threshold}"
        )
    for k in range(1, probe_budget + 1):
        x0 = d.threshold + k * proposal.scale
        if math.isfinite(d.log_gprime_at(x0)):
            return x0
    raise InitializationError(
        f"no starting point with positive density found near x_T={d.threshold} "
        f"for base {type(d.base).__name__} within {probe_budget} probes"
    )


def run_chain(
    d,
    proposal: ProposalSpec,
    n: int,
    burn_in: int,
    seed: int,
    initial: float | None = None,
    probe_budget: int = 64,
) -> Chain:
    """Sample the truncated target g' with random-walk Metropolis.

    The chain starts at x_T + scale by default (inside the failure domain);
    if the base density vanishes there, start points x_T + k*scale are probed
    until one with positive density is found.
    """
    x0 = _find_start(d, proposal, initial, probe_budget)
    return metropolis_chain(
        d.log_gprime_at, x0, proposal.scale, n, seed, burn_in=burn_in
    )


def tune_proposal_scale(
    d,
    initial: ProposalSpec,
    target_rate: float,
    seed: int,
    block: int = 50,
    window: int = 500,
    tol: float = 0.10,
    max_steps: int = 20_000,
    gain: float = 1.0,
) -> tuple[ProposalSpec, bool]:
    """Stochastic-approximation tuning of the random-walk scale.

    After every block of proposals the scale is updated multiplicatively,
    scale <- scale * exp(c_k (rate - target)), with gain c_k decaying as 1/k.
    Tuning converges when the acceptance rate over the trailing window is
    within tol of the target.  Returns the tuned spec and a convergence flag;
    a ProposalTuningWarning is emitted when the budget is exhausted first.
    """
    x0 = _find_start(d, initial, None, 64)
    scale, converged = tune_scale_on(
        d.log_gprime_at,
        x0,
        initial.scale,
        target_rate,
        seed,
        block=block,
        window=window,
        tol=tol,
        max_steps=max_steps,
        gain=gain,
    )
    return ProposalSpec(scale=scale, kind=initial.kind), converged


def tune_scale_on(
    log_density,
    x0: float,
    scale0: float,
    target_rate: float,
    seed: int,
    block: int = 50,
    window: int = 500,
    tol: float = 0.10,
    max_steps: int = 20_000,
    gain: float = 1.0,
) -> tuple[float, bool]:
    """Scale tuning loop for an arbitrary scalar log-density.

    Two phases: a constant-gain search until the block acceptance rate first
    crosses the target (bracketing), then updates with gain decaying as 1/k.
    Needed because a badly wrong initial scale (orders of magnitude off) would
    take forever to recover under the decaying gain alone.
    """
    if not (0.0 < target_rate < 1.0):
        raise ValueError(f"target_rate must lie in (0, 1), got {target_rate}")
    if not (scale0 > 0.0):
        raise ValueError(f"initial scale must be positive, got {scale0}")
    rng = np.random.default_rng(seed)
    scale = scale0
    x = float(x0)
    lp = log_density(x)
    if not math.isfinite(lp):
        raise InitializationError(f"starting point {x0!r} has zero density")
    recent = np.zeros(window, dtype=bool)
    filled = 0
    pos = 0
    best_scale = scale
    best_gap = math.inf
    steps_done = 0
    bracketed = False
    last_sign = 0
    k = 0
    while steps_done < max_steps:
        xi = rng.standard_normal(block)
        unifs = rng.random(block)
        taken = 0
        for j in range(block):
            xp = x + scale * xi[j]
            lpp = log_density(xp)
            if lpp >= lp:
                take = True
            elif lpp == -math.inf:
                take = False
            else:
                take = unifs[j] < math.exp(lpp - lp)
            if take:
                x = xp
                lp = lpp
                taken += 1
            recent[pos] = take
            pos = (pos + 1) % window
            filled = min(filled + 1, window)
        steps_done += block
        err = taken / block - target_rate
        if not bracketed:
            sign = (err > 0) - (err < 0)
            if sign != 0:
                if last_sign != 0 and sign != last_sign:
                    bracketed = True
                last_sign = sign
        if bracketed:
            k += 1
            scale *= math.exp((gain / k) * err)
        else:
            scale *= math.exp(gain * err)
        scale = min(max(scale, 1e-12), 1e12)
        if filled == window:
            window_rate = recent.mean()
            gap = abs(window_rate - target_rate)
            if gap < best_gap:
                best_gap = gap
                best_scale = scale
            if bracketed and gap <= tol:
                return scale, True
    warnings.warn(
        f"proposal tuning did not reach target {target_rate:.2f} +/- {tol:.2f} "
        f"within {max_steps} steps; using best scale {best_scale:.4g}",
        ProposalTuningWarning,
    )
    return best_scale, False
