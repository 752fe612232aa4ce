"""End-to-end walkthrough on the 3-sigma truncated normal.

The quantity of interest is P{x >= 15} under Normal(0, 5), about 1.35e-3.
The pipeline: tune an HMC step size against a 67% acceptance target, sample
the unnormalized integrand g'(x) = C(x) f(x), fit a boundary-corrected KDE
surrogate h, and read the probability off the surrogate-to-integrand ratio
with the direct and the least-squares estimators.

Run from the repository root:  python3 demos/demo_truncated_normal.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tailprob.densities import truncated_normal
from tailprob.estimators import default_hmc_params, estimate_direct, estimate_variational
from tailprob.hmc import run_hmc_chain, tune_step_size
from tailprob.kde import fit_kde

FIG_DIR = Path(__file__).resolve().parent / "figures"
FIG_DIR.mkdir(exist_ok=True)

d = truncated_normal(mu=0.0, sigma=5.0, x_t=15.0)
truth = d.analytic_tail()
print(f"target: Normal(0, 5) truncated at x_T = 15, exact P = {truth:.6e}")

# step 1: tune the leapfrog step size, then draw the production chain
params, converged = tune_step_size(d, default_hmc_params(d), 0.67, seed=101)
print(f"tuned step size eps = {params.epsilon:.4f} "
      f"({params.n_steps} leapfrog steps, converged = {converged})")
chain = run_hmc_chain(d, params, n=10_000, burn_in=1_000, seed=7)
print(f"chain: {chain.samples.size} draws, "
      f"acceptance rate {chain.acceptance_rate:.3f}")

# step 2: normalized surrogate h from the post-burn-in samples
kde = fit_kde(chain, edge_mode="reflection", boundary=d.threshold)
print(f"surrogate: reflection-corrected KDE, bandwidth {kde.bandwidth:.4f}")

# step 3: lambda = 1/P two ways
direct = estimate_direct(chain, kde.evaluate, d)
variational = estimate_variational(chain, kde.evaluate, d)
for est in (direct, variational):
    err = (est.probability - truth) / truth
    print(f"{est.method:>12}: P = {est.probability:.6e}  "
          f"(relative error {err:+.2%})")

# figure: trace, marginal histogram, surrogate vs exact conditional density
xs = np.linspace(15.0, 35.0, 400)
exact = d.gprime(xs) / truth

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
axes[0].plot(chain.kept()[:1500], lw=0.5)
axes[0].set_title("HMC trace (first 1500 kept draws)")
axes[0].set_xlabel("iteration")
axes[0].set_ylabel("x")

axes[1].hist(chain.kept(), bins=60, density=True, alpha=0.6, label="samples")
axes[1].plot(xs, exact, "k--", lw=1.2, label="exact conditional")
axes[1].set_title("marginal vs exact")
axes[1].set_xlabel("x")
axes[1].legend()

axes[2].plot(xs, kde.evaluate(xs), label="KDE surrogate h")
axes[2].plot(xs, exact, "k--", lw=1.2, label="exact conditional")
axes[2].set_title("surrogate quality")
axes[2].set_xlabel("x")
axes[2].legend()

fig.tight_layout()
out = FIG_DIR / "truncated_normal.png"
fig.savefig(out, dpi=150)
print(f"wrote {out}")
