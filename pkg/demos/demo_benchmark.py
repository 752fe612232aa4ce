"""Reduced-budget run of the repeated-estimate benchmark.

Five methods estimate the same 3-sigma tail probability: plain Monte
Carlo (MCS), a counting Metropolis chain over the base density (MCMC),
importance sampling with a chain on a shifted weighting density (IS-MCMC),
and the surrogate-ratio pipeline driven by either sampler (PSV-MCMC,
PSV-HMC).  Each runs `repeats` times; delta is the spread of the repeated
estimates over their mean and Delta = delta * sqrt(N) normalizes away the
budget so methods with different N compare fairly.

Budgets here are cut 10x to keep the demo quick; `python3 -m tailprob
bench 1` reproduces the full table.

Run from the repository root:  python3 demos/demo_benchmark.py
"""

from dataclasses import replace
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from tailprob.config import builtin_table_config
from tailprob.diagnostics import run_benchmark

FIG_DIR = Path(__file__).resolve().parent / "figures"
FIG_DIR.mkdir(exist_ok=True)

cfg = replace(builtin_table_config(1), n_per_repeat=2_000,
              psv_n_per_repeat=1_000, repeats=10)
print(f"target P = {cfg.build_density().analytic_tail():.6e}, "
      f"{cfg.repeats} repeats per method")

reports = run_benchmark(cfg)
print(f"{'method':<10}{'n_total':>9}{'p_mean':>14}{'delta':>11}{'Delta':>11}")
for rep in reports:
    if rep.method == "analytic":
        print(f"{'analytic':<10}{'-':>9}{rep.p_mean:>14.6e}{'-':>11}{'-':>11}")
        continue
    print(f"{rep.method:<10}{rep.n_total:>9}{rep.p_mean:>14.6e}"
          f"{rep.delta:>11.4f}{rep.big_delta:>11.2f}")

methods = [rep.method for rep in reports[1:]]
deltas = [rep.big_delta for rep in reports[1:]]
fig, ax = plt.subplots(figsize=(6.5, 4))
ax.bar(methods, deltas, color=["#777"] * 3 + ["#2a6fbb"] * 2)
ax.set_yscale("log")
ax.set_ylabel(r"$\Delta = \delta \sqrt{N}$  (lower is better)")
ax.set_title("budget-normalized spread per method")
fig.tight_layout()
out = FIG_DIR / "benchmark.png"
fig.savefig(out, dpi=150)
print(f"wrote {out}")
