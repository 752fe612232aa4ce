"""Command line interface.

Subcommands:

- estimate: one pass of every configured method, with the analytic
  reference when available; writes estimate.csv and the resolved config.
- bench:    repeated-run comparison on one of the built-in problems,
  writing bench_table{1,2,3}.csv with spread statistics.
- sample:   dump one chain as CSV (index, x, accepted).
- diag:     surrogate-vs-analytic density profiles per sampler.

Exit codes: 0 on success, 1 for configuration errors (the message names the
offending key), 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    builtin_table_config,
    load_config,
    render_config,
)
from .diagnostics import (
    RepeatedRunReport,
    convergence_profile,
    derive_seed,
    run_benchmark,
)
from .estimators import (
    default_hmc_params,
    default_proposal,
    estimate_is_mcmc,
    estimate_mcmc_count,
    estimate_mcs,
    run_psv,
)
from .hmc import run_hmc_chain, tune_step_size
from .metropolis import run_chain, tune_proposal_scale

__all__ = ["main", "build_parser"]

BENCH_COLUMNS = "method,n_total,p_mean,delta,big_delta,acceptance_rate"


def _fmt(value, pattern: str = ".12e") -> str:
    if value is None:
        return ""
    return format(value, pattern)


def _report_row(rep: RepeatedRunReport) -> str:
    n_total = "" if rep.n_total is None else str(rep.n_total)
    return ",".join(
        [
            rep.method,
            n_total,
            _fmt(None if math.isnan(rep.p_mean) else rep.p_mean),
            _fmt(rep.delta),
            _fmt(rep.big_delta),
            _fmt(rep.acceptance_rate),
        ]
    )


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_reports_csv(path: Path, reports: list[RepeatedRunReport]) -> None:
    lines = [BENCH_COLUMNS]
    for rep in reports:
        if rep.error is not None:
            continue
        lines.append(_report_row(rep))
    _write_text(path, "\n".join(lines) + "\n")


def _print_reports(reports: list[RepeatedRunReport]) -> None:
    print(f"{'method':<24}{'n_total':>10}  {'p_mean':>14}  {'delta':>11}  "
          f"{'Delta':>11}  {'accept':>8}")

    def show(rep, indent=""):
        n_total = "-" if rep.n_total is None else str(rep.n_total)
        p_mean = "-" if math.isnan(rep.p_mean) else f"{rep.p_mean:.6e}"
        delta = "-" if rep.delta is None else f"{rep.delta:.4e}"
        big = "-" if rep.big_delta is None else f"{rep.big_delta:.4e}"
        acc = "-" if rep.acceptance_rate is None else f"{rep.acceptance_rate:.3f}"
        name = indent + rep.method
        print(f"{name:<24}{n_total:>10}  {p_mean:>14}  {delta:>11}  "
              f"{big:>11}  {acc:>8}")

    for rep in reports:
        if rep.error is not None:
            print(f"{rep.method:<24}  failed: {rep.error}")
            continue
        show(rep)
        for comp in rep.companions:
            show(comp, indent="  ")


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if getattr(args, "out", None) is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    return _apply_overrides(cfg, args)


def cmd_estimate(args) -> int:
    cfg = _load(args)
    d = cfg.build_density()
    out = Path(cfg.out_dir)
    burn = int(round(cfg.burn_in_fraction * cfg.n_per_repeat))
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

    def single(method, p, n, rate=None, companions=()):
        rep = RepeatedRunReport(
            method=method,
            estimates=(p,),
            n_per_repeat=n,
            repeats=1,
            p_mean=p,
            delta=None,
            big_delta=None,
            acceptance_rate=rate,
            companions=tuple(companions),
        )
        reports.append(rep)
        return rep

    for method in cfg.methods:
        seed = derive_seed(cfg.master_seed, method, 0)
        if method == "MCS":
            est = estimate_mcs(d, cfg.n_per_repeat, seed)
            single(method, est.probability, cfg.n_per_repeat)
        elif method == "MCMC":
            est, chain = estimate_mcmc_count(d, cfg.n_per_repeat, burn, seed)
            single(method, est.probability, cfg.n_per_repeat, chain.acceptance_rate)
        elif method == "IS-MCMC":
            est, chain = estimate_is_mcmc(
                d,
                cfg.n_per_repeat,
                burn,
                seed,
                sigma=cfg.is_sigma,
                direct_sampling=cfg.is_direct_sampling,
            )
            rate = None if chain is None else chain.acceptance_rate
            single(method, est.probability, cfg.n_per_repeat, rate)
        else:
            kind = "mcmc" if method == "PSV-MCMC" else "hmc"
            res = run_psv(d, kind, cfg, seed=seed)
            n = cfg.psv_n_per_repeat
            rate = res.chain.acceptance_rate

            def companion(name, p):
                return RepeatedRunReport(
                    method=name,
                    estimates=(p,),
                    n_per_repeat=n,
                    repeats=1,
                    p_mean=p,
                    delta=None,
                    big_delta=None,
                    acceptance_rate=rate,
                )

            single(
                method,
                res.probability,
                n,
                rate,
                companions=(
                    companion(f"{method}-variational", res.variational.probability),
                    companion(f"{method}-mean", res.mean_probability),
                ),
            )
    _write_reports_csv(out / "estimate.csv", reports)
    _write_text(out / "resolved_config.txt", render_config(cfg))
    _print_reports(reports)
    print(f"wrote {out / 'estimate.csv'}")
    return 0


def cmd_bench(args) -> int:
    table = args.table if args.table is not None else args.table_flag
    if table is None:
        raise ConfigError("bench needs a table number (1, 2 or 3)")
    cfg = builtin_table_config(table, seed=args.seed, out_dir=args.out)
    out = Path(cfg.out_dir)
    reports = run_benchmark(cfg)
    path = out / f"bench_table{table}.csv"
    _write_reports_csv(path, reports)
    _write_text(out / "resolved_config.txt", render_config(cfg))
    _print_reports(reports)
    print(f"wrote {path}")
    failed = [rep for rep in reports if rep.error is not None]
    return 2 if failed else 0


def cmd_sample(args) -> int:
    cfg = _load(args)
    d = cfg.build_density()
    out = Path(cfg.out_dir)
    n = cfg.psv_n_per_repeat
    burn = int(round(cfg.burn_in_fraction * n))
    seed = derive_seed(cfg.master_seed, "PSV-MCMC" if args.sampler == "mcmc" else "PSV-HMC", 0)
    if args.sampler == "mcmc":
        proposal = default_proposal(d, cfg.proposal_scale)
        if cfg.tune:
            proposal, _ = tune_proposal_scale(
                d, proposal, cfg.target_accept_mcmc, seed + 1
            )
        chain = run_chain(d, proposal, n, burn, seed)
    else:
        params = default_hmc_params(d, cfg.epsilon, cfg.ell, cfg.mass)
        if cfg.tune:
            params, _ = tune_step_size(d, params, cfg.target_accept_hmc, seed + 1)
        chain = run_hmc_chain(d, params, n, burn, seed)
    lines = ["index,x,accepted"]
    for k, (x, acc) in enumerate(zip(chain.samples, chain.accepted)):
        lines.append(f"{k},{x:.12e},{int(acc)}")
    path = out / f"chain_{args.sampler}.csv"
    _write_text(path, "\n".join(lines) + "\n")
    print(
        f"{args.sampler} chain: n={n} burn_in={burn} "
        f"acceptance_rate={chain.acceptance_rate:.3f}"
    )
    print(f"wrote {path}")
    return 0


def cmd_diag(args) -> int:
    cfg = _load(args)
    d = cfg.build_density()
    out = Path(cfg.out_dir)
    n = cfg.psv_n_per_repeat
    burn = int(round(cfg.burn_in_fraction * n))
    if d.analytic_tail() is None:
        print("error: diag needs a base density with a closed-form tail", file=sys.stderr)
        return 2
    grid = None
    if cfg.grid_lo is not None and cfg.grid_hi is not None:
        grid = (cfg.grid_lo, cfg.grid_hi, cfg.grid_n)
    for sampler in cfg.diag_samplers:
        seed = derive_seed(
            cfg.master_seed, "PSV-MCMC" if sampler == "mcmc" else "PSV-HMC", 0
        )
        if sampler == "mcmc":
            proposal = default_proposal(d, cfg.proposal_scale)
            if cfg.tune:
                proposal, _ = tune_proposal_scale(
                    d, proposal, cfg.target_accept_mcmc, seed + 1
                )
            chain = run_chain(d, proposal, n, burn, seed)
        else:
            params = default_hmc_params(d, cfg.epsilon, cfg.ell, cfg.mass)
            if cfg.tune:
                params, _ = tune_step_size(d, params, cfg.target_accept_hmc, seed + 1)
            chain = run_hmc_chain(d, params, n, burn, seed)
        profile = convergence_profile(
            chain, d, grid=grid, edge_mode=cfg.edge_mode, bandwidth=cfg.bandwidth
        )
        lines = ["x,h_kde,analytic_density"]
        for x, h, g in zip(profile.x, profile.h_kde, profile.analytic):
            lines.append(f"{x:.12e},{h:.12e},{g:.12e}")
        path = out / f"profile_{sampler}.csv"
        _write_text(path, "\n".join(lines) + "\n")
        print(
            f"{sampler}: acceptance_rate={chain.acceptance_rate:.3f} "
            f"sup_error={profile.sup_error:.4e} l1_error={profile.l1_error:.4e}"
        )
        print(f"wrote {path}")
    _write_text(out / "resolved_config.txt", render_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailprob",
        description="Failure probability estimation for truncated densities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="single pass of every configured method")
    est.add_argument("--config", required=True, help="path to a run configuration")
    est.add_argument("--seed", type=int, default=None, help="override run.seed")
    est.add_argument("--out", default=None, help="override output.dir")
    est.set_defaults(func=cmd_estimate)

    bench = sub.add_parser("bench", help="repeated-run benchmark tables")
    bench.add_argument(
        "table", nargs="?", type=int, default=None, help="benchmark table (1, 2 or 3)"
    )
    bench.add_argument(
        "--table", dest="table_flag", type=int, default=None, help="benchmark table"
    )
    bench.add_argument("--seed", type=int, default=None, help="override run.seed")
    bench.add_argument("--out", default=None, help="output directory")
    bench.set_defaults(func=cmd_bench)

    sample = sub.add_parser("sample", help="dump one chain as CSV")
    sample.add_argument("--config", required=True)
    sample.add_argument("--sampler", choices=("mcmc", "hmc"), default="hmc")
    sample.add_argument("--seed", type=int, default=None)
    sample.add_argument("--out", default=None)
    sample.set_defaults(func=cmd_sample)

    diag = sub.add_parser("diag", help="surrogate vs analytic density profiles")
    diag.add_argument("--config", required=True)
    diag.add_argument("--seed", type=int, default=None)
    diag.add_argument("--out", default=None)
    diag.set_defaults(func=cmd_diag)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # runtime failure
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
