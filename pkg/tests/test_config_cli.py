"""Config grammar, canonical rendering, and CLI subcommand behavior."""

import pytest

from tailprob.cli import BENCH_COLUMNS, build_parser, main
from tailprob.config import (
    ConfigError,
    METHOD_NAMES,
    RunConfig,
    builtin_table_config,
    parse_config_text,
    render_config,
)

FAST_CONFIG = """
# quick smoke settings: fixed sampler parameters, no tuning
run.n_per_repeat = 500
run.psv_n_per_repeat = 500
sampler.tune = false
sampler.proposal_scale = 4.0
sampler.epsilon = 0.5
sampler.ell = 5.0
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def fast_config_with(psv_n):
    return FAST_CONFIG.replace(
        "run.psv_n_per_repeat = 500", f"run.psv_n_per_repeat = {psv_n}"
    )


class TestParseConfig:
    def test_empty_text_gives_defaults(self):
        assert parse_config_text("") == RunConfig()

    def test_comments_and_blank_lines_ignored(self):
        cfg = parse_config_text(
            "# header comment\n\ndensity.x_t = 12.0  # inline\n\n"
        )
        assert cfg.x_t == 12.0

    def test_value_parsing(self):
        cfg = parse_config_text(
            "run.methods = MCS, PSV-HMC\n"
            "sampler.tune = false\n"
            "kde.truncate_radius = none\n"
            "run.seed = 7\n"
            "output.dir = results\n"
        )
        assert cfg.methods == ("MCS", "PSV-HMC")
        assert cfg.tune is False
        assert cfg.truncate_radius is None
        assert cfg.master_seed == 7
        assert cfg.out_dir == "results"

    def test_misspelled_key_is_an_error_naming_the_key(self):
        with pytest.raises(ConfigError, match="kde.bandwdith") as err:
            parse_config_text("kde.bandwdith = 0.5\n")
        assert err.value.key == "kde.bandwdith"

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate key 'run.seed'"):
            parse_config_text("run.seed = 1\nrun.seed = 2\n")

    def test_malformed_line_names_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("run.seed = 1\nnot an assignment\n")

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError, match="unknown method 'QMC'"):
            parse_config_text("run.methods = MCS, QMC\n")

    def test_non_numeric_value_rejected(self):
        with pytest.raises(ConfigError, match="density.x_t"):
            parse_config_text("density.x_t = abc\n")

    def test_range_validation(self):
        for line, key in [
            ("run.repeats = 0", "run.repeats"),
            ("run.n_per_repeat = 5", "run.n_per_repeat"),
            ("run.burn_in_fraction = 1.0", "run.burn_in_fraction"),
            ("run.workers = 2", "run.workers"),
            ("sampler.proposal_scale = -1.0", "sampler.proposal_scale"),
            ("diag.grid_n = 1", "diag.grid_n"),
        ]:
            with pytest.raises(ConfigError) as err:
                parse_config_text(line + "\n")
            assert err.value.key == key

    def test_mixture_keys_rejected_for_normal_density(self):
        with pytest.raises(ConfigError, match="density.alpha"):
            parse_config_text("density.alpha = 0.05\n")

    def test_mixture_requires_all_shape_parameters(self):
        with pytest.raises(ConfigError, match="density.alpha"):
            parse_config_text("density.kind = mixture\ndensity.f1 = 0.998\n")

    def test_bool_values_are_strict(self):
        with pytest.raises(ConfigError, match="sampler.tune"):
            parse_config_text("sampler.tune = yes\n")


class TestRenderConfig:
    def test_default_round_trip(self):
        cfg = RunConfig()
        assert parse_config_text(render_config(cfg)) == cfg

    def test_round_trip_preserves_floats_exactly(self):
        cfg = parse_config_text(
            "density.x_t = 15.5\n"
            "sampler.proposal_scale = 4.313644552098281\n"
            "kde.bandwidth = 0.7132019366075001\n"
            "run.burn_in_fraction = 0.05\n"
        )
        assert parse_config_text(render_config(cfg)) == cfg

    def test_builtin_round_trips(self):
        for table in (1, 2, 3):
            cfg = builtin_table_config(table)
            assert parse_config_text(render_config(cfg)) == cfg

    def test_canonical_lines(self):
        text = render_config(RunConfig())
        assert "density.kind = normal" in text
        assert "sampler.tune = true" in text
        assert "kde.truncate_radius = 8.0" in text
        assert "run.methods = " + ",".join(METHOD_NAMES) in text
        assert "sampler.proposal_scale = none" in text


class TestBuiltinTables:
    def test_three_sigma_problem(self):
        cfg = builtin_table_config(1)
        assert (cfg.density_kind, cfg.x_t) == ("normal", 15.0)
        assert cfg.n_per_repeat == 20_000
        assert cfg.psv_n_per_repeat == 10_000
        assert cfg.repeats == 10
        assert cfg.methods == METHOD_NAMES

    def test_four_sigma_problem(self):
        assert builtin_table_config(2).x_t == 20.0

    def test_mixture_problem(self):
        cfg = builtin_table_config(3)
        assert cfg.density_kind == "mixture"
        assert cfg.x_t == 160.0
        assert cfg.is_sigma == 2.0
        assert cfg.n_per_repeat == 10_000
        assert cfg.psv_n_per_repeat == 5_000

    def test_overrides(self):
        cfg = builtin_table_config(1, seed=7, out_dir="elsewhere")
        assert cfg.master_seed == 7
        assert cfg.out_dir == "elsewhere"

    def test_unknown_table_rejected(self):
        with pytest.raises(ConfigError, match="choose 1, 2 or 3"):
            builtin_table_config(4)


class TestCliErrors:
    def test_misspelled_key_exits_one(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "kde.bandwdith = 0.5\n")
        assert main(["estimate", "--config", cfg]) == 1
        assert "kde.bandwdith" in capsys.readouterr().err

    def test_out_of_range_value_exits_one(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "run.repeats = 0\n")
        assert main(["estimate", "--config", cfg]) == 1
        assert "run.repeats" in capsys.readouterr().err

    def test_missing_config_exits_one(self, tmp_path):
        assert main(["estimate", "--config", str(tmp_path / "missing.cfg")]) == 1

    def test_unknown_bench_table_exits_one(self, tmp_path, capsys):
        assert main(["bench", "4", "--out", str(tmp_path)]) == 1
        assert "choose 1, 2 or 3" in capsys.readouterr().err

    def test_bench_without_table_exits_one(self, capsys):
        assert main(["bench"]) == 1
        assert "table" in capsys.readouterr().err

    def test_bench_table_flag_accepted(self):
        args = build_parser().parse_args(["bench", "--table", "2"])
        assert args.table_flag == 2 and args.table is None

    def test_runtime_failure_exits_two(self, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("in the way\n")
        cfg = write_cfg(tmp_path, fast_config_with(10))
        # output dir collides with an existing file: a runtime error, not
        # a config error
        assert main(["sample", "--config", cfg, "--out", str(blocker)]) == 2
        assert "error" in capsys.readouterr().err


class TestCliEstimate:
    def run_estimate(self, tmp_path, sub="out", config=None):
        cfg = config or write_cfg(tmp_path, FAST_CONFIG)
        out = tmp_path / sub
        rc = main(["estimate", "--config", cfg, "--out", str(out)])
        return rc, out

    def test_writes_one_row_per_method_plus_analytic(self, tmp_path, capsys):
        rc, out = self.run_estimate(tmp_path)
        assert rc == 0
        lines = (out / "estimate.csv").read_text().splitlines()
        assert lines[0] == BENCH_COLUMNS
        assert len(lines) == 1 + 1 + len(METHOD_NAMES)
        assert lines[1].startswith("analytic,,")
        methods = [line.split(",")[0] for line in lines[2:]]
        assert methods == list(METHOD_NAMES)
        for line in lines[2:]:
            fields = line.split(",")
            p = float(fields[2])
            assert 0.0 <= p <= 1.0
            assert fields[2] == f"{p:.12e}"
        # companions are printed, not persisted
        shown = capsys.readouterr().out
        assert "PSV-HMC-variational" in shown
        assert "PSV-HMC-mean" in shown

    def test_resolved_config_reproduces_the_run(self, tmp_path):
        rc, out = self.run_estimate(tmp_path, sub="first")
        assert rc == 0
        resolved = out / "resolved_config.txt"
        rc2, out2 = self.run_estimate(tmp_path, sub="second", config=str(resolved))
        assert rc2 == 0
        assert (out / "estimate.csv").read_bytes() == (
            out2 / "estimate.csv"
        ).read_bytes()


class TestCliSample:
    def test_chain_csv_shape(self, tmp_path):
        cfg = write_cfg(tmp_path, fast_config_with(10))
        out = tmp_path / "out"
        assert main(["sample", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "chain_hmc.csv").read_text().splitlines()
        assert lines[0] == "index,x,accepted"
        assert len(lines) == 11
        for k, line in enumerate(lines[1:]):
            idx, x, acc = line.split(",")
            assert int(idx) == k
            assert float(x) >= 15.0
            assert acc in ("0", "1")

    def test_sampler_selects_output_name(self, tmp_path):
        cfg = write_cfg(tmp_path, fast_config_with(10))
        out = tmp_path / "out"
        rc = main(["sample", "--config", cfg, "--sampler", "mcmc", "--out", str(out)])
        assert rc == 0
        assert (out / "chain_mcmc.csv").exists()
        assert not (out / "chain_hmc.csv").exists()

    def test_deterministic(self, tmp_path):
        cfg = write_cfg(tmp_path, fast_config_with(10))
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["sample", "--config", cfg, "--out", str(a)]) == 0
        assert main(["sample", "--config", cfg, "--out", str(b)]) == 0
        assert (a / "chain_hmc.csv").read_bytes() == (b / "chain_hmc.csv").read_bytes()


class TestCliDiag:
    DIAG_CONFIG = fast_config_with(200) + (
        "diag.grid_lo = 15.0\n"
        "diag.grid_hi = 20.0\n"
        "diag.grid_n = 11\n"
    )

    def test_one_profile_per_sampler(self, tmp_path):
        cfg = write_cfg(tmp_path, self.DIAG_CONFIG)
        out = tmp_path / "out"
        assert main(["diag", "--config", cfg, "--out", str(out)]) == 0
        for sampler in ("mcmc", "hmc"):
            lines = (out / f"profile_{sampler}.csv").read_text().splitlines()
            assert lines[0] == "x,h_kde,analytic_density"
            assert len(lines) == 12
            xs = [float(line.split(",")[0]) for line in lines[1:]]
            assert xs[0] == 15.0
            assert xs[-1] == 20.0

    def test_sampler_subset(self, tmp_path):
        cfg = write_cfg(tmp_path, self.DIAG_CONFIG + "diag.samplers = hmc\n")
        out = tmp_path / "out"
        assert main(["diag", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "profile_hmc.csv").exists()
        assert not (out / "profile_mcmc.csv").exists()
