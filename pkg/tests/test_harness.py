import json
import math

import numpy as np
import pytest

from entropyfs import harness
from entropyfs.cli import main as cli_main
from entropyfs.errors import ConfigError
from entropyfs.grid import GridFunction, constant_function

import oracles


def _ctx(**kw):
    return harness.RunContext(harness.ExperimentConfig(**kw))


class TestRatioConventions:
    def test_zero_over_zero(self):
        assert harness._ratio(0.0, 0.0) == (0.0, False)

    def test_positive_over_zero_flagged(self):
        r, inf = harness._ratio(1.0, 0.0)
        assert math.isinf(r) and inf

    def test_plain(self):
        assert harness._ratio(1.0, 4.0) == (0.25, False)


class TestWeakNormHelpers:
    def test_exceedance_matches_loop(self, rng):
        vals = rng.standard_normal(128)
        wts = rng.uniform(0.0, 1.0, 128)
        ts = np.sort(rng.standard_normal(17))
        got = harness.weighted_exceedance(vals, wts, ts)
        want = [float(wts[vals > t].sum()) for t in ts]
        assert np.allclose(got, want, atol=1e-12)

    def test_exact_weak_norm_oracle(self, rng):
        vals = np.round(rng.uniform(0.0, 3.0, 200), 1)  # force ties
        wts = rng.uniform(0.0, 0.5, 200)
        assert harness.weak_norm_exact(vals, wts) == pytest.approx(
            oracles.weak_norm_direct(vals, wts), rel=1e-12
        )

    def test_zero_values(self):
        assert harness.weak_norm_exact(np.zeros(8), np.ones(8)) == 0.0


class TestFsExperiment:
    def test_zero_function(self):
        ctx = _ctx(level=4, function="const:0", weight="const:1")
        reports = harness.run_fs_ratio(ctx)
        assert all(r.ratio == 0.0 for r in reports)

    def test_worked_example(self):
        ctx = _ctx(
            level=1, function="indicator:0:0.5", weight="const:1",
            t_lo=0.75, t_hi=0.75, t_steps=1,
        )
        r = harness.run_fs_ratio(ctx)[0]
        assert (r.lhs, r.ratio) == (0.5, 0.75)
        assert r.rhs == pytest.approx(2.0 / 3.0, rel=1e-15)

    def test_threshold_above_sup(self):
        ctx = _ctx(level=5, function="indicator:0:0.5", weight="const:1",
                   t_lo=10.0, t_hi=10.0, t_steps=1)
        r = harness.run_fs_ratio(ctx)[0]
        assert r.lhs == 0.0 and r.ratio == 0.0


class TestPerezAndRahm:
    def test_perez_zero_function(self):
        ctx = _ctx(level=5, function="const:0")
        assert all(r.ratio == 0.0 for r in harness.run_perez_ratio(ctx))

    def test_perez_sparse_operator_mode(self):
        # T[0,0] with the trivial family reproduces local averages
        ctx = _ctx(level=4, function="const:1", weight="const:1",
                   perez_operator="sparse", sparse_ratio=1e9,
                   t_lo=0.5, t_hi=2.0, t_steps=3)
        reports = harness.run_perez_ratio(ctx)
        # lhs = w({avg chi > t}) = 1 for t < 1, else 0
        assert reports[0].lhs == 1.0
        assert reports[-1].lhs == 0.0

    def test_rahm_series_factor(self):
        ctx = _ctx(level=5, epsilon="pow:1", series_r=2,
                   function="indicator:0:0.5", weight="const:1",
                   t_lo=0.25, t_hi=0.25, t_steps=1)
        r = harness.run_rahm_ratio(ctx)[0]
        # series factor max(13/16, 1) = 1; entropy field of a constant weight
        from entropyfs.maximal import entropy_density, EpsilonFunction
        from entropyfs.grid import DyadicCube

        rho1 = entropy_density(constant_function(5, 1.0), DyadicCube(0, 0, 0), 1)
        expected_field = math.log2(2.0 + rho1) * EpsilonFunction.pow(1.0).eval(rho1)
        assert r.rhs == pytest.approx(expected_field * 0.5 / 0.25, rel=1e-9)


class TestTmbsExperiment:
    def test_constant_symbol(self):
        ctx = _ctx(level=5, bmo="martingale:1:0", function="indicator:0:0.25")
        r = harness.run_tmbs_weak(ctx)[0]
        assert r.lhs == 0.0 and r.ratio == 0.0

    def test_trivial_family_closed_chain(self):
        # S = {[0,1)}, b = haar, f = c: T[1,1]f = |b| <|b|> c = c everywhere
        c = 0.3
        ctx = _ctx(level=6, bmo="haar", function=f"const:{c}", weight="const:1",
                   sparse_ratio=1e9)
        r = harness.run_tmbs_weak(ctx)[0]
        assert r.lhs == pytest.approx(c, rel=1e-12)  # exact weak norm of constant c
        assert r.infinite is False

    def test_hypothesis_violation_names_cube(self, rng):
        ctx = _ctx(level=8, m=1, function="spine", sparse_ratio=2.0)
        with pytest.raises(ConfigError, match="cube"):
            harness.run_tmbs_weak(ctx)

    def test_weak_grid_mode_lower_bounds_exact(self):
        kw = dict(level=8, bmo="logdist", function="random", weight="power:0.6", seed=5)
        exact = harness.run_tmbs_weak(_ctx(weak_exact=True, **kw))[0]
        grid = harness.run_tmbs_weak(_ctx(weak_exact=False, **kw))[0]
        assert grid.lhs <= exact.lhs * (1 + 1e-12)
        assert grid.lhs >= 0.9 * exact.lhs  # 64-point geometric grid is close


class TestT0mExperiment:
    def test_constant_symbol(self):
        ctx = _ctx(level=5, bmo="martingale:1:0")
        assert all(r.ratio == 0.0 for r in harness.run_t0m_ratio(ctx))

    def test_worked_example(self):
        # S = {[0,1)}, b = half indicator, f = 1, w = 1, t = 1/4
        ctx = _ctx(level=4, bmo="haar", function="const:1", weight="const:1",
                   sparse_ratio=1e9, t_lo=0.25, t_hi=0.25, t_steps=1)
        # use a half-indicator symbol via explicit construction
        ctx.b = GridFunction(4, np.concatenate([np.ones(8), np.zeros(8)]))
        r = harness.run_t0m_ratio(ctx)[0]
        assert r.lhs == 1.0  # T[0,1]f = 1/2 > 1/4 everywhere
        from entropyfs.orlicz import YoungFunction, young_eval
        from entropyfs.maximal import orlicz_maximal

        field = orlicz_maximal(constant_function(4, 1.0), YoungFunction.phik(1))
        want = young_eval(YoungFunction.phik(1), 0.5 / 0.25) * float(field.cells.mean())
        assert r.rhs == pytest.approx(want, rel=1e-9)

    def test_large_t_ratio_vanishes(self):
        ctx = _ctx(level=6, bmo="haar", function="indicator:0:0.5",
                   t_lo=1e9, t_hi=1e9, t_steps=1)
        r = harness.run_t0m_ratio(ctx)[0]
        assert r.lhs == 0.0 and r.ratio == 0.0


class TestMainExperiment:
    def test_constant_symbol(self):
        ctx = _ctx(level=5, bmo="martingale:1:0", main_mode="a")
        assert all(r.lhs == 0.0 for r in harness.run_main_theorem(ctx))

    def test_mode_b_dominates_tmm_alone(self):
        kw = dict(level=7, bmo="logdist", function="random", weight="power:0.3", seed=3)
        ctx = harness.RunContext(harness.ExperimentConfig(**kw))
        S = ctx.family()
        from entropyfs.sparse import sparse_commutator_apply

        tmm = sparse_commutator_apply(S, ctx.b, ctx.f, 1, 1)
        dom = np.zeros(ctx.f.n_cells)
        for h in (0, 1):
            dom += sparse_commutator_apply(S, ctx.b, ctx.f, h, 1).cells
        assert (dom >= tmm.cells - 1e-12).all()
        ts = ctx.t_grid()
        wts = ctx.w.cells * ctx.f.cell_width
        lhs_b = harness.weighted_exceedance(dom, wts, ts)
        lhs_mm = harness.weighted_exceedance(tmm.cells, wts, ts)
        assert (lhs_b >= lhs_mm - 1e-15).all()

    def test_series_scaling(self):
        kw = dict(level=6, bmo="haar", function="indicator:0:0.5", epsilon="const:1",
                  t_lo=0.1, t_hi=1.0, t_steps=4)
        r0 = harness.run_main_theorem(_ctx(series_r=0, **kw))
        r10 = harness.run_main_theorem(_ctx(series_r=10, **kw))
        for a, b in zip(r0, r10):
            assert b.rhs == pytest.approx(11.0 * a.rhs, rel=1e-12)


class TestSweepConfig:
    def test_parse_roundtrip(self):
        text = """
        # comment line
        experiments = fs, tmbs
        J = 6, 8
        m = 1
        weights = const:1, power:0.6
        functions = indicator:0:0.25
        bmos = haar
        epsilons = logpow:1
        seed = 42
        series_R = 5
        """
        cfg = harness.parse_sweep_config(text)
        assert cfg.experiments == ("fs", "tmbs")
        assert cfg.levels == (6, 8)
        assert cfg.base.seed == 42
        assert cfg.base.series_r == 5

    def test_error_reports_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            harness.parse_sweep_config("experiments = fs\nJ = six\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            harness.parse_sweep_config("wat = 1\n")

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="unknown experiments"):
            harness.parse_sweep_config("experiments = hilbert\n")


class TestSweep:
    def test_empty_axes_header_only(self):
        cfg = harness.parse_sweep_config("experiments = fs\nweights =\nfunctions =\n")
        reports, summary = harness.corpus_sweep(cfg)
        assert reports == []
        csv = harness.reports_to_csv(reports)
        assert csv == ",".join(harness.CSV_COLUMNS) + "\n"

    def test_row_count(self):
        text = (
            "experiments = fs\nJ = 5\nweights = const:1, power:0.6\n"
            "functions = indicator:0:0.25\nbmos = haar\nt_grid = 0.1:1:3\n"
        )
        reports, _ = harness.corpus_sweep(harness.parse_sweep_config(text))
        assert len(reports) == 6  # 2 weights x 1 function x 3 thresholds

    def test_byte_identical_repeat(self, tmp_path):
        text = (
            "experiments = fs, tmbs, domination\nJ = 6\nm = 1\n"
            "weights = const:1, lognormal:1\nfunctions = random, indicator:0:0.25\n"
            "bmos = haar, martingale:11:4\nepsilons = logpow:1\nseed = 99\n"
        )
        cfg = harness.parse_sweep_config(text)
        out = []
        for _ in range(2):
            reports, summary = harness.corpus_sweep(cfg)
            out.append((harness.reports_to_csv(reports), harness.summary_to_json(summary)))
        assert out[0][0] == out[1][0]
        assert out[0][1] == out[1][1]

    def test_summary_shape(self):
        text = (
            "experiments = fs\nJ = 5, 7\nweights = const:1\n"
            "functions = indicator:0:0.5\nt_grid = 0.2:2:4\n"
        )
        _, summary = harness.corpus_sweep(harness.parse_sweep_config(text))
        s = summary["fs"]
        assert set(s) >= {"max_ratio", "argmax_params", "drift_J_pairs", "n_rows", "n_infinite"}
        assert s["n_rows"] == 8
        assert len(s["drift_J_pairs"]) == 1
        assert s["drift_J_pairs"][0]["J_lo"] == 5


class TestCli:
    def test_luxemburg_value(self, capsys):
        rc = cli_main(["luxemburg", "--level", "4", "--function", "const:1",
                       "--young", "phik:1", "--cube", "0:0:0"])
        assert rc == 0
        val = float(capsys.readouterr().out.strip())
        assert val == pytest.approx(1.2567506185377, rel=1e-9)

    def test_rho_json(self, capsys):
        rc = cli_main(["rho", "--level", "5", "--weight", "const:2", "--k", "0",
                       "--out", "json"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["rho"] == 1.0

    def test_maximal_csv(self, capsys):
        rc = cli_main(["maximal", "--level", "2", "--weight", "const:3", "--kind", "hl"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "cell,value"
        assert len(lines) == 5

    def test_sparse_build_and_apply(self, capsys, tmp_path):
        fam = tmp_path / "family.txt"
        rc = cli_main(["sparse", "build", "--level", "5", "--function", "spine",
                       "--family-out", str(fam)])
        assert rc == 0
        assert fam.read_text().startswith("alpha=")
        rc = cli_main(["sparse", "apply", "--level", "5", "--function", "spine",
                       "--bmo", "haar", "--h", "1", "--m", "1", "--family", str(fam)])
        assert rc == 0

    def test_verify_fs_csv(self, capsys):
        rc = cli_main(["verify", "fs", "--level", "4", "--function", "indicator:0:0.5",
                       "--weight", "const:1", "--t-grid", "0.75:0.75:1"])
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == ",".join(harness.CSV_COLUMNS)
        assert out[1].startswith("fs,4,-,const:1,indicator:0:0.5,-,-,0.75,0.5,")

    def test_sweep_files(self, tmp_path, capsys):
        cfgfile = tmp_path / "sweep.cfg"
        cfgfile.write_text(
            "experiments = fs\nJ = 5\nweights = const:1\nfunctions = indicator:0:0.5\n"
            "t_grid = 0.5:0.5:1\n"
        )
        csvf, jsonf = tmp_path / "out.csv", tmp_path / "out.json"
        rc = cli_main(["sweep", "--config", str(cfgfile), "--csv", str(csvf),
                       "--json", str(jsonf)])
        assert rc == 0
        assert csvf.read_text().splitlines()[0] == ",".join(harness.CSV_COLUMNS)
        assert "fs" in json.loads(jsonf.read_text())

    def test_usage_error_exit_2(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("J = six\n")
        rc = cli_main(["sweep", "--config", str(bad)])
        assert rc == 2

    def test_bad_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli_main(["frobnicate"])
        assert exc.value.code == 2

    def test_selftest(self, capsys):
        assert cli_main(["selftest"]) == 0
        assert "PASS" in capsys.readouterr().out
