"""Experiment runner: config parsing, determinism, summaries, tables."""

import json
import subprocess
import sys

import numpy as np
import pytest

from islandpf.errors import MissingCell
from islandpf.harness import (
    ConfigError,
    ExperimentConfig,
    SchemePair,
    build_model,
    config_from_dict,
    load_config,
    model_observations,
    oracle_values,
    parse_function,
    read_csv,
    run_experiment,
    summarize_raw_file,
    variance_gain_table,
)
from islandpf.models import STANDARD_MIXING, STANDARD_SEED


def finite_config(**overrides):
    raw = {
        "model": {"kind": "finite", "d": 3, "horizon": 4, "seed": 11},
        "grid": [[4, 3]],
        "pairs": [
            {"within": "bootstrap", "across": "independent"},
            {"within": "bootstrap", "across": "bootstrap"},
        ],
        "replications": 6,
        "seed": 555,
        "functions": ["identity"],
    }
    raw.update(overrides)
    return raw


class TestConfig:
    def test_round_trip(self):
        cfg = config_from_dict(finite_config())
        assert cfg.grid == ((4, 3),)
        assert cfg.pairs[0].label == "bootstrap/independent"
        assert len(cfg.config_hash) == 12

    def test_missing_key(self):
        raw = finite_config()
        del raw["seed"]
        with pytest.raises(ConfigError, match="seed"):
            config_from_dict(raw)

    def test_unknown_scheme(self):
        raw = finite_config(pairs=[{"within": "systematic", "across": "bootstrap"}])
        with pytest.raises(ConfigError, match="systematic"):
            config_from_dict(raw)

    def test_parse_error_has_line(self, tmp_path):
        bad = tmp_path / "cfg.json"
        bad.write_text('{\n  "model": {,}\n}\n')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(bad)

    def test_functions_validated(self):
        with pytest.raises(ConfigError, match="median"):
            config_from_dict(finite_config(functions=["median"]))

    def test_epsilon_fixed_needs_schedule(self):
        raw = finite_config(
            pairs=[{"within": "bootstrap", "across": "epsilon-fixed"}]
        )
        cfg = config_from_dict(raw)
        from islandpf.harness import scheme_from_label

        with pytest.raises(ConfigError, match="schedule"):
            scheme_from_label("epsilon-fixed", "across", cfg)


class TestModelDeclarations:
    def test_finite_seeded(self):
        m = build_model({"kind": "finite", "d": 3, "horizon": 5, "seed": 2})
        assert m.horizon == 5
        assert m.finite is not None

    def test_finite_explicit_tables(self):
        m = build_model({
            "kind": "finite",
            "eta0": [0.5, 0.5],
            "transitions": [[[0.5, 0.5], [0.5, 0.5]]],
            "potentials": [[1.0, 2.0], [1.0, 1.0]],
        })
        assert m.finite.d == 2

    def test_lgm_inline_observations(self):
        m = build_model({
            "kind": "lgm",
            "params": {"phi": 0.9, "sigma_u": 0.6, "sigma_v": 1.0},
            "observations": [0.1, -0.2, 0.3],
        })
        assert m.horizon == 3

    def test_lgm_seeded_observations_reproducible(self):
        decl = {
            "kind": "lgm",
            "params": {"phi": 0.9, "sigma_u": 0.6, "sigma_v": 1.0},
            "horizon": 8,
            "data_seed": 99,
        }
        a = model_observations(decl)
        b = model_observations(decl)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (8,)

    def test_indicator_function(self):
        f = parse_function("indicator(0.5,1.5)")
        np.testing.assert_array_equal(f(np.array([0, 1, 2])), [0.0, 1.0, 0.0])


class TestOracles:
    def test_finite_oracle_is_exact_flow(self):
        cfg = config_from_dict(finite_config(functions=["identity", "square"]))
        from islandpf.fk import exact_flow
        from islandpf.harness import build_finite

        flow = exact_flow(build_finite(cfg.model))
        oracles = oracle_values(cfg)
        states = np.arange(3)
        assert oracles["identity"][0] == pytest.approx(float(flow.etas[-1] @ states))
        assert oracles["square"][0] == pytest.approx(float(flow.etas[-1] @ states**2))
        assert oracles["identity"][1] == 0.0

    def test_lgm_oracle_matches_kalman(self):
        from islandpf.fk import kalman_predictive

        decl = {
            "kind": "lgm",
            "params": {"phi": 0.8, "sigma_u": 0.5, "sigma_v": 1.0},
            "observations": [0.3, -0.1],
        }
        cfg = config_from_dict(finite_config(model=decl, functions=["identity", "square"]))
        pred = kalman_predictive(0.8, 0.5, 1.0, [0.3, -0.1])
        oracles = oracle_values(cfg)
        assert oracles["identity"][0] == pytest.approx(pred[-1, 0])
        assert oracles["square"][0] == pytest.approx(pred[-1, 1] + pred[-1, 0] ** 2)


class TestRunExperiment:
    def test_raw_and_summary_written(self, tmp_path):
        cfg = config_from_dict(finite_config())
        raw_path, summary_path = run_experiment(cfg, tmp_path, workers=1)
        raw = read_csv(raw_path)
        assert len(raw) == 2 * 6  # pairs * reps, one function
        summary = read_csv(summary_path)
        assert len(summary) == 2
        for rec in summary:
            assert abs(
                float(rec["mse"])
                - (float(rec["bias"]) ** 2 + float(rec["variance"]))
            ) <= 1e-12 * max(1.0, float(rec["mse"]))

    def test_bootstrap_across_interactions_exact(self, tmp_path):
        cfg = config_from_dict(finite_config())
        _, summary_path = run_experiment(cfg, tmp_path, workers=1)
        for rec in read_csv(summary_path):
            if rec["across"] == "bootstrap":
                assert float(rec["mean_interactions"]) == 4 * 3
            if rec["across"] == "independent":
                assert float(rec["mean_interactions"]) == 0.0

    def test_byte_identical_across_worker_counts(self, tmp_path):
        cfg = config_from_dict(finite_config(replications=10))
        p1, s1 = run_experiment(cfg, tmp_path / "w1", workers=1)
        p2, s2 = run_experiment(cfg, tmp_path / "w2", workers=2)
        assert p1.read_bytes() == p2.read_bytes()
        # summaries differ only in the wall-clock column
        a = read_csv(s1)
        b = read_csv(s2)
        for ra, rb in zip(a, b):
            for key in ra:
                if key != "wall_clock_s":
                    assert ra[key] == rb[key]

    def test_replication_seeds_distinct(self, tmp_path):
        cfg = config_from_dict(finite_config(replications=8))
        raw_path, _ = run_experiment(cfg, tmp_path, workers=1)
        recs = read_csv(raw_path)
        by_pair = {}
        for rec in recs:
            by_pair.setdefault(rec["across"], []).append(rec["seed"])
        for seeds in by_pair.values():
            assert len(set(seeds)) == len(seeds)
        # common random numbers: same (cell, rep) seed across pairs
        assert by_pair["independent"] == by_pair["bootstrap"]

    def test_summarize_raw_file_round_trip(self, tmp_path):
        cfg = config_from_dict(finite_config())
        raw_path, summary_path = run_experiment(cfg, tmp_path, workers=1)
        again = {(r[1], r[2], r[3], r[6]): r for r in summarize_raw_file(raw_path, cfg)}
        for rec in read_csv(summary_path):
            row = again[(rec["cell"], rec["within"], rec["across"], rec["function"])]
            assert repr(row[8]) == rec["mean"]
            assert repr(row[11]) == rec["bias"]
        blind = summarize_raw_file(raw_path, None)
        assert blind[0][9] == ""  # no oracle without a config


class TestVarianceGain:
    def test_gain_arithmetic(self):
        rows = [
            {"cell": "4x3", "within": "bootstrap", "across": "bootstrap",
             "function": "identity", "variance": "1.0", "N1": 4, "N2": 3},
            {"cell": "4x3", "within": "bootstrap", "across": "ess",
             "function": "identity", "variance": "0.66", "N1": 4, "N2": 3},
        ]
        out = variance_gain_table(rows)
        assert len(out) == 1
        assert out[0]["gain_percent"] == pytest.approx(34.0)

    def test_equal_variance_zero_gain(self):
        rows = [
            {"cell": "1x1", "within": "bootstrap", "across": "bootstrap",
             "function": "identity", "variance": "0.5", "N1": 1, "N2": 1},
            {"cell": "1x1", "within": "bootstrap", "across": "independent",
             "function": "identity", "variance": "0.5", "N1": 1, "N2": 1},
        ]
        assert variance_gain_table(rows)[0]["gain_percent"] == pytest.approx(0.0)

    def test_missing_cell(self):
        rows = [
            {"cell": "1x1", "within": "bootstrap", "across": "ess",
             "function": "identity", "variance": "0.5", "N1": 1, "N2": 1},
        ]
        with pytest.raises(MissingCell):
            variance_gain_table(rows)


class TestCli:
    def run_cli(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "islandpf.cli", *args],
            capture_output=True, text=True,
        )

    def test_run_and_summarize(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(finite_config(replications=3)))
        out = self.run_cli("run", "--config", str(cfg_path), "--out",
                           str(tmp_path / "out"), "--workers", "1")
        assert out.returncode == 0, out.stderr
        assert (tmp_path / "out" / "raw.csv").exists()
        summ = self.run_cli("summarize", str(tmp_path / "out" / "raw.csv"),
                            "--config", str(cfg_path))
        assert summ.returncode == 0, summ.stderr
        assert summ.stdout.startswith("config_hash,")

    def test_exact_subcommand(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(finite_config()))
        out = self.run_cli("exact", "--config", str(cfg_path))
        assert out.returncode == 0, out.stderr
        header = out.stdout.splitlines()[0]
        assert header == "function,n,B,V,B_tilde,V_tilde,crossover_N1_per_N2"

    def test_bad_config_reports_error(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text("{ nope")
        out = self.run_cli("exact", "--config", str(cfg_path))
        assert out.returncode == 2
        assert "error" in out.stderr


class TestCrossoverReport:
    def test_small_report(self):
        cfg = config_from_dict({
            "model": {"kind": "finite", "d": 3, "horizon": 10,
                      "seed": STANDARD_SEED, "mixing": STANDARD_MIXING},
            "grid": [[2, 2]],
            "pairs": [{"within": "bootstrap", "across": "bootstrap"}],
            "replications": 4,
            "seed": 3,
            "crossover": {"n2": [64], "replications": 12, "factor": 4},
        })
        from islandpf.harness import crossover_report

        rows = crossover_report(cfg, workers=1)
        assert {r["mode"] for r in rows} == {"independent", "interacting"}
        thr = rows[0]["threshold"]
        n1s = sorted({r["N1"] for r in rows})
        assert n1s[0] == max(1, round(thr / 4))
        assert n1s[-1] == max(2, round(thr * 4))

    def test_doubling_n2_doubles_threshold(self):
        cfg = config_from_dict({
            "model": {"kind": "finite", "d": 3, "horizon": 10,
                      "seed": STANDARD_SEED, "mixing": STANDARD_MIXING},
            "grid": [[2, 2]],
            "pairs": [{"within": "bootstrap", "across": "bootstrap"}],
            "replications": 2,
            "seed": 3,
            "crossover": {"n2": [32, 64], "replications": 2},
        })
        from islandpf.harness import crossover_report

        rows = crossover_report(cfg, workers=1)
        thr = {r["N2"]: r["threshold"] for r in rows}
        assert thr[64] == pytest.approx(2 * thr[32])


class TestSingleReplication:
    def test_r1_independent_single_row(self, tmp_path):
        cfg = config_from_dict(finite_config(
            replications=1,
            pairs=[{"within": "bootstrap", "across": "independent"}],
        ))
        raw_path, _ = run_experiment(cfg, tmp_path, workers=1)
        recs = read_csv(raw_path)
        assert len(recs) == 1
        assert recs[0]["interactions"] == "0"


class TestCommittedSweepTrends:
    def test_variance_gains_positive_at_resolvable_cell(self):
        # paper-style trend: every alternative across-scheme reduces the
        # variance of the double bootstrap; asserted at the 100x100 cell
        # where 250 replications resolve the sign (small cells are noise
        # dominated at this replication count)
        import pathlib

        summary_path = (
            pathlib.Path(__file__).resolve().parent.parent
            / "report" / "testdata" / "lgm_paper_summary.csv"
        )
        rows = read_csv(summary_path)
        gains = variance_gain_table(rows)
        big = [g for g in gains if g["cell"] == "100x100"]
        assert {g["across"] for g in big} == {
            "independent", "ess", "epsilon-supnorm", "epsilon-empirical"
        }
        for g in big:
            assert g["gain_percent"] > 0, g


class TestSvOracle:
    def test_reference_run_oracle(self, tmp_path, monkeypatch):
        import islandpf.harness as hz

        monkeypatch.setattr(hz, "REFERENCE_PARTICLES", 20_000)
        monkeypatch.setattr(hz, "REFERENCE_PILOT_PARTICLES", 2_000)
        monkeypatch.setattr(hz, "REFERENCE_PILOTS", 4)
        cfg = config_from_dict({
            "model": {
                "kind": "sv",
                "params": {"alpha": 0.98, "sigma": 0.5, "beta": 1.0},
                "horizon": 25,
                "data_seed": 12,
            },
            "grid": [[50, 4]],
            "pairs": [{"within": "bootstrap", "across": "bootstrap"}],
            "replications": 4,
            "seed": 99,
        })
        value, err = oracle_values(cfg)["identity"]
        assert np.isfinite(value)
        assert err > 0.0
        _, summary_path = run_experiment(cfg, tmp_path, workers=1)
        rec = read_csv(summary_path)[0]
        assert float(rec["oracle_se"]) > 0
        assert rec["bias"] != ""


class TestFailureRecording:
    def test_dead_replications_recorded_not_fatal(self, tmp_path):
        # two of three states carry zero potential at step 0: single-particle
        # islands frequently start with zero total mass and the run dies, but
        # the sweep completes and records the failures
        cfg = config_from_dict({
            "model": {
                "kind": "finite",
                "eta0": [0.45, 0.45, 0.1],
                "transitions": [[[1 / 3] * 3] * 3] * 2,
                "potentials": [[0.0, 0.0, 1.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]],
            },
            "grid": [[1, 1]],
            "pairs": [{"within": "bootstrap", "across": "independent"}],
            "replications": 40,
            "seed": 7,
        })
        raw_path, summary_path = run_experiment(cfg, tmp_path, workers=1)
        raw = read_csv(raw_path)
        failures = read_csv(tmp_path / "failures.csv")
        assert len(raw) + len(failures) == 40
        assert len(failures) > 0
        assert all("Extinction" in f["error"] for f in failures)
        # summary covers only the surviving replications
        rec = read_csv(summary_path)[0]
        assert int(rec["reps"]) == len(raw)
