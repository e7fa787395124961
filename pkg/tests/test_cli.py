"""Command-line surface: subcommands, exit codes, config handling, and
manifest-driven reruns."""

from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from egwish import (
    path_graph,
    read_graph_json,
    read_matrix_csv,
    read_replication_csv,
    write_matrix_csv,
)
from egwish.cli import main, read_config_file, UsageError

FIT_FILES = [
    "chain.jsonl",
    "edge_freq.csv",
    "mpm_graph.json",
    "degree_rank.csv",
    "scores.csv",
]


def run(*argv: str) -> int:
    return main(list(argv))


def simulate_small(tmp_path, model="ar1", p=5, n=60, seed=2):
    out = tmp_path / f"sim_{model}_{p}_{seed}"
    assert run(
        "simulate", "--model", model, "--p", str(p), "--n", str(n),
        "--seed", str(seed), "--out", str(out),
    ) == 0
    return out


class TestSimulate:
    def test_outputs_exist_and_shape(self, tmp_path):
        out = simulate_small(tmp_path, p=30, n=100)
        for name in ("truth_omega.csv", "truth_graph.json", "data.csv",
                     "sigma_hat.csv", "manifest.json"):
            assert (out / name).exists()
        s = read_matrix_csv(out / "sigma_hat.csv")
        assert s.shape == (30, 30)
        assert np.array_equal(s, s.T)
        assert read_matrix_csv(out / "data.csv").shape == (100, 30)

    def test_same_seed_identical_files(self, tmp_path):
        a = simulate_small(tmp_path, seed=4)
        b_dir = tmp_path / "again"
        assert run("simulate", "--model", "ar1", "--p", "5", "--n", "60",
                   "--seed", "4", "--out", str(b_dir)) == 0
        for name in ("truth_omega.csv", "truth_graph.json", "data.csv", "sigma_hat.csv"):
            assert (a / name).read_bytes() == (b_dir / name).read_bytes()

    def test_unknown_model_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("simulate", "--model", "glasso", "--p", "5", "--n", "10",
                "--out", str(tmp_path / "x"))
        assert exc.value.code == 2


class TestExitCodes:
    def test_malformed_csv_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\nfoo,bar\n")
        assert run("fit", "--data", str(bad), "--out", str(tmp_path / "o")) == 3

    def test_nan_rejected(self, tmp_path):
        bad = tmp_path / "nan.csv"
        bad.write_text("1.0,2.0\nnan,0.5\n")
        assert run("fit", "--data", str(bad), "--out", str(tmp_path / "o")) == 3

    def test_single_column_rejected(self, tmp_path):
        bad = tmp_path / "thin.csv"
        bad.write_text("1.0\n2.0\n3.0\n")
        assert run("fit", "--data", str(bad), "--out", str(tmp_path / "o")) == 3

    def test_sigma_without_n_obs_is_usage_error(self, tmp_path):
        sig = tmp_path / "sig.csv"
        write_matrix_csv(np.eye(3), sig)
        assert run("fit", "--sigma", str(sig), "--out", str(tmp_path / "o")) == 2

    def test_nonsquare_sigma_rejected(self, tmp_path):
        sig = tmp_path / "sig.csv"
        write_matrix_csv(np.ones((2, 3)), sig)
        assert run("fit", "--sigma", str(sig), "--n-obs", "10",
                   "--out", str(tmp_path / "o")) == 3

    def test_analytic_on_random_graph_is_numeric_failure(self, tmp_path):
        # The p=30 random benchmark graph is not decomposable, so asking for
        # the clique-factorized constant must fail with exit code 4.
        assert run(
            "normconst-bench", "--graph", "random", "--p-list", "30",
            "--delta-list", "4", "--methods", "analytic",
            "--out", str(tmp_path / "o"),
        ) == 4

    def test_unknown_bench_method(self, tmp_path):
        assert run("normconst-bench", "--graph", "ar2", "--p-list", "5",
                   "--delta-list", "4", "--methods", "bridge",
                   "--out", str(tmp_path / "o")) == 2

    def test_mc_sample_floor(self, tmp_path):
        assert run("normconst-bench", "--graph", "ar2", "--p-list", "5",
                   "--delta-list", "4", "--methods", "mc", "--mc-samples", "10",
                   "--out", str(tmp_path / "o")) == 2

    def test_replicate_reps_floor(self, tmp_path):
        assert run("replicate", "--model", "ar1", "--p", "4", "--n", "20",
                   "--reps", "0", "--out", str(tmp_path / "o")) == 2


class TestFit:
    def test_sigma_and_raw_inputs_identical(self, tmp_path):
        sim = simulate_small(tmp_path)
        raw_out, sig_out = tmp_path / "raw", tmp_path / "sig"
        # simulate writes the uncentered X'X/n, so match it with --no-center
        assert run("fit", "--data", str(sim / "data.csv"), "--no-center",
                   "--n-iter", "600", "--burn-in", "100", "--seed", "9",
                   "--out", str(raw_out)) == 0
        assert run("fit", "--sigma", str(sim / "sigma_hat.csv"), "--n-obs", "60",
                   "--n-iter", "600", "--burn-in", "100", "--seed", "9",
                   "--out", str(sig_out)) == 0
        for name in FIT_FILES:
            assert (raw_out / name).read_bytes() == (sig_out / name).read_bytes()

    def test_wide_standardized_run(self, tmp_path):
        # Expression-matrix shape: 207 observations on 139 variables, with
        # per-column standardization; only completion and output shape are
        # asserted, no ground truth exists.
        rng = np.random.Generator(np.random.Philox(key=99))
        data = tmp_path / "expr.csv"
        write_matrix_csv(rng.standard_normal((207, 139)), data)
        out = tmp_path / "wide"
        assert run("fit", "--data", str(data), "--standardize",
                   "--n-iter", "40", "--burn-in", "10", "--seed", "1",
                   "--out", str(out)) == 0
        assert read_matrix_csv(out / "edge_freq.csv").shape == (139, 139)
        with open(out / "degree_rank.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert {r["kind"] for r in rows} == {"degree", "rank"}
        assert {int(r["vertex"]) for r in rows} == set(range(139))

    def test_contraction_warning_on_stderr(self, tmp_path, capsys):
        sig = tmp_path / "sig.csv"
        write_matrix_csv(np.eye(3) + 0.1, sig)
        assert run("fit", "--sigma", str(sig), "--n-obs", "50",
                   "--prior-kind", "exponential", "--prior-a", "0.5",
                   "--n-iter", "20", "--burn-in", "0", "--seed", "1",
                   "--out", str(tmp_path / "o")) == 0
        assert "contraction" in capsys.readouterr().err

    def test_center_flag_recorded(self, tmp_path):
        sim = simulate_small(tmp_path)
        out = tmp_path / "fitc"
        assert run("fit", "--data", str(sim / "data.csv"), "--no-center",
                   "--n-iter", "20", "--burn-in", "0", "--seed", "1",
                   "--out", str(out)) == 0
        params = json.loads((out / "manifest.json").read_text())["params"]
        assert params["center"] is False and params["standardize"] is False

    def test_end_to_end_path_recovery(self, tmp_path):
        # Full pipeline at p=10 on a favorable data seed: the default-length
        # chain's median probability model is exactly the path.  Recovery
        # *rates* across seeds are the business of the replicated p=30
        # studies; at n=100 the exact posterior holds a spurious edge above
        # 0.5 on a fair share of seeds, so a single vetted seed keeps this
        # a pipeline check rather than a statistical claim.
        sim = simulate_small(tmp_path, model="ar1", p=10, n=100, seed=2)
        out = tmp_path / "e2e"
        assert run("fit", "--data", str(sim / "data.csv"), "--seed", "0",
                   "--out", str(out)) == 0
        assert read_graph_json(out / "mpm_graph.json") == path_graph(10)


class TestConfigFile:
    def test_parse_values(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# scoring\n"
            "delta = 6.5\n"
            "prior_kind=exponential\n"
            "standardize = yes\n"
            "sieve_xi = none\n"
            "\n"
            "n_iter=500\n"
        )
        got = read_config_file(cfg)
        assert got == {
            "delta": 6.5,
            "prior_kind": "exponential",
            "standardize": True,
            "sieve_xi": None,
            "n_iter": 500,
        }

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("temperature=2\n")
        with pytest.raises(UsageError):
            read_config_file(cfg)

    def test_bad_value_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("delta=abc\n")
        with pytest.raises(UsageError):
            read_config_file(cfg)
        cfg.write_text("center=maybe\n")
        with pytest.raises(UsageError):
            read_config_file(cfg)
        cfg.write_text("delta\n")
        with pytest.raises(UsageError):
            read_config_file(cfg)

    def test_flag_overrides_file(self, tmp_path):
        sim = simulate_small(tmp_path)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("delta=6.0\nn_iter=30\nburn_in=0\n")
        out_file = tmp_path / "byfile"
        assert run("fit", "--data", str(sim / "data.csv"), "--config", str(cfg),
                   "--seed", "1", "--out", str(out_file)) == 0
        params = json.loads((out_file / "manifest.json").read_text())["params"]
        assert params["delta"] == 6.0 and params["n_iter"] == 30
        out_flag = tmp_path / "byflag"
        assert run("fit", "--data", str(sim / "data.csv"), "--config", str(cfg),
                   "--delta", "8", "--seed", "1", "--out", str(out_flag)) == 0
        params = json.loads((out_flag / "manifest.json").read_text())["params"]
        assert params["delta"] == 8.0 and params["n_iter"] == 30

    def test_missing_config_file(self, tmp_path):
        sim = simulate_small(tmp_path)
        assert run("fit", "--data", str(sim / "data.csv"),
                   "--config", str(tmp_path / "absent.cfg"),
                   "--out", str(tmp_path / "o")) == 2


def read_bench_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestBench:
    def test_band_relative_error_monotone(self, tmp_path):
        out = tmp_path / "bench"
        deltas = ",".join(str(d) for d in range(4, 32, 2))
        assert run("normconst-bench", "--graph", "ar2", "--p-list", "10",
                   "--delta-list", deltas, "--methods", "analytic,laplace",
                   "--seed", "0", "--out", str(out)) == 0
        rows = read_bench_csv(out / "normconst.csv")
        assert set(rows[0]) == {
            "p", "delta", "graph", "method", "log_value", "std_error",
            "n_samples", "wall_time_ns", "re", "re_unreliable",
        }
        lap = sorted(
            (float(r["delta"]), float(r["re"]))
            for r in rows if r["method"] == "laplace"
        )
        res = [re for _, re in lap]
        assert len(res) == 14
        assert all(b <= a for a, b in zip(res, res[1:]))
        for r in rows:
            if r["method"] == "analytic":
                assert r["re"] == "" and float(r["std_error"]) == 0.0
            assert int(r["wall_time_ns"]) > 0
        for name in ("lognorm_p10.svg", "re_p10.svg", "time_vs_p.svg"):
            assert (out / name).exists()
            assert b"<svg" in (out / name).read_bytes()

    def test_random_graph_mc_reference(self, tmp_path):
        # seed 3 draws a nondecomposable graph at p=8, so the importance
        # weights genuinely vary and the MC standard error is positive
        out = tmp_path / "bench_mc"
        assert run("normconst-bench", "--graph", "random", "--p-list", "8",
                   "--delta-list", "4,8", "--methods", "mc,laplace",
                   "--seed", "3", "--out", str(out)) == 0
        rows = read_bench_csv(out / "normconst.csv")
        mc = [r for r in rows if r["method"] == "mc"]
        lap = [r for r in rows if r["method"] == "laplace"]
        assert all(float(r["std_error"]) > 0 for r in mc)
        assert all(int(r["n_samples"]) == 10_000 for r in mc)
        assert all(r["re"] == "" for r in mc)  # mc is the reference here
        assert all(r["re"] != "" for r in lap)

    def test_workers_do_not_change_results(self, tmp_path):
        outs = []
        for label, extra in (("w1", ["--workers", "1"]), ("w2", ["--workers", "2"])):
            out = tmp_path / label
            assert run("normconst-bench", "--graph", "ar2", "--p-list", "6",
                       "--delta-list", "4,8", "--methods", "analytic,laplace",
                       "--seed", "3", "--out", str(out), *extra) == 0
            outs.append(read_bench_csv(out / "normconst.csv"))
        drop = lambda rows: [
            {k: v for k, v in r.items() if k != "wall_time_ns"} for r in rows
        ]
        assert drop(outs[0]) == drop(outs[1])


class TestReplicate:
    ARGS = ["replicate", "--model", "ar1", "--p", "4", "--n", "60",
            "--n-iter", "400", "--burn-in", "100", "--seed", "3"]

    def test_summary_layout(self, tmp_path):
        out = tmp_path / "rep"
        assert run(*self.ARGS, "--reps", "3", "--out", str(out)) == 0
        rows, summary = read_replication_csv(out / "replications.csv")
        assert len(rows) == 3
        assert {r.rep for r in rows} == {0, 1, 2}
        assert all(r.model == "ar1" and r.p == 4 and r.n == 60 for r in rows)
        assert 0.0 <= summary["mean_sp"] <= 1.0
        assert -1.0 <= summary["mean_mcc"] <= 1.0
        assert "se_mcc" in summary

    def test_single_rep_blank_se(self, tmp_path):
        out = tmp_path / "rep1"
        assert run(*self.ARGS, "--reps", "1", "--out", str(out)) == 0
        _, summary = read_replication_csv(out / "replications.csv")
        assert "se_mcc" not in summary

    def test_master_seed_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(*self.ARGS, "--reps", "2", "--out", str(a)) == 0
        assert run(*self.ARGS, "--reps", "2", "--out", str(b)) == 0
        assert (a / "replications.csv").read_bytes() == (b / "replications.csv").read_bytes()

    def test_parallel_identical(self, tmp_path):
        a, b = tmp_path / "w1", tmp_path / "w2"
        assert run(*self.ARGS, "--reps", "3", "--workers", "1", "--out", str(a)) == 0
        assert run(*self.ARGS, "--reps", "3", "--workers", "3", "--out", str(b)) == 0
        assert (a / "replications.csv").read_bytes() == (b / "replications.csv").read_bytes()

    def test_workers_env_var(self, tmp_path, monkeypatch):
        a, b = tmp_path / "env", tmp_path / "flag"
        monkeypatch.setenv("EGWISH_WORKERS", "2")
        assert run(*self.ARGS, "--reps", "2", "--out", str(a)) == 0
        monkeypatch.delenv("EGWISH_WORKERS")
        assert run(*self.ARGS, "--reps", "2", "--workers", "2", "--out", str(b)) == 0
        assert (a / "replications.csv").read_bytes() == (b / "replications.csv").read_bytes()

    def test_bad_workers_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("EGWISH_WORKERS", "lots")
        assert run(*self.ARGS, "--reps", "1", "--out", str(tmp_path / "o")) == 2


def manifest_without_wall_time(path):
    doc = json.loads(path.read_text())
    doc.pop("wall_time_ns")
    return doc


class TestRerun:
    def test_fit_rerun_bit_exact(self, tmp_path):
        sim = simulate_small(tmp_path)
        first = tmp_path / "fit1"
        assert run("fit", "--data", str(sim / "data.csv"), "--n-iter", "300",
                   "--burn-in", "50", "--seed", "7", "--out", str(first)) == 0
        again = tmp_path / "fit2"
        assert run("rerun", "--manifest", str(first / "manifest.json"),
                   "--out", str(again)) == 0
        for name in FIT_FILES:
            assert (first / name).read_bytes() == (again / name).read_bytes()
        assert manifest_without_wall_time(first / "manifest.json") == \
            manifest_without_wall_time(again / "manifest.json")

    def test_simulate_rerun_bit_exact(self, tmp_path):
        sim = simulate_small(tmp_path, seed=11)
        again = tmp_path / "sim2"
        assert run("rerun", "--manifest", str(sim / "manifest.json"),
                   "--out", str(again)) == 0
        for name in ("truth_omega.csv", "truth_graph.json", "data.csv", "sigma_hat.csv"):
            assert (sim / name).read_bytes() == (again / name).read_bytes()

    def test_bench_rerun_exact_outside_wall_times(self, tmp_path):
        first = tmp_path / "b1"
        assert run("normconst-bench", "--graph", "ar2", "--p-list", "6",
                   "--delta-list", "4,10", "--methods", "analytic,laplace",
                   "--seed", "5", "--out", str(first)) == 0
        again = tmp_path / "b2"
        assert run("rerun", "--manifest", str(first / "manifest.json"),
                   "--out", str(again)) == 0
        drop = lambda p: [
            {k: v for k, v in r.items() if k != "wall_time_ns"}
            for r in read_bench_csv(p)
        ]
        assert drop(first / "normconst.csv") == drop(again / "normconst.csv")
        # wall-time-free plots reproduce byte for byte
        for name in ("lognorm_p6.svg", "re_p6.svg"):
            assert (first / name).read_bytes() == (again / name).read_bytes()

    def test_missing_manifest(self, tmp_path):
        assert run("rerun", "--manifest", str(tmp_path / "no.json"),
                   "--out", str(tmp_path / "o")) == 2

    def test_malformed_manifest(self, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text("{not json")
        assert run("rerun", "--manifest", str(bad), "--out", str(tmp_path / "o")) == 3

    def test_unrecognized_manifest(self, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text(json.dumps({"command": "explode", "params": {}}))
        assert run("rerun", "--manifest", str(bad), "--out", str(tmp_path / "o")) == 3


class TestEntryPoint:
    def test_version_flag(self):
        with pytest.raises(SystemExit) as exc:
            run("--version")
        assert exc.value.code == 0

    def test_console_script(self):
        proc = subprocess.run(
            ["egwish", "--version"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "egwish" in proc.stdout

    def test_module_requires_subcommand(self):
        proc = subprocess.run(
            [sys.executable, "-m", "egwish.cli"], capture_output=True, text=True
        )
        assert proc.returncode == 2
