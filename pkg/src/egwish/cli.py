"""Command-line surface: simulation, fitting, normalizing-constant
benchmarks, replicated recovery studies, and bit-exact reruns.

Every command writes a manifest.json recording the resolved parameters and
the package version; `egwish rerun` replays a manifest into a fresh
directory and reproduces every output byte for byte (the manifest itself
differs only in its wall-time field).  Configuration comes from an optional
flat key=value file, overridden by command-line flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .errors import DimensionMismatch, EgwishError
from .estimation import MleConfig, SampleCov, fit_mle, sample_cov_from_data
from .graph import Graph, band_graph, write_graph_json
from .gwishart import (
    GWishartParams,
    analytic_log_norm,
    laplace_log_norm,
    mc_log_norm,
)
from .matrixio import read_matrix_csv, write_matrix_csv
from .metrics import ReplicationRow, confusion, sp_se_mcc, write_replication_csv
from .posterior import GraphPrior, PosteriorConfig, ScoreCache, write_scores_csv
from .sampler import (
    McmcConfig,
    degree_posterior,
    median_probability_model,
    run_chain,
    write_chain_jsonl,
)
from .simulate import make_model, sample_mvn
from .svgplot import LineSeries, line_plot

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


class DataError(Exception):
    """Unusable input data; maps to exit code 3."""


# Scoring and chain settings understood by the config file and the
# corresponding flags.  The command line wins over the file, the file over
# these defaults.  mle_algorithm defaults to the Newton solver here because
# chain runs fit thousands of graphs.
_DEFAULTS: dict[str, Any] = {
    "delta": 4.0,
    "alpha": 0.99,
    "prior_kind": "bernoulli",
    "prior_q": 0.45,
    "prior_a": 1.0,
    "prior_max_edges": None,
    "mle_tol": 1e-8,
    "mle_max_iter": 500,
    "mle_algorithm": "newton",
    "sieve_xi": None,
    "n_iter": 20_000,
    "burn_in": 4_000,
    "thin": 1,
    "seed": 0,
    "center": True,
    "standardize": False,
    "cache_max": None,
    "mc_samples": 10_000,
}

_CASTERS = {
    "delta": float,
    "alpha": float,
    "prior_kind": str,
    "prior_q": float,
    "prior_a": float,
    "prior_max_edges": int,
    "mle_tol": float,
    "mle_max_iter": int,
    "mle_algorithm": str,
    "sieve_xi": float,
    "n_iter": int,
    "burn_in": int,
    "thin": int,
    "seed": int,
    "center": None,
    "standardize": None,
    "cache_max": int,
    "mc_samples": int,
}


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"cannot parse boolean value {s!r}")


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a flat key=value configuration file.  Blank lines and lines
    starting with # are ignored; keys must be known settings."""
    out: dict[str, Any] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown setting {key!r}")
        caster = _CASTERS[key]
        try:
            if value.lower() == "none":
                out[key] = None
            elif caster is None:
                out[key] = _parse_bool(value)
            else:
                out[key] = caster(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def _resolve_settings(args: argparse.Namespace) -> dict[str, Any]:
    settings = dict(_DEFAULTS)
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    if getattr(args, "no_center", False):
        settings["center"] = False
    if getattr(args, "do_standardize", False):
        settings["standardize"] = True
    if settings["prior_kind"] not in ("bernoulli", "exponential"):
        raise UsageError(f"unknown prior kind {settings['prior_kind']!r}")
    if settings["mle_algorithm"] not in ("ips", "newton"):
        raise UsageError(f"unknown MLE algorithm {settings['mle_algorithm']!r}")
    return settings


def _posterior_config(settings: dict[str, Any]) -> PosteriorConfig:
    prior = GraphPrior(
        kind=settings["prior_kind"],
        q=settings["prior_q"],
        a=settings["prior_a"],
        max_edges=settings["prior_max_edges"],
    )
    mle = MleConfig(
        tol=settings["mle_tol"],
        max_iter=settings["mle_max_iter"],
        sieve_xi=settings["sieve_xi"],
        algorithm=settings["mle_algorithm"],
    )
    return PosteriorConfig(
        delta=settings["delta"], alpha=settings["alpha"], prior=prior, mle=mle
    )


def _mcmc_config(settings: dict[str, Any]) -> McmcConfig:
    return McmcConfig(
        seed=settings["seed"],
        n_iter=settings["n_iter"],
        burn_in=settings["burn_in"],
        thin=settings["thin"],
    )


def _warn_condition_p(settings: dict[str, Any], p: int) -> None:
    """The exponential prior's contraction theory needs a > 1 + m*delta,
    with m the sieve bound's exponent in p.  Warn, never fail."""
    if settings["prior_kind"] != "exponential":
        return
    xi = settings["sieve_xi"]
    m = math.log(xi) / math.log(p) if (xi is not None and p > 1) else 0.0
    bound = 1.0 + m * settings["delta"]
    if settings["prior_a"] <= bound:
        print(
            f"warning: exponential prior coefficient a={settings['prior_a']} "
            f"is not above 1 + m*delta = {bound:.4g}; posterior contraction "
            "guarantees may not apply",
            file=sys.stderr,
        )


def _workers(args: argparse.Namespace) -> int:
    if getattr(args, "workers", None) is not None:
        return max(1, args.workers)
    env = os.environ.get("EGWISH_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"EGWISH_WORKERS must be an integer, got {env!r}") from exc
    return 1


def _write_manifest(
    out_dir: Path, command: str, params: dict[str, Any], wall_time_ns: int
) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "params": params,
        "wall_time_ns": wall_time_ns,
    }
    (out_dir / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _ensure_out(path_str: str) -> Path:
    out = Path(path_str)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_degree_rank_csv(dp, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "kind", "value", "probability"])
        if dp is None:
            return
        for v, dist in enumerate(dp.degree_dists):
            for val in sorted(dist):
                writer.writerow([v, "degree", val, repr(dist[val])])
        for v, dist in enumerate(dp.rank_dists):
            for val in sorted(dist):
                writer.writerow([v, "rank", repr(val), repr(dist[val])])


# ---------------------------------------------------------------- simulate

def run_simulate(params: dict[str, Any], out_dir: Path) -> None:
    truth = make_model(params["model"], params["p"], seed=params["seed"])
    scov, x = sample_mvn(
        truth, params["n"], params["seed"] + 1, return_data=True
    )
    write_matrix_csv(truth.omega_star, out_dir / "truth_omega.csv")
    write_graph_json(truth.graph_star, out_dir / "truth_graph.json")
    write_matrix_csv(x, out_dir / "data.csv")
    write_matrix_csv(scov.sigma_hat, out_dir / "sigma_hat.csv")


def cmd_simulate(args: argparse.Namespace) -> int:
    out = _ensure_out(args.out)
    params = {"model": args.model, "p": args.p, "n": args.n, "seed": args.seed}
    t0 = time.perf_counter_ns()
    run_simulate(params, out)
    _write_manifest(out, "simulate", params, time.perf_counter_ns() - t0)
    return EXIT_OK


# --------------------------------------------------------------------- fit

def _load_scov(params: dict[str, Any]) -> SampleCov:
    if params.get("sigma"):
        if not params.get("n_obs"):
            raise UsageError("--sigma input requires --n-obs")
        try:
            s = read_matrix_csv(params["sigma"])
        except ValueError as exc:
            raise DataError(str(exc)) from exc
        if s.shape[0] != s.shape[1]:
            raise DataError(f"covariance must be square, got {s.shape}")
        if s.shape[0] < 2:
            raise DataError("need at least two variables")
        try:
            return SampleCov(sigma_hat=s, n=params["n_obs"])
        except (ValueError, DimensionMismatch) as exc:
            raise DataError(str(exc)) from exc
    try:
        x = read_matrix_csv(params["data"])
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if x.shape[1] < 2:
        raise DataError(f"need at least two variables, got {x.shape[1]}")
    try:
        return sample_cov_from_data(
            x, center=params["center"], standardize=params["standardize"]
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def run_fit(params: dict[str, Any], out_dir: Path) -> None:
    scov = _load_scov(params)
    _warn_condition_p(params, scov.p)
    cfg = _posterior_config(params)
    mcmc = _mcmc_config(params)
    cache = ScoreCache(max_entries=params["cache_max"])
    chain = run_chain(scov, cfg, mcmc, cache=cache)

    write_chain_jsonl(chain, out_dir / "chain.jsonl")
    write_matrix_csv(chain.edge_freq, out_dir / "edge_freq.csv")
    mpm = median_probability_model(chain.edge_freq)
    write_graph_json(mpm, out_dir / "mpm_graph.json")
    dp = degree_posterior(chain) if chain.n_retained > 0 else None
    _write_degree_rank_csv(dp, out_dir / "degree_rank.csv")
    scored = [
        (sc.omega_hat.graph, sc)
        for sc in cache.values()
        if sc.omega_hat is not None
    ]
    write_scores_csv(scored, out_dir / "scores.csv")


def cmd_fit(args: argparse.Namespace) -> int:
    out = _ensure_out(args.out)
    settings = _resolve_settings(args)
    params = dict(settings)
    params.update(
        {
            "data": args.data,
            "sigma": args.sigma,
            "n_obs": args.n_obs,
        }
    )
    t0 = time.perf_counter_ns()
    run_fit(params, out)
    _write_manifest(out, "fit", params, time.perf_counter_ns() - t0)
    return EXIT_OK


# ------------------------------------------------------- normconst-bench

def random_bench_graph(p: int, seed: int, edge_prob: float = 0.1) -> Graph:
    """Random benchmark graph with at least one edge, deterministic in the
    seed."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    iu = np.triu_indices(p, k=1)
    for _ in range(100):
        mask = rng.random(iu[0].shape[0]) < edge_prob
        if mask.any():
            edges = {
                (int(i), int(j)) for i, j, keep in zip(iu[0], iu[1], mask) if keep
            }
            return Graph(p, frozenset(edges))
    raise EgwishError("failed to draw a nonempty benchmark graph")


def _bench_prepare(graph_kind: str, p: int, seed: int) -> tuple[Graph, np.ndarray]:
    """Benchmark instance for one p: a graph and the constrained MLE from
    seeded synthetic data (n = max(100, 3p) keeps the fit well posed).

    The band kind draws its data from the matching AR(2) truth so the
    centered scale matrix reflects a correctly specified model; with
    unrelated data the exact log constant can cross zero inside the delta
    sweep, which turns the relative-error column into a ratio with a
    vanishing denominator.  The random kind has no canonical truth and uses
    standard normal data.
    """
    n = max(100, 3 * p)
    if graph_kind == "ar2":
        g = band_graph(p, 2)
        scov = sample_mvn(make_model("ar2", p), n, seed + 31 * p + 1)
    else:
        g = random_bench_graph(p, seed + 17 * p)
        rng = np.random.Generator(np.random.Philox(key=seed + 31 * p + 1))
        x = rng.standard_normal((n, p))
        scov = SampleCov(sigma_hat=x.T @ x / n, n=n)
    est = fit_mle(scov, g, MleConfig(algorithm="newton"))
    return g, est.omega_hat


def _bench_cell(task: tuple) -> list[dict[str, Any]]:
    g, omega_hat, p, delta, methods, mc_samples, mc_seed = task
    d_scale = (delta - 2.0) * np.linalg.inv(omega_hat)
    d_scale = (d_scale + d_scale.T) / 2.0
    rows: list[dict[str, Any]] = []
    for method in methods:
        t0 = time.perf_counter_ns()
        if method == "analytic":
            est = analytic_log_norm(GWishartParams(delta, d_scale, g))
        elif method == "laplace":
            est = laplace_log_norm(delta - 2.0, omega_hat, g)
        elif method == "mc":
            est = mc_log_norm(
                GWishartParams(delta, d_scale, g),
                n_samples=mc_samples,
                seed=mc_seed,
            )
        else:
            raise UsageError(f"unknown method {method!r}")
        dt = time.perf_counter_ns() - t0
        rows.append(
            {
                "p": p,
                "delta": delta,
                "method": method,
                "log_value": est.log_value,
                "std_error": est.std_error,
                "n_samples": est.n_samples,
                "wall_time_ns": dt,
            }
        )
    return rows


def run_bench(params: dict[str, Any], out_dir: Path, workers: int = 1) -> None:
    methods = params["methods"]
    tasks = []
    for p in params["p_list"]:
        g, omega_hat = _bench_prepare(params["graph"], p, params["seed"])
        for di, delta in enumerate(params["delta_list"]):
            mc_seed = params["seed"] + 10007 * p + 101 * di
            tasks.append(
                (g, omega_hat, p, delta, methods, params["mc_samples"], mc_seed)
            )

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cell_rows = list(pool.map(_bench_cell, tasks))
    else:
        cell_rows = [_bench_cell(t) for t in tasks]

    reference = "analytic" if "analytic" in methods else (
        "mc" if "mc" in methods else None
    )
    all_rows: list[dict[str, Any]] = []
    for rows in cell_rows:
        ref_val = None
        if reference is not None:
            ref_val = next(r["log_value"] for r in rows if r["method"] == reference)
        for r in rows:
            if reference is not None and r["method"] != reference:
                r["re"] = abs(ref_val - r["log_value"]) / abs(ref_val)
                r["re_unreliable"] = int(abs(ref_val) < 1.0)
            else:
                r["re"] = ""
                r["re_unreliable"] = ""
            all_rows.append(r)

    with open(out_dir / "normconst.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "p",
                "delta",
                "graph",
                "method",
                "log_value",
                "std_error",
                "n_samples",
                "wall_time_ns",
                "re",
                "re_unreliable",
            ]
        )
        for r in all_rows:
            writer.writerow(
                [
                    r["p"],
                    repr(float(r["delta"])),
                    params["graph"],
                    r["method"],
                    repr(float(r["log_value"])),
                    repr(float(r["std_error"])),
                    r["n_samples"],
                    r["wall_time_ns"],
                    repr(float(r["re"])) if r["re"] != "" else "",
                    r["re_unreliable"],
                ]
            )

    for p in params["p_list"]:
        series = []
        for method in methods:
            sel = [r for r in all_rows if r["p"] == p and r["method"] == method]
            series.append(
                LineSeries(
                    label=method,
                    x=[r["delta"] for r in sel],
                    y=[r["log_value"] for r in sel],
                )
            )
        line_plot(
            series,
            out_dir / f"lognorm_p{p}.svg",
            title=f"log normalizing constant, p={p}",
            xlabel="delta",
            ylabel="log I",
        )
        re_series = []
        for method in methods:
            if method == reference:
                continue
            sel = [
                r
                for r in all_rows
                if r["p"] == p and r["method"] == method and r["re"] != ""
            ]
            if sel:
                re_series.append(
                    LineSeries(
                        label=method,
                        x=[r["delta"] for r in sel],
                        y=[r["re"] for r in sel],
                    )
                )
        if re_series:
            line_plot(
                re_series,
                out_dir / f"re_p{p}.svg",
                title=f"relative error vs {reference}, p={p}",
                xlabel="delta",
                ylabel="re",
            )
    time_series = []
    for method in methods:
        xs, ys = [], []
        for p in params["p_list"]:
            sel = [r for r in all_rows if r["p"] == p and r["method"] == method]
            xs.append(p)
            ys.append(np.mean([r["wall_time_ns"] for r in sel]) / 1e9)
        time_series.append(LineSeries(label=method, x=xs, y=ys))
    line_plot(
        time_series,
        out_dir / "time_vs_p.svg",
        title="mean wall time per evaluation",
        xlabel="p",
        ylabel="seconds",
    )


def cmd_bench(args: argparse.Namespace) -> int:
    out = _ensure_out(args.out)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("analytic", "laplace", "mc"):
            raise UsageError(f"unknown method {m!r}")
    if not methods:
        raise UsageError("no methods requested")
    if "mc" in methods and args.mc_samples < 1000:
        raise UsageError("--mc-samples must be at least 1000")
    params = {
        "graph": args.graph,
        "p_list": args.p_list,
        "delta_list": args.delta_list,
        "methods": methods,
        "mc_samples": args.mc_samples,
        "seed": args.seed,
    }
    workers = _workers(args)
    t0 = time.perf_counter_ns()
    run_bench(params, out, workers=workers)
    _write_manifest(out, "normconst-bench", params, time.perf_counter_ns() - t0)
    return EXIT_OK


# --------------------------------------------------------------- replicate

def _replicate_one(task: tuple) -> ReplicationRow:
    params, rep = task
    truth = make_model(params["model"], params["p"], seed=params["seed"])
    data_seed = params["seed"] + 1000 * rep + 1
    chain_seed = params["seed"] + 1000 * rep + 2
    scov = sample_mvn(truth, params["n"], data_seed)
    cfg = _posterior_config(params)
    mcmc = McmcConfig(
        seed=chain_seed,
        n_iter=params["n_iter"],
        burn_in=params["burn_in"],
        thin=params["thin"],
    )
    chain = run_chain(scov, cfg, mcmc, cache=ScoreCache(params["cache_max"]))
    mpm = median_probability_model(chain.edge_freq)
    sp, se, mcc = sp_se_mcc(confusion(mpm, truth.graph_star))
    return ReplicationRow(
        model=params["model"],
        p=params["p"],
        n=params["n"],
        delta=params["delta"],
        rep=rep,
        sp=sp,
        se=se,
        mcc=mcc,
    )


def run_replicate(params: dict[str, Any], out_dir: Path, workers: int = 1) -> None:
    _warn_condition_p(params, params["p"])
    tasks = [(params, rep) for rep in range(params["reps"])]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_replicate_one, tasks))
    else:
        rows = [_replicate_one(t) for t in tasks]
    write_replication_csv(rows, out_dir / "replications.csv")


def cmd_replicate(args: argparse.Namespace) -> int:
    if args.reps < 1:
        raise UsageError(f"reps must be at least 1, got {args.reps}")
    out = _ensure_out(args.out)
    settings = _resolve_settings(args)
    params = dict(settings)
    params.update(
        {"model": args.model, "p": args.p, "n": args.n, "reps": args.reps}
    )
    workers = _workers(args)
    t0 = time.perf_counter_ns()
    run_replicate(params, out, workers=workers)
    _write_manifest(out, "replicate", params, time.perf_counter_ns() - t0)
    return EXIT_OK


# ------------------------------------------------------------------- rerun

def cmd_rerun(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.manifest).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read manifest {args.manifest}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed manifest {args.manifest}: {exc}") from exc
    command = doc.get("command")
    params = doc.get("params")
    if not isinstance(params, dict) or command not in (
        "simulate",
        "fit",
        "normconst-bench",
        "replicate",
    ):
        raise DataError(f"manifest {args.manifest} is not a recognized run record")
    out = _ensure_out(args.out)
    workers = _workers(args)
    t0 = time.perf_counter_ns()
    if command == "simulate":
        run_simulate(params, out)
    elif command == "fit":
        run_fit(params, out)
    elif command == "normconst-bench":
        run_bench(params, out, workers=workers)
    else:
        run_replicate(params, out, workers=workers)
    _write_manifest(out, command, params, time.perf_counter_ns() - t0)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _add_scoring_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="flat key=value settings file")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--prior-kind", dest="prior_kind", choices=["bernoulli", "exponential"])
    sp.add_argument("--prior-q", dest="prior_q", type=float)
    sp.add_argument("--prior-a", dest="prior_a", type=float)
    sp.add_argument("--prior-max-edges", dest="prior_max_edges", type=int)
    sp.add_argument("--mle-tol", dest="mle_tol", type=float)
    sp.add_argument("--mle-max-iter", dest="mle_max_iter", type=int)
    sp.add_argument("--mle-algorithm", dest="mle_algorithm", choices=["ips", "newton"])
    sp.add_argument("--sieve-xi", dest="sieve_xi", type=float)
    sp.add_argument("--n-iter", dest="n_iter", type=int)
    sp.add_argument("--burn-in", dest="burn_in", type=int)
    sp.add_argument("--thin", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--cache-max", dest="cache_max", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egwish",
        description="Structure learning for Gaussian precision matrices "
        "via empirically centered G-Wishart posteriors.",
    )
    parser.add_argument("--version", action="version", version=f"egwish {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate ground truth and data")
    sp.add_argument("--model", required=True, choices=["ar1", "ar2", "star", "random"])
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="run the graph sampler on data")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="n-by-p raw data CSV")
    src.add_argument("--sigma", help="precomputed p-by-p covariance CSV")
    sp.add_argument("--n-obs", dest="n_obs", type=int, help="sample size behind --sigma")
    sp.add_argument("--no-center", dest="no_center", action="store_true")
    sp.add_argument("--standardize", dest="do_standardize", action="store_true")
    _add_scoring_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser(
        "normconst-bench", help="benchmark normalizing-constant methods"
    )
    sp.add_argument("--graph", required=True, choices=["ar2", "random"])
    sp.add_argument("--p-list", dest="p_list", type=_int_list, required=True)
    sp.add_argument("--delta-list", dest="delta_list", type=_float_list, required=True)
    sp.add_argument(
        "--methods", required=True, help="comma list from analytic,laplace,mc"
    )
    sp.add_argument("--mc-samples", dest="mc_samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("replicate", help="replicated simulate+fit study")
    sp.add_argument("--model", required=True, choices=["ar1", "ar2", "star", "random"])
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, required=True)
    sp.add_argument("--workers", type=int)
    _add_scoring_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_replicate)

    sp = sub.add_parser("rerun", help="replay a manifest bit-exactly")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_rerun)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"egwish: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"egwish: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DimensionMismatch as exc:
        print(f"egwish: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"egwish: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EgwishError as exc:
        print(f"egwish: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"egwish: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
