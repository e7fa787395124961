"""Metropolis-Hastings over graph space with single-edge-flip proposals.

Each step picks one of the p(p-1)/2 vertex pairs uniformly at random, flips
that edge, and accepts with probability min(1, exp(score' - score)).  The
proposal is symmetric, so the stationary distribution is the exp-normalized
graph score.  An add/remove proposal (choose a direction, then a uniform
candidate) is available as a variant; it is not symmetric at boundary
states and carries the matching Hastings correction.

Every proposal's score comes from a deterministic fit of that graph alone,
so a score cache changes speed but never the trajectory: a chain run with
and without the cache is bit-identical.  Exactly one pair index and one
uniform are consumed per step (plus one direction draw for the add/remove
variant), whatever the accept/reject outcome, so trajectories are also
reproducible across configurations that differ only in caching.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, Optional, Union

import numpy as np
from scipy.stats import rankdata

from .errors import DimensionMismatch, EgwishError, EmptyChain
from .estimation import PrecisionEstimate, SampleCov, fit_mle
from .graph import Graph, empty_graph, flip_edge, pair_from_index, pair_index
from .posterior import GraphScore, PosteriorConfig, ScoreCache, score_graph

InitSpec = Union[Literal["empty"], tuple, Graph]


@dataclass(frozen=True)
class McmcConfig:
    """Chain settings.  n_iter counts all steps including burn-in; samples
    are recorded from step burn_in onward, every thin-th step.  init is
    "empty", ("random", q0) for an independent Bernoulli(q0) starting graph,
    or an explicit Graph."""

    seed: int
    n_iter: int = 20_000
    burn_in: int = 4_000
    thin: int = 1
    init: InitSpec = "empty"

    def __post_init__(self) -> None:
        # n_iter == burn_in is allowed: it yields a legal, empty sample set.
        if not self.n_iter >= self.burn_in >= 0:
            raise ValueError(
                f"need n_iter >= burn_in >= 0, got {self.n_iter} and {self.burn_in}"
            )
        if self.thin < 1:
            raise ValueError(f"thin must be at least 1, got {self.thin}")
        if isinstance(self.init, str):
            if self.init != "empty":
                raise ValueError(f"unknown init {self.init!r}")
        elif isinstance(self.init, tuple):
            if (
                len(self.init) != 2
                or self.init[0] != "random"
                or not 0.0 < float(self.init[1]) < 1.0
            ):
                raise ValueError(f"random init must be ('random', q0), got {self.init!r}")
        elif not isinstance(self.init, Graph):
            raise ValueError(f"init must be 'empty', ('random', q0), or a Graph")


@dataclass(frozen=True)
class ChainResult:
    """Recorded post-burn-in states of one chain.

    Parallel arrays describe the retained samples; graphs maps each distinct
    graph hash to its Graph.  edge_freq holds marginal edge-inclusion
    frequencies over the retained samples (all zero when none were
    retained).  acceptance_rate counts accepted proposals over all n_iter
    steps, burn-in included.
    """

    p: int
    sample_iters: np.ndarray
    sample_hashes: tuple[str, ...]
    sample_sizes: np.ndarray
    sample_log_scores: np.ndarray
    sample_accepted: np.ndarray
    graphs: dict[str, Graph]
    acceptance_rate: float
    edge_freq: np.ndarray
    wall_time_ns: int

    @property
    def n_retained(self) -> int:
        return len(self.sample_hashes)

    def samples(self) -> list[tuple[str, int, float]]:
        """Retained samples as (graph_hash, edge count, log score) triples."""
        return [
            (h, int(s), float(ls))
            for h, s, ls in zip(
                self.sample_hashes, self.sample_sizes, self.sample_log_scores
            )
        ]


def _initial_graph(p: int, init: InitSpec, rng: np.random.Generator) -> Graph:
    if isinstance(init, Graph):
        if init.p != p:
            raise DimensionMismatch(f"init graph has p={init.p}, data has p={p}")
        return init
    if init == "empty":
        return empty_graph(p)
    q0 = float(init[1])
    edges = {
        pair_from_index(p, k)
        for k in range(p * (p - 1) // 2)
        if rng.random() < q0
    }
    return Graph(p, frozenset(edges))


def _kth_non_edge(g: Graph, k: int) -> tuple[int, int]:
    """The k-th absent pair in the canonical pair enumeration."""
    edge_idx = {pair_index(g.p, i, j) for i, j in g.edges}
    seen = 0
    for idx in range(g.max_edges):
        if idx in edge_idx:
            continue
        if seen == k:
            return pair_from_index(g.p, idx)
        seen += 1
    raise EgwishError("non-edge index out of range")


def run_chain(
    scov: SampleCov,
    cfg: PosteriorConfig,
    mcmc: McmcConfig,
    cache: ScoreCache | None | bool = None,
    score_fn: Optional[Callable[[Graph], float]] = None,
    proposal: Literal["uniform_pair", "add_remove"] = "uniform_pair",
    debug_check_interval: int | None = None,
    debug_tol: float | None = None,
) -> ChainResult:
    """Run one Metropolis-Hastings chain over graphs.

    cache=None builds a fresh unbounded per-chain cache, an explicit
    ScoreCache may be shared across chains, and cache=False disables caching
    entirely (same trajectory, recomputed scores).  score_fn, when given,
    replaces the posterior score with an arbitrary log-target over graphs
    (used by tests to force a flat target).  With debug_check_interval set,
    every so many steps the current state is refit warm-started from the
    previous state's estimate and compared against the canonical fit; a
    disagreement beyond debug_tol (default 1e4 * mle tol) raises.
    """
    p = scov.p
    if p < 2:
        raise DimensionMismatch(f"need at least two vertices, got p={p}")
    if cache is None:
        cache = ScoreCache()
    elif cache is False:
        cache = None
    if debug_tol is None:
        debug_tol = 1e4 * cfg.mle.tol

    def scored(g: Graph) -> tuple[float, PrecisionEstimate | None]:
        if score_fn is not None:
            return float(score_fn(g)), None
        if cache is not None:
            hit = cache.get(g)
            if hit is not None:
                return hit.log_score, hit.omega_hat
        sc: GraphScore = score_graph(g, scov, cfg)
        if cache is not None:
            cache.put(g, sc)
        return sc.log_score, sc.omega_hat

    t0 = time.perf_counter_ns()
    rng = np.random.Generator(np.random.Philox(key=mcmc.seed))
    npairs = p * (p - 1) // 2

    g = _initial_graph(p, mcmc.init, rng)
    log_s, est = scored(g)
    prev_est: PrecisionEstimate | None = None

    iters: list[int] = []
    hashes: list[str] = []
    sizes: list[int] = []
    log_scores: list[float] = []
    accepted_flags: list[bool] = []
    graphs: dict[str, Graph] = {}
    hash_counts: Counter[str] = Counter()
    n_accepted = 0

    for t in range(mcmc.n_iter):
        null_move = False
        if proposal == "uniform_pair":
            k = int(rng.integers(npairs))
            i, j = pair_from_index(p, k)
            g_new = flip_edge(g, i, j)
            log_correction = 0.0
        else:
            adding = rng.random() < 0.5
            s_edges = g.n_edges
            m = npairs - s_edges if adding else s_edges
            k = int(rng.integers(m)) if m > 0 else int(rng.integers(1))
            if m == 0:
                null_move = True
                g_new = g
                log_correction = 0.0
            elif adding:
                i, j = _kth_non_edge(g, k)
                g_new = flip_edge(g, i, j)
                log_correction = math.log(m) - math.log(s_edges + 1)
            else:
                i, j = g.edge_list[k]
                g_new = flip_edge(g, i, j)
                log_correction = math.log(m) - math.log(npairs - s_edges + 1)

        u = rng.random()
        accepted = False
        if not null_move:
            log_s_new, est_new = scored(g_new)
            log_ratio = log_s_new - log_s + log_correction
            if log_ratio >= 0.0 or (
                not math.isnan(log_ratio) and u < math.exp(log_ratio)
            ):
                prev_est = est
                g, log_s, est = g_new, log_s_new, est_new
                accepted = True
                n_accepted += 1

        if (
            debug_check_interval is not None
            and score_fn is None
            and t % debug_check_interval == 0
            and est is not None
        ):
            warm_source = prev_est.omega_hat if prev_est is not None else None
            refit = fit_mle(scov, g, cfg.mle, warm=warm_source)
            gap = float(np.max(np.abs(refit.omega_hat - est.omega_hat)))
            if gap > debug_tol:
                raise EgwishError(
                    f"warm and canonical fits differ by {gap:.3e} at step {t}"
                )

        if t >= mcmc.burn_in and (t - mcmc.burn_in) % mcmc.thin == 0:
            h = g.short_hash()
            if h not in graphs:
                graphs[h] = g
            hash_counts[h] += 1
            iters.append(t)
            hashes.append(h)
            sizes.append(g.n_edges)
            log_scores.append(log_s)
            accepted_flags.append(accepted)

    freq = np.zeros((p, p))
    if hashes:
        for h, c in hash_counts.items():
            freq += c * graphs[h].adjacency()
        freq /= len(hashes)

    return ChainResult(
        p=p,
        sample_iters=np.array(iters, dtype=np.int64),
        sample_hashes=tuple(hashes),
        sample_sizes=np.array(sizes, dtype=np.int64),
        sample_log_scores=np.array(log_scores, dtype=np.float64),
        sample_accepted=np.array(accepted_flags, dtype=bool),
        graphs=graphs,
        acceptance_rate=n_accepted / mcmc.n_iter if mcmc.n_iter > 0 else 0.0,
        edge_freq=freq,
        wall_time_ns=time.perf_counter_ns() - t0,
    )


def edge_inclusion(chain: ChainResult) -> np.ndarray:
    """Empirical edge-inclusion frequencies recomputed from the retained
    samples; agrees with chain.edge_freq."""
    if chain.n_retained == 0:
        raise EmptyChain("chain retained no samples")
    counts = Counter(chain.sample_hashes)
    freq = np.zeros((chain.p, chain.p))
    for h, c in counts.items():
        freq += c * chain.graphs[h].adjacency()
    return freq / chain.n_retained


def median_probability_model(freq: np.ndarray, threshold: float = 0.5) -> Graph:
    """Graph keeping exactly the edges whose inclusion frequency strictly
    exceeds the threshold; a frequency equal to the threshold is excluded."""
    freq = np.asarray(freq, dtype=np.float64)
    if freq.ndim != 2 or freq.shape[0] != freq.shape[1]:
        raise DimensionMismatch(f"frequency matrix must be square, got {freq.shape}")
    if not np.allclose(freq, freq.T, atol=1e-12):
        raise ValueError("frequency matrix must be symmetric")
    if freq.min() < 0.0 or freq.max() > 1.0:
        raise ValueError("frequencies must lie in [0, 1]")
    p = freq.shape[0]
    edges = {
        (i, j) for i in range(p) for j in range(i + 1, p) if freq[i, j] > threshold
    }
    return Graph(p, frozenset(edges))


@dataclass(frozen=True)
class DegreeRankPosterior:
    """Per-vertex empirical distributions over retained samples: degree_dists
    maps degrees to probabilities, rank_dists maps degree ranks (1 = highest
    degree, ties averaged) to probabilities."""

    degree_dists: tuple[dict[int, float], ...]
    rank_dists: tuple[dict[float, float], ...]


def degree_posterior(chain: ChainResult) -> DegreeRankPosterior:
    """Posterior distributions of each vertex's degree and of its rank by
    degree, across the retained samples."""
    if chain.n_retained == 0:
        raise EmptyChain("chain retained no samples")
    counts = Counter(chain.sample_hashes)
    total = chain.n_retained
    p = chain.p
    deg_acc: list[dict[int, float]] = [{} for _ in range(p)]
    rank_acc: list[dict[float, float]] = [{} for _ in range(p)]
    for h, c in counts.items():
        degs = chain.graphs[h].degrees()
        ranks = rankdata(-degs, method="average")
        w = c / total
        for v in range(p):
            d = int(degs[v])
            r = float(ranks[v])
            deg_acc[v][d] = deg_acc[v].get(d, 0.0) + w
            rank_acc[v][r] = rank_acc[v].get(r, 0.0) + w
    return DegreeRankPosterior(
        degree_dists=tuple(deg_acc), rank_dists=tuple(rank_acc)
    )


def write_chain_jsonl(chain: ChainResult, path: str | Path) -> None:
    """One JSON record per retained sample, in chain order."""
    with open(path, "w") as fh:
        for it, h, s, ls, acc in zip(
            chain.sample_iters,
            chain.sample_hashes,
            chain.sample_sizes,
            chain.sample_log_scores,
            chain.sample_accepted,
        ):
            fh.write(
                json.dumps(
                    {
                        "iter": int(it),
                        "graph_hash": h,
                        "size": int(s),
                        "log_score": float(ls),
                        "accepted": bool(acc),
                    }
                )
                + "\n"
            )
