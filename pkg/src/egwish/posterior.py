"""Graph priors and the marginal posterior score of a graph.

The score of a graph G combines three pieces: the log prior over graphs,
the fractional log-likelihood alpha * log L_n evaluated at the constrained
MLE, and a dimension penalty ((p + |G|)/2) * log((delta-2)/(delta+alpha*n-2))
that is what survives after the two G-Wishart normalizing constants of the
posterior-to-prior ratio are Laplace-approximated at the shared mode: the
curvature determinants agree exactly and cancel.  Two slower scoring paths
(an explicit ratio of Laplace approximations, and a Monte Carlo ratio) are
kept for validation because they exercise the normalizing-constant code
end to end.

Scores are unnormalized: the sampler consumes only differences.
"""

from __future__ import annotations

import csv
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Optional

import numpy as np

from .errors import DimensionMismatch, EgwishError
from .estimation import (
    MleConfig,
    PrecisionEstimate,
    SampleCov,
    _spd_inverse,
    fit_mle,
    log_likelihood,
)
from .graph import Graph
from .gwishart import GWishartParams, laplace_log_norm, mc_log_norm


@dataclass(frozen=True)
class GraphPrior:
    """Edge-wise prior over graphs.

    kind "bernoulli": each of the p(p-1)/2 positions is an edge with
    probability q, optionally truncated to at most max_edges edges (graphs
    beyond the cap get prior zero).  kind "exponential": log-prior is
    -a * log(p) * |G|, penalizing each edge by a * log(p) nats.  Both are
    unnormalized.  With q = 0.5 the bernoulli prior is uniform; with
    a * log(p) = log((1-q)/q) the two kinds induce identical score
    differences between any pair of graphs.
    """

    kind: Literal["bernoulli", "exponential"] = "bernoulli"
    q: float = 0.45
    a: float = 1.0
    max_edges: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in ("bernoulli", "exponential"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"edge probability must be in (0,1), got {self.q}")
        if self.a <= 0.0:
            raise ValueError(f"exponential coefficient must be positive, got {self.a}")
        if self.max_edges is not None and self.max_edges < 0:
            raise ValueError(f"max_edges must be nonnegative, got {self.max_edges}")


@dataclass(frozen=True)
class PosteriorConfig:
    """Everything score_graph needs besides the data: the G-Wishart shape
    delta (> 2 so the prior mode exists), the likelihood discount alpha,
    the graph prior, and the MLE solver settings."""

    delta: float
    alpha: float = 0.99
    prior: GraphPrior = field(default_factory=GraphPrior)
    mle: MleConfig = field(default_factory=MleConfig)

    def __post_init__(self) -> None:
        if self.delta <= 2.0:
            raise ValueError(f"delta must exceed 2, got {self.delta}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")


@dataclass(frozen=True)
class GraphScore:
    """Unnormalized log marginal posterior of a graph, with its exact
    decomposition log_score = log_prior + log_lik_alpha + dim_penalty.
    omega_hat is None only when the prior is -inf and fitting was skipped."""

    log_score: float
    omega_hat: Optional[PrecisionEstimate]
    log_prior: float
    log_lik_alpha: float
    dim_penalty: float

    def __post_init__(self) -> None:
        total = self.log_prior + self.log_lik_alpha + self.dim_penalty
        if math.isfinite(total) and total != self.log_score:
            raise ValueError("log_score must equal the sum of its components")


def log_graph_prior(g: Graph, prior: GraphPrior) -> float:
    """Unnormalized log prior of a graph; -inf encodes truncation."""
    s = g.n_edges
    if prior.kind == "bernoulli":
        if prior.max_edges is not None and s > prior.max_edges:
            return -math.inf
        r_bar = g.max_edges
        return s * math.log(prior.q) + (r_bar - s) * math.log(1.0 - prior.q)
    return -prior.a * math.log(g.p) * s


def dimension_penalty(p: int, n_edges: int, delta: float, alpha: float, n: int) -> float:
    """((p + |G|)/2) * log((delta-2)/(delta+alpha*n-2)): the shape-ratio term
    left over when the posterior and prior constants are Laplace-approximated
    at the same mode and their curvature factors cancel."""
    return 0.5 * (p + n_edges) * math.log((delta - 2.0) / (delta + alpha * n - 2.0))


ScoreMethod = Literal["cancelled", "laplace_ratio", "mc_ratio"]


def score_graph(
    g: Graph,
    scov: SampleCov,
    cfg: PosteriorConfig,
    warm: PrecisionEstimate | np.ndarray | None = None,
    method: ScoreMethod = "cancelled",
    mc_samples: int = 10_000,
    mc_seed: int | None = None,
) -> GraphScore:
    """Score a graph against the data.

    The default "cancelled" path fits the constrained MLE (warm-started when
    a starting point is supplied) and assembles
    log_prior + alpha * log L_n(omega_hat) + dimension_penalty.  The
    "laplace_ratio" path instead evaluates the posterior-to-prior ratio of
    Laplace-approximated normalizing constants; it must agree with the
    default to roundoff and exists to cross-check the cancellation.  The
    "mc_ratio" path replaces the Laplace approximations with Monte Carlo
    estimates (mc_seed required) and is the slow, asymptotically exact
    reference.  Graphs with prior zero short-circuit without fitting.
    """
    if scov.p != g.p:
        raise DimensionMismatch(
            f"covariance is {scov.p}x{scov.p} but graph has p={g.p}"
        )
    lp = log_graph_prior(g, cfg.prior)
    if lp == -math.inf:
        return GraphScore(
            log_score=-math.inf,
            omega_hat=None,
            log_prior=-math.inf,
            log_lik_alpha=0.0,
            dim_penalty=0.0,
        )

    warm_omega = warm.omega_hat if isinstance(warm, PrecisionEstimate) else warm
    est = fit_mle(scov, g, cfg.mle, warm=warm_omega)
    n = scov.n
    ll_alpha = cfg.alpha * log_likelihood(est.omega_hat, scov)

    if method == "cancelled":
        dim_pen = dimension_penalty(g.p, g.n_edges, cfg.delta, cfg.alpha, n)
    elif method == "laplace_ratio":
        b_prior = cfg.delta - 2.0
        b_post = cfg.delta + cfg.alpha * n - 2.0
        lap_post = laplace_log_norm(b_post, est.omega_hat, g).log_value
        lap_prior = laplace_log_norm(b_prior, est.omega_hat, g).log_value
        total = (
            lp
            - 0.5 * cfg.alpha * n * g.p * math.log(2.0 * math.pi)
            + lap_post
            - lap_prior
        )
        dim_pen = total - lp - ll_alpha
    elif method == "mc_ratio":
        if mc_seed is None:
            raise ValueError("mc_seed is required for the mc_ratio scoring path")
        prior_params = GWishartParams(
            delta=cfg.delta,
            scale_d=(cfg.delta - 2.0) * _spd_inverse(est.omega_hat),
            graph=g,
        )
        post_params = conditional_posterior_params(est, scov, cfg)
        mc_post = mc_log_norm(post_params, n_samples=mc_samples, seed=mc_seed)
        mc_prior = mc_log_norm(prior_params, n_samples=mc_samples, seed=mc_seed + 1)
        total = (
            lp
            - 0.5 * cfg.alpha * n * g.p * math.log(2.0 * math.pi)
            + mc_post.log_value
            - mc_prior.log_value
        )
        dim_pen = total - lp - ll_alpha
    else:
        raise ValueError(f"unknown scoring method {method!r}")

    return GraphScore(
        log_score=lp + ll_alpha + dim_pen,
        omega_hat=est,
        log_prior=lp,
        log_lik_alpha=ll_alpha,
        dim_penalty=dim_pen,
    )


def conditional_posterior_params(
    est: PrecisionEstimate, scov: SampleCov, cfg: PosteriorConfig
) -> GWishartParams:
    """Parameters of the conditional posterior of the precision matrix given
    the graph: shape delta + alpha*n and inverse scale
    alpha*n*S + (delta-2)*inv(omega_hat).  Its mode is omega_hat itself."""
    if not est.converged:
        raise EgwishError("refusing to build posterior parameters from an unconverged fit")
    an = cfg.alpha * scov.n
    scale = an * scov.sigma_hat + (cfg.delta - 2.0) * _spd_inverse(est.omega_hat)
    return GWishartParams(
        delta=cfg.delta + an,
        scale_d=(scale + scale.T) / 2.0,
        graph=est.graph,
    )


class ScoreCache:
    """Thread-safe score cache keyed by the canonical graph encoding.

    Unbounded by default; with max_entries set, least-recently-used scores
    are evicted.  Scores are deterministic functions of the graph for fixed
    data and config, so last-writer-wins races are harmless.
    """

    def __init__(self, max_entries: int | None = None) -> None:
        if max_entries is not None and max_entries < 1:
            raise ValueError(f"max_entries must be at least 1, got {max_entries}")
        self.max_entries = max_entries
        self._lock = threading.Lock()
        self._data: OrderedDict[bytes, GraphScore] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def get(self, g: Graph) -> GraphScore | None:
        key = g.key_bytes()
        with self._lock:
            score = self._data.get(key)
            if score is None:
                self.misses += 1
                return None
            self._data.move_to_end(key)
            self.hits += 1
            return score

    def put(self, g: Graph, score: GraphScore) -> None:
        key = g.key_bytes()
        with self._lock:
            self._data[key] = score
            self._data.move_to_end(key)
            if self.max_entries is not None:
                while len(self._data) > self.max_entries:
                    self._data.popitem(last=False)

    def values(self) -> list[GraphScore]:
        """Cached scores, least recently touched first."""
        with self._lock:
            return list(self._data.values())

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)


def write_scores_csv(
    items: Iterable[tuple[Graph, GraphScore]], path: str | Path
) -> None:
    """Dump scored graphs to CSV, one row per graph, full double precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["graph_hash", "n_edges", "log_prior", "log_lik_alpha", "dim_penalty", "log_score"]
        )
        for g, sc in items:
            writer.writerow(
                [
                    g.short_hash(),
                    g.n_edges,
                    repr(float(sc.log_prior)),
                    repr(float(sc.log_lik_alpha)),
                    repr(float(sc.dim_penalty)),
                    repr(float(sc.log_score)),
                ]
            )
