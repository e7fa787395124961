"""G-Wishart density and three backends for its normalizing constant.

The G-Wishart law with shape delta > 2 and inverse scale D on the cone of
positive definite matrices with support in a graph G has density
proportional to |M|^((delta-2)/2) exp(-tr(D M) / 2).  Its normalizing
constant I_G(delta, D) is available three ways here:

* analytic_log_norm: exact clique/separator factorization, decomposable
  graphs only;
* laplace_log_norm: Laplace approximation around the mode of the
  log-det-minus-trace kernel, any graph, deterministic;
* mc_log_norm: importance sampling in Cholesky coordinates following
  Atay-Kayis and Massam, any graph, returns a standard error.

All constants live in log space; linear-space values overflow long before
the problem sizes of interest.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln, multigammaln

from .errors import (
    DimensionMismatch,
    NotDecomposable,
    NotPD,
    SeedRequired,
    SupportViolation,
)
from .estimation import curvature_matrix, _spd_logdet  # noqa: F401
from .graph import Graph, clique_decomposition, is_decomposable


@dataclass(frozen=True)
class GWishartParams:
    """Shape delta, inverse scale D, and the support graph."""

    delta: float
    scale_d: np.ndarray
    graph: Graph

    def __post_init__(self) -> None:
        if not self.delta > 2:
            raise ValueError(f"delta must exceed 2, got {self.delta}")
        d = np.asarray(self.scale_d, dtype=np.float64)
        if d.ndim != 2 or d.shape != (self.graph.p, self.graph.p):
            raise DimensionMismatch(
                f"scale is {d.shape} but graph has p={self.graph.p}"
            )
        if not np.allclose(d, d.T, rtol=1e-7, atol=1e-10):
            raise ValueError("scale matrix must be symmetric")
        d = (d + d.T) / 2.0
        try:
            np.linalg.cholesky(d)
        except np.linalg.LinAlgError as exc:
            raise NotPD("scale matrix must be positive definite") from exc
        object.__setattr__(self, "scale_d", d)


@dataclass(frozen=True)
class NormConstEstimate:
    """A log normalizing constant and how it was obtained.  Deterministic
    methods report std_error 0 and n_samples 0."""

    log_value: float
    method: Literal["laplace", "monte_carlo", "analytic"]
    std_error: float = 0.0
    n_samples: int = 0

    def __post_init__(self) -> None:
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.method == "monte_carlo" and self.n_samples <= 0:
            raise ValueError("monte_carlo estimates must record n_samples > 0")


def _check_support(m: np.ndarray, g: Graph, tol: float = 1e-12) -> None:
    mask = g.adjacency().astype(bool)
    np.fill_diagonal(mask, True)
    off = np.abs(np.where(mask, 0.0, m))
    if off.size and off.max() > tol:
        i, j = np.unravel_index(int(np.argmax(off)), off.shape)
        raise SupportViolation(
            f"entry ({i},{j})={m[i, j]:.3e} is outside the graph support"
        )


def log_density(m: np.ndarray, params: GWishartParams, log_norm: float) -> float:
    """Log G-Wishart density of m given a precomputed log normalizing
    constant (use whichever backend fits the graph)."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != params.scale_d.shape:
        raise DimensionMismatch(f"matrix is {m.shape}, scale is {params.scale_d.shape}")
    _check_support(m, params.graph)
    logdet = _spd_logdet(m)
    trace = float(np.sum(params.scale_d * m))
    return 0.5 * (params.delta - 2.0) * logdet - 0.5 * trace - log_norm


def laplace_log_norm(b: float, omega_hat: np.ndarray, g: Graph) -> NormConstEstimate:
    """Laplace approximation of log of the integral of exp(b h(Omega) / 2)
    over the support cone, where h(Omega) = log|Omega| - tr(inv(omega_hat)
    Omega) peaks at omega_hat.  With b = delta - 2 this approximates the
    prior constant I_G(delta, (delta-2) inv(omega_hat)); with b = delta +
    alpha n - 2 the fractional-posterior constant with the same mode."""
    if b <= 0:
        raise ValueError(f"b must be positive, got {b}")
    omega_hat = np.asarray(omega_hat, dtype=np.float64)
    _check_support(omega_hat, g)
    p = g.p
    h_mode = _spd_logdet(omega_hat) - p
    q = curvature_matrix(omega_hat, g)
    try:
        c = np.linalg.cholesky(q)
        logdet_q = 2.0 * float(np.sum(np.log(np.diag(c))))
    except np.linalg.LinAlgError:
        warnings.warn(
            "curvature matrix not numerically PD; falling back to LU "
            "for its determinant",
            RuntimeWarning,
        )
        sign, logdet_q = np.linalg.slogdet(q)
        if sign <= 0:
            raise NotPD("curvature matrix has nonpositive determinant") from None
    dim = p + g.n_edges
    log_value = 0.5 * b * h_mode - 0.5 * logdet_q + 0.5 * dim * np.log(4.0 * np.pi / b)
    return NormConstEstimate(log_value=float(log_value), method="laplace")


def _log_full_constant(delta: float, d_sub: np.ndarray) -> float:
    """log I for a complete graph on r vertices: the (delta-2)/2 density
    exponent maps onto a standard Wishart with nu = delta + r - 1."""
    r = d_sub.shape[0]
    nu = delta + r - 1.0
    try:
        c = np.linalg.cholesky(d_sub)
    except np.linalg.LinAlgError as exc:
        raise NotPD("principal submatrix of the scale is not PD") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    return 0.5 * nu * r * np.log(2.0) + multigammaln(0.5 * nu, r) - 0.5 * nu * logdet


def analytic_log_norm(params: GWishartParams) -> NormConstEstimate:
    """Exact log I_G(delta, D) for decomposable graphs via the
    clique/separator factorization."""
    tree = clique_decomposition(params.graph)  # raises NotDecomposable
    d = params.scale_d
    total = 0.0
    for clique in tree.cliques:
        idx = sorted(clique)
        total += _log_full_constant(params.delta, d[np.ix_(idx, idx)])
    for sep in tree.separators:
        if not sep:
            continue
        idx = sorted(sep)
        total -= _log_full_constant(params.delta, d[np.ix_(idx, idx)])
    return NormConstEstimate(log_value=float(total), method="analytic")


def _upper_cholesky(d: np.ndarray) -> np.ndarray:
    """Upper triangular T with D = T T'; the Cholesky of D under reversed
    variable order."""
    rev = d[::-1, ::-1]
    low = np.linalg.cholesky(rev)
    return low[::-1, ::-1].copy()


def _mc_batch(
    rng: np.random.Generator,
    batch: int,
    delta: float,
    t: np.ndarray,
    g: Graph,
    perfect: bool,
) -> np.ndarray:
    """Log completion weights for one batch of draws.

    Free entries of the upper Cholesky factor Phi of M are driven by draws
    Psi = Phi T: diagonal entries psi_ii with psi_ii^2 chi-squared
    (delta + future-neighbor count), free off-diagonals standard normal.
    Non-free entries of Phi are forced by the zero constraints of the
    support; their induced psi values are the log weight.  Under a perfect
    ordering the forced entries vanish identically and the per-row system
    solves by a triangular solve over the free columns.
    """
    p = g.p
    nu = np.array(
        [sum(1 for u in g.neighbors(i) if u > i) for i in range(p)], dtype=np.float64
    )
    chi = rng.chisquare(delta + nu, size=(batch, p))
    psi_diag = np.sqrt(chi)
    edges = g.edge_list
    normals = rng.standard_normal(size=(batch, len(edges)))

    psi_free = {}
    for k, (i, j) in enumerate(edges):
        psi_free[(i, j)] = normals[:, k]

    phi = np.zeros((batch, p, p))
    log_w = np.zeros(batch)

    if perfect:
        for i in range(p):
            cols = [i] + [j for j in range(i + 1, p) if (i, j) in psi_free]
            rhs = np.empty((batch, len(cols)))
            rhs[:, 0] = psi_diag[:, i]
            for c, j in enumerate(cols[1:], start=1):
                rhs[:, c] = psi_free[(i, j)]
            t_sub = t[np.ix_(cols, cols)]
            # Phi[i, cols] @ t_sub = rhs  with t_sub upper triangular
            phi[:, i, cols] = solve_triangular(
                t_sub.T, rhs.T, lower=True, check_finite=False
            ).T
            non_free = [j for j in range(i + 1, p) if (i, j) not in psi_free]
            if non_free:
                induced = phi[:, i, i:] @ t[i:, non_free]
                log_w -= 0.5 * np.einsum("bk,bk->b", induced, induced)
    else:
        # Completed entries compound across rows; on large graphs a draw can
        # overflow, which means its weight underflows to zero, so non-finite
        # accumulators are mapped to log weight -inf rather than propagated.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for i in range(p):
                phi[:, i, i] = psi_diag[:, i] / t[i, i]
                for j in range(i + 1, p):
                    if (i, j) in psi_free:
                        acc = phi[:, i, i:j] @ t[i:j, j]
                        phi[:, i, j] = (psi_free[(i, j)] - acc) / t[j, j]
                    else:
                        if i > 0:
                            forced = -(
                                np.einsum("bk,bk->b", phi[:, :i, i], phi[:, :i, j])
                                / phi[:, i, i]
                            )
                        else:
                            forced = np.zeros(batch)
                        phi[:, i, j] = forced
                        induced = phi[:, i, i : j + 1] @ t[i : j + 1, j]
                        log_w -= 0.5 * induced**2
        log_w[~np.isfinite(log_w)] = -np.inf
    return log_w


def mc_log_norm(
    params: GWishartParams,
    n_samples: int = 10_000,
    seed: int | None = None,
    batch_size: int = 2_000,
    deterministic: bool = True,
) -> NormConstEstimate:
    """Importance-sampling estimate of log I_G(delta, D).

    Decomposable graphs are relabeled into a perfect elimination order
    first, which zeroes the forced Cholesky entries and shrinks the weight
    variance; the constant is invariant under the relabeling.  Draws come
    from a counter-based Philox stream keyed by the seed, one jump per
    batch, so estimates are reproducible for a fixed (seed, batch_size).
    """
    if n_samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {n_samples}")
    if seed is None:
        if deterministic:
            raise SeedRequired("deterministic Monte Carlo requires a seed")
        seed = int(np.random.SeedSequence().entropy % (2**63))

    g = params.graph
    d = params.scale_d
    decomp, peo = is_decomposable(g)
    if decomp and peo is not None:
        perm = np.array(peo, dtype=np.intp)
        pos = np.empty(g.p, dtype=np.intp)
        pos[perm] = np.arange(g.p)
        g_work = Graph(g.p, [(int(pos[i]), int(pos[j])) for i, j in g.edges])
        d_work = d[np.ix_(perm, perm)]
    else:
        g_work = g
        d_work = d

    t = _upper_cholesky(d_work)
    p = g.p
    s = g.n_edges
    delta = params.delta
    nu = np.array(
        [sum(1 for u in g_work.neighbors(i) if u > i) for i in range(p)],
        dtype=np.float64,
    )
    deg = g_work.degrees().astype(np.float64)
    log_const = (
        0.5 * (p * delta + s) * np.log(2.0)
        + 0.5 * s * np.log(2.0 * np.pi)
        + float(np.sum(gammaln(0.5 * (delta + nu))))
        - float(np.sum((delta + deg) * np.log(np.diag(t))))
    )

    count = 0
    total = 0.0
    total_sq = 0.0
    b_idx = 0
    while count < n_samples:
        batch = min(batch_size, n_samples - count)
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(b_idx))
        log_w = _mc_batch(rng, batch, delta, t, g_work, perfect=decomp)
        w = np.exp(log_w)
        total += float(w.sum())
        total_sq += float((w * w).sum())
        count += batch
        b_idx += 1

    mean_w = total / count
    if mean_w <= 0.0:
        return NormConstEstimate(
            log_value=-np.inf, method="monte_carlo", std_error=np.inf, n_samples=count
        )
    var_w = max(total_sq - count * mean_w**2, 0.0) / max(count - 1, 1)
    std_error = float(np.sqrt(var_w / count) / mean_w)
    return NormConstEstimate(
        log_value=float(log_const + np.log(mean_w)),
        method="monte_carlo",
        std_error=std_error,
        n_samples=count,
    )
