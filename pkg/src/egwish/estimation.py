"""Graph-constrained Gaussian maximum likelihood for precision matrices.

Given a sample covariance S and a graph G, the MLE maximizes
log|Omega| - tr(S Omega) over symmetric positive definite Omega whose
off-diagonal support is contained in G.  At the optimum the inverse of the
estimate agrees with S on every edge and on the diagonal, and the estimate
is exactly zero elsewhere.

Two solvers are provided.  The default cycles through single-vertex and
single-edge blocks, matching the marginal covariance on each block exactly
per update (iterative proportional scaling); a rank-two inverse update keeps
the running inverse cheap.  The second solves the stationarity system by
Newton iterations on the free entries; it is used where a fit must be a
deterministic function of (S, G) alone and speed matters, e.g. inside the
graph sampler.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionMismatch, NotPD
from .graph import Graph, param_index


@dataclass(frozen=True)
class SampleCov:
    """Sample covariance S = X'X / n together with the sample size."""

    sigma_hat: np.ndarray
    n: int

    def __post_init__(self) -> None:
        s = np.asarray(self.sigma_hat, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise DimensionMismatch(f"covariance must be square, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("covariance contains non-finite entries")
        if not np.allclose(s, s.T, rtol=1e-7, atol=1e-10):
            raise ValueError("covariance must be symmetric")
        if self.n < 0:
            raise ValueError(f"sample size must be nonnegative, got {self.n}")
        object.__setattr__(self, "sigma_hat", (s + s.T) / 2.0)

    @property
    def p(self) -> int:
        return self.sigma_hat.shape[0]


@dataclass(frozen=True)
class MleConfig:
    """Solver settings.  max_iter counts sweeps for "ips" and Newton steps
    for "newton".  sieve_xi, when set, clips the eigenvalues of the result
    into [1/xi, xi] after solving (support re-zeroed, violation re-measured,
    not re-solved)."""

    tol: float = 1e-8
    max_iter: int = 500
    sieve_xi: float | None = None
    algorithm: Literal["ips", "newton"] = "ips"

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.sieve_xi is not None and self.sieve_xi < 1.0:
            raise ValueError("sieve_xi must be >= 1")
        if self.algorithm not in ("ips", "newton"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass(frozen=True)
class PrecisionEstimate:
    """A fitted precision matrix with convergence diagnostics.  graph is the
    support the fit was constrained to; max_violation is the largest absolute
    gap between inv(omega_hat) and S over the free positions (edges plus
    diagonal)."""

    omega_hat: np.ndarray
    graph: Graph
    converged: bool
    iterations: int
    max_violation: float


def _spd_inverse(m: np.ndarray) -> np.ndarray:
    try:
        c = cho_factor(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPD("matrix is not positive definite") from exc
    w = cho_solve(c, np.eye(m.shape[0]), check_finite=False)
    return (w + w.T) / 2.0

def _spd_logdet(m: np.ndarray) -> float:
    try:
        c = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPD("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def _is_pd(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def _free_index_arrays(g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx = param_index(g)
    ii = np.array([i for i, _ in idx.positions], dtype=np.intp)
    jj = np.array([j for _, j in idx.positions], dtype=np.intp)
    u = np.where(ii == jj, 1.0, 2.0)
    return ii, jj, u


def _violation(w: np.ndarray, s: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> float:
    return float(np.max(np.abs(w[ii, jj] - s[ii, jj])))


def _cold_start(s: np.ndarray) -> np.ndarray:
    return np.diag(1.0 / np.diag(s))


def _prepare_warm(warm: np.ndarray, g: Graph) -> np.ndarray | None:
    """Project a proposed initial point onto the support; reject if not PD."""
    ii, jj, _ = _free_index_arrays(g)
    om = np.zeros((g.p, g.p))
    om[ii, jj] = warm[ii, jj]
    om[jj, ii] = warm[ii, jj]
    return om if _is_pd(om) else None


def _ips_solve(
    s: np.ndarray, g: Graph, cfg: MleConfig, omega: np.ndarray
) -> tuple[np.ndarray, bool, int, float]:
    p = g.p
    ii, jj, _ = _free_index_arrays(g)
    eye2 = np.eye(2)
    singles = [
        (np.array([v]), 1.0 / s[v, v]) for v in range(p)
    ]
    pairs = [
        (np.array(e), np.linalg.inv(s[np.ix_(e, e)])) for e in g.edge_list
    ]

    w = _spd_inverse(omega)
    violation = _violation(w, s, ii, jj)
    sweeps = 0
    while violation > cfg.tol and sweeps < cfg.max_iter:
        for c, s_cc_inv in singles:
            delta = s_cc_inv - 1.0 / w[c[0], c[0]]
            if delta == 0.0:
                continue
            omega[c[0], c[0]] += delta
            x = w[:, c[0]]
            m = delta / (1.0 + w[c[0], c[0]] * delta)
            w -= m * np.outer(x, x)
        for c, s_cc_inv in pairs:
            w_cc = w[np.ix_(c, c)]
            delta = s_cc_inv - np.linalg.inv(w_cc)
            omega[np.ix_(c, c)] += delta
            x = w[:, c]
            m = delta @ np.linalg.inv(eye2 + w_cc @ delta)
            w -= x @ m @ x.T
        sweeps += 1
        # Refresh the inverse exactly once per sweep so the convergence
        # check never relies on accumulated low-rank updates.
        w = _spd_inverse(omega)
        violation = _violation(w, s, ii, jj)
    return omega, violation <= cfg.tol, sweeps, violation


def _newton_solve(
    s: np.ndarray, g: Graph, cfg: MleConfig, omega: np.ndarray
) -> tuple[np.ndarray, bool, int, float]:
    p = g.p
    ii, jj, u = _free_index_arrays(g)
    s_free = s[ii, jj]

    def assemble(x: np.ndarray) -> np.ndarray:
        om = np.zeros((p, p))
        om[ii, jj] = x
        om[jj, ii] = x
        return om

    x = omega[ii, jj]
    omega = assemble(x)
    f_val = _spd_logdet(omega) - float(np.sum(s * omega))
    it = 0
    converged = False
    violation = np.inf
    while it < cfg.max_iter:
        w = _spd_inverse(omega)
        grad = u * (w[ii, jj] - s_free)
        violation = _violation(w, s, ii, jj)
        if violation <= cfg.tol:
            converged = True
            break
        q = curvature_matrix(omega, g, inverse=w)
        try:
            cq = cho_factor(q, lower=True, check_finite=False)
            step = cho_solve(cq, grad, check_finite=False)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(q + 1e-12 * np.eye(len(q)), grad)
        slope = float(grad @ step)
        t = 1.0
        for _ in range(60):
            x_new = x + t * step
            om_new = assemble(x_new)
            if _is_pd(om_new):
                f_new = _spd_logdet(om_new) - float(np.sum(s * om_new))
                if f_new >= f_val + 1e-4 * t * slope:
                    break
            t *= 0.5
        else:
            break
        x, omega, f_val = x_new, om_new, f_new
        it += 1
    return omega, converged, it, float(violation)


def curvature_matrix(
    omega: np.ndarray, g: Graph, inverse: np.ndarray | None = None
) -> np.ndarray:
    """Negative Hessian of the log-det-minus-trace kernel at omega, in the
    free coordinates ordered by param_index: entry (a, b) is
    tr(inv(omega) E_a inv(omega) E_b) with E_a the symmetric indicator of
    position a (a single one for diagonal positions, a symmetric pair of
    ones for edges).  Positive definite whenever omega is."""
    w = _spd_inverse(omega) if inverse is None else inverse
    ii, jj, u = _free_index_arrays(g)
    scale = np.outer(u, u) / 2.0
    q = scale * (
        w[np.ix_(ii, ii)] * w[np.ix_(jj, jj)] + w[np.ix_(ii, jj)] * w[np.ix_(jj, ii)]
    )
    return (q + q.T) / 2.0


def _apply_sieve(
    omega: np.ndarray, g: Graph, xi: float, s: np.ndarray
) -> tuple[np.ndarray, float]:
    vals, vecs = np.linalg.eigh(omega)
    clipped = np.clip(vals, 1.0 / xi, xi)
    if np.array_equal(clipped, vals):
        ii, jj, _ = _free_index_arrays(g)
        return omega, _violation(_spd_inverse(omega), s, ii, jj)
    om = vecs @ np.diag(clipped) @ vecs.T
    ii, jj, _ = _free_index_arrays(g)
    out = np.zeros_like(om)
    out[ii, jj] = om[ii, jj]
    out[jj, ii] = om[ii, jj]
    return out, _violation(_spd_inverse(out), s, ii, jj)


def fit_mle(
    scov: SampleCov,
    g: Graph,
    cfg: MleConfig | None = None,
    warm: np.ndarray | None = None,
) -> PrecisionEstimate:
    """Constrained precision MLE for the support of g.

    The sample covariance must be positive definite.  A warm start is
    projected onto the support of g and used only if still positive
    definite; otherwise the solver starts from diag(1/S_ii).  When the
    iteration budget runs out the best iterate is returned with
    converged=False rather than raising.
    """
    cfg = cfg or MleConfig()
    s = scov.sigma_hat
    if s.shape[0] != g.p:
        raise DimensionMismatch(
            f"covariance is {s.shape[0]}x{s.shape[0]} but graph has p={g.p}"
        )
    if not _is_pd(s):
        raise NotPD("sample covariance must be positive definite")

    omega0 = None
    if warm is not None:
        omega0 = _prepare_warm(np.asarray(warm, dtype=np.float64), g)
    if omega0 is None:
        omega0 = _cold_start(s)

    solver = _ips_solve if cfg.algorithm == "ips" else _newton_solve
    omega, converged, iters, violation = solver(s, g, cfg, omega0)

    if cfg.sieve_xi is not None:
        omega, violation = _apply_sieve(omega, g, cfg.sieve_xi, s)

    return PrecisionEstimate(
        omega_hat=omega,
        graph=g,
        converged=converged,
        iterations=iters,
        max_violation=violation,
    )


def kkt_violation(omega: np.ndarray, scov: SampleCov, g: Graph) -> float:
    """Largest absolute gap between inv(omega) and S over edges plus diagonal."""
    ii, jj, _ = _free_index_arrays(g)
    return _violation(_spd_inverse(omega), scov.sigma_hat, ii, jj)


def log_likelihood(omega: np.ndarray, scov: SampleCov) -> float:
    """Gaussian log-likelihood of n observations summarized by S at the
    precision matrix omega: -(np/2) log(2 pi) + (n/2)(log|omega| - tr(S omega)).
    Zero observations give exactly zero."""
    omega = np.asarray(omega, dtype=np.float64)
    s = scov.sigma_hat
    if omega.shape != s.shape:
        raise DimensionMismatch(
            f"precision is {omega.shape} but covariance is {s.shape}"
        )
    if scov.n == 0:
        return 0.0
    p = s.shape[0]
    logdet = _spd_logdet(omega)
    trace = float(np.sum(s * omega))
    n = scov.n
    return float(-0.5 * n * p * np.log(2.0 * np.pi) + 0.5 * n * (logdet - trace))


def log_det_minus_trace(omega: np.ndarray, center: np.ndarray) -> float:
    """log|omega| - tr(inv(center) omega); maximized over the positive
    definite cone at omega = center, where it equals log|center| - p."""
    omega = np.asarray(omega, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    if omega.shape != center.shape:
        raise DimensionMismatch(
            f"shapes differ: {omega.shape} vs {center.shape}"
        )
    try:
        c = cho_factor(center, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPD("center must be positive definite") from exc
    trace = float(np.trace(cho_solve(c, omega, check_finite=False)))
    return _spd_logdet(omega) - trace


def sample_cov_from_data(
    x: np.ndarray, center: bool = True, standardize: bool = False
) -> SampleCov:
    """Build S = X'X / n from an n-by-p data matrix, optionally centering
    columns (on by default) and rescaling them to unit standard deviation."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"data must be 2-d, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite entries")
    n = x.shape[0]
    if center:
        x = x - x.mean(axis=0, keepdims=True)
    if standardize:
        sd = x.std(axis=0, ddof=0, keepdims=True)
        if np.any(sd == 0):
            raise ValueError("cannot standardize a constant column")
        x = x / sd
    return SampleCov(sigma_hat=x.T @ x / n, n=n)
