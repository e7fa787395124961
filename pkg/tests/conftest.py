"""Shared fixtures and independent numerical oracles.

The oracles here deliberately avoid the package's own algorithms: the MLE
oracle runs a generic quasi-Newton optimizer over the free coordinates, and
the small normalizing constants come from adaptive quadrature.  Tests compare
the package against these independent routes.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.optimize
from hypothesis import settings

from egwish import Graph

settings.register_profile("suite", deadline=None, max_examples=40)
settings.load_profile("suite")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


def rand_spd(rng: np.random.Generator, p: int, jitter: float = 0.5) -> np.ndarray:
    """Random symmetric positive definite matrix with controlled conditioning."""
    a = rng.standard_normal((p, p))
    m = a @ a.T / p + jitter * np.eye(p)
    return 0.5 * (m + m.T)


def rand_graph(rng: np.random.Generator, p: int, q: float = 0.3) -> Graph:
    edges = [
        (i, j)
        for i in range(p)
        for j in range(i + 1, p)
        if rng.random() < q
    ]
    return Graph(p, edges)


def rand_omega_in_cone(rng: np.random.Generator, g: Graph) -> np.ndarray:
    """Random PD matrix with zeros exactly off the graph's support.

    Diagonal dominance keeps it PD without any projection step.
    """
    p = g.p
    m = np.eye(p)
    for i, j in g.edge_list:
        v = rng.uniform(-1.0, 1.0) * 0.9 / max(p - 1, 1)
        m[i, j] = v
        m[j, i] = v
    return m


def mle_oracle(sigma_hat: np.ndarray, g: Graph, tol: float = 1e-12) -> np.ndarray:
    """Graph-constrained precision MLE via BFGS on the free coordinates.

    Maximizes log|Omega| - tr(sigma_hat Omega) over matrices with zeros off
    the support; independent of the package's iterative solvers.
    """
    p = g.p
    edges = g.edge_list
    n_free = p + len(edges)

    def unpack(theta: np.ndarray) -> np.ndarray:
        w = np.zeros((p, p))
        w[np.arange(p), np.arange(p)] = theta[:p]
        for k, (i, j) in enumerate(edges):
            w[i, j] = theta[p + k]
            w[j, i] = theta[p + k]
        return w

    def negobj(theta: np.ndarray) -> tuple[float, np.ndarray]:
        w = unpack(theta)
        vals = np.linalg.eigvalsh(w)
        if vals[0] <= 1e-10:
            return np.inf, np.zeros(n_free)
        winv = np.linalg.inv(w)
        f = -(np.linalg.slogdet(w)[1] - float(np.sum(sigma_hat * w)))
        grad = np.empty(n_free)
        grad[:p] = -(np.diag(winv) - np.diag(sigma_hat))
        for k, (i, j) in enumerate(edges):
            grad[p + k] = -2.0 * (winv[i, j] - sigma_hat[i, j])
        return f, grad

    theta0 = np.concatenate(
        [1.0 / np.diag(sigma_hat), np.zeros(len(edges))]
    )
    res = scipy.optimize.minimize(
        negobj, theta0, jac=True, method="BFGS",
        options={"gtol": tol, "maxiter": 2000},
    )
    return unpack(res.x)


def scalar_log_norm_quad(delta: float, d: float) -> float:
    """log of the 1-D integral of w^((delta-2)/2) exp(-d w / 2) over (0, inf),
    evaluated by adaptive quadrature rather than the gamma-function closed
    form.  The integrand is rescaled by its peak value so large shapes do not
    underflow the tolerance."""
    b = delta - 2.0
    peak = max(b / d, 1.0 / d)
    log_fpeak = 0.5 * b * math.log(peak) - 0.5 * d * peak

    def f(w: float) -> float:
        if w <= 0.0:
            return 0.0
        return math.exp(0.5 * b * math.log(w) - 0.5 * d * w - log_fpeak)

    lo, _ = scipy.integrate.quad(f, 0.0, peak, epsabs=1e-13, epsrel=1e-12)
    hi, _ = scipy.integrate.quad(f, peak, np.inf, epsabs=1e-13, epsrel=1e-12)
    return math.log(lo + hi) + log_fpeak


def empty2_log_norm_quad(delta: float, d: np.ndarray) -> float:
    """Empty graph on two vertices: a diagonal precision makes the integral a
    product of scalar ones over the diagonal of the scale."""
    return scalar_log_norm_quad(delta, float(d[0, 0])) + scalar_log_norm_quad(
        delta, float(d[1, 1])
    )


def complete2_log_norm_quad(delta: float, d: np.ndarray) -> float:
    """Complete graph on two vertices by 3-D quadrature in Cholesky coordinates.

    The linear substitution M = D^{1/2} Omega D^{1/2} (Jacobian
    |D|^{(r+1)/2}, elementary change of variables) reduces the scale to the
    identity, so only the identity-scale integral is done numerically:
    Omega = L L^T with L = [[x, 0], [y, z]], x, z > 0, y real, area element
    4 x^2 z.  The integrand is rescaled by its peak value to keep the
    adaptive tolerances meaningful at large shapes.
    """
    d = np.asarray(d, dtype=np.float64)
    logdet_d = float(np.linalg.slogdet(d)[1])
    b = delta - 2.0
    diag_peak = math.sqrt(b) if b > 1.0 else 1.0
    log_fpeak = b * math.log(diag_peak * diag_peak) - diag_peak * diag_peak

    def f(z: float, y: float, x: float) -> float:
        if x <= 0.0 or z <= 0.0:
            return 0.0
        log_val = (
            b * (math.log(x) + math.log(z))
            - 0.5 * (x * x + y * y + z * z)
            - log_fpeak
        )
        return math.exp(log_val) * 4.0 * x * x * z

    lo = max(0.0, diag_peak - 12.0)
    hi = diag_peak + 12.0
    val, _ = scipy.integrate.tplquad(
        f, lo, hi, -12.0, 12.0, lo, hi, epsabs=1e-10, epsrel=1e-9
    )
    return math.log(val) + log_fpeak - 0.5 * (delta + 1.0) * logdet_d
