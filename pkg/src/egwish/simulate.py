"""Ground-truth precision matrices and Gaussian data for the four
simulation models: an AR(1) inverse (path support, standardized), an AR(2)
band, a hub star, and a random sparse matrix conditioned to have condition
number p and unit diagonal."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DegenerateDraw, NotPD
from .estimation import SampleCov, _is_pd, _spd_inverse
from .graph import Graph, band_graph, path_graph, star_graph

ModelId = Literal["ar1", "ar2", "star", "random"]


@dataclass(frozen=True)
class SimulationTruth:
    """A ground-truth precision matrix with its exact support graph.  seed
    is set only for the random model, whose draw it determines."""

    omega_star: np.ndarray
    graph_star: Graph
    model_id: ModelId
    p: int
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        om = np.asarray(self.omega_star, dtype=np.float64)
        if om.shape != (self.p, self.p):
            raise ValueError(f"omega_star must be {self.p}x{self.p}, got {om.shape}")
        if not np.array_equal(om, om.T):
            raise ValueError("omega_star must be exactly symmetric")
        adj = self.graph_star.adjacency()
        off = ~np.eye(self.p, dtype=bool)
        if np.any(om[off & (adj == 0)] != 0.0):
            raise ValueError("omega_star must vanish exactly off the support graph")
        if np.any(om[off & (adj == 1)] == 0.0):
            raise ValueError("omega_star must be nonzero on every edge of the graph")
        if not _is_pd(om):
            raise NotPD("omega_star must be positive definite")


def _standardize(m: np.ndarray) -> np.ndarray:
    """Symmetric rescaling to exact unit diagonal; idempotent."""
    d = np.sqrt(np.diag(m))
    out = m / np.outer(d, d)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


def model_ar1(p: int) -> SimulationTruth:
    """Invert the AR(1) covariance 0.7^|i-j| and standardize the result.

    The inverse is tridiagonal in closed form; inversion noise beyond the
    first off-diagonal stays below 1e-10 and is truncated to exact zero so
    the support is exactly the path graph.
    """
    if p < 2:
        raise ValueError(f"need p >= 2, got {p}")
    idx = np.arange(p)
    sigma = 0.7 ** np.abs(idx[:, None] - idx[None, :])
    omega = _spd_inverse(sigma)
    far = np.abs(idx[:, None] - idx[None, :]) > 1
    if np.max(np.abs(omega[far]), initial=0.0) > 1e-10:
        raise NotPD("AR(1) inversion produced unexpectedly large far entries")
    omega[far] = 0.0
    omega = _standardize(omega)
    return SimulationTruth(
        omega_star=omega, graph_star=path_graph(p), model_id="ar1", p=p
    )


def model_ar2(p: int) -> SimulationTruth:
    """Pentadiagonal precision: unit diagonal, 0.5 on the first band and
    0.25 on the second."""
    if p < 3:
        raise ValueError(f"need p >= 3, got {p}")
    omega = np.eye(p)
    idx = np.arange(p)
    gap = np.abs(idx[:, None] - idx[None, :])
    omega[gap == 1] = 0.5
    omega[gap == 2] = 0.25
    if not _is_pd(omega):
        raise NotPD("AR(2) band matrix is not positive definite at this size")
    return SimulationTruth(
        omega_star=omega, graph_star=band_graph(p, 2), model_id="ar2", p=p
    )


def model_star(p: int) -> SimulationTruth:
    """Hub precision: unit diagonal, 0.1 between vertex 0 and every other
    vertex, zero elsewhere.  Positive definite up to p = 100."""
    if p < 2:
        raise ValueError(f"need p >= 2, got {p}")
    omega = np.eye(p)
    omega[0, 1:] = 0.1
    omega[1:, 0] = 0.1
    if not _is_pd(omega):
        raise NotPD(f"star precision loses positive definiteness at p={p}")
    return SimulationTruth(
        omega_star=omega, graph_star=star_graph(p), model_id="star", p=p
    )


def model_random(p: int, seed: int) -> SimulationTruth:
    """Random sparse precision: each off-diagonal pair carries 0.5 with
    probability 0.05, a ridge tau is added so the condition number equals
    exactly p, then the matrix is standardized to unit diagonal.  An
    all-zero draw is resampled up to 100 times before giving up."""
    if p < 2:
        raise ValueError(f"need p >= 2, got {p}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    iu = np.triu_indices(p, k=1)
    for _ in range(100):
        mask = rng.random(iu[0].shape[0]) < 0.05
        if not mask.any():
            continue
        m = np.zeros((p, p))
        m[iu] = 0.5 * mask
        m = m + m.T
        evals = np.linalg.eigvalsh(m)
        tau = (evals[-1] - p * evals[0]) / (p - 1)
        omega = m + tau * np.eye(p)
        omega = _standardize(omega)
        edges = {
            (int(i), int(j)) for i, j, keep in zip(iu[0], iu[1], mask) if keep
        }
        return SimulationTruth(
            omega_star=omega,
            graph_star=Graph(p, frozenset(edges)),
            model_id="random",
            p=p,
            seed=seed,
        )
    raise DegenerateDraw("all 100 attempts drew an empty support")


def make_model(model_id: str, p: int, seed: int | None = None) -> SimulationTruth:
    """Dispatch on the model identifier; the random model requires a seed."""
    if model_id == "ar1":
        return model_ar1(p)
    if model_id == "ar2":
        return model_ar2(p)
    if model_id == "star":
        return model_star(p)
    if model_id == "random":
        if seed is None:
            raise ValueError("the random model requires a seed")
        return model_random(p, seed)
    raise ValueError(f"unknown model {model_id!r}")


def sample_mvn(
    truth: SimulationTruth, n: int, seed: int, return_data: bool = False
) -> SampleCov | tuple[SampleCov, np.ndarray]:
    """Draw n iid mean-zero Gaussian vectors with precision omega_star and
    return S = X'X / n (uncentered: the model has known zero mean), plus the
    raw data when asked.  Deterministic given the seed."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    sigma = _spd_inverse(truth.omega_star)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NotPD("covariance of the truth is not positive definite") from exc
    rng = np.random.Generator(np.random.Philox(key=seed))
    x = rng.standard_normal((n, truth.p)) @ chol.T
    scov = SampleCov(sigma_hat=x.T @ x / n, n=n)
    return (scov, x) if return_data else scov
