"""Ground-truth generators and the Gaussian sampler."""

from __future__ import annotations

import numpy as np
import pytest

from egwish import (
    DegenerateDraw,
    Graph,
    NotPD,
    SimulationTruth,
    band_graph,
    complete_graph,
    fit_mle,
    is_decomposable,
    make_model,
    model_ar1,
    model_ar2,
    model_random,
    model_star,
    path_graph,
    sample_mvn,
    star_graph,
)

ALL_MODELS = [
    lambda: model_ar1(6),
    lambda: model_ar2(6),
    lambda: model_star(6),
    lambda: model_random(6, seed=42),
]


def support_graph(omega: np.ndarray, tol: float = 1e-12) -> Graph:
    p = omega.shape[0]
    edges = [
        (i, j) for i in range(p) for j in range(i + 1, p) if abs(omega[i, j]) > tol
    ]
    return Graph(p, edges)


class TestAr1:
    def test_pre_standardization_closed_form(self):
        # Direct inversion oracle: the AR(1) inverse is tridiagonal with
        # interior diagonal (1+0.49)/0.51 and off-diagonal -0.7/0.51.
        idx = np.arange(3)
        sigma = 0.7 ** np.abs(idx[:, None] - idx[None, :])
        pre = np.linalg.inv(sigma)
        assert pre[1, 1] == pytest.approx(1.49 / 0.51, abs=1e-10)
        assert pre[0, 1] == pytest.approx(-0.7 / 0.51, abs=1e-10)
        assert pre[0, 0] == pytest.approx(1.0 / 0.51, abs=1e-10)
        assert abs(pre[0, 2]) < 1e-10

    def test_standardized_matches_direct_inverse(self):
        truth = model_ar1(5)
        idx = np.arange(5)
        pre = np.linalg.inv(0.7 ** np.abs(idx[:, None] - idx[None, :]))
        d = np.sqrt(np.diag(pre))
        expect = pre / np.outer(d, d)
        off = np.abs(idx[:, None] - idx[None, :]) == 1
        assert np.allclose(truth.omega_star[off], expect[off], atol=1e-10)

    def test_unit_diagonal_exact(self):
        for p in (2, 5, 9):
            assert np.all(np.diag(model_ar1(p).omega_star) == 1.0)

    def test_support_is_path(self):
        for p in range(2, 11):
            t = model_ar1(p)
            assert t.graph_star == path_graph(p)
            assert support_graph(t.omega_star) == path_graph(p)

    def test_p_floor(self):
        with pytest.raises(ValueError):
            model_ar1(1)


class TestAr2:
    def test_first_row_entries(self):
        om = model_ar2(5).omega_star
        assert om[0, 0] == 1.0
        assert om[0, 1] == 0.5
        assert om[0, 2] == 0.25
        assert om[0, 3] == 0.0

    def test_band_support_and_decomposable(self):
        t = model_ar2(7)
        assert t.graph_star == band_graph(7, 2)
        assert is_decomposable(t.graph_star)[0]

    def test_positive_definite_at_benchmark_sizes(self):
        for p in (30, 50, 100):
            evals = np.linalg.eigvalsh(model_ar2(p).omega_star)
            assert evals[0] > 0

    def test_p_floor(self):
        with pytest.raises(ValueError):
            model_ar2(2)


class TestStar:
    def test_hub_row(self):
        om = model_star(4).omega_star
        assert np.array_equal(om[0], np.array([1.0, 0.1, 0.1, 0.1]))
        assert om[1, 2] == 0.0

    def test_graph_and_edge_count(self):
        for p in (2, 5, 12):
            t = model_star(p)
            assert t.graph_star == star_graph(p)
            assert t.graph_star.n_edges == p - 1

    def test_arrow_eigenvalue_formula(self):
        # lambda_min = 1 - 0.1*sqrt(p-1): positive well past the point where
        # diagonal dominance fails (p >= 11).
        for p in (11, 30, 50, 100):
            evals = np.linalg.eigvalsh(model_star(p).omega_star)
            assert evals[0] == pytest.approx(1.0 - 0.1 * np.sqrt(p - 1), abs=1e-10)
            assert evals[0] > 0


class TestRandom:
    def test_condition_number_equals_p(self):
        # Standardization is an exact global rescale here (constant pre-
        # standardization diagonal), so the condition number survives it.
        for seed in (1, 2, 3):
            t = model_random(30, seed=seed)
            assert np.linalg.cond(t.omega_star) == pytest.approx(30.0, abs=1e-6)

    def test_unit_diagonal(self):
        assert np.all(np.diag(model_random(20, seed=5).omega_star) == 1.0)

    def test_mean_edge_count(self):
        counts = [model_random(30, seed=s).graph_star.n_edges for s in range(200)]
        assert 17 <= np.mean(counts) <= 27

    def test_seed_determinism(self):
        a = model_random(15, seed=9)
        b = model_random(15, seed=9)
        assert np.array_equal(a.omega_star, b.omega_star)
        assert a.graph_star == b.graph_star

    def test_degenerate_draw(self):
        # p=2 has a single candidate pair; this seed leaves it empty on all
        # 100 internal attempts.
        with pytest.raises(DegenerateDraw):
            model_random(2, seed=295)


class TestTruthInvariants:
    def test_support_exact_and_pd(self):
        for build in ALL_MODELS:
            t = build()
            om = t.omega_star
            assert support_graph(om) == t.graph_star
            adj = t.graph_star.adjacency()
            off = ~np.eye(t.p, dtype=bool)
            assert np.all(om[off & (adj == 0)] == 0.0)
            assert np.linalg.eigvalsh(om)[0] > 0

    def test_standardization_idempotent(self):
        for build in (ALL_MODELS[0], ALL_MODELS[3]):
            om = build().omega_star
            d = np.sqrt(np.diag(om))
            again = om / np.outer(d, d)
            assert np.array_equal(again, om)

    def test_validation_rejects_inconsistent_support(self):
        om = np.eye(3)
        om[0, 1] = om[1, 0] = 0.2
        with pytest.raises(ValueError):
            SimulationTruth(omega_star=om, graph_star=Graph(3, []), model_id="star", p=3)
        with pytest.raises(ValueError):
            SimulationTruth(
                omega_star=np.eye(3), graph_star=path_graph(3), model_id="star", p=3
            )

    def test_validation_rejects_indefinite(self):
        om = np.eye(2)
        om[0, 1] = om[1, 0] = 1.5
        with pytest.raises(NotPD):
            SimulationTruth(
                omega_star=om, graph_star=complete_graph(2), model_id="star", p=2
            )


class TestMakeModel:
    def test_dispatch(self):
        assert make_model("ar1", 4).model_id == "ar1"
        assert make_model("ar2", 4).model_id == "ar2"
        assert make_model("star", 4).model_id == "star"
        assert make_model("random", 4, seed=1).model_id == "random"

    def test_random_requires_seed(self):
        with pytest.raises(ValueError):
            make_model("random", 4)

    def test_unknown_id(self):
        with pytest.raises(ValueError):
            make_model("glasso", 4)


class TestSampleMvn:
    def test_seed_bit_identical(self):
        t = model_ar1(5)
        a = sample_mvn(t, 40, seed=3)
        b = sample_mvn(t, 40, seed=3)
        assert np.array_equal(a.sigma_hat, b.sigma_hat)
        assert a.n == b.n == 40

    def test_mean_matches_sigma_star_clt_band(self):
        # E[sigma_hat] = inv(omega_star); 500 replications, 4-SE band with
        # Var(sigma_hat_ij) = (s_ii s_jj + s_ij^2)/n.
        t = model_ar1(3)
        sigma = np.linalg.inv(t.omega_star)
        n, reps = 50, 500
        acc = np.zeros((3, 3))
        for r in range(reps):
            acc += sample_mvn(t, n, seed=1000 + r).sigma_hat
        acc /= reps
        var = (np.outer(np.diag(sigma), np.diag(sigma)) + sigma**2) / n
        band = 4.0 * np.sqrt(var / reps)
        assert np.all(np.abs(acc - sigma) <= band)

    def test_raw_data_consistent(self):
        t = model_star(4)
        scov, x = sample_mvn(t, 25, seed=8, return_data=True)
        assert x.shape == (25, 4)
        assert np.allclose(scov.sigma_hat, x.T @ x / 25, atol=1e-14)

    def test_rank_one_flagged_downstream(self):
        t = model_ar1(3)
        scov = sample_mvn(t, 1, seed=2)
        assert np.linalg.matrix_rank(scov.sigma_hat) == 1
        with pytest.raises(NotPD):
            fit_mle(scov, complete_graph(3))

    def test_n_floor(self):
        with pytest.raises(ValueError):
            sample_mvn(model_ar1(3), 0, seed=1)
