import itertools
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pd, random_psd
from detkdpp.datasets import gaussian_mixture
from detkdpp.errors import DegenerateStepWarning, RankTooLarge, SingularKernel
from detkdpp.kernels import gaussian_kernel
from detkdpp.samplers import (
    GreedyState,
    LandmarkSet,
    das_select,
    deterministic_kdpp,
    greedy_select,
    log_elementary_symmetric,
    sample_dpp,
    sample_dpp_batch,
    sample_kdpp,
    sample_kdpp_batch,
    uniform_sample,
)
from detkdpp.spectral import EigenSystem, ridge_projector, sharp_projector, sym_eig
from oracles import (
    dense_greedy,
    dpp_subset_law,
    empirical_law,
    kdpp_subset_law,
    projection_residuals,
    residual_diagonal,
    total_variation,
)

DIAG4 = np.diag([4.0, 3.0, 2.0, 1.0])


class TestLandmarkSet:
    def test_csv_round_trip(self):
        L = LandmarkSet([3, 0, 7], "kdpp", seed=42)
        line = L.to_csv_line()
        assert line == "kdpp,42,3,3;0;7"
        back = LandmarkSet.from_csv_line(line)
        assert back.indices == (3, 0, 7) and back.seed == 42 and back.method == "kdpp"

    def test_csv_without_seed(self):
        assert LandmarkSet([1], "greedy_sharp").to_csv_line() == "greedy_sharp,,1,1"
        assert LandmarkSet.from_csv_line("greedy_sharp,,1,1").seed is None

    def test_count_mismatch(self):
        with pytest.raises(ValueError):
            LandmarkSet.from_csv_line("uniform,1,3,1;2")

    def test_distinct(self):
        with pytest.raises(ValueError):
            LandmarkSet([1, 1], "uniform")


class TestUniform:
    def test_full(self):
        assert sorted(uniform_sample(6, 6, seed=1)) == list(range(6))

    def test_frequencies(self):
        rng = np.random.default_rng(0)
        counts = Counter(tuple(sorted(uniform_sample(4, 2, rng))) for _ in range(40_000))
        assert len(counts) == 6
        for c in counts.values():
            assert abs(c / 40_000 - 1 / 6) < 0.01

    def test_seeded(self):
        first = uniform_sample(50, 7, seed=9)
        assert all(uniform_sample(50, 7, seed=9) == first for _ in range(100))

    def test_too_many(self):
        with pytest.raises(RankTooLarge):
            uniform_sample(3, 4)


class TestExactDPP:
    def test_zero_kernel_is_empty(self):
        for seed in range(20):
            assert sample_dpp(np.zeros((4, 4)), seed=seed).k == 0

    def test_rank_one_projector_limit(self):
        u = np.array([0.1, 0.7, 0.2, 0.5, 0.3])
        u /= np.linalg.norm(u)
        L = 1e12 * np.outer(u, u)
        draws = sample_dpp_batch(L, 40_000, seed=3)
        assert all(len(d) == 1 for d in draws)
        freq = np.bincount([int(d[0]) for d in draws], minlength=5) / 40_000
        np.testing.assert_allclose(freq, u**2, atol=0.01)

    def test_distribution_matches_enumeration(self, rng):
        L = random_psd(rng, 6)
        draws = sample_dpp_batch(L, 200_000, seed=11)
        assert total_variation(dpp_subset_law(L), empirical_law(draws)) < 0.01

    def test_size_equals_kept_eigenvectors(self, rng):
        # a projector-like L keeps every nonzero eigenvector
        V = np.linalg.qr(rng.standard_normal((8, 3)))[0]
        L = 1e14 * V @ V.T
        assert {len(d) for d in sample_dpp_batch(L, 500, seed=0)} == {3}

    def test_items_distinct_and_seeded(self, rng):
        L = random_psd(rng, 10, scale=3.0)
        a = sample_dpp_batch(L, 200, seed=5)
        b = sample_dpp_batch(L, 200, seed=5)
        for x, y in zip(a, b):
            assert len(set(x)) == len(x)
            np.testing.assert_array_equal(x, y)
        assert sample_dpp(L, seed=4) == sample_dpp(L, seed=4)


class TestKDPP:
    def test_esp_table(self):
        lam = np.array([2.0, 3.0, 5.0, 0.5])
        T = np.exp(log_elementary_symmetric(lam, 3))
        for r in range(4):
            for i in range(5):
                brute = sum(np.prod(c) for c in itertools.combinations(lam[:i], r))
                assert T[r, i] == pytest.approx(brute, rel=1e-12, abs=1e-300)

    def test_esp_large_spectrum_finite(self):
        T = log_elementary_symmetric(np.full(2000, 1e3), 400)
        assert np.isfinite(T[400, 2000])

    def test_identity_is_uniform(self):
        draws = sample_kdpp_batch(np.eye(4), 2, 60_000, seed=1)
        law = {C: 1 / 6 for C in itertools.combinations(range(4), 2)}
        emp = empirical_law(draws)
        assert all(abs(emp[C] - 1 / 6) < 0.01 for C in law)

    def test_distribution_matches_enumeration(self, rng):
        L = random_psd(rng, 5)
        draws = sample_kdpp_batch(L, 2, 200_000, seed=2)
        assert total_variation(kdpp_subset_law(L, 2), empirical_law(draws)) < 0.01

    def test_full_size(self, rng):
        L = random_pd(rng, 5)
        for seed in range(20):
            assert sorted(sample_kdpp(L, 5, seed=seed)) == list(range(5))

    def test_exact_size(self, rng):
        L = random_psd(rng, 12, rank=7)
        assert all(len(d) == 4 for d in sample_kdpp_batch(L, 4, 2_000, seed=0))
        for k in range(1, 8):
            assert sample_kdpp(L, k, seed=k).k == k

    def test_rank_check(self, rng):
        with pytest.raises(RankTooLarge):
            sample_kdpp(random_psd(rng, 6, rank=3), 4, seed=0)


def _greedy_trace(P, k):
    state = GreedyState(P)
    snaps = [state.p.copy()]
    for _ in range(k):
        state.step()
        snaps.append(state.p.copy())
    return state, snaps


class TestGreedy:
    def test_diagonal_sharp(self):
        L = greedy_select(sharp_projector(sym_eig(DIAG4), 2), 2)
        assert L.indices == (0, 1)
        assert L.selection_scores == (1.0, 1.0)
        assert L.method == "greedy_sharp"

    def test_k1_is_top_leverage(self, rng):
        P = sharp_projector(sym_eig(random_psd(rng, 9)), 3)
        assert greedy_select(P, 1).indices == (int(np.argmax(np.diag(P.matrix))),)

    def test_two_clusters(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(0, 0.5, (20, 2)), rng.normal(0, 0.5, (20, 2)) + [5.0, 0.0]])
        K = gaussian_kernel(X, 1.0).values
        c = deterministic_kdpp(K, 2).indices
        assert (c[0] < 20) != (c[1] < 20)
        dets = sorted(
            (np.linalg.det(K[np.ix_(p, p)]) for p in itertools.combinations(range(40), 2)),
            reverse=True,
        )
        greedy_det = np.linalg.det(K[np.ix_(c, c)])
        optimal = greedy_det >= dets[0] - 1e-9
        assert optimal or greedy_det >= dets[int(0.05 * len(dets))]

    def test_matches_dense_oracle(self, rng):
        P = sharp_projector(sym_eig(random_psd(rng, 10)), 5)
        assert list(greedy_select(P, 5).indices) == dense_greedy(P.matrix, 5)

    def test_degenerate_returns_short_set(self):
        P = sharp_projector(sym_eig(DIAG4), 2)
        state = GreedyState(P)
        state.step(), state.step()
        assert state.step() is None
        with pytest.warns(DegenerateStepWarning):
            L = greedy_select(ridge_projector(sym_eig(np.diag([1.0, 1.0, 0.0])), 0.1, strict=False), 3)
        assert L.k == 2 and L.degenerate

    def test_rank_checks(self):
        P = sharp_projector(sym_eig(DIAG4), 2)
        with pytest.raises(RankTooLarge):
            greedy_select(P, 3)

    def test_chol_factor(self, rng):
        P = sharp_projector(sym_eig(random_psd(rng, 9)), 5)
        state = GreedyState(P)
        for _ in range(4):
            state.step()
        C = state.selected
        Lf = state.chol
        np.testing.assert_allclose(Lf, np.tril(Lf), atol=1e-14)
        np.testing.assert_allclose(Lf @ Lf.T, P.matrix[np.ix_(C, C)], atol=1e-12)

    def test_state_invariants(self, rng):
        P = sharp_projector(sym_eig(random_psd(rng, 12)), 6)
        state = GreedyState(P)
        for _ in range(6):
            state.step()
            C = state.selected
            np.testing.assert_allclose(state.p, residual_diagonal(P.matrix, C), atol=1e-8)
            assert np.all(state.p[C] < 1e-8)
            assert np.all(state.p >= -1e-8) and np.all(state.p <= state.p0 + 1e-8)

    def test_dual_formula(self, rng):
        P = sharp_projector(sym_eig(random_psd(rng, 10)), 5)
        state, snaps = _greedy_trace(P, 5)
        for t, p in enumerate(snaps):
            dual = projection_residuals(P.basis, state.selected[:t])
            assert np.max(np.abs(p - dual)) < 1e-8

    def test_monotone_residuals(self, rng):
        P = ridge_projector(sym_eig(random_pd(rng, 10)), 0.05)
        _, snaps = _greedy_trace(P, 6)
        for a, b in zip(snaps, snaps[1:]):
            assert np.all(b <= a + 1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 8))
    def test_repeatable(self, seed, k):
        K = random_psd(np.random.default_rng(seed), 8)
        E = sym_eig(K)
        first = deterministic_kdpp(K, k, eig=E)
        assert deterministic_kdpp(K, k) == first
        assert deterministic_kdpp(K.copy(), k).indices == first.indices

    def test_thread_safe(self, rng):
        K = random_pd(rng, 30)
        expected = das_select(K, 8, 0.01).indices
        with ThreadPoolExecutor(4) as pool:
            results = list(pool.map(lambda _: das_select(K, 8, 0.01).indices, range(40)))
        assert all(r == expected for r in results)


class TestDAS:
    def test_diagonal(self):
        L = das_select(DIAG4, 2, 0.25)
        assert L.indices == (0, 1)
        np.testing.assert_allclose(L.selection_scores, [0.8, 0.75])
        assert L.gamma == 0.25 and L.method == "das"

    def test_tiny_gamma_approaches_sharp(self, rng):
        # three unit eigenvalues, the rest far below n * gamma: the ridge
        # projector is close to the rank-3 sharp projector
        V = np.linalg.qr(rng.standard_normal((8, 8)))[0]
        E = EigenSystem(np.array([1.0, 1.0, 1.0] + [1e-15] * 5), V)
        sharp = greedy_select(sharp_projector(E, 3), 3).indices
        das = das_select(None, 3, 1e-12, eig=E)
        assert das.indices == sharp

    def test_matches_dense_oracle(self, rng):
        K = random_pd(rng, 8)
        P = ridge_projector(sym_eig(K), 0.1).matrix
        assert list(das_select(K, 3, 0.1).indices) == dense_greedy(P, 3)

    def test_requires_positive_definite(self):
        with pytest.raises(SingularKernel):
            das_select(np.diag([1.0, 0.0, 2.0]), 2, 0.1)

    def test_gaussian_kernel_non_strict(self):
        X, _ = gaussian_mixture(60, 3, seed=1)
        K = gaussian_kernel(X, 3.0).values
        L = das_select(K, 5, 1e-3, strict=False)
        assert L.k == 5
