import numpy as np
import pytest

from acekit import (AceConfig, EmbeddingMatrix, ace_embedding,
                    avg_pairwise_cosine, exact_svd, nn_overlap,
                    similarity_preservation, spectrum_report,
                    synth_clustered, top3_projection, whiten)
from acekit.errors import (DegenerateInput, DimensionMismatch, InvalidK,
                           RankTooLow, ZeroVector)
from acekit.synth import ClusterSpec, PowerLaw, SynthSpec


def rand(n, d, seed):
    return np.random.default_rng(seed).standard_normal((n, d))


def brute_force_avg_cosine(X):
    n = X.shape[0]
    vals = []
    for i in range(n):
        for j in range(i + 1, n):
            vals.append(X[i] @ X[j]
                        / (np.linalg.norm(X[i]) * np.linalg.norm(X[j])))
    return sum(vals) / len(vals)


class TestSpectrumReport:
    def test_uniform_spectrum(self):
        report = spectrum_report(EmbeddingMatrix(2.0 * np.eye(4)))
        np.testing.assert_allclose(report.eigenvalues, 1.0, atol=1e-12)
        np.testing.assert_allclose(report.normalized, 1.0, atol=1e-12)
        assert abs(report.effective_rank - 4.0) <= 1e-10
        assert abs(report.spectral_flatness - 1.0) <= 1e-10
        assert abs(report.condition_number - 1.0) <= 1e-10

    def test_rank_one(self):
        rng = np.random.default_rng(1)
        X = np.outer(rng.standard_normal(10), rng.standard_normal(5))
        report = spectrum_report(EmbeddingMatrix(X))
        assert abs(report.effective_rank - 1.0) <= 1e-8
        assert report.normalized[0] == 1.0
        np.testing.assert_array_equal(report.normalized[1:], 0.0)
        assert report.spectral_flatness == 1.0  # one retained direction

    def test_isotropic_gaussian(self):
        E = EmbeddingMatrix(rand(5000, 16, seed=2))
        report = spectrum_report(E, with_cosine=True, seed=0)
        assert abs(report.avg_cosine) <= 0.02
        assert report.spectral_flatness >= 0.95

    def test_normalized_non_increasing(self):
        report = spectrum_report(EmbeddingMatrix(rand(40, 8, seed=3)))
        assert np.all(np.diff(report.normalized) <= 0)
        assert report.normalized[0] == 1.0
        assert 1.0 <= report.effective_rank <= 8.0

    def test_centered_flag_removes_mean_direction(self):
        X = rand(200, 6, seed=4) + 50.0
        raw = spectrum_report(EmbeddingMatrix(X))
        centered = spectrum_report(EmbeddingMatrix(X), centered=True)
        assert raw.effective_rank < 1.5  # mean dominates
        assert centered.effective_rank > 5.0

    def test_degenerate(self):
        with pytest.raises(DegenerateInput):
            spectrum_report(EmbeddingMatrix(np.zeros((3, 3))))


class TestAvgPairwiseCosine:
    def test_identical_rows(self):
        E = EmbeddingMatrix(np.tile([1.0, 2.0], (5, 1)))
        assert abs(avg_pairwise_cosine(E) - 1.0) <= 1e-12

    def test_alternating_signs_against_brute_force(self):
        v = np.array([2.0, -1.0, 0.5])
        X = np.vstack([v, -v, v, -v])
        got = avg_pairwise_cosine(EmbeddingMatrix(X))
        oracle = brute_force_avg_cosine(X)
        assert abs(got - oracle) <= 1e-12
        # 2 aligned pairs, 4 opposed ones: the mean is (2 - 4) / 6
        assert abs(oracle - (-1.0 / 3.0)) <= 1e-12

    def test_exhaustive_matches_brute_force(self):
        X = rand(30, 5, seed=5)
        got = avg_pairwise_cosine(EmbeddingMatrix(X))
        assert abs(got - brute_force_avg_cosine(X)) <= 1e-12

    def test_isotropic_is_near_zero(self):
        E = EmbeddingMatrix(rand(2000, 8, seed=6))
        assert abs(avg_pairwise_cosine(E, max_pairs=50_000, seed=1)) <= 0.03

    def test_sampling_is_deterministic(self):
        E = EmbeddingMatrix(rand(800, 4, seed=7))
        a = avg_pairwise_cosine(E, max_pairs=1000, seed=3)
        b = avg_pairwise_cosine(E, max_pairs=1000, seed=3)
        assert a == b
        c = avg_pairwise_cosine(E, max_pairs=1000, seed=4)
        assert a != c

    def test_zero_row(self):
        E = EmbeddingMatrix([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ZeroVector):
            avg_pairwise_cosine(E)

    def test_needs_two_rows(self):
        with pytest.raises(DimensionMismatch):
            avg_pairwise_cosine(EmbeddingMatrix([[1.0, 2.0]]))


class TestSimilarityPreservation:
    def test_identical(self):
        E = EmbeddingMatrix(rand(50, 6, seed=8))
        assert similarity_preservation(E, E) == 1.0

    def test_orthogonal_invariance(self):
        X = rand(60, 5, seed=9)
        Q, _ = np.linalg.qr(rand(5, 5, seed=10))
        rho = similarity_preservation(EmbeddingMatrix(X),
                                      EmbeddingMatrix(X @ Q))
        assert rho >= 1.0 - 1e-12

    def test_unrelated_embeddings(self):
        ref = EmbeddingMatrix(rand(300, 8, seed=11))
        new = EmbeddingMatrix(rand(300, 8, seed=12))
        assert abs(similarity_preservation(ref, new, seed=0)) <= 0.1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            similarity_preservation(EmbeddingMatrix(rand(5, 3, seed=13)),
                                    EmbeddingMatrix(rand(6, 3, seed=14)))

    def test_needs_three_rows(self):
        E = EmbeddingMatrix(rand(2, 3, seed=15))
        with pytest.raises(DimensionMismatch):
            similarity_preservation(E, E)


class TestNnOverlap:
    def test_identical(self):
        E = EmbeddingMatrix(rand(40, 6, seed=16))
        assert nn_overlap(E, E, k_nn=5) == 1.0

    def test_scale_invariant(self):
        X = rand(40, 6, seed=17)
        assert nn_overlap(EmbeddingMatrix(X), EmbeddingMatrix(3.0 * X),
                          k_nn=5) == 1.0

    def test_invalid_k(self):
        E = EmbeddingMatrix(rand(10, 3, seed=18))
        with pytest.raises(InvalidK):
            nn_overlap(E, E, k_nn=0)
        with pytest.raises(InvalidK):
            nn_overlap(E, E, k_nn=10)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            nn_overlap(EmbeddingMatrix(rand(5, 3, seed=19)),
                       EmbeddingMatrix(rand(6, 3, seed=20)), k_nn=2)

    def test_query_sampling_deterministic(self):
        ref = EmbeddingMatrix(rand(200, 5, seed=21))
        new = EmbeddingMatrix(rand(200, 5, seed=22))
        a = nn_overlap(ref, new, k_nn=4, max_queries=50, seed=5)
        b = nn_overlap(ref, new, k_nn=4, max_queries=50, seed=5)
        assert a == b

    def test_ace_beats_whitening_on_clusters(self):
        spec = SynthSpec(n=300, d=16, spectrum=PowerLaw(1.0),
                         clusters=ClusterSpec(count=5, spread=10.0, noise=1.0),
                         seed=0)
        E, _ = synth_clustered(spec)
        factors = exact_svd(E)
        lam = float(np.median(factors.S ** 2))
        ace = ace_embedding(factors, AceConfig(lam=lam, k=factors.r))
        white = whiten(E)
        assert nn_overlap(E, ace, k_nn=10) >= nn_overlap(E, white, k_nn=10)


class TestTop3Projection:
    def test_self_projection(self):
        rng = np.random.default_rng(23)
        basis, _ = np.linalg.qr(rng.standard_normal((20, 3)))
        X = basis * np.array([7.0, 4.0, 2.0])  # orthogonal columns
        coords, sigmas = top3_projection(EmbeddingMatrix(X))
        np.testing.assert_allclose(sigmas, [7.0, 4.0, 2.0], atol=1e-10)
        np.testing.assert_allclose(np.abs(coords), np.abs(X), atol=1e-10)

    def test_rank3_preserves_distances(self):
        X = rand(25, 3, seed=24) @ rand(3, 10, seed=25)
        coords, _ = top3_projection(EmbeddingMatrix(X))
        for i in range(0, 25, 5):
            for j in range(2, 25, 7):
                want = np.linalg.norm(X[i] - X[j])
                got = np.linalg.norm(coords[i] - coords[j])
                assert abs(want - got) <= 1e-8

    def test_coordinate_second_moments(self):
        X = rand(200, 16, seed=26)
        coords, sigmas = top3_projection(EmbeddingMatrix(X))
        # oracle: independent LAPACK singular values of the source
        ref = np.linalg.svd(X, compute_uv=False)[:3]
        np.testing.assert_allclose(sigmas, ref, atol=1e-10)
        np.testing.assert_allclose((coords ** 2).mean(axis=0),
                                   ref ** 2 / 200, atol=1e-10)

    def test_rank_too_low(self):
        X = rand(10, 2, seed=27) @ rand(2, 6, seed=28)
        with pytest.raises(RankTooLow):
            top3_projection(EmbeddingMatrix(X))


class TestDiagnosticInvariants:
    def test_flattening_monotone_in_lambda(self):
        from acekit.synth import synth_power_spectrum
        spec = SynthSpec(n=60, d=8, spectrum=PowerLaw(1.0), seed=29)
        E = synth_power_spectrum(spec)
        factors = exact_svd(E)
        flats = []
        for lam in (0.0, 1.0, 10.0, 100.0, 1000.0):
            out = ace_embedding(factors, AceConfig(lam=lam, k=8))
            flats.append(spectrum_report(out).spectral_flatness)
        for a, b in zip(flats, flats[1:]):
            assert b <= a + 1e-12

    def test_lambda_zero_isotropy(self):
        E = EmbeddingMatrix(rand(40, 6, seed=30))
        out = ace_embedding(exact_svd(E), AceConfig(lam=0.0, k=6))
        report = spectrum_report(out)
        np.testing.assert_allclose(report.normalized, 1.0, atol=1e-8)

    def test_scale_invariance_of_diagnostics(self):
        ref = EmbeddingMatrix(rand(120, 6, seed=31))
        out = ace_embedding(exact_svd(ref), AceConfig(lam=5.0, k=6))
        base_report = spectrum_report(out, with_cosine=True, seed=0)
        base_pres = similarity_preservation(ref, out, seed=0)
        base_nn = nn_overlap(ref, out, k_nn=5, seed=0)
        for c in (0.1, 0.5, 3.0):
            scaled = EmbeddingMatrix(c * out.values)
            report = spectrum_report(scaled, with_cosine=True, seed=0)
            np.testing.assert_allclose(report.normalized,
                                       base_report.normalized, atol=1e-10)
            assert abs(report.spectral_flatness
                       - base_report.spectral_flatness) <= 1e-10
            assert abs(report.avg_cosine - base_report.avg_cosine) <= 1e-10
            assert abs(similarity_preservation(ref, scaled, seed=0)
                       - base_pres) <= 1e-10
            assert abs(nn_overlap(ref, scaled, k_nn=5, seed=0)
                       - base_nn) <= 1e-10

    def test_preservation_non_decreasing_in_lambda(self):
        from acekit.synth import synth_power_spectrum
        spec = SynthSpec(n=80, d=10, spectrum=PowerLaw(1.2), seed=32)
        E = synth_power_spectrum(spec)
        factors = exact_svd(E)
        rhos = []
        for lam in (0.0, 1.0, 10.0, 100.0, 1000.0):
            out = ace_embedding(factors, AceConfig(lam=lam, k=10))
            rhos.append(similarity_preservation(E, out, seed=0))
        for a, b in zip(rhos, rhos[1:]):
            assert b >= a - 1e-9
