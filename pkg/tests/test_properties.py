import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from acekit import (EmbeddingMatrix, ace_operator_closed_form,
                    ace_operator_spectral, center, exact_svd,
                    shrink_singular_values, write_embeddings, read_embeddings)

finite_values = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)
sigmas = st.lists(st.floats(min_value=0.0, max_value=1e8,
                            allow_nan=False, allow_infinity=False),
                  min_size=1, max_size=12)


@given(sigmas, st.floats(min_value=0.0, max_value=1e12))
def test_shrink_bounds(S, lam):
    S = np.sort(np.asarray(S))[::-1]
    g = shrink_singular_values(S, lam)
    assert np.all(g >= 0.0) and np.all(g <= 1.0)
    assert np.all(np.diff(g) <= 1e-15)  # ordering preserved


@given(st.floats(min_value=1e-6, max_value=1e6))
def test_shrink_identity_at_lambda_zero(sigma):
    assert shrink_singular_values([sigma], 0.0)[0] == 1.0


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_shrink_large_lambda_scaling(sigma):
    lam = 1e10 * sigma * sigma
    g = shrink_singular_values([sigma], lam)[0]
    assert abs(g * np.sqrt(lam) / sigma - 1.0) <= 1e-6


@given(sigmas)
def test_normalized_weights_flatten_monotonically(S):
    S = np.sort(np.asarray(S))[::-1]
    if S[0] == 0.0:
        return
    grid = [0.0, 1.0, 5.0, 10.0, 50.0, 100.0, 500.0, 1000.0, 5000.0]
    prev = None
    for lam in grid:
        w = shrink_singular_values(S, lam) ** 2
        ratios = w / w[0] if w[0] > 0 else w
        if prev is not None:
            assert np.all(ratios <= prev + 1e-12)
        prev = ratios


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=24),
       st.integers(min_value=2, max_value=12),
       st.floats(min_value=0.1, max_value=100.0),
       st.integers(min_value=0, max_value=2 ** 31))
def test_operator_routes_agree(n, d, lam, seed):
    rng = np.random.default_rng(seed)
    E = EmbeddingMatrix(rng.standard_normal((n, d)))
    spectral = ace_operator_spectral(exact_svd(E), lam)
    closed = ace_operator_closed_form(E, lam)
    assert np.abs(spectral.values - closed.values).max() <= 1e-10


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2,
                                               min_side=1, max_side=12),
                  elements=finite_values))
def test_center_is_idempotent(X):
    E = EmbeddingMatrix(X)
    once = center(E)
    twice = center(once)
    scale = max(np.abs(X).max(), 1.0)
    assert np.abs(twice.values - once.values).max() <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(X=hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2,
                                                 min_side=1, max_side=10),
                    elements=finite_values))
def test_emb1_round_trip_bytes(tmp_path_factory, X):
    tmp = tmp_path_factory.mktemp("emb1")
    E = EmbeddingMatrix(X)
    p1, p2 = str(tmp / "a.emb1"), str(tmp / "b.emb1")
    write_embeddings(E, p1)
    write_embeddings(read_embeddings(p1), p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=10),
       st.integers(min_value=1, max_value=10),
       st.integers(min_value=0, max_value=2 ** 31))
def test_exact_svd_contracts(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    f = exact_svd(EmbeddingMatrix(X))
    r = min(n, d)
    assert np.all(np.diff(f.S) <= 0) and np.all(f.S >= 0)
    assert np.abs(f.U.T @ f.U - np.eye(r)).max() <= 1e-8
    assert np.abs(f.V.T @ f.V - np.eye(r)).max() <= 1e-8
    err = np.linalg.norm(X - (f.U * f.S) @ f.V.T)
    assert err <= 1e-10 * max(np.linalg.norm(X), 1e-300) + 1e-12
