"""Anisotropy and semantic-preservation diagnostics.

Spectrum-side: eigenvalues of the (optionally centered) covariance, their
normalized form, effective rank (exp of the Shannon entropy of the
normalized spectrum) and spectral flatness. Preservation-side: mean pairwise
cosine, Spearman rank correlation of pair cosines between two embeddings of
the same items, and k-nearest-neighbor overlap. All sampling is seeded and
without replacement, so reports are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (DegenerateInput, DimensionMismatch, InvalidK,
                     RankTooLow, ZeroVector)
from .matrix import EmbeddingMatrix, center
from .svd import DEFAULT_EXACT_LIMIT, exact_svd

DEFAULT_MAX_PAIRS = 100_000
DEFAULT_MAX_QUERIES = 1000
_NORM_FLOOR = 1e-15


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalue spectrum of a covariance/Gram matrix plus scalar metrics.

    eigenvalues holds sigma_i^2 / n for the full thin spectrum (zeros
    included), non-increasing. normalized divides by the leading eigenvalue.
    effective_rank = exp(entropy) lies in [1, retained rank];
    spectral_flatness divides it by the retained (nonzero) rank, so a flat
    nonzero spectrum scores 1. condition_number is taken over the retained
    rank only, keeping it finite.
    """

    n: int
    d: int
    centered: bool
    eigenvalues: np.ndarray
    normalized: np.ndarray
    spectral_flatness: float
    effective_rank: float
    condition_number: float
    avg_cosine: Optional[float] = None

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.normalized.setflags(write=False)


def _unit_rows(X: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Normalize the given rows, raising ZeroVector on numerically zero ones."""
    sub = X[rows]
    norms = np.linalg.norm(sub, axis=1)
    bad = np.where(norms < _NORM_FLOOR)[0]
    if bad.size:
        raise ZeroVector(f"row {int(rows[bad[0]])} has norm < {_NORM_FLOOR:g}")
    return sub / norms[:, None]


def _sample_pairs(n: int, max_pairs: int, seed: int):
    """Distinct unordered row pairs: exhaustive when they all fit, else
    uniform rejection sampling without replacement. Deterministic per seed."""
    if max_pairs < 1:
        raise InvalidK(f"max_pairs must be >= 1, got {max_pairs}")
    total = n * (n - 1) // 2
    if total <= max_pairs:
        i, j = np.triu_indices(n, k=1)
        return i, j
    rng = np.random.default_rng(seed)
    seen = set()
    out_i, out_j = [], []
    while len(seen) < max_pairs:
        draw = rng.integers(0, n, size=(4096, 2))
        for a, b in draw:
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in seen:
                continue
            seen.add(key)
            out_i.append(key[0])
            out_j.append(key[1])
            if len(seen) == max_pairs:
                break
    return np.asarray(out_i, dtype=np.intp), np.asarray(out_j, dtype=np.intp)


def _pair_cosines(X: np.ndarray, i_idx: np.ndarray, j_idx: np.ndarray) -> np.ndarray:
    rows = np.unique(np.concatenate([i_idx, j_idx]))
    unit = np.zeros_like(X)
    unit[rows] = _unit_rows(X, rows)
    return np.einsum("ij,ij->i", unit[i_idx], unit[j_idx])


def avg_pairwise_cosine(E: EmbeddingMatrix,
                        max_pairs: int = DEFAULT_MAX_PAIRS,
                        seed: int = 0) -> float:
    """Mean cosine similarity over sampled distinct unordered row pairs.

    Enumerates every pair when n(n-1)/2 <= max_pairs, else samples that many
    without replacement.

    Raises:
        DimensionMismatch: if n < 2.
        ZeroVector: if a sampled row has norm below 1e-15.
    """
    n = E.n
    if n < 2:
        raise DimensionMismatch("need at least 2 rows for pairwise cosine")
    total = n * (n - 1) // 2
    if total <= max_pairs:
        unit = _unit_rows(E.values, np.arange(n))
        colsum = unit.sum(axis=0)
        # sum over i<j of x_i . x_j, via ||sum x||^2 = n + 2 * pair sum
        pair_sum = (colsum @ colsum - n) / 2.0
        return float(pair_sum / total)
    i_idx, j_idx = _sample_pairs(n, max_pairs, seed)
    return float(_pair_cosines(E.values, i_idx, j_idx).mean())


def similarity_preservation(E_ref: EmbeddingMatrix, E_new: EmbeddingMatrix,
                            max_pairs: int = DEFAULT_MAX_PAIRS,
                            seed: int = 0) -> float:
    """Spearman rank correlation of pair cosines between two embeddings.

    The same seeded pair sample is evaluated in both matrices; ties get
    average ranks.

    Raises:
        DimensionMismatch: if row counts differ or n < 3.
        ZeroVector: on zero-norm sampled rows in either matrix.
    """
    import scipy.stats  # deferred: keeps CLI startup light

    if E_ref.n != E_new.n:
        raise DimensionMismatch(
            f"row counts differ: {E_ref.n} vs {E_new.n}"
        )
    if E_ref.n < 3:
        raise DimensionMismatch("need at least 3 rows for rank correlation")
    i_idx, j_idx = _sample_pairs(E_ref.n, max_pairs, seed)
    c_ref = _pair_cosines(E_ref.values, i_idx, j_idx)
    c_new = _pair_cosines(E_new.values, i_idx, j_idx)
    if np.array_equal(c_ref, c_new):
        return 1.0
    rho = scipy.stats.spearmanr(c_ref, c_new).statistic
    if not np.isfinite(rho):
        raise DegenerateInput("rank correlation undefined: constant cosines")
    return float(rho)


def nn_overlap(E_ref: EmbeddingMatrix, E_new: EmbeddingMatrix, k_nn: int = 10,
               max_queries: int = DEFAULT_MAX_QUERIES, seed: int = 0) -> float:
    """Mean Jaccard overlap of cosine k-NN sets (self excluded).

    Queries are sampled without replacement when n > max_queries.

    Raises:
        DimensionMismatch: if row counts differ.
        InvalidK: if k_nn is not in [1, n-1].
        ZeroVector: if any row of either matrix has norm below 1e-15.
    """
    n = E_ref.n
    if n != E_new.n:
        raise DimensionMismatch(f"row counts differ: {n} vs {E_new.n}")
    if not 1 <= k_nn < n:
        raise InvalidK(f"k_nn = {k_nn} must be in [1, {n - 1}]")
    all_rows = np.arange(n)
    unit_ref = _unit_rows(E_ref.values, all_rows)
    unit_new = _unit_rows(E_new.values, all_rows)
    if n <= max_queries:
        queries = all_rows
    else:
        rng = np.random.default_rng(seed)
        queries = np.sort(rng.choice(n, size=max_queries, replace=False))

    def topk(unit: np.ndarray, q: np.ndarray) -> np.ndarray:
        sims = unit[q] @ unit.T
        sims[np.arange(len(q)), q] = -np.inf  # exclude self
        return np.argpartition(sims, -k_nn, axis=1)[:, -k_nn:]

    overlaps = np.empty(len(queries))
    chunk = 512
    for start in range(0, len(queries), chunk):
        q = queries[start:start + chunk]
        top_ref = topk(unit_ref, q)
        top_new = topk(unit_new, q)
        for row in range(len(q)):
            a = set(top_ref[row].tolist())
            b = set(top_new[row].tolist())
            overlaps[start + row] = len(a & b) / len(a | b)
    return float(overlaps.mean())


def spectrum_report(E: EmbeddingMatrix, centered: bool = False,
                    with_cosine: bool = False, seed: int = 0,
                    max_pairs: int = DEFAULT_MAX_PAIRS,
                    exact_limit: int = DEFAULT_EXACT_LIMIT) -> SpectrumReport:
    """Full spectrum diagnostics of an embedding matrix.

    Eigenvalues are sigma_i^2 / n from the SVD of the (optionally centered)
    matrix. avg_cosine, when requested, is computed on the same matrix the
    spectrum came from.

    Raises:
        DegenerateInput: if the spectrum is identically zero.
    """
    X = center(E) if centered else E
    factors = exact_svd(X, exact_limit=exact_limit)
    eigenvalues = factors.S ** 2 / E.n
    if eigenvalues[0] == 0.0:
        raise DegenerateInput("all eigenvalues are zero")
    retained = int(np.count_nonzero(eigenvalues))
    normalized = eigenvalues / eigenvalues[0]

    p = eigenvalues / eigenvalues.sum()
    pos = p > 0
    entropy = float(-(p[pos] * np.log(p[pos])).sum())
    effective_rank = min(max(float(np.exp(entropy)), 1.0), float(retained))
    flatness = effective_rank / retained
    condition = float(eigenvalues[0] / eigenvalues[retained - 1])

    avg_cos = None
    if with_cosine:
        avg_cos = avg_pairwise_cosine(X, max_pairs=max_pairs, seed=seed)

    return SpectrumReport(
        n=E.n, d=E.d, centered=centered,
        eigenvalues=eigenvalues, normalized=normalized,
        spectral_flatness=flatness, effective_rank=effective_rank,
        condition_number=condition, avg_cosine=avg_cos,
    )


def top3_projection(E: EmbeddingMatrix,
                    exact_limit: int = DEFAULT_EXACT_LIMIT):
    """Coordinates of each item along the top three singular directions.

    Returns (coords, sigmas): an n x 3 array U^(3) diag(S^(3)) of the
    uncentered SVD, suitable for external plotting, and the three singular
    values used.

    Raises:
        RankTooLow: if the matrix has rank < 3.
    """
    factors = exact_svd(E, exact_limit=exact_limit)
    if factors.rank < 3:
        raise RankTooLow(f"rank {factors.rank} < 3")
    coords = factors.U[:, :3] * factors.S[:3]
    return coords, factors.S[:3].copy()
