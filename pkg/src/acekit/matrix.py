"""Dense embedding matrices and the elementary statistics built on them."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue


def _first_nonfinite(arr: np.ndarray) -> tuple[int, int]:
    bad = np.argwhere(~np.isfinite(arr))
    i, j = bad[0]
    return int(i), int(j)


class EmbeddingMatrix:
    """An n x d matrix of item embeddings, one row per item.

    Values are widened to float64 and frozen on construction. Non-finite
    entries are rejected outright rather than sanitized, since silently
    repairing them would corrupt every spectral quantity computed downstream.

    Args:
        values: any 2-D array-like of real numbers, n >= 1 rows, d >= 1 cols.
        item_ids: optional sequence of n unique string identifiers.
    """

    __slots__ = ("values", "item_ids")

    def __init__(self, values, item_ids: Optional[Iterable[str]] = None):
        arr = np.array(values, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D array, got ndim={arr.ndim}")
        n, d = arr.shape
        if n < 1 or d < 1:
            raise DimensionMismatch(f"matrix must be at least 1x1, got {n}x{d}")
        if not np.isfinite(arr).all():
            i, j = _first_nonfinite(arr)
            raise NonFiniteValue(
                f"non-finite value {arr[i, j]!r} at row {i}, column {j}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

        ids: Optional[tuple[str, ...]] = None
        if item_ids is not None:
            ids = tuple(str(x) for x in item_ids)
            if len(ids) != n:
                raise DimensionMismatch(
                    f"got {len(ids)} item ids for {n} rows"
                )
            if len(set(ids)) != len(ids):
                raise DimensionMismatch("item ids must be unique")
        object.__setattr__(self, "item_ids", ids)

    def __setattr__(self, name, value):
        raise AttributeError("EmbeddingMatrix is immutable")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __repr__(self) -> str:
        ids = "" if self.item_ids is None else ", with item ids"
        return f"EmbeddingMatrix({self.n}x{self.d}{ids})"


class CovarianceMatrix:
    """A symmetric d x d covariance (or scaled Gram) matrix.

    Symmetry is verified on construction within 1e-10 relative to the largest
    entry. Positive semi-definiteness (eigenvalues >= -1e-10 * trace) is a
    data contract checked by the test suite rather than recomputed on every
    construction, since it costs a full eigendecomposition.
    """

    __slots__ = ("values",)

    SYMMETRY_RTOL = 1e-10

    def __init__(self, values):
        arr = np.array(values, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"covariance must be square, got {arr.shape}")
        if not np.isfinite(arr).all():
            i, j = _first_nonfinite(arr)
            raise NonFiniteValue(f"non-finite covariance entry at ({i}, {j})")
        scale = np.abs(arr).max()
        asym = np.abs(arr - arr.T).max()
        if asym > self.SYMMETRY_RTOL * max(scale, 1e-300):
            raise DimensionMismatch(
                f"matrix is not symmetric: max |C - C^T| = {asym:g}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("CovarianceMatrix is immutable")

    @property
    def d(self) -> int:
        return self.values.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.values))


def column_mean(E: EmbeddingMatrix) -> np.ndarray:
    """Arithmetic mean of each column (the mean embedding vector)."""
    return E.values.mean(axis=0)


def center(E: EmbeddingMatrix) -> EmbeddingMatrix:
    """Subtract the column means, making every column zero-mean."""
    return EmbeddingMatrix(E.values - column_mean(E), item_ids=E.item_ids)


def covariance(E: EmbeddingMatrix, center: bool = True) -> CovarianceMatrix:
    """Population covariance (1/n)(E - mu)^T (E - mu), or (1/n) E^T E.

    Uses the population 1/n normalization throughout; there is no Bessel
    correction anywhere in this package.
    """
    X = E.values - column_mean(E) if center else E.values
    return CovarianceMatrix((X.T @ X) / E.n)


def global_std(E: EmbeddingMatrix) -> float:
    """Population standard deviation over all n*d entries as one sample."""
    return float(E.values.std())
