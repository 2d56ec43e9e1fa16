"""Exact and randomized truncated SVD with verified factor contracts.

The exact path goes through an eigendecomposition of the smaller Gram matrix
(E^T E when d <= n, else E E^T) and recovers the other factor, which is
robust for tall-skinny embedding matrices. Numerically-zero singular values
are clamped to exactly zero and the corresponding factor columns are
completed by orthogonalization, so downstream shrinkage is well defined at
sigma = 0. The clamp sits at the Gram-path noise floor,
sqrt(max(n, d) * eps) * sigma_max: forming the Gram matrix squares the
condition number, so directions smaller than that are indistinguishable
from zero and recovering them would only produce garbage columns.

The randomized path is a seeded range finder with subspace/power iteration.
The projection basis accumulates every power iterate (block-Krylov style)
instead of keeping only the last one; this costs the same number of matrix
passes and is dramatically more accurate on slowly decaying spectra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionTooLarge, InvalidRank, NegativeInput
from .matrix import EmbeddingMatrix

DEFAULT_EXACT_LIMIT = 2048
DEFAULT_OVERSAMPLE = 10
DEFAULT_POWER_ITERS = 4

# hard floor: singular values below this fraction of sigma_max are zeros even
# when the Gram-path noise floor (which is usually larger) lies below it
ZERO_CLAMP_RTOL = 1e-12


def _clamp_small(S: np.ndarray, n: int, d: int) -> np.ndarray:
    if S.size and S[0] > 0:
        noise_floor = np.sqrt(max(n, d) * np.finfo(np.float64).eps)
        S[S <= S[0] * max(ZERO_CLAMP_RTOL, noise_floor)] = 0.0
    return S


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD factors E ~ U diag(S) V^T with ordering and sign guarantees.

    S is non-increasing and non-negative; U (n x r) and V (d x r) have
    orthonormal columns within the tolerance of the method that produced
    them. The sign of each column pair is fixed by making the
    largest-magnitude entry of the V column positive, so results are
    comparable across runs.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    r: int
    method: str
    seed: Optional[int]
    source_n: int
    source_d: int

    def __post_init__(self):
        if self.U.shape != (self.source_n, self.r):
            raise InvalidRank(f"U has shape {self.U.shape}, expected "
                              f"({self.source_n}, {self.r})")
        if self.V.shape != (self.source_d, self.r):
            raise InvalidRank(f"V has shape {self.V.shape}, expected "
                              f"({self.source_d}, {self.r})")
        if self.S.shape != (self.r,):
            raise InvalidRank(f"S has length {self.S.shape}, expected {self.r}")
        if self.S.size and (np.any(self.S < 0) or np.any(np.diff(self.S) > 0)):
            raise InvalidRank("S must be non-negative and non-increasing")
        for a in (self.U, self.S, self.V):
            a.setflags(write=False)

    @property
    def rank(self) -> int:
        """Number of strictly positive singular values (after clamping)."""
        return int(np.count_nonzero(self.S))


def _orthocomplete(Q: np.ndarray, total: int) -> np.ndarray:
    """Extend Q's orthonormal columns to `total` columns deterministically."""
    n, have = Q.shape
    if have >= total:
        return Q[:, :total]
    full, _ = np.linalg.qr(Q, mode="complete")
    return np.hstack([Q, full[:, have:total]])


def _fix_signs(U: np.ndarray, V: np.ndarray):
    """Make the largest-magnitude entry of each V column positive."""
    if V.shape[1] == 0:
        return U, V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def _gram_svd(A: np.ndarray):
    """Thin SVD of a plain 2-D array via the smaller Gram matrix.

    Returns (U, S, V) with r = min(n, d) columns, zero-clamped S, completed
    orthonormal factors and the canonical sign convention applied.
    """
    n, d = A.shape
    r = min(n, d)
    if d <= n:
        lam, W = np.linalg.eigh(A.T @ A)
        V = np.ascontiguousarray(W[:, ::-1])
        S = _clamp_small(np.sqrt(np.clip(lam[::-1], 0.0, None)), n, d)
        nz = S > 0  # a prefix, since S is sorted non-increasing
        U = _orthocomplete((A @ V[:, nz]) / S[nz], r)
    else:
        lam, W = np.linalg.eigh(A @ A.T)
        U = np.ascontiguousarray(W[:, ::-1])
        S = _clamp_small(np.sqrt(np.clip(lam[::-1], 0.0, None)), n, d)
        nz = S > 0
        V = _orthocomplete((A.T @ U[:, nz]) / S[nz], r)
    U, V = _fix_signs(U, V)
    return U, S, V


def exact_svd(E: EmbeddingMatrix,
              exact_limit: int = DEFAULT_EXACT_LIMIT) -> SvdFactors:
    """Full thin SVD of E with r = min(n, d).

    Args:
        E: matrix to factor.
        exact_limit: refuse matrices whose smaller dimension exceeds this
            (the dense Gram eigendecomposition would be too costly); use
            :func:`randomized_svd` instead.

    Raises:
        DimensionTooLarge: if min(n, d) > exact_limit.
    """
    n, d = E.shape
    if min(n, d) > exact_limit:
        raise DimensionTooLarge(
            f"min(n, d) = {min(n, d)} exceeds the exact-path limit "
            f"{exact_limit}; use randomized_svd"
        )
    U, S, V = _gram_svd(E.values)
    return SvdFactors(U=U, S=S, V=V, r=min(n, d), method="exact", seed=None,
                      source_n=n, source_d=d)


def randomized_svd(E: EmbeddingMatrix, k: int,
                   oversample: int = DEFAULT_OVERSAMPLE,
                   power_iters: int = DEFAULT_POWER_ITERS,
                   seed: int = 0) -> SvdFactors:
    """Rank-k approximate SVD via seeded randomized range finding.

    Draws k + oversample Gaussian probes, runs `power_iters` rounds of
    subspace iteration with per-step re-orthonormalization, and projects onto
    the accumulated iterate basis before solving the small factorization.
    Deterministic for a fixed seed in single-threaded mode.

    Raises:
        InvalidRank: if k is not in [1, min(n, d)].
        NegativeInput: if oversample or power_iters is negative.
    """
    n, d = E.shape
    if not 1 <= k <= min(n, d):
        raise InvalidRank(f"k = {k} must be in [1, {min(n, d)}]")
    if oversample < 0:
        raise NegativeInput(f"oversample must be >= 0, got {oversample}")
    if power_iters < 0:
        raise NegativeInput(f"power_iters must be >= 0, got {power_iters}")

    A = E.values
    rng = np.random.default_rng(seed)
    width = min(k + oversample, min(n, d))
    omega = rng.standard_normal((d, width))
    Q, _ = np.linalg.qr(A @ omega)
    blocks = [Q]
    for _ in range(power_iters):
        W, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ W)
        blocks.append(Q)
    basis, _ = np.linalg.qr(np.hstack(blocks))

    B = basis.T @ A
    Ub, S, V = _gram_svd(B)  # sign convention already applied here
    U = basis @ Ub
    return SvdFactors(U=np.ascontiguousarray(U[:, :k]), S=S[:k].copy(),
                      V=np.ascontiguousarray(V[:, :k]), r=k,
                      method="randomized", seed=seed, source_n=n, source_d=d)
