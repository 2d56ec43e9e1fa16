"""Spectral shrinkage (ACE), whitening and PCA baselines, and the dense
item-item operator in both its closed and spectral forms.

The shrinkage map sends each singular value sigma to
sqrt(sigma^2 / (sigma^2 + lambda)). At lambda = 0 every retained direction
gets unit weight (isotropic output); for lambda >> sigma^2 the weights
approach sigma / sqrt(lambda), tracking the original spectrum. The value at
sigma = 0 is defined as 0 (pseudo-inverse convention), which keeps null
directions null and matches the zero-clamping done by the SVD engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (DegenerateInput, DegenerateScale, DimensionMismatch,
                     InvalidFactors, InvalidLambda, InvalidRank,
                     NegativeInput, NonFiniteValue, RankExceeded,
                     SingularSystem, TooLarge)
from .matrix import EmbeddingMatrix, center, global_std
from .svd import DEFAULT_EXACT_LIMIT, SvdFactors, exact_svd

DEFAULT_OPERATOR_GUARD = 4096

# lambda search grid used by the CLI and the acceptance suite; endpoints are
# fixed, interior points are log-uniform-ish between 5 and 5e3
LAMBDA_GRID = (0.0, 1.0, 5.0, 10.0, 50.0, 100.0, 500.0, 1000.0, 5000.0)


@dataclass(frozen=True)
class TargetStd:
    """Scale the output so its global standard deviation equals `value`."""

    value: float

    def __post_init__(self):
        if not (self.value > 0):
            raise NegativeInput(f"target std must be > 0, got {self.value}")


@dataclass(frozen=True)
class ExplicitGamma:
    """Scale the output by a fixed positive factor."""

    value: float

    def __post_init__(self):
        if not (self.value > 0):
            raise NegativeInput(f"gamma must be > 0, got {self.value}")


GammaPolicy = Union[TargetStd, ExplicitGamma]


@dataclass(frozen=True)
class AceConfig:
    """Parameters of the ACE transform.

    Args:
        lam: regularization weight, >= 0.
        k: output dimension, 1 <= k <= rank of the factorization.
        gamma_policy: how to recover the embedding scale after shrinkage.
        use_centering: run the transform on the mean-centered matrix. Off by
            default; the transform operates on the raw embedding geometry
            unless asked otherwise.
    """

    lam: float
    k: int
    gamma_policy: GammaPolicy = ExplicitGamma(1.0)
    use_centering: bool = False

    def __post_init__(self):
        if not (self.lam >= 0):
            raise NegativeInput(f"lambda must be >= 0, got {self.lam}")
        if self.k < 1:
            raise InvalidRank(f"k must be >= 1, got {self.k}")
        if not isinstance(self.gamma_policy, (TargetStd, ExplicitGamma)):
            raise NegativeInput("gamma_policy must be TargetStd or ExplicitGamma")


class SimilarityOperator:
    """Dense n x n item-item operator; an oracle artifact for small n.

    Symmetry is checked on construction within 1e-8 absolute. Its eigenvalues
    are spectral weights sigma_i^2 / (sigma_i^2 + lambda), so they lie in
    [0, 1]; the test suite verifies that range.
    """

    __slots__ = ("values",)

    SYMMETRY_ATOL = 1e-8

    def __init__(self, values):
        arr = np.array(values, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"operator must be square, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteValue("operator contains non-finite entries")
        asym = np.abs(arr - arr.T).max()
        if asym > self.SYMMETRY_ATOL:
            raise DimensionMismatch(
                f"operator is not symmetric: max |B - B^T| = {asym:g}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SimilarityOperator is immutable")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _spectral_weights(S: np.ndarray, lam: float) -> np.ndarray:
    """sigma^2 / (sigma^2 + lambda), with the 0/0 case defined as 0."""
    if lam == 0:
        return (S > 0).astype(np.float64)
    w = np.zeros_like(S, dtype=np.float64)
    pos = S > 0
    with np.errstate(divide="ignore", over="ignore"):
        # 1 / (1 + lam/s^2) survives under/overflow of s^2 gracefully
        w[pos] = 1.0 / (1.0 + lam / (S[pos] * S[pos]))
    return w


def shrink_singular_values(S, lam: float) -> np.ndarray:
    """Apply the shrinkage map sqrt(sigma^2 / (sigma^2 + lambda)) entrywise.

    Output entries lie in [0, 1] and keep the ordering of S. By convention
    the result is 0 where sigma = 0, including at lambda = 0.

    Raises:
        NegativeInput: if any sigma < 0 or lambda < 0.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.size and S.min() < 0:
        raise NegativeInput("singular values must be non-negative")
    if not (lam >= 0):
        raise NegativeInput(f"lambda must be >= 0, got {lam}")
    return np.sqrt(_spectral_weights(S, lam))


def gamma_for_target_std(pre_gamma: EmbeddingMatrix, target: float) -> float:
    """Scalar gamma such that gamma * pre_gamma has global std `target`.

    Raises:
        DegenerateScale: if the input's global standard deviation is 0.
        NegativeInput: if target <= 0.
    """
    if not (target > 0):
        raise NegativeInput(f"target std must be > 0, got {target}")
    std = global_std(pre_gamma)
    if std == 0.0:
        raise DegenerateScale("pre-gamma output has zero global std")
    return target / std


def ace_embedding(factors: SvdFactors, config: AceConfig) -> EmbeddingMatrix:
    """Build the shrunk embedding gamma * U^(k) diag(g_lambda(S^(k))).

    The factors are used as given: callers that want the transform on a
    centered matrix must factor the centered matrix (see
    :func:`ace_transform`, which honors config.use_centering).

    Raises:
        RankExceeded: if config.k exceeds the retained rank of the factors.
        DegenerateScale: under a TargetStd policy when the pre-gamma output
            is identically zero.
    """
    if config.k > factors.r:
        raise RankExceeded(
            f"k = {config.k} exceeds the factorization rank {factors.r}"
        )
    g = shrink_singular_values(factors.S[:config.k], config.lam)
    pre = factors.U[:, :config.k] * g
    out = EmbeddingMatrix(pre)
    if isinstance(config.gamma_policy, TargetStd):
        gamma = gamma_for_target_std(out, config.gamma_policy.value)
    else:
        gamma = config.gamma_policy.value
    return EmbeddingMatrix(pre * gamma)


def ace_transform(E: EmbeddingMatrix, config: AceConfig,
                  exact_limit: int = DEFAULT_EXACT_LIMIT) -> EmbeddingMatrix:
    """Convenience pipeline: (optional centering) -> exact SVD -> embedding.

    Carries the input's item ids onto the output, since rows keep their
    identity through the transform.
    """
    source = center(E) if config.use_centering else E
    factors = exact_svd(source, exact_limit=exact_limit)
    out = ace_embedding(factors, config)
    if E.item_ids is not None:
        out = EmbeddingMatrix(out.values, item_ids=E.item_ids)
    return out


def whiten(E: EmbeddingMatrix,
           exact_limit: int = DEFAULT_EXACT_LIMIT) -> EmbeddingMatrix:
    """Whitening transform: identity covariance by construction.

    Centers E, factors it, and returns sqrt(n) * U restricted to directions
    with nonzero singular values. The sqrt(n) factor makes the empirical
    (population) covariance of the output exactly the identity.

    Raises:
        DegenerateInput: if the centered matrix has rank 0 (all rows equal).
    """
    factors = exact_svd(center(E), exact_limit=exact_limit)
    keep = factors.S > 0
    if not keep.any():
        raise DegenerateInput("rank 0 after centering: all rows identical")
    out = math.sqrt(E.n) * factors.U[:, keep]
    return EmbeddingMatrix(out, item_ids=E.item_ids)


def pca_project(E: EmbeddingMatrix, k: int,
                exact_limit: int = DEFAULT_EXACT_LIMIT) -> EmbeddingMatrix:
    """Centered scores on the top-k principal directions.

    Column i of the output has population variance sigma_i^2 / n, the i-th
    eigenvalue of the covariance matrix.

    Raises:
        InvalidRank: if k is not in [1, rank of the centered matrix].
    """
    Ec = center(E)
    factors = exact_svd(Ec, exact_limit=exact_limit)
    rank = factors.rank
    if not 1 <= k <= rank:
        raise InvalidRank(f"k = {k} must be in [1, {rank}] (centered rank)")
    scores = Ec.values @ factors.V[:, :k]
    return EmbeddingMatrix(scores, item_ids=E.item_ids)


def ace_operator_spectral(factors: SvdFactors, lam: float,
                          guard: int = DEFAULT_OPERATOR_GUARD) -> SimilarityOperator:
    """Spectral form of the item-item operator: U diag(w) U^T.

    The weights w_i = sigma_i^2 / (sigma_i^2 + lambda) land in [0, 1]. Null
    directions carry weight 0 in both this and the closed form, so the thin
    factorization suffices.

    Raises:
        TooLarge: if n exceeds the small-instance guard.
        InvalidFactors: if the factors did not come from the exact path.
        NegativeInput: if lambda < 0.
    """
    if factors.method != "exact":
        raise InvalidFactors("spectral operator requires exact_svd factors")
    if not (lam >= 0):
        raise NegativeInput(f"lambda must be >= 0, got {lam}")
    n = factors.source_n
    if n > guard:
        raise TooLarge(f"n = {n} exceeds the dense-operator guard {guard}")
    w = _spectral_weights(factors.S, lam)
    return SimilarityOperator((factors.U * w) @ factors.U.T)


def ace_operator_closed_form(E: EmbeddingMatrix, lam: float,
                             guard: int = DEFAULT_OPERATOR_GUARD) -> SimilarityOperator:
    """Closed-form operator (E E^T + lambda I)^{-1} E E^T via direct solve.

    Raises:
        TooLarge: if n exceeds the small-instance guard.
        InvalidLambda: if lambda <= 0 (the lambda = 0 case is ill-posed here;
            use the spectral form, which handles it exactly).
        SingularSystem: if the solve fails, which signals numerical
            corruption since E E^T + lambda I is positive definite.
    """
    import scipy.linalg  # deferred: keeps CLI startup light

    if lam < 0:
        raise NegativeInput(f"lambda must be > 0, got {lam}")
    if lam == 0:
        raise InvalidLambda(
            "closed form is ill-posed at lambda = 0; use ace_operator_spectral"
        )
    n = E.n
    if n > guard:
        raise TooLarge(f"n = {n} exceeds the dense-operator guard {guard}")
    G = E.values @ E.values.T
    system = G + lam * np.eye(n)
    try:
        B = scipy.linalg.solve(system, G, assume_a="pos")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise SingularSystem(f"dense solve failed: {exc}") from exc
    return SimilarityOperator(B)
