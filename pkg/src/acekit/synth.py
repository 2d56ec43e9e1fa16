"""Deterministic synthetic embedding generators.

Spectrum-controlled matrices are built by construction: plant the target
singular values between two random orthonormal bases, so the realized
spectrum is exact up to orthogonalization round-off. Clustered matrices
plant c centroids on a sphere and add isotropic noise, giving the
preservation diagnostics a ground truth to recover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidSpec
from .matrix import EmbeddingMatrix


@dataclass(frozen=True)
class PowerLaw:
    """Target spectrum sigma_i = i ** (-alpha), alpha >= 0."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha >= 0):
            raise InvalidSpec(f"alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class ExplicitSpectrum:
    """Explicit non-increasing, non-negative target singular values."""

    values: Sequence[float]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise InvalidSpec("explicit spectrum must be non-empty")
        if any(v < 0 for v in vals):
            raise InvalidSpec("explicit spectrum must be non-negative")
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise InvalidSpec("explicit spectrum must be non-increasing")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ClusterSpec:
    """Planted clusters: `count` centroids on a radius-`spread` sphere,
    rows drawn as centroid + `noise` * standard normal."""

    count: int
    spread: float
    noise: float

    def __post_init__(self):
        if self.count < 2:
            raise InvalidSpec(f"cluster count must be >= 2, got {self.count}")
        if self.spread < 0 or self.noise < 0:
            raise InvalidSpec("spread and noise must be >= 0")


@dataclass(frozen=True)
class SynthSpec:
    n: int
    d: int
    spectrum: Union[PowerLaw, ExplicitSpectrum]
    clusters: Optional[ClusterSpec] = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidSpec(f"need n >= 1 and d >= 1, got {self.n}x{self.d}")
        if not isinstance(self.spectrum, (PowerLaw, ExplicitSpectrum)):
            raise InvalidSpec("spectrum must be PowerLaw or ExplicitSpectrum")


def target_singular_values(spec: SynthSpec) -> np.ndarray:
    """The d target singular values implied by the spec, non-increasing."""
    if isinstance(spec.spectrum, PowerLaw):
        return np.arange(1, spec.d + 1, dtype=np.float64) ** (-spec.spectrum.alpha)
    vals = np.asarray(spec.spectrum.values, dtype=np.float64)
    if vals.size != spec.d:
        raise InvalidSpec(
            f"explicit spectrum has {vals.size} values, need d = {spec.d}"
        )
    return vals


def synth_power_spectrum(spec: SynthSpec) -> EmbeddingMatrix:
    """Matrix with exactly the target singular values, deterministic per seed.

    Requires n >= d (the planted spectrum needs full column dimension) and no
    cluster settings.

    Raises:
        InvalidSpec: on clusters present, n < d, or an explicit spectrum
            whose length differs from d.
    """
    if spec.clusters is not None:
        raise InvalidSpec("spectrum-controlled generation takes no clusters")
    if spec.n < spec.d:
        raise InvalidSpec(
            f"need n >= d for spectrum control, got {spec.n} < {spec.d}"
        )
    sigma = target_singular_values(spec)
    rng = np.random.default_rng(spec.seed)
    left, _ = np.linalg.qr(rng.standard_normal((spec.n, spec.d)))
    right, _ = np.linalg.qr(rng.standard_normal((spec.d, spec.d)))
    return EmbeddingMatrix((left * sigma) @ right.T)


def synth_clustered(spec: SynthSpec):
    """Clustered matrix plus its ground-truth labels, deterministic per seed.

    Raises:
        InvalidSpec: if clusters are absent or cluster count exceeds n.
    """
    if spec.clusters is None:
        raise InvalidSpec("clustered generation requires cluster settings")
    c = spec.clusters.count
    if c > spec.n:
        raise InvalidSpec(f"cluster count {c} exceeds n = {spec.n}")
    rng = np.random.default_rng(spec.seed)
    raw = rng.standard_normal((c, spec.d))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    centroids = raw / norms * spec.clusters.spread
    labels = rng.integers(0, c, size=spec.n)
    E = centroids[labels] + spec.clusters.noise * rng.standard_normal(
        (spec.n, spec.d)
    )
    return EmbeddingMatrix(E), labels.tolist()


def llm_like(seed: int = 0) -> SynthSpec:
    """Preset imitating the fast-decay spectrum shape of large text encoders:
    2000 x 256 with a power-law exponent of 1.2."""
    return SynthSpec(n=2000, d=256, spectrum=PowerLaw(alpha=1.2), seed=seed)
