"""acekit: spectrally controlled reshaping of dense embedding matrices.

The ACE transform shrinks each singular value of an embedding matrix by
sqrt(sigma^2 / (sigma^2 + lambda)), giving continuous control over how
anisotropic the output geometry is: lambda = 0 equalizes every retained
direction, large lambda tracks the original spectrum. Whitening and PCA
baselines, anisotropy diagnostics, semantic-preservation metrics, synthetic
generators and bit-exact file formats round out the toolkit.
"""

from ._threads import apply_thread_cap
from .diagnostics import (SpectrumReport, avg_pairwise_cosine, nn_overlap,
                          similarity_preservation, spectrum_report,
                          top3_projection)
from .matrix import (CovarianceMatrix, EmbeddingMatrix, center, column_mean,
                     covariance, global_std)
from .svd import SvdFactors, exact_svd, randomized_svd
from .synth import (ClusterSpec, ExplicitSpectrum, PowerLaw, SynthSpec,
                    llm_like, synth_clustered, synth_power_spectrum)
from .transforms import (LAMBDA_GRID, AceConfig, ExplicitGamma,
                         SimilarityOperator, TargetStd, ace_embedding,
                         ace_operator_closed_form, ace_operator_spectral,
                         ace_transform, gamma_for_target_std, pca_project,
                         shrink_singular_values, whiten)
from .io import read_embeddings, write_embeddings, write_report

__version__ = "0.1.0"

apply_thread_cap()

__all__ = [
    "AceConfig", "ClusterSpec", "CovarianceMatrix", "EmbeddingMatrix",
    "ExplicitGamma", "ExplicitSpectrum", "LAMBDA_GRID", "PowerLaw",
    "SimilarityOperator", "SpectrumReport", "SvdFactors", "SynthSpec",
    "TargetStd", "ace_embedding", "ace_operator_closed_form",
    "ace_operator_spectral", "ace_transform", "apply_thread_cap",
    "avg_pairwise_cosine", "center", "column_mean", "covariance",
    "exact_svd", "gamma_for_target_std", "global_std", "llm_like",
    "nn_overlap", "pca_project", "randomized_svd", "read_embeddings",
    "shrink_singular_values", "similarity_preservation", "spectrum_report",
    "synth_clustered", "synth_power_spectrum", "top3_projection", "whiten",
    "write_embeddings", "write_report",
]
