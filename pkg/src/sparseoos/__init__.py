"""Sparse out-of-sample projection onto learned manifolds.

Kernel ridge regression maps new points into a training embedding but has to
compare each new point against every training point. :func:`sparse_fit`
replaces the KRR coefficients with a row-sparse matrix whose training
predictions stay within a chosen root-mean-squared distance ``epsilon`` of the
KRR predictions, so projection only touches the support vectors.
"""

from .embed import SpectralEmbedding, krr_matches_nystrom, laplacian_eigenmaps, nystrom_extend
from .kernels import Ball, BoundKernel, Gaussian, Knn, NormalizedHeat, bind, cross_row, gram
from .krr import KrrModel, krr_fit, krr_predict, krr_predict_batch
from .sparse import (
    SolveOptions,
    SparseModel,
    extract_support,
    fista_group_lasso,
    group_prox,
    sparse_fit,
    sparse_predict,
    sparse_predict_batch,
    sparsify,
)
from .synth import swiss_roll

__all__ = [
    "Ball", "BoundKernel", "Gaussian", "Knn", "KrrModel", "NormalizedHeat",
    "SolveOptions", "SparseModel", "SpectralEmbedding", "bind", "cross_row",
    "extract_support", "fista_group_lasso", "gram", "group_prox", "krr_fit",
    "krr_matches_nystrom", "krr_predict", "krr_predict_batch", "laplacian_eigenmaps",
    "nystrom_extend", "sparse_fit", "sparse_predict", "sparse_predict_batch",
    "sparsify", "swiss_roll",
]
