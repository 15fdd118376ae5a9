"""Laplacian-eigenmaps training embedding and its Nystrom extension."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import BoundKernel, NormalizedHeat
from .krr import krr_fit, krr_predict_batch
from .linalg import sym_eigen

EIGENVALUE_FLOOR = 1e-12


class ZeroEigenvalueError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpectralEmbedding:
    coordinates: np.ndarray  # (n, p), unit-norm eigenvector columns
    eigenvalues: np.ndarray  # (p,)
    kernel: BoundKernel
    skip_trivial: bool = True


def laplacian_eigenmaps(points, spec: NormalizedHeat, p: int, skip_trivial: bool = True) -> SpectralEmbedding:
    """Embed ``points`` with eigenvectors of the degree-normalised heat kernel.

    The top eigenvector (eigenvalue 1, proportional to sqrt of the degrees)
    carries no geometry and is dropped; coordinates are eigenvectors 2..p+1.
    """
    if not isinstance(spec, NormalizedHeat):
        raise TypeError("Laplacian eigenmaps needs a NormalizedHeat kernel spec")
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    offset = 1 if skip_trivial else 0
    if p < 1 or p + offset > n:
        raise ValueError(f"cannot take {p} coordinates from {n} points")
    bk = kernels.bind(spec, points)
    eig = sym_eigen(kernels.gram(bk))
    vals = eig.eigenvalues[offset:offset + p]
    if np.any(np.abs(vals) < EIGENVALUE_FLOOR):
        j = int(np.flatnonzero(np.abs(vals) < EIGENVALUE_FLOOR)[0]) + offset
        raise ZeroEigenvalueError(f"eigenvalue {j + 1} is numerically zero ({eig.eigenvalues[j]:.3g})")
    return SpectralEmbedding(
        coordinates=eig.eigenvectors[:, offset:offset + p].copy(),
        eigenvalues=vals.copy(),
        kernel=bk,
        skip_trivial=skip_trivial,
    )


def _check_eigenvalues(emb):
    if np.any(np.abs(emb.eigenvalues) < EIGENVALUE_FLOOR):
        raise ZeroEigenvalueError("embedding has a numerically zero eigenvalue")


def nystrom_extend(emb: SpectralEmbedding, x) -> np.ndarray:
    """``f_j(x) = (1/lambda_j) sum_i phi_i^(j) K(x, x_i)``."""
    _check_eigenvalues(emb)
    return (kernels.cross_row(emb.kernel, x) @ emb.coordinates) / emb.eigenvalues


def nystrom_extend_batch(emb: SpectralEmbedding, xs) -> np.ndarray:
    _check_eigenvalues(emb)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    return kernels.apply_rows(emb.kernel, xs, emb.coordinates) / emb.eigenvalues


def krr_matches_nystrom(emb: SpectralEmbedding, xs) -> float:
    """Largest row discrepancy between KRR with lambda=0 and the Nystrom formula."""
    model = krr_fit(emb.kernel, emb.coordinates, 0.0)
    a = krr_predict_batch(model, xs)
    b = nystrom_extend_batch(emb, xs)
    return float(np.max(np.linalg.norm(a - b, axis=1)))
