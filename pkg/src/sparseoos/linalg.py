"""Dense symmetric linear algebra used throughout the package."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


# residual check costs another O(n^3); skip it for big matrices
_VERIFY_MAX_N = 512


class LinAlgError(ArithmeticError):
    pass


class SingularSystemError(LinAlgError):
    def __init__(self, message, smallest_pivot=None):
        self.smallest_pivot = smallest_pivot
        super().__init__(message)


class ConvergenceError(LinAlgError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column j pairs with eigenvalues[j]


def _check_square(m, name="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def _check_symmetric(s, rtol=1e-10):
    scale = np.max(np.abs(s)) if s.size else 0.0
    if np.max(np.abs(s - s.T), initial=0.0) > rtol * max(scale, np.finfo(float).tiny):
        raise ValueError("matrix is not symmetric")


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Ties on magnitude go to the lowest row index (``argmax`` semantics).
    """
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eigen(s, tol: float = 1e-10) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Backed by LAPACK's symmetric driver; eigenvector signs are normalised with
    :func:`fix_signs` so repeated calls give identical output.
    """
    s = _check_square(s)
    _check_symmetric(s)
    # symmetrise exactly so LAPACK sees the same lower triangle regardless of noise
    s = 0.5 * (s + s.T)
    try:
        w, v = scipy.linalg.eigh(s, driver="evr")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceError(f"eigendecomposition did not converge: {exc}") from exc
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = fix_signs(v[:, order])

    if s.shape[0] <= _VERIFY_MAX_N:
        norm = np.max(np.abs(w), initial=0.0)
        resid = np.linalg.norm(s @ v - v * w, axis=0)
        bound = max(tol, 64 * np.finfo(float).eps * s.shape[0]) * (1 + np.abs(w)) * max(norm, 1.0)
        if np.any(resid > bound):
            raise ConvergenceError("eigenpair residual above tolerance")
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def solve_regularized(k, lam: float, y) -> np.ndarray:
    """Solve ``(k + lam*I) alpha = y`` without forming an inverse.

    ``k`` need only be symmetric; truncated heat kernels can be indefinite, so
    this uses a pivoted LU factorisation rather than Cholesky.
    """
    k = _check_square(k, "kernel matrix")
    y = np.asarray(y, dtype=float)
    squeeze = y.ndim == 1
    if squeeze:
        y = y[:, None]
    if y.shape[0] != k.shape[0]:
        raise ValueError(f"right-hand side has {y.shape[0]} rows, kernel has {k.shape[0]}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    n = k.shape[0]
    a = k + lam * np.eye(n)
    with warnings.catch_warnings():
        # singularity is reported below with the pivot size
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    smallest = float(pivots.min())
    scale = float(np.max(np.abs(a))) if n else 0.0
    if smallest <= n * np.finfo(float).eps * scale:
        raise SingularSystemError(
            f"system is singular to working precision (smallest pivot {smallest:.3g})",
            smallest_pivot=smallest,
        )
    alpha = scipy.linalg.lu_solve((lu, piv), y)
    # one step of iterative refinement keeps the residual near machine precision
    alpha += scipy.linalg.lu_solve((lu, piv), y - a @ alpha)
    alpha = np.ascontiguousarray(alpha)
    return alpha[:, 0] if squeeze else alpha


def spectral_norm(m, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Largest singular value by power iteration on ``m.T @ m``.

    Starts from the all-ones vector with a fixed schedule, so the result is
    deterministic. Stops once successive estimates agree to ``tol`` relative.
    """
    m = _check_square(m)
    n = m.shape[0]
    if n == 0:
        return 0.0
    v = np.ones(n) / np.sqrt(n)
    sigma = 0.0
    for _ in range(max_iter):
        w = m @ v
        u = m.T @ w
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return float(np.linalg.norm(w))
        new_sigma = np.sqrt(nu)
        v = u / nu
        if abs(new_sigma - sigma) <= tol * new_sigma:
            sigma = new_sigma
            break
        sigma = new_sigma
    # Rayleigh quotient of the final vector is a tighter estimate
    return float(max(sigma, np.linalg.norm(m @ v)))
