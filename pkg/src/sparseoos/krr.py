"""Multivariate kernel ridge regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import BoundKernel
from .linalg import solve_regularized


@dataclass(frozen=True)
class KrrModel:
    kernel: BoundKernel
    alpha_hat: np.ndarray  # (n, p)
    lam: float
    # ||(K + lam I) alpha_hat - Y||_F / ||Y||_F at fit time
    relative_residual: float = 0.0


def krr_fit(kernel: BoundKernel, y, lam: float, k=None) -> KrrModel:
    """Fit ``alpha_hat = (K + lam I)^{-1} Y``.

    ``k`` may pass a precomputed Gram matrix to avoid rebuilding it.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != kernel.n:
        raise ValueError(
            f"embedding has {y.shape[0]} rows but the kernel has {kernel.n} training points"
        )
    if k is None:
        k = kernels.gram(kernel)
    alpha = solve_regularized(k, lam, y)
    resid = np.linalg.norm(k @ alpha + lam * alpha - y)
    ynorm = np.linalg.norm(y)
    rel = float(resid / ynorm) if ynorm > 0 else float(resid)
    return KrrModel(kernel=kernel, alpha_hat=alpha, lam=float(lam), relative_residual=rel)


def krr_predict(model: KrrModel, x) -> np.ndarray:
    return kernels.cross_row(model.kernel, x) @ model.alpha_hat


def krr_predict_batch(model: KrrModel, xs) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    return kernels.apply_rows(model.kernel, xs, model.alpha_hat)
