"""Sparse approximation to kernel ridge regression.

Given a fitted KRR coefficient matrix ``alpha_hat`` and Gram matrix ``K``, find
the coefficient matrix with the smallest group norm ``sum_i ||alpha_i||_2``
whose training predictions stay within mean-squared distance ``eps**2`` of the
KRR predictions::

    minimize  sum_i ||alpha_i||_2   s.t.  ||K alpha_hat - K alpha||_F^2 <= n eps^2

The constraint is handled through its Lagrangian. For a penalty weight
``gamma`` the unconstrained group lasso

    g(gamma) = min_alpha ||K alpha_hat - K alpha||_F^2 + gamma sum_i ||alpha_i||_2

is solved with FISTA, and the largest ``gamma`` whose minimiser satisfies the
constraint is located by a bracketing search; the residual of the minimiser
grows monotonically with ``gamma``.

Rows of the result that are nonzero mark the support vectors: the only
training points a prediction has to be compared against.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .kernels import BoundKernel
from .krr import KrrModel
from .linalg import spectral_norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveOptions:
    max_iter: int = 50_000
    tol: float = 1e-10  # relative objective change that stops FISTA
    gamma_tol: float = 1e-4  # relative width of the final gamma bracket
    sv_threshold: float = 1e-8  # row-norm cutoff relative to the largest row
    slack: float = 1e-3

    def __post_init__(self):
        for name in ("max_iter", "tol", "gamma_tol", "sv_threshold", "slack"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class FistaResult:
    alpha: np.ndarray
    objective: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SparsifyResult:
    alpha_tilde: np.ndarray  # full (n, p)
    gamma_star: float
    achieved_msd: float
    dual_value: float
    converged: bool
    n_solves: int


@dataclass(frozen=True)
class SparseModel:
    kernel: BoundKernel  # restricted to the support vectors
    support: np.ndarray  # indices into the training set
    alpha_tilde: np.ndarray  # (s, p)
    epsilon: float = 0.0
    gamma_star: float = 0.0
    achieved_msd: float = 0.0
    converged: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def n_support(self) -> int:
        return int(self.support.size)

    @property
    def p(self) -> int:
        return self.alpha_tilde.shape[1]


def group_prox(a, threshold: float) -> np.ndarray:
    """Block soft-thresholding of each row: the prox of ``threshold * sum_i ||a_i||_2``."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    a = np.asarray(a, dtype=float)
    norms = np.linalg.norm(a, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > threshold, 1.0 - threshold / norms, 0.0)
    return a * scale


def group_norm(a) -> float:
    return float(np.linalg.norm(a, axis=1).sum())


class _Problem:
    """Precomputed quantities shared by every FISTA call on one instance."""

    def __init__(self, k, alpha_hat):
        k = np.asarray(k, dtype=float)
        alpha_hat = np.asarray(alpha_hat, dtype=float)
        if alpha_hat.ndim == 1:
            alpha_hat = alpha_hat[:, None]
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] != alpha_hat.shape[0]:
            raise ValueError(f"shape mismatch: K {k.shape}, alpha_hat {alpha_hat.shape}")
        self.k = k
        self.alpha_hat = alpha_hat
        self.k2 = k @ k
        self.b = self.k2 @ alpha_hat
        self.lipschitz = 2.0 * spectral_norm(k) ** 2

    def residual(self, alpha) -> float:
        """``||K alpha_hat - K alpha||_F^2``, evaluated directly."""
        d = self.k @ (self.alpha_hat - alpha)
        return float(np.sum(d * d))

    def gamma_max(self) -> float:
        return 2.0 * float(np.max(np.linalg.norm(self.b, axis=1), initial=0.0))


def _fista(prob: _Problem, gamma: float, opts: SolveOptions, init=None) -> FistaResult:
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    L = prob.lipschitz
    if L == 0.0:
        # K = 0: the smooth part is constant and alpha = 0 is optimal
        z = np.zeros_like(prob.alpha_hat)
        return FistaResult(z, prob.residual(z), 0, True)
    x = np.zeros_like(prob.alpha_hat) if init is None else np.array(init, dtype=float)
    q = prob.k2 @ x
    y, qy = x, q
    t = 1.0

    def objective(x, q):
        d = prob.alpha_hat - x
        return float(np.sum(d * (prob.b - q))) + gamma * group_norm(x)

    f_prev = objective(x, q)
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        # gradient of the smooth part at y is 2 K^2 (y - alpha_hat)
        x_new = group_prox(y - (2.0 / L) * (qy - prob.b), gamma / L)
        q_new = prob.k2 @ x_new
        f = objective(x_new, q_new)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_new
        y = x_new + beta * (x_new - x)
        qy = q_new + beta * (q_new - q)
        x, q, t = x_new, q_new, t_new
        if abs(f - f_prev) <= opts.tol * abs(f):
            converged = True
            break
        f_prev = f
    obj = prob.residual(x) + gamma * group_norm(x)
    return FistaResult(alpha=x, objective=obj, iterations=it, converged=converged)


def fista_group_lasso(k, alpha_hat, gamma: float, opts: SolveOptions | None = None, init=None) -> FistaResult:
    """Minimise ``||K alpha_hat - K alpha||_F^2 + gamma sum_i ||alpha_i||_2`` with FISTA.

    Step size is ``1/L`` with ``L = 2 ||K||_2^2``; the iteration starts from
    zero unless ``init`` is given and stops when the objective's relative
    change drops to ``opts.tol`` or after ``opts.max_iter`` steps. A result
    that hit the cap is still returned, with ``converged=False``.
    """
    opts = opts or SolveOptions()
    return _fista(_Problem(k, alpha_hat), gamma, opts, init=init)


def sparsify(k, alpha_hat, epsilon: float, opts: SolveOptions | None = None) -> SparsifyResult:
    """Largest-gamma group-lasso solution that keeps the training discrepancy within ``epsilon``.

    Bracketing starts at ``gamma_max``, where zero is the minimiser, and steps
    down by decades until a feasible gamma appears; Illinois false position
    on ``log r`` against ``log gamma`` then narrows the bracket to
    ``opts.gamma_tol`` relative width. Each solve is
    warm-started from the previous one. The returned coefficients always come
    from a solve whose residual was checked against ``n * epsilon**2``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    opts = opts or SolveOptions()
    prob = _Problem(k, alpha_hat)
    n = prob.k.shape[0]
    target = n * epsilon**2
    zero = np.zeros_like(prob.alpha_hat)

    def result(alpha, gamma, resid, converged, solves, objective=None):
        if gamma > 0 and objective is not None:
            dual = (objective - target) / gamma
        else:
            dual = float("nan")
        return SparsifyResult(
            alpha_tilde=alpha,
            gamma_star=float(gamma),
            achieved_msd=resid / n,
            dual_value=float(dual),
            converged=converged,
            n_solves=solves,
        )

    r0 = prob.residual(zero)
    gmax = prob.gamma_max()
    if r0 <= target:
        return result(zero, gmax, r0, True, 0, objective=r0)

    hi, hi_r = gmax, r0
    warm = zero
    solves = 0
    lo = lo_res = lo_r = None
    gamma = gmax
    while lo is None:
        gamma /= 10.0
        if gamma < gmax * 1e-16:
            # nothing sparser is feasible: the exact KRR coefficients are
            return result(prob.alpha_hat.copy(), 0.0, prob.residual(prob.alpha_hat), True, solves)
        res = _fista(prob, gamma, opts, init=warm)
        solves += 1
        r = prob.residual(res.alpha)
        log.debug("gamma=%.6g residual=%.6g target=%.6g iters=%d", gamma, r, target, res.iterations)
        if r <= target:
            lo, lo_res, lo_r = gamma, res, r
        else:
            hi, hi_r = gamma, r
        warm = res.alpha

    # Illinois false position on log r(gamma) - log target, in log gamma.
    # r is continuous and non-decreasing, so the bracket [lo, hi] stays valid.
    f_lo = math.log(lo_r / target) if lo_r > 0 else -math.inf
    f_hi = math.log(hi_r / target)
    side = 0
    while hi / lo - 1.0 > opts.gamma_tol:
        u_lo, u_hi = math.log(lo), math.log(hi)
        if math.isfinite(f_lo):
            u = u_lo - f_lo * (u_hi - u_lo) / (f_hi - f_lo)
        else:
            u = 0.5 * (u_lo + u_hi)
        # keep the trial point away from the bracket ends
        width = u_hi - u_lo
        u = min(max(u, u_lo + 0.01 * width), u_hi - 0.01 * width)
        mid = math.exp(u)
        res = _fista(prob, mid, opts, init=warm)
        solves += 1
        r = prob.residual(res.alpha)
        log.debug("gamma=%.6g residual=%.6g target=%.6g iters=%d", mid, r, target, res.iterations)
        f_mid = math.log(r / target) if r > 0 else -math.inf
        if r <= target:
            lo, lo_res, lo_r, f_lo = mid, res, r, f_mid
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi = mid, f_mid
            if side == 1 and math.isfinite(f_lo):
                f_lo *= 0.5
            side = 1
        warm = res.alpha

    if not lo_res.converged:
        log.warning("FISTA hit the iteration cap at the final gamma=%.6g", lo)
    return result(lo_res.alpha, lo, lo_r, lo_res.converged, solves, objective=lo_res.objective)


def extract_support(alpha_tilde, sv_threshold: float, kernel: BoundKernel, **meta) -> SparseModel:
    """Keep rows whose norm exceeds ``sv_threshold`` times the largest row norm."""
    alpha_tilde = np.asarray(alpha_tilde, dtype=float)
    norms = np.linalg.norm(alpha_tilde, axis=1)
    top = norms.max(initial=0.0)
    if top == 0.0:
        keep = np.zeros(0, dtype=np.int64)
    else:
        keep = np.flatnonzero(norms > sv_threshold * top)
    if keep.size == 0 and top > 0.0:
        warnings.warn("no support vectors: the sparse model predicts zero everywhere", stacklevel=2)
    return SparseModel(
        kernel=kernel.restrict(keep),
        support=keep,
        alpha_tilde=alpha_tilde[keep].copy(),
        **meta,
    )


def sparse_fit(model: KrrModel, epsilon: float, opts: SolveOptions | None = None, k=None) -> SparseModel:
    """Sparsify a fitted KRR model; ``achieved_msd`` is re-measured after thresholding."""
    opts = opts or SolveOptions()
    if k is None:
        k = kernels.gram(model.kernel)
    res = sparsify(k, model.alpha_hat, epsilon, opts)
    sm = extract_support(
        res.alpha_tilde,
        opts.sv_threshold,
        model.kernel,
        epsilon=float(epsilon),
        gamma_star=res.gamma_star,
        converged=res.converged,
        extra={"dual_value": res.dual_value, "n_solves": res.n_solves, "lambda": model.lam},
    )
    kept = np.zeros_like(res.alpha_tilde)
    kept[sm.support] = sm.alpha_tilde
    d = k @ (model.alpha_hat - kept)
    msd = float(np.sum(d * d)) / k.shape[0]
    return SparseModel(**{**sm.__dict__, "achieved_msd": msd})


def sparse_predict(model: SparseModel, x) -> np.ndarray:
    if model.n_support == 0:
        return np.zeros(model.p)
    return kernels.cross_row(model.kernel, x) @ model.alpha_tilde


def sparse_predict_batch(model: SparseModel, xs) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if model.n_support == 0:
        return np.zeros((xs.shape[0], model.p))
    return kernels.apply_rows(model.kernel, xs, model.alpha_tilde)
