"""Evaluation helpers: discrepancy, correlation, 1-NN classification, sweeps."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import sq_dists_to
from .kernels import KernelSpec
from .krr import krr_fit, krr_predict_batch
from .matio import format_value
from .sparse import SolveOptions, sparse_fit, sparse_predict_batch

log = logging.getLogger(__name__)

SWEEP_HEADER = ("epsilon", "lambda", "sv_count", "msd", "correlation", "class_rate")


@dataclass
class EvalReport:
    epsilon: float
    lam: float
    sv_count: int | None = None
    msd: float | None = None
    correlation: float | None = None
    class_rate: float | None = None
    error: str | None = None
    meta: dict = field(default_factory=dict)

    def csv_row(self) -> str:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, (int, np.integer)):
                return str(int(v))
            return format_value(v)

        if self.error is not None:
            # failed cells keep the column layout; the message goes to the log
            return f"{cell(self.epsilon)},{cell(self.lam)},failed,,,"
        vals = [self.epsilon, self.lam, self.sv_count, self.msd, self.correlation, self.class_rate]
        return ",".join(cell(v) for v in vals)


def mean_sq_discrepancy(a, b) -> float:
    """``(1/n) sum_i ||a_i - b_i||^2`` over matching rows."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sum(d * d) / a.shape[0])


def pearson_corr(a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape or a.size < 2:
        raise ValueError("need two vectors of equal length >= 2")
    a = a - a.mean()
    b = b - b.mean()
    na, nb = math.sqrt(a @ a), math.sqrt(b @ b)
    if na == 0 or nb == 0:
        raise ValueError("correlation undefined for a constant input")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


def nn_classify(train_embed, train_labels, test_embed, truth=None):
    """1-nearest-neighbor labels for ``test_embed``; ties go to the lower index.

    Returns ``(labels, rate)``; ``rate`` is None unless ``truth`` is given.
    """
    train = np.atleast_2d(np.asarray(train_embed, dtype=float))
    test = np.atleast_2d(np.asarray(test_embed, dtype=float))
    train_labels = np.asarray(train_labels)
    if train.shape[0] == 0:
        raise ValueError("training set is empty")
    if train.shape[1] != test.shape[1]:
        raise ValueError(f"dimension mismatch: {train.shape[1]} vs {test.shape[1]}")
    idx = np.array([int(np.argmin(sq_dists_to(train, x))) for x in test], dtype=np.int64)
    labels = train_labels[idx]
    rate = None
    if truth is not None:
        rate = float(np.mean(labels == np.asarray(truth)))
    return labels, rate


@dataclass
class SweepConfig:
    """Everything a sweep cell needs besides its (epsilon, lambda) pair.

    ``test_points`` with ``reference`` adds a correlation column (first
    embedding coordinate, absolute value). ``train_labels`` with
    ``test_points`` and ``test_labels`` adds a 1-NN classification rate
    computed in the embedding space.
    """

    points: np.ndarray
    embedding: np.ndarray
    kernel: KernelSpec
    options: SolveOptions = field(default_factory=SolveOptions)
    test_points: np.ndarray | None = None
    reference: np.ndarray | None = None
    train_labels: np.ndarray | None = None
    test_labels: np.ndarray | None = None


def _evaluate_cell(cfg: SweepConfig, k, krr_model, eps, lam) -> EvalReport:
    sm = sparse_fit(krr_model, eps, cfg.options, k=k)
    rep = EvalReport(epsilon=eps, lam=lam, sv_count=sm.n_support, msd=sm.achieved_msd)
    rep.meta = {"gamma_star": sm.gamma_star, "converged": sm.converged, "kernel": kernels.spec_to_dict(cfg.kernel)}
    bound = eps**2 * (1 + cfg.options.slack)
    # re-check the training discrepancy against the KRR predictions directly
    direct = mean_sq_discrepancy(krr_predict_batch(krr_model, cfg.points), sparse_predict_batch(sm, cfg.points))
    rep.meta["guarantee_ok"] = direct <= bound
    if sm.converged and direct > bound:
        log.warning("eps=%g lambda=%g: discrepancy %.6g exceeds bound %.6g", eps, lam, direct, bound)
    if cfg.test_points is not None:
        proj = sparse_predict_batch(sm, cfg.test_points)
        if cfg.reference is not None:
            ref = np.asarray(cfg.reference, dtype=float).reshape(proj.shape[0], -1)
            if np.ptp(proj[:, 0]) > 0:
                rep.correlation = abs(pearson_corr(proj[:, 0], ref[:, 0]))
            else:
                # e.g. an empty support: constant projections have no correlation
                log.info("eps=%g lambda=%g: constant projection, correlation left empty", eps, lam)
        if cfg.train_labels is not None and cfg.test_labels is not None:
            _, rep.class_rate = nn_classify(cfg.embedding, cfg.train_labels, proj, cfg.test_labels)
    return rep


def sparsity_sweep(cfg: SweepConfig, epsilons, lambdas) -> list[EvalReport]:
    """One report per (lambda, epsilon) pair, lambda-major in the given grid order.

    A failing cell is recorded with its error message and the sweep goes on.
    """
    bk = kernels.bind(cfg.kernel, cfg.points)
    k = kernels.gram(bk)
    reports = []
    for lam in lambdas:
        try:
            model = krr_fit(bk, cfg.embedding, lam, k=k)
        except Exception as exc:  # noqa: BLE001 - recorded per cell
            log.warning("KRR fit failed for lambda=%g: %s", lam, exc)
            reports.extend(EvalReport(epsilon=e, lam=lam, error=str(exc)) for e in epsilons)
            continue
        for eps in epsilons:
            try:
                reports.append(_evaluate_cell(cfg, k, model, eps, lam))
            except Exception as exc:  # noqa: BLE001
                log.warning("sweep cell eps=%g lambda=%g failed: %s", eps, lam, exc)
                reports.append(EvalReport(epsilon=eps, lam=lam, error=str(exc)))
    return reports


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    buf.write(",".join(SWEEP_HEADER) + "\n")
    for r in reports:
        buf.write(r.csv_row() + "\n")
    return buf.getvalue()


def krr_vs_sparse_msd(krr_model, sparse_model, xs) -> float:
    """Mean squared gap between KRR and sparse predictions at ``xs``."""
    return mean_sq_discrepancy(krr_predict_batch(krr_model, xs), sparse_predict_batch(sparse_model, xs))
