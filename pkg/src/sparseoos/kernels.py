"""Kernel functions and Gram matrices.

Two kernels are supported:

* ``Gaussian(sigma)``: ``exp(-||x - x'||^2 / sigma^2)``.
* ``NormalizedHeat(t, rule)``: the truncated heat weight ``W`` divided by the
  geometric mean of the two points' degrees over the training set, which is
  the kernel behind the Nystrom extension of Laplacian eigenmaps.

A :class:`BoundKernel` freezes the training set (and, for the heat kernel, the
training degrees) so that rows for new points cost O(n).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import graph


class IsolatedPointError(ValueError):
    """A point has no neighbor under the heat kernel's rule, so its degree is zero."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


@dataclass(frozen=True)
class Gaussian:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class Ball:
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class Knn:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")


@dataclass(frozen=True)
class NormalizedHeat:
    t: float
    rule: Ball | Knn

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("temperature t must be positive")


KernelSpec = Gaussian | NormalizedHeat


# --- pointwise kernels -----------------------------------------------------


def _sqdist(x, x2):
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    diff = x - x2
    return float(diff @ diff)


def eval_gaussian(x, x2, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return float(np.exp(-_sqdist(x, x2) / sigma**2))


def heat_weight(x, x2, t: float, tau: float) -> float:
    if not (t > 0 and tau > 0):
        raise ValueError("t and tau must be positive")
    d2 = _sqdist(x, x2)
    if d2 > tau * tau:
        return 0.0
    return float(np.exp(-d2 / t))


# --- bound kernels ---------------------------------------------------------


@dataclass(frozen=True)
class BoundKernel:
    """A kernel tied to a training set.

    ``points`` is the full training set the kernel was bound to. ``centers``
    optionally restricts which training points appear as columns of
    :func:`cross_row` (used by sparse models); the heat kernel's query degree
    is still summed over every training point.
    """

    spec: KernelSpec
    points: np.ndarray
    degrees: np.ndarray | None = None
    # k-NN reach of each training point: distance to its k-th nearest neighbor
    radii: np.ndarray | None = None
    centers: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def center_points(self) -> np.ndarray:
        return self.points if self.centers is None else self.points[self.centers]

    def restrict(self, indices) -> "BoundKernel":
        indices = np.asarray(indices, dtype=np.int64)
        if isinstance(self.spec, Gaussian):
            # Gaussian rows need only the centers themselves
            return replace(self, points=self.center_points[indices], centers=None)
        base = np.arange(self.n) if self.centers is None else self.centers
        return replace(self, centers=base[indices])


def heat_weights_training(spec: NormalizedHeat, points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if isinstance(spec.rule, Ball):
        g = graph.ball_graph(points, spec.rule.tau)
    else:
        g = graph.knn_graph(points, spec.rule.k)
    return graph.weight_matrix(points, g, spec.t)


def bind(spec: KernelSpec, training) -> BoundKernel:
    training = np.array(training, dtype=float)
    if training.ndim != 2 or training.shape[0] < 1:
        raise ValueError("training set must be a non-empty 2-D array")
    if isinstance(spec, Gaussian):
        return BoundKernel(spec=spec, points=training)
    n = training.shape[0]
    if n == 1:
        return BoundKernel(spec=spec, points=training, degrees=np.ones(1),
                           radii=np.zeros(1) if isinstance(spec.rule, Knn) else None)
    radii = None
    if isinstance(spec.rule, Knn):
        if spec.rule.k >= n:
            raise ValueError(f"k={spec.rule.k} must be smaller than n={n}")
        nbrs = graph.knn_indices(training, spec.rule.k)
        radii = np.sqrt(graph.sq_dists_to(training, training[nbrs[:, -1]]))
    w = heat_weights_training(spec, training)
    degrees = w.sum(axis=1)
    if np.any(degrees <= 0):
        bad = int(np.flatnonzero(degrees <= 0)[0])
        raise IsolatedPointError(f"training point {bad} has zero degree", index=bad)
    return BoundKernel(spec=spec, points=training, degrees=degrees, radii=radii)


def gram(bk: BoundKernel) -> np.ndarray:
    """Symmetric Gram matrix over the kernel's centers."""
    pts = bk.center_points
    if isinstance(bk.spec, Gaussian):
        d = graph.pairwise_sq_dists(pts)
        k = np.exp(-d / bk.spec.sigma**2)
        np.fill_diagonal(k, 1.0)
        return 0.5 * (k + k.T)
    w = heat_weights_training(bk.spec, bk.points)
    sq = np.sqrt(bk.degrees)
    k = w / sq[:, None] / sq[None, :]
    k = np.triu(k) + np.triu(k, 1).T
    if bk.centers is not None:
        k = k[np.ix_(bk.centers, bk.centers)]
    return k


def _query_heat_row(bk: BoundKernel, x) -> np.ndarray:
    """Heat weights between ``x`` and every training point.

    For the k-NN rule a query's neighbors are its k nearest training points at
    positive distance, plus every training point whose own k-NN reach covers
    it. At a training point this reproduces that point's row of the
    symmetrised training graph.
    """
    spec = bk.spec
    d2 = graph.sq_dists_to(bk.points, x)
    if isinstance(spec.rule, Ball):
        mask = d2 <= spec.rule.tau**2
    else:
        mask = np.sqrt(d2) <= bk.radii
        positive = np.flatnonzero(d2 > 0)
        k = min(spec.rule.k, positive.size)
        if k:
            order = positive[np.argsort(d2[positive], kind="stable")[:k]]
            mask[order] = True
    return np.where(mask, np.exp(-d2 / spec.t), 0.0)


def cross_row(bk: BoundKernel, x) -> np.ndarray:
    """Kernel values between a point ``x`` and each center."""
    x = np.asarray(x, dtype=float)
    if x.shape != (bk.points.shape[1],):
        raise ValueError(f"point has shape {x.shape}, expected ({bk.points.shape[1]},)")
    if isinstance(bk.spec, Gaussian):
        return np.exp(-graph.sq_dists_to(bk.center_points, x) / bk.spec.sigma**2)
    w = _query_heat_row(bk, x)
    dx = w.sum()
    if dx <= 0:
        raise IsolatedPointError("query point has no training neighbor; cannot project")
    row = w / np.sqrt(dx * bk.degrees)
    return row if bk.centers is None else row[bk.centers]


def cross_matrix(bk: BoundKernel, xs) -> np.ndarray:
    """Stack :func:`cross_row` over the rows of ``xs``; errors name the row."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2:
        raise ValueError("expected a 2-D array of points")
    out = np.empty((xs.shape[0], bk.center_points.shape[0]))
    for i, x in enumerate(xs):
        try:
            out[i] = cross_row(bk, x)
        except IsolatedPointError as exc:
            raise IsolatedPointError(f"row {i}: {exc}", index=i) from exc
    return out


def apply_rows(bk: BoundKernel, xs, coef) -> np.ndarray:
    """``cross_matrix(bk, xs) @ coef`` computed row by row.

    Each output row is the same vector-matrix product a single-point call
    performs, so batch and per-point predictions agree bit for bit.
    """
    c = cross_matrix(bk, xs)
    coef = np.asarray(coef, dtype=float)
    out = np.empty((c.shape[0], coef.shape[1]))
    for i in range(c.shape[0]):
        out[i] = c[i] @ coef
    return out


# --- serialisation ---------------------------------------------------------


def spec_to_dict(spec: KernelSpec) -> dict:
    if isinstance(spec, Gaussian):
        return {"variant": "gaussian", "sigma": float(spec.sigma)}
    out = {"variant": "normalized_heat", "t": float(spec.t)}
    if isinstance(spec.rule, Ball):
        out.update(rule="ball", tau=float(spec.rule.tau))
    else:
        out.update(rule="knn", k=int(spec.rule.k))
    return out


def spec_from_dict(d: dict) -> KernelSpec:
    variant = d.get("variant")
    try:
        if variant == "gaussian":
            return Gaussian(float(d["sigma"]))
        if variant == "normalized_heat":
            rule = d.get("rule")
            if rule == "ball":
                r = Ball(float(d["tau"]))
            elif rule == "knn":
                r = Knn(int(d["k"]))
            else:
                raise ValueError(f"unknown neighbor rule {rule!r}")
            return NormalizedHeat(float(d["t"]), r)
    except KeyError as exc:
        raise ValueError(f"kernel spec missing parameter {exc.args[0]!r}") from None
    raise ValueError(f"unknown kernel variant {variant!r}")
