"""End-to-end pipelines shared by the experiment scripts and the acceptance tests.

Two setups:

* **Swiss roll** — Laplacian eigenmaps on a 7-NN graph gives the training
  embedding, a Gaussian-kernel KRR fit maps points to it, and the fit is then
  sparsified at tolerance ``epsilon``.
* **Periodic sequence** — a stand-in for a gating signal: each frame is a
  64-sample Gaussian bump whose center moves with a slightly irregular
  sinusoid, plus a little white noise. A 1-D embedding learned on the first
  frames is extended to the rest and compared with the embedding of the whole
  sequence.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .embed import SpectralEmbedding, laplacian_eigenmaps
from .kernels import Gaussian, Knn, NormalizedHeat
from .krr import KrrModel, krr_fit, krr_predict_batch
from .metrics import pearson_corr
from .sparse import SolveOptions, SparseModel, sparse_fit, sparse_predict_batch
from .synth import SwissRoll, swiss_roll


@dataclass
class SwissRollConfig:
    n: int = 1000
    seed: int = 0
    temperature: float = 10.0
    knn: int = 7
    dims: int = 2
    sigma: float = 4.0
    lam: float = 0.1
    epsilon: float = 0.003
    options: SolveOptions = field(default_factory=SolveOptions)


@dataclass
class SwissRollResult:
    config: SwissRollConfig
    roll: SwissRoll
    embedding: SpectralEmbedding
    krr: KrrModel
    gram: np.ndarray
    seconds: float

    def sparsify(self, epsilon: float | None = None, lam: float | None = None) -> SparseModel:
        """Sparse model at another (epsilon, lambda), reusing the Gram matrix."""
        cfg = self.config
        krr = self.krr
        if lam is not None and lam != krr.lam:
            krr = krr_fit(krr.kernel, self.embedding.coordinates, lam, k=self.gram)
        return sparse_fit(krr, cfg.epsilon if epsilon is None else epsilon, cfg.options, k=self.gram)


def swiss_roll_pipeline(cfg: SwissRollConfig) -> SwissRollResult:
    """Generate, embed and fit KRR; sparsify separately via ``result.sparsify``."""
    t0 = time.perf_counter()
    roll = swiss_roll(cfg.n, cfg.seed)
    emb = laplacian_eigenmaps(roll.points, NormalizedHeat(cfg.temperature, Knn(cfg.knn)), cfg.dims)
    bk = kernels.bind(Gaussian(cfg.sigma), roll.points)
    k = kernels.gram(bk)
    krr = krr_fit(bk, emb.coordinates, cfg.lam, k=k)
    return SwissRollResult(cfg, roll, emb, krr, k, time.perf_counter() - t0)


@dataclass
class SequenceConfig:
    frames: int = 350
    train_frames: int = 200
    samples: int = 64
    period: float = 110.0  # nominal frames per cycle
    jitter: float = 0.15  # relative rate modulation
    jitter_period: float = 23.0
    amplitude: float = 10.0  # bump displacement in samples
    width: float = 4.0
    noise: float = 0.01
    seed: int = 3
    temperature: float = 10.0
    knn: int = 9
    lam: float = 0.1
    epsilon: float = 0.001
    options: SolveOptions = field(default_factory=SolveOptions)


def periodic_sequence(cfg: SequenceConfig):
    """Frames (``frames`` x ``samples``) and the driving sinusoid."""
    t = np.arange(cfg.frames)
    rate = 2 * np.pi / cfg.period * (1 + cfg.jitter * np.sin(t / cfg.jitter_period))
    s = np.sin(np.cumsum(rate))
    j = np.arange(cfg.samples)
    center = cfg.samples / 2 + cfg.amplitude * s
    frames = np.exp(-((j[None, :] - center[:, None]) ** 2) / (2 * cfg.width**2))
    frames += cfg.noise * np.random.default_rng(cfg.seed).standard_normal(frames.shape)
    return frames, s


@dataclass
class SequenceResult:
    n_support: int
    achieved_msd: float
    cc_sparse: float  # |Pearson| of the held-out sparse projection vs reference
    cc_krr: float
    cc_reference_signal: float  # |Pearson| of the reference embedding vs the driver


def sequence_experiment(cfg: SequenceConfig) -> SequenceResult:
    frames, s = periodic_sequence(cfg)
    spec = NormalizedHeat(cfg.temperature, Knn(cfg.knn))
    reference = laplacian_eigenmaps(frames, spec, 1).coordinates[:, 0]
    train = laplacian_eigenmaps(frames[: cfg.train_frames], spec, 1)
    krr = krr_fit(train.kernel, train.coordinates, cfg.lam)
    sm = sparse_fit(krr, cfg.epsilon, cfg.options)
    held = frames[cfg.train_frames :]
    ref_held = reference[cfg.train_frames :]
    return SequenceResult(
        n_support=sm.n_support,
        achieved_msd=sm.achieved_msd,
        cc_sparse=abs(pearson_corr(sparse_predict_batch(sm, held)[:, 0], ref_held)),
        cc_krr=abs(pearson_corr(krr_predict_batch(krr, held)[:, 0], ref_held)),
        cc_reference_signal=abs(pearson_corr(reference, s)),
    )
