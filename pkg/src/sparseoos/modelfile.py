"""Text model files for embeddings, KRR models and sparse models.

Each file is a list of ``[section]`` blocks (see :mod:`sparseoos.matio`). The
``[model]`` block names the type; ``[kernel]`` holds the kernel spec as
``key=value`` lines; numeric arrays are CSV blocks.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import kernels
from .embed import SpectralEmbedding
from .kernels import BoundKernel, NormalizedHeat
from .krr import KrrModel
from .matio import (
    MatrixFormatError,
    atomic_write_text,
    format_sections,
    parse_sections,
    section_dict,
    section_matrix,
)
from .sparse import SparseModel


def _kernel_sections(bk: BoundKernel):
    return [("kernel", kernels.spec_to_dict(bk.spec))]


def dump_embedding(emb: SpectralEmbedding) -> str:
    return format_sections(
        [("model", {"type": "embedding", "skip_trivial": str(emb.skip_trivial).lower()})]
        + _kernel_sections(emb.kernel)
        + [
            ("eigenvalues", emb.eigenvalues[None, :]),
            ("points", emb.kernel.points),
            ("coordinates", emb.coordinates),
        ]
    )


def dump_krr(model: KrrModel) -> str:
    return format_sections(
        [("model", {"type": "krr"})]
        + _kernel_sections(model.kernel)
        + [
            ("lambda", np.array([[model.lam]])),
            ("fit", {"relative_residual": model.relative_residual}),
            ("points", model.kernel.points),
            ("alpha", model.alpha_hat),
        ]
    )


def dump_sparse(model: SparseModel) -> str:
    bk = model.kernel
    meta = {
        "epsilon": float(model.epsilon),
        "gamma_star": float(model.gamma_star),
        "achieved_msd": float(model.achieved_msd),
        "converged": str(bool(model.converged)).lower(),
        "n_support": model.n_support,
        "p": model.p,
        "dims": bk.points.shape[1],
    }
    for key in ("lambda", "dual_value", "n_solves"):
        if key in model.extra:
            v = model.extra[key]
            meta[key] = float(v) if isinstance(v, float) else v
    for key, v in model.extra.get("options", {}).items():
        meta[f"option.{key}"] = v
    sections = [("model", {"type": "sparse"})] + _kernel_sections(bk) + [("meta", meta)]
    if isinstance(bk.spec, NormalizedHeat):
        # the query degree sums over the whole training set
        sections.append(("degrees", bk.degrees[None, :]))
        if bk.radii is not None:
            sections.append(("radii", bk.radii[None, :]))
        sections.append(("training_points", bk.points))
    if model.n_support:
        sections += [
            ("support", model.support[:, None]),
            ("support_points", bk.center_points),
            ("alpha_tilde", model.alpha_tilde),
        ]
    return format_sections(sections)


def save(path, model) -> None:
    if isinstance(model, SparseModel):
        text = dump_sparse(model)
    elif isinstance(model, KrrModel):
        text = dump_krr(model)
    elif isinstance(model, SpectralEmbedding):
        text = dump_embedding(model)
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    atomic_write_text(path, text)


def _kernel_spec(sections, path):
    try:
        return kernels.spec_from_dict(section_dict(sections, "kernel", path))
    except ValueError as exc:
        raise MatrixFormatError(str(exc), None, path) from None


def _load_sparse(sections, path) -> SparseModel:
    spec = _kernel_spec(sections, path)
    meta = section_dict(sections, "meta", path)
    n_support = int(meta["n_support"])
    p = int(meta["p"])
    dims = int(meta["dims"])
    if n_support:
        support = section_matrix(sections, "support", path)[:, 0].astype(np.int64)
        support_points = section_matrix(sections, "support_points", path)
        alpha = section_matrix(sections, "alpha_tilde", path)
    else:
        support = np.zeros(0, dtype=np.int64)
        support_points = np.zeros((0, dims))
        alpha = np.zeros((0, p))
    if isinstance(spec, NormalizedHeat):
        training = section_matrix(sections, "training_points", path)
        degrees = section_matrix(sections, "degrees", path)[0]
        radii = section_matrix(sections, "radii", path)[0] if "radii" in sections else None
        bk = BoundKernel(spec=spec, points=training, degrees=degrees, radii=radii, centers=support)
    else:
        bk = BoundKernel(spec=spec, points=support_points)
    extra = {}
    for key in ("lambda", "dual_value"):
        if key in meta:
            extra[key] = float(meta[key])
    if "n_solves" in meta:
        extra["n_solves"] = int(meta["n_solves"])
    options = {}
    for key, val in meta.items():
        if key.startswith("option."):
            name = key[len("option."):]
            options[name] = int(val) if name == "max_iter" else float(val)
    if options:
        extra["options"] = options
    return SparseModel(
        kernel=bk,
        support=support,
        alpha_tilde=alpha,
        epsilon=float(meta["epsilon"]),
        gamma_star=float(meta["gamma_star"]),
        achieved_msd=float(meta["achieved_msd"]),
        converged=meta.get("converged", "true") == "true",
        extra=extra,
    )


def load(path):
    """Read any model file; returns a SpectralEmbedding, KrrModel or SparseModel."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    sections = parse_sections(text, path)
    kind = section_dict(sections, "model", path).get("type")
    if kind == "sparse":
        return _load_sparse(sections, path)
    spec = _kernel_spec(sections, path)
    points = section_matrix(sections, "points", path)
    bk = kernels.bind(spec, points)
    if kind == "krr":
        lam = float(section_matrix(sections, "lambda", path)[0, 0])
        fit = section_dict(sections, "fit", path) if "fit" in sections else {}
        return KrrModel(
            kernel=bk,
            alpha_hat=section_matrix(sections, "alpha", path),
            lam=lam,
            relative_residual=float(fit.get("relative_residual", "nan")),
        )
    if kind == "embedding":
        meta = section_dict(sections, "model", path)
        return SpectralEmbedding(
            coordinates=section_matrix(sections, "coordinates", path),
            eigenvalues=section_matrix(sections, "eigenvalues", path)[0],
            kernel=bk,
            skip_trivial=meta.get("skip_trivial", "true") == "true",
        )
    raise MatrixFormatError(f"unknown model type {kind!r}", None, path)
