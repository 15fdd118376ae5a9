"""Command-line interface.

    sparseoos swissroll --n 1000 --seed 7 --out-prefix data/roll_
    sparseoos embed     --points P.csv --temperature 10 --knn 7 --dims 2 --out Y.csv [--model emb.model]
    sparseoos fit       --points P.csv --embedding Y.csv --sigma 4 --lambda 0.1 --out krr.model
    sparseoos sparsify  --model krr.model --epsilon 0.003 --out sparse.model
    sparseoos project   --model sparse.model --points Q.csv --out Yq.csv
    sparseoos sweep     --config sweep.cfg [--out table.csv]

Exit status: 0 on success, 1 on runtime or numerical failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import kernels, modelfile
from .embed import SpectralEmbedding, laplacian_eigenmaps, nystrom_extend_batch
from .kernels import Ball, Gaussian, Knn, NormalizedHeat
from .krr import KrrModel, krr_fit, krr_predict_batch
from .matio import atomic_write_text, read_matrix, write_matrix
from .metrics import SweepConfig, reports_to_csv, sparsity_sweep
from .sparse import SolveOptions, SparseModel, sparse_fit, sparse_predict_batch
from .synth import swiss_roll

log = logging.getLogger("sparseoos")


class UsageError(Exception):
    pass


def _positive(kind=float):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return parse


def _nonneg(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return v


def _add_kernel_flags(p, allow_gaussian=True):
    g = p.add_argument_group("kernel")
    if allow_gaussian:
        g.add_argument("--sigma", type=_positive(), help="Gaussian kernel width")
    g.add_argument("--temperature", type=_positive(), help="heat-kernel temperature t")
    g.add_argument("--tau", type=_positive(), help="heat-kernel neighbor radius")
    g.add_argument("--knn", type=_positive(int), help="heat-kernel neighbor count")


def _kernel_from_args(args):
    sigma = getattr(args, "sigma", None)
    heat = args.temperature is not None
    if sigma is not None and (heat or args.tau or args.knn):
        raise UsageError("--sigma cannot be combined with heat-kernel flags")
    if sigma is not None:
        return Gaussian(sigma)
    if not heat:
        raise UsageError("give --sigma, or --temperature with --tau or --knn")
    if (args.tau is None) == (args.knn is None):
        raise UsageError("heat kernel needs exactly one of --tau or --knn")
    rule = Ball(args.tau) if args.tau is not None else Knn(args.knn)
    return NormalizedHeat(args.temperature, rule)


def _add_solver_flags(p):
    d = SolveOptions()
    g = p.add_argument_group("solver")
    g.add_argument("--max-iter", type=_positive(int), default=d.max_iter)
    g.add_argument("--fista-tol", type=_positive(), default=d.tol)
    g.add_argument("--gamma-tol", type=_positive(), default=d.gamma_tol)
    g.add_argument("--sv-threshold", type=_positive(), default=d.sv_threshold)
    g.add_argument("--slack", type=_positive(), default=d.slack)


def _options_from_args(args):
    return SolveOptions(
        max_iter=args.max_iter,
        tol=args.fista_tol,
        gamma_tol=args.gamma_tol,
        sv_threshold=args.sv_threshold,
        slack=args.slack,
    )


# --- subcommands -----------------------------------------------------------


def cmd_swissroll(args):
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    roll = swiss_roll(args.n, args.seed)
    write_matrix(f"{args.out_prefix}points.csv", roll.points)
    write_matrix(f"{args.out_prefix}intrinsic.csv", roll.intrinsic)
    return 0


def cmd_embed(args):
    spec = _kernel_from_args(args)
    points = read_matrix(args.points)
    n = points.shape[0]
    if isinstance(spec.rule, Knn) and spec.rule.k >= n:
        raise UsageError(f"--knn {spec.rule.k} must be smaller than the number of points ({n})")
    if args.dims + 1 > n:
        raise UsageError(f"--dims {args.dims} too large for {n} points")
    emb = laplacian_eigenmaps(points, spec, args.dims)
    write_matrix(args.out, emb.coordinates)
    if args.model:
        modelfile.save(args.model, emb)
    print("eigenvalues=" + ",".join(repr(float(v)) for v in emb.eigenvalues))
    return 0


def cmd_fit(args):
    spec = _kernel_from_args(args)
    points = read_matrix(args.points)
    y = read_matrix(args.embedding)
    if y.shape[0] != points.shape[0]:
        raise ValueError(
            f"embedding has {y.shape[0]} rows but points has {points.shape[0]} rows"
        )
    bk = kernels.bind(spec, points)
    model = krr_fit(bk, y, args.lam)
    modelfile.save(args.out, model)
    print(f"relative_residual={model.relative_residual!r}")
    return 0


def cmd_sparsify(args):
    model = modelfile.load(args.model)
    if not isinstance(model, KrrModel):
        raise UsageError(f"{args.model} is not a KRR model")
    opts = _options_from_args(args)
    sm = sparse_fit(model, args.epsilon, opts)
    sm.extra["options"] = {
        "max_iter": opts.max_iter,
        "tol": opts.tol,
        "gamma_tol": opts.gamma_tol,
        "sv_threshold": opts.sv_threshold,
        "slack": opts.slack,
    }
    modelfile.save(args.out, sm)
    bound = args.epsilon**2 * (1 + opts.slack)
    status = "ok" if sm.achieved_msd <= bound else "violated"
    print(
        f"support_vectors={sm.n_support} n={model.kernel.n} epsilon={args.epsilon!r} "
        f"achieved_msd={sm.achieved_msd!r} bound={bound!r} guarantee={status} "
        f"gamma_star={sm.gamma_star!r} converged={str(sm.converged).lower()}"
    )
    if sm.n_support == 0:
        print("no support vectors needed: the zero function meets the tolerance")
    if not sm.converged:
        log.warning("inner solver hit its iteration cap at the final gamma")
    return 0 if status == "ok" else 1


def cmd_project(args):
    model = modelfile.load(args.model)
    points = read_matrix(args.points)
    if isinstance(model, SparseModel):
        if model.n_support == 0:
            log.warning("model has no support vectors; every projection is zero")
        out = sparse_predict_batch(model, points)
    elif isinstance(model, KrrModel):
        out = krr_predict_batch(model, points)
    elif isinstance(model, SpectralEmbedding):
        out = nystrom_extend_batch(model, points)
    else:  # pragma: no cover - load() rejects other types
        raise UsageError("unsupported model")
    write_matrix(args.out, out)
    return 0


# sweep config: flat key=value lines, '#' comments, grids as comma lists
_SWEEP_KEYS = {
    "points", "embedding", "kernel", "sigma", "temperature", "tau", "knn",
    "lambda", "epsilon", "test_points", "reference", "train_labels", "test_labels",
    "max_iter", "fista_tol", "gamma_tol", "sv_threshold", "slack",
}


class ConfigError(UsageError):
    pass


def parse_sweep_config(path):
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    raw = {}
    where = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _SWEEP_KEYS:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}: line {lineno}: duplicate key {key!r}")
        raw[key] = val
        where[key] = lineno

    def need(key):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return raw[key]

    def number(key, kind=float):
        try:
            return kind(raw[key])
        except ValueError:
            raise ConfigError(f"{path}: line {where[key]}: bad value for {key!r}") from None

    def grid(key):
        vals = []
        for tok in need(key).split(","):
            try:
                vals.append(float(tok))
            except ValueError:
                raise ConfigError(f"{path}: line {where[key]}: bad number {tok.strip()!r} in {key!r}") from None
        return vals

    def data(key):
        p = Path(raw[key])
        return read_matrix(p if p.is_absolute() else path.parent / p)

    kind = need("kernel")
    try:
        if kind == "gaussian":
            need("sigma")
            spec = Gaussian(number("sigma"))
        elif kind == "normalized_heat":
            need("temperature")
            if ("knn" in raw) == ("tau" in raw):
                raise ConfigError(f"{path}: heat kernel needs exactly one of 'knn' or 'tau'")
            rule = Knn(number("knn", int)) if "knn" in raw else Ball(number("tau"))
            spec = NormalizedHeat(number("temperature"), rule)
        else:
            raise ConfigError(f"{path}: line {where['kernel']}: unknown kernel {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"{path}: line {where['kernel']}: {exc}") from None

    d = SolveOptions()
    opts = SolveOptions(
        max_iter=number("max_iter", int) if "max_iter" in raw else d.max_iter,
        tol=number("fista_tol") if "fista_tol" in raw else d.tol,
        gamma_tol=number("gamma_tol") if "gamma_tol" in raw else d.gamma_tol,
        sv_threshold=number("sv_threshold") if "sv_threshold" in raw else d.sv_threshold,
        slack=number("slack") if "slack" in raw else d.slack,
    )
    epsilons, lambdas = grid("epsilon"), grid("lambda")
    if any(e <= 0 for e in epsilons):
        raise ConfigError(f"{path}: line {where['epsilon']}: epsilon values must be positive")
    if any(lam < 0 for lam in lambdas):
        raise ConfigError(f"{path}: line {where['lambda']}: lambda values must be nonnegative")
    need("points")
    need("embedding")
    cfg = SweepConfig(points=data("points"), embedding=data("embedding"), kernel=spec, options=opts)
    if "test_points" in raw:
        cfg.test_points = data("test_points")
    if "reference" in raw:
        cfg.reference = data("reference")
    if "train_labels" in raw:
        cfg.train_labels = data("train_labels")[:, 0].astype(np.int64)
    if "test_labels" in raw:
        cfg.test_labels = data("test_labels")[:, 0].astype(np.int64)
    return cfg, epsilons, lambdas


def cmd_sweep(args):
    cfg, epsilons, lambdas = parse_sweep_config(args.config)
    text = reports_to_csv(sparsity_sweep(cfg, epsilons, lambdas))
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparseoos",
        description="Sparse out-of-sample projection by sparsified kernel ridge regression.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("swissroll", help="generate a Swiss roll")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True, help="writes <prefix>points.csv and <prefix>intrinsic.csv")
    p.set_defaults(func=cmd_swissroll)

    p = sub.add_parser("embed", help="Laplacian eigenmaps embedding")
    p.add_argument("--points", required=True)
    _add_kernel_flags(p, allow_gaussian=False)
    p.add_argument("--dims", type=_positive(int), default=2)
    p.add_argument("--out", required=True, help="embedding CSV")
    p.add_argument("--model", help="optional embedding model file (enables Nystrom projection)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("fit", help="fit kernel ridge regression")
    p.add_argument("--points", required=True)
    p.add_argument("--embedding", required=True)
    _add_kernel_flags(p)
    p.add_argument("--lambda", dest="lam", type=_nonneg, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sparsify", help="sparsify a KRR model to tolerance epsilon")
    p.add_argument("--model", required=True)
    p.add_argument("--epsilon", type=_positive(), required=True)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("project", help="project points through a model")
    p.add_argument("--model", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("sweep", help="support-vector counts over epsilon and lambda grids")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    logging.captureWarnings(True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sparseoos {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"sparseoos {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
