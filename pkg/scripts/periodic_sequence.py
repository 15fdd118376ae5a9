"""Out-of-sample 1-D embedding of a synthetic periodic sequence.

Learns the embedding on the first frames, projects the remaining frames
through the sparse model and reports |Pearson| against the embedding of the
full sequence, for a few tolerances.

    python3 scripts/periodic_sequence.py --epsilon 0.0005 0.001 0.002
"""

import argparse
from dataclasses import replace

from sparseoos.experiments import SequenceConfig, sequence_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=float, nargs="+", default=[0.001])
    ap.add_argument("--lambda", dest="lam", type=float, default=0.1)
    ap.add_argument("--noise", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    print("epsilon,support_vectors,cc_sparse,cc_krr,cc_reference_vs_driver")
    for eps in args.epsilon:
        cfg = replace(SequenceConfig(), epsilon=eps, lam=args.lam, noise=args.noise, seed=args.seed)
        r = sequence_experiment(cfg)
        print(f"{eps},{r.n_support},{r.cc_sparse:.4f},{r.cc_krr:.4f},{r.cc_reference_signal:.4f}", flush=True)


if __name__ == "__main__":
    main()
