"""Swiss-roll run: support-vector count and training discrepancy per n.

    python3 scripts/swiss_roll.py --n 500 1000 2000 --epsilon 0.003
"""

import argparse
import time

from sparseoos.experiments import SwissRollConfig, swiss_roll_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1000])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sigma", type=float, default=4.0)
    ap.add_argument("--lambda", dest="lam", type=float, default=0.1)
    ap.add_argument("--epsilon", type=float, default=0.003)
    args = ap.parse_args()

    print("n,support_vectors,achieved_msd,bound,gamma_star,seconds")
    for n in args.n:
        cfg = SwissRollConfig(n=n, seed=args.seed, sigma=args.sigma, lam=args.lam, epsilon=args.epsilon)
        t0 = time.perf_counter()
        res = swiss_roll_pipeline(cfg)
        sm = res.sparsify()
        dt = time.perf_counter() - t0
        bound = cfg.epsilon**2 * (1 + cfg.options.slack)
        print(f"{n},{sm.n_support},{sm.achieved_msd:.6g},{bound:.6g},{sm.gamma_star:.6g},{dt:.1f}", flush=True)


if __name__ == "__main__":
    main()
