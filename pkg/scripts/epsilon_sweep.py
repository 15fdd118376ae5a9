"""Support vectors against error tolerance on the Swiss roll, for several lambda and sigma.

    python3 scripts/epsilon_sweep.py --n 1000 > sweep.csv
"""

import argparse

from sparseoos import kernels
from sparseoos.experiments import SwissRollConfig, swiss_roll_pipeline
from sparseoos.kernels import Gaussian
from sparseoos.krr import krr_fit
from sparseoos.sparse import sparse_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[2.0, 4.0])
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.01, 0.1, 1.0])
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.001, 0.002, 0.003, 0.005, 0.01])
    args = ap.parse_args()

    base = swiss_roll_pipeline(SwissRollConfig(n=args.n, seed=args.seed))
    y = base.embedding.coordinates
    print("sigma,lambda,epsilon,support_vectors,achieved_msd")
    for sigma in args.sigmas:
        bk = kernels.bind(Gaussian(sigma), base.roll.points)
        k = kernels.gram(bk)
        for lam in args.lambdas:
            krr = krr_fit(bk, y, lam, k=k)
            for eps in args.epsilons:
                sm = sparse_fit(krr, eps, k=k)
                print(f"{sigma},{lam},{eps},{sm.n_support},{sm.achieved_msd:.6g}", flush=True)


if __name__ == "__main__":
    main()
