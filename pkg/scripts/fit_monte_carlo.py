"""Monte-Carlo check of the exponential fitter under additive Gaussian noise.

This is the run the noisy-recovery test bounds were taken from.
"""
import argparse

import numpy as np

from rmg.analysis import fit_exponential


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--A", type=float, default=0.91)
    ap.add_argument("--B", type=float, default=3.68)
    ap.add_argument("--sigma", type=float, default=0.02)
    ap.add_argument("--seeds", type=int, default=50)
    args = ap.parse_args()

    X = np.arange(1, 101) / 100.0
    clean = args.A * (1 - np.exp(-args.B * X))
    fits = [fit_exponential(X, clean + np.random.default_rng(s).normal(0, args.sigma, X.size)) for s in range(args.seeds)]
    A = np.array([m.A for m in fits])
    B = np.array([m.B_coef for m in fits])
    for name, v in (("A", A), ("B", B)):
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        print(f"{name}: median {med:.4f}  IQR {q1:.4f}..{q3:.4f}")
    print(f"converged {sum(m.converged for m in fits)}/{len(fits)}")


if __name__ == "__main__":
    main()
