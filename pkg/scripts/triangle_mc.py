"""Monte Carlo table for the triangle negative witness.

    python3 scripts/triangle_mc.py --trials 2000 --seed 20240611
"""

import argparse

import numpy as np

from spanforge.triangle import RNG_ALGORITHM, monte_carlo_negative_size


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-vertices", type=int, nargs="+", default=list(range(6, 13)))
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()

    p = 6 / 27
    print(f"rng {RNG_ALGORITHM}, seed {args.seed}, {args.trials} trials per n")
    print(f"{'n':>3} {'hit rate':>9} {'z':>6} {'mean neg':>9} {'max neg':>8} {'120 n^2':>8} {'residual':>9}")
    for n in args.n_vertices:
        s = monte_carlo_negative_size(n, args.trials, args.seed)
        z = (s.hit_rate - p) / np.sqrt(p * (1 - p) / s.trials)
        print(f"{n:>3} {s.hit_rate:>9.4f} {z:>6.2f} {s.mean_negative:>9.2f} {s.max_negative:>8.1f} "
              f"{120 * n * n:>8d} {s.max_residual:>9.1e}")


if __name__ == "__main__":
    main()
