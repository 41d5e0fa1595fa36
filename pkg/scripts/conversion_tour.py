"""Walk a gallery program through canonical form, the adversary dual and back.

    python3 scripts/conversion_tour.py --ell 3 --n 3
"""

import argparse

import numpy as np

from spanforge import gallery
from spanforge.adversary import check_dual_feasibility, dual_objective, dual_to_nbsp, dual_to_nbspwoi, nbsp_to_dual
from spanforge.span import canonicalize, complexity, evaluates, rescale


def row(label, P, f, W):
    rep = complexity(P, f, W)
    ok = evaluates(P, f, W).valid
    print(f"  {label:<22} dim V {P.target_dim:>4}  wsize {rep.wsize:8.4f}  "
          f"balanced {rep.balanced:8.4f}  valid {ok}")
    return rep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ell", type=int, default=3)
    ap.add_argument("--n", type=int, default=3)
    args = ap.parse_args()

    for build in (gallery.sparse_identity, gallery.max_woi, gallery.max_nbsp):
        P, W, f = build(args.ell, args.n)
        print(f"{build.__name__}(ell={args.ell}, n={args.n}), |D| = {len(f)}")
        rep = row("as constructed", P, f, W)
        B, WB = rescale(P, W, rep.balancing_factor())
        row("balanced", B, f, WB)
        C, WC = canonicalize(P, f, W)
        row("canonical", C, f, WC)
        sol = nbsp_to_dual(C, WC, f)
        obj = dual_objective(sol)
        print(f"  {'dual':<22} residual {check_dual_feasibility(sol, f):.1e}  objective {obj:8.4f}")
        Q, WQ = dual_to_nbsp(sol, f)
        r = row("dual -> nbsp", Q, f, WQ)
        print(f"  {'':<22} ratio to objective {r.wsize / obj:.4f} (at most 2)")
        Q, WQ = dual_to_nbspwoi(sol, f)
        r = row("dual -> nbspwoi", Q, f, WQ)
        print(f"  {'':<22} ratio to objective {r.wsize / obj:.4f} (sqrt(ell-1) = {np.sqrt(args.ell - 1):.4f})")


if __name__ == "__main__":
    main()
