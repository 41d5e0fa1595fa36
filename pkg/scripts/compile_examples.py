"""Compile the star learning graph and the two-query parity algorithm.

    python3 scripts/compile_examples.py
"""

import numpy as np

from spanforge.algorithms import compile_nbsp, compile_woi, deutsch_parity_example
from spanforge.gallery import star_learning_graph
from spanforge.learning_graph import lg_complexity, lg_to_nbsp, lg_to_nbspwoi
from spanforge.span import complexity, evaluates


def main():
    print("star learning graph on the sparse identity (outputs != 0)")
    for ell in (2, 3):
        for n in (2, 3, 4):
            G, F, f = star_learning_graph(ell, n)
            C = lg_complexity(G, F)[2]
            for name, fn in (("woi", lg_to_nbspwoi), ("nbsp", lg_to_nbsp)):
                P, W = fn(G, F, f)
                rep = complexity(P, f, W)
                print(f"  ell={ell} n={n} {name:<4} C={C:.3f} balanced={rep.balanced:.3f} "
                      f"(4C={4 * C:.3f}) columns={P.H_dim} valid={evaluates(P, f, W).valid}")
    alg, f = deutsch_parity_example()
    print(f"two-query parity, Q={alg.Q}")
    for name, fn in (("woi", compile_woi), ("nbsp", compile_nbsp)):
        P, W = fn(alg, f)
        rep = complexity(P, f, W)
        print(f"  {name:<4} pos={rep.wsize_plus:.4f} neg={rep.wsize_minus:.4f} "
              f"balanced={rep.balanced:.4f} valid={evaluates(P, f, W).valid}")
    print(f"  sqrt(2Q(2Q+2)) = {np.sqrt(2 * alg.Q * (2 * alg.Q + 2)):.4f}")


if __name__ == "__main__":
    main()
