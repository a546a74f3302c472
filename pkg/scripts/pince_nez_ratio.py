"""Pince-nez: exact gap against the escape-probability bound across p."""

import numpy as np
from _common import parser, write_rows

from decomp_mc import decompose, poincare_bound, spectral_gap, zoo


def main():
    p = parser(__doc__)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--points", type=int, default=25)
    args = p.parse_args()
    n = args.n
    rows = []
    for prob in np.logspace(-5, np.log10(1 / 3), args.points):
        inst = zoo.pince_nez(n, float(prob))
        rep = decompose(inst.chain, inst.partition)
        bar = spectral_gap(rep.projection).gap
        low = min(spectral_gap(r).gap for r in rep.restrictions)
        exact = spectral_gap(inst.chain).gap
        thm1 = poincare_bound("thm1", bar, low, rep.gamma).value
        cor2 = poincare_bound("cor2", bar, low, rep.gamma_hat).value
        rows.append({"n": n, "p": prob, "gap": exact, "thm1": thm1, "cor2": cor2,
                     "ratio_thm1": exact / thm1, "p_times_n2": prob * n * n})
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
