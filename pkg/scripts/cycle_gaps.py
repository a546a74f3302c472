"""Spectral gap of the lazy 1/3-step n-cycle against its closed form."""

import math

from _common import parser, write_rows

from decomp_mc import spectral_gap, zoo


def main():
    p = parser(__doc__)
    p.add_argument("--n-max", type=int, default=64)
    args = p.parse_args()
    rows = []
    for n in range(3, args.n_max + 1):
        gap = spectral_gap(zoo.cycle(n)).gap
        exact = (2 / 3) * (1 - math.cos(2 * math.pi / n))
        rows.append({"n": n, "gap": gap, "closed_form": exact, "abs_err": abs(gap - exact)})
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
