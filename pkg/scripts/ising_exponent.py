"""Ising path: recursive gap bound, its polynomial rate and the exact gap where feasible."""

from _common import parser, write_rows

from decomp_mc import spectral_gap, zoo
from decomp_mc.bounds import ising_exponent, ising_recursion


def main():
    p = parser(__doc__)
    p.add_argument("--betas", type=float, nargs="+", default=[1e-6, 0.5, 1.0])
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("--exact-max", type=int, default=10, help="largest n solved exactly")
    args = p.parse_args()
    rows = []
    for beta in args.betas:
        c = ising_exponent(beta)
        for n in range(4, args.n_max + 1):
            bound = ising_recursion(beta, n).bound
            exact = spectral_gap(zoo.ising_path(n, beta).chain).gap if n <= args.exact_max else ""
            rows.append({"beta": beta, "n": n, "bound": bound, "exponent": c,
                         "bound_times_n_c": bound * n ** c, "exact_gap": exact})
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
