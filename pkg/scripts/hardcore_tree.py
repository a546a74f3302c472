"""Hard-core model on small regular trees: recursion bound against numeric constants."""

from _common import parser, write_rows

from decomp_mc import decompose, log_sobolev_constant, zoo
from decomp_mc.bounds import alpha_k3_bound, claim7_bound, g_delta, hardcore_recursion


def main():
    p = parser(__doc__)
    p.add_argument("--delta", type=int, default=2)
    p.add_argument("--depths", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--fugacities", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0])
    p.add_argument("--starts", type=int, default=16)
    args = p.parse_args()
    rows = []
    for lam in args.fugacities:
        for d in args.depths:
            inst = zoo.hardcore_tree(args.delta, d, lam)
            pb = decompose(inst.chain, inst.partition).pi_bar
            k3 = alpha_k3_bound(pb).value
            rows.append({
                "delta": args.delta, "d": d, "fugacity": lam, "states": inst.chain.n,
                "alpha": log_sobolev_constant(inst.chain, starts=args.starts, seed=args.seed).alpha_estimate,
                "recursion_bound": hardcore_recursion(args.delta, d, lam, starts=args.starts, seed=args.seed).bound,
                "k3_bound": k3,
                "k3_alpha": log_sobolev_constant(zoo.independent_resampling_chain(pb), starts=args.starts).alpha_estimate,
                "aux_bound": claim7_bound(k3, lam),
                "aux_alpha": zoo.hardcore_aux_alpha(pb, lam, starts=args.starts, seed=args.seed),
                "g": g_delta(args.delta, lam),
            })
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
