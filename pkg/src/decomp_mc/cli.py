"""Command-line front end: ``decomp-mc {zoo,exact,decompose,bound,verify,recurse}``.

Exit codes: 0 success, 1 a soundness/identity check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds, zoo
from .chain import dump_chain, load_chain
from .decomp import decompose, dump_partition, load_partition
from .errors import DecompMCError
from .spectral import log_sobolev_constant, spectral_gap
from .verify import Tolerances, VerifyConfig, verify

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """Recursively convert numpy types and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def emit(payload, fmt: str, out=None) -> None:
    out = out or sys.stdout
    payload = _clean(payload)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(payload):
            w.writerow([k, repr(v) if isinstance(v, float) else v])
        out.write(buf.getvalue())
    else:
        # repr-based float output is the shortest string that round-trips exactly
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# zoo


def _parse_edge(text: str):
    try:
        u, v = text.split("-")
        return int(u), int(v)
    except ValueError as exc:
        raise InputError(f"bad edge {text!r}; expected U-V") from exc


def _edge_index(edges, text: str) -> int:
    if "-" not in text:
        return int(text)
    u, v = _parse_edge(text)
    for k, (a, b) in enumerate(edges):
        if {a, b} == {u, v}:
            return k
    raise InputError(f"edge {text} not in graph")


def build_instance(args) -> zoo.ZooInstance:
    g = args.generator
    if g == "cube":
        return zoo.boolean_cube(args.n, args.moves)
    if g == "pince-nez":
        return zoo.pince_nez(args.n, args.p)
    if g == "ising-path":
        boundary = tuple(int(s) for s in args.boundary.split(","))
        return zoo.ising_path(args.n, args.beta, boundary=boundary, n_select=args.n_select)
    if g == "matroid":
        if args.edges:
            edges = [_parse_edge(t) for t in args.edges.split(",")]
        else:
            edges = zoo.named_graph(args.graph)
        return zoo.graphic_matroid_walk(edges, _edge_index(edges, args.e), args.max_bases)
    if g == "hardcore":
        return zoo.hardcore_tree(args.delta, args.d, args.fugacity, args.N)
    if g == "product":
        return zoo.product_chain(load_chain(args.chain_a), load_chain(args.chain_b))
    if g == "random":
        rng = np.random.default_rng(args.seed)
        chain = zoo.random_reversible(args.n, rng, args.density, args.min_loop)
        part = zoo.random_partition(chain, args.m, rng)
        return zoo.ZooInstance(chain, part, {"example": "random", "n": args.n, "m": args.m,
                                             "seed": args.seed})
    if g == "two-state":
        return zoo.ZooInstance(zoo.two_state(args.a, args.b), None,
                               {"example": "two-state", "a": args.a, "b": args.b})
    if g == "cycle":
        return zoo.ZooInstance(zoo.cycle(args.n, args.step), None,
                               {"example": "cycle", "n": args.n, "step": args.step})
    raise InputError(f"unknown generator {g!r}")


def cmd_zoo(args) -> int:
    inst = build_instance(args)
    if args.out:
        prefix = Path(args.out)
        dump_chain(inst.chain, f"{prefix}.chain.json")
        files = {"chain": f"{prefix}.chain.json"}
        if inst.partition is not None:
            dump_partition(inst.partition, f"{prefix}.partition.json")
            files["partition"] = f"{prefix}.partition.json"
        emit({"metadata": inst.metadata, "states": inst.chain.n, "files": files}, args.format)
    else:
        emit(inst.to_dict(), args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# analysis commands


def cmd_exact(args) -> int:
    chain = load_chain(args.chain)
    cert = spectral_gap(chain)
    ls = log_sobolev_constant(chain, starts=args.starts, seed=args.seed, gap=cert)
    out = {"states": chain.n, "spectral": cert.to_dict(), "log_sobolev": ls.to_dict()}
    if args.state is not None:
        out["mixing"] = _mixing(chain, args.state, args.eps, cert.gap, ls.alpha_estimate)
    emit(out, args.format)
    return EXIT_OK


def _mixing(chain, x, eps, gap, alpha):
    from .spectral import lsob_mixing_estimate, poincare_mixing_estimate

    pi_x = float(chain.pi[x])
    out = {"state": x, "eps": eps, "estimate": True,
           "poincare": poincare_mixing_estimate(gap, pi_x, eps)}
    if pi_x <= math.exp(-1.0):
        out["log_sobolev"] = lsob_mixing_estimate(alpha, pi_x, eps)
    return out


def cmd_decompose(args) -> int:
    chain = load_chain(args.chain)
    rep = decompose(chain, load_partition(args.partition))
    emit(rep.to_dict(), args.format)
    return EXIT_OK


def cmd_bound(args) -> int:
    fn = bounds.poincare_bound if args.rule in bounds.POINCARE_RULES else bounds.lsob_bound
    emit(fn(args.rule, args.bar, args.min, args.gamma).to_dict(), args.format)
    return EXIT_OK


def _tolerances(args) -> Tolerances:
    return Tolerances(gap=args.tol_gap, alpha=args.tol_alpha, identity=args.tol_identity,
                      inequality=args.tol_inequality)


def cmd_verify(args) -> int:
    chain = load_chain(args.chain)
    part = load_partition(args.partition)
    cfg = VerifyConfig(seed=args.seed, starts=args.starts, n_functions=args.functions,
                       tol=_tolerances(args), timing=args.timing)
    rep = verify(chain, part, cfg, metadata={"chain_file": Path(args.chain).name,
                                             "partition_file": Path(args.partition).name})
    emit(rep.to_dict(), args.format)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _recurse_cube(n: int) -> dict:
    """Inductive cor3 on the cube with ``n + 1`` moves, checked level by level."""
    moves = n + 1
    levels = []
    ok = True
    for k in range(1, n + 1):
        inst = zoo.boolean_cube(k, moves)
        exact = spectral_gap(inst.chain).gap
        if k == 1:
            levels.append({"k": 1, "source": "exact", "value": exact, "exact": exact})
            continue
        rep = decompose(inst.chain, inst.partition)
        bar = spectral_gap(rep.projection).gap
        low = min(spectral_gap(r).gap for r in rep.restrictions)
        b = bounds.poincare_bound("cor3", bar, low, 0.0 if rep.gamma_hat <= 1e-12 else rep.gamma_hat)
        ok &= abs(b.value - exact) <= 1e-9
        levels.append({"k": k, "source": "cor3", "bar_lambda": bar, "lambda_min": low,
                       "value": b.value, "exact": exact})
    return {"family": "cube", "n": n, "closed_form": 2.0 / moves, "levels": levels,
            "crosscheck": {"passed": bool(ok), "rule": "cor3 value equals exact gap"}}


def cmd_recurse(args) -> int:
    fam = args.family
    if fam == "cube":
        out = _recurse_cube(args.n)
    elif fam == "ising":
        res = bounds.ising_recursion(args.beta, args.n, args.depth_cap)
        out = dict(res.to_dict(), family="ising", n=args.n, beta=args.beta)
        if args.n <= 10:
            exact = spectral_gap(zoo.ising_path(args.n, args.beta).chain).gap
            out["crosscheck"] = {"exact_gap": exact, "passed": bool(res.bound <= exact + 1e-9)}
    elif fam == "hardcore":
        res = bounds.hardcore_recursion(args.delta, args.d, args.fugacity, args.N,
                                        starts=args.starts, seed=args.seed)
        out = dict(res.to_dict(), family="hardcore", delta=args.delta, d=args.d,
                   fugacity=args.fugacity)
        if bounds.tree_size(args.delta, args.d) <= 10:
            inst = zoo.hardcore_tree(args.delta, args.d, args.fugacity, args.N)
            a = log_sobolev_constant(inst.chain, starts=args.starts, seed=args.seed).alpha_estimate
            out["crosscheck"] = {"alpha_estimate": a, "passed": bool(res.bound <= a + 1e-6)}
    else:
        raise InputError(f"unknown family {fam!r}")
    emit(out, args.format)
    cc = out.get("crosscheck")
    return EXIT_FAIL if cc is not None and not cc["passed"] else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _default_seed() -> int:
    env = os.environ.get("DECOMP_MC_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        return 0


COMMON_DEFAULTS = {
    "format": "json",
    "starts": 32,
    "tol_gap": 1e-9,
    "tol_alpha": 1e-6,
    "tol_identity": 1e-10,
    "tol_inequality": 1e-10,
    "out": None,
}


def build_parser() -> argparse.ArgumentParser:
    # shared flags are accepted at every level; SUPPRESS keeps an inner
    # parser from overwriting a value given to an outer one
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int,
                        help="seed for every randomized step (default: $DECOMP_MC_SEED or 0)")
    common.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    common.add_argument("--starts", type=int, help="log-Sobolev random starts (default 32)")
    common.add_argument("--tol-gap", type=float, help="Poincare soundness slack (default 1e-9)")
    common.add_argument("--tol-alpha", type=float, help="log-Sobolev soundness slack (default 1e-6)")
    common.add_argument("--tol-identity", type=float, help="identity residual cap (default 1e-10)")
    common.add_argument("--tol-inequality", type=float, help="inequality slack (default 1e-10)")

    p = argparse.ArgumentParser(prog="decomp-mc", description=__doc__, parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    zoo_common = argparse.ArgumentParser(add_help=False, parents=[common],
                                         argument_default=argparse.SUPPRESS)
    zoo_common.add_argument("--out", help="write PREFIX.chain.json and PREFIX.partition.json")
    z = sub.add_parser("zoo", help="generate an example chain and partition", parents=[zoo_common])
    gens = z.add_subparsers(dest="generator", required=True)
    g = gens.add_parser("cube", parents=[zoo_common])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--moves", type=int, default=None)
    g = gens.add_parser("pince-nez", parents=[zoo_common])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g = gens.add_parser("ising-path", parents=[zoo_common])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--beta", type=float, required=True)
    g.add_argument("--boundary", default="1,1", help="fixed end spins, e.g. 1,-1")
    g.add_argument("--n-select", type=int, default=None)
    g = gens.add_parser("matroid", parents=[zoo_common])
    g.add_argument("--graph", default="K4", help="K<n> or C<n>")
    g.add_argument("--edges", help="comma-separated U-V list (overrides --graph)")
    g.add_argument("--e", default="0", help="split element: edge index or U-V")
    g.add_argument("--max-bases", type=int, default=400)
    g = gens.add_parser("hardcore", parents=[zoo_common])
    g.add_argument("--delta", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--lambda", dest="fugacity", type=float, required=True)
    g.add_argument("--N", type=int, default=None)
    g = gens.add_parser("product", parents=[zoo_common])
    g.add_argument("--chain-a", required=True)
    g.add_argument("--chain-b", required=True)
    g = gens.add_parser("random", parents=[zoo_common])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--density", type=float, default=0.6)
    g.add_argument("--min-loop", type=float, default=0.05)
    g = gens.add_parser("two-state", parents=[zoo_common])
    g.add_argument("--a", type=float, required=True)
    g.add_argument("--b", type=float, default=None)
    g = gens.add_parser("cycle", parents=[zoo_common])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--step", type=float, default=1.0 / 3.0)
    z.set_defaults(func=cmd_zoo)

    e = sub.add_parser("exact", help="spectral gap and log-Sobolev estimate", parents=[common])
    e.add_argument("chain")
    e.add_argument("--state", type=int, default=None, help="add mixing estimates from this state")
    e.add_argument("--eps", type=float, default=0.25)
    e.set_defaults(func=cmd_exact)

    d = sub.add_parser("decompose", help="projection/restriction report", parents=[common])
    d.add_argument("chain")
    d.add_argument("partition")
    d.set_defaults(func=cmd_decompose)

    b = sub.add_parser("bound", help="evaluate one decomposition rule", parents=[common])
    b.add_argument("rule", choices=bounds.POINCARE_RULES + bounds.LSOB_RULES)
    b.add_argument("--bar", type=float, required=True, help="projection constant")
    b.add_argument("--min", type=float, required=True, help="smallest restriction constant")
    b.add_argument("--gamma", type=float, required=True, help="gamma or gamma_hat")
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("verify", help="check every bound against oracles", parents=[common])
    v.add_argument("chain")
    v.add_argument("partition")
    v.add_argument("--functions", type=int, default=1000, help="random f per inequality")
    v.add_argument("--timing", action="store_true", help="include wall-clock stats (nondeterministic)")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("recurse", help="run an inductive bound", parents=[common])
    fams = r.add_subparsers(dest="family", required=True)
    f = fams.add_parser("ising", parents=[common])
    f.add_argument("--beta", type=float, required=True)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--depth-cap", type=int, default=None)
    f = fams.add_parser("hardcore", parents=[common])
    f.add_argument("--delta", type=int, required=True)
    f.add_argument("--d", type=int, required=True)
    f.add_argument("--lambda", dest="fugacity", type=float, required=True)
    f.add_argument("--N", type=int, default=None)
    f = fams.add_parser("cube", parents=[common])
    f.add_argument("--n", type=int, required=True)
    r.set_defaults(func=cmd_recurse)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    for key, value in dict(COMMON_DEFAULTS, seed=_default_seed()).items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        return args.func(args)
    except (InputError, DecompMCError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"decomp-mc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
