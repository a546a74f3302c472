"""Generators for the example chains and their canonical partitions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np

from .chain import ReversibleChain, build_chain
from .decomp import Partition, make_partition, validate_partition
from .errors import (
    DecompMCError,
    Disconnected,
    InvalidPartition,
    NegativeLoop,
    NoFractionalMatching,
    TooManyBases,
)

LOOP_TOL = 1e-12


@dataclass(frozen=True)
class ZooInstance:
    chain: ReversibleChain
    partition: Optional[Partition]
    metadata: dict = field(default_factory=dict)

    @property
    def canonical_partition(self):
        return self.partition

    def to_dict(self) -> dict:
        return {
            "chain": self.chain.to_dict(),
            "partition": None if self.partition is None else self.partition.to_dict(),
            "metadata": self.metadata,
        }


def _fill_loops(P: np.ndarray) -> np.ndarray:
    np.fill_diagonal(P, 0.0)
    loops = 1.0 - P.sum(axis=1)
    if np.any(loops < -LOOP_TOL):
        raise NegativeLoop(f"loop probability {loops.min()!r} at state {int(np.argmin(loops))}")
    np.fill_diagonal(P, np.clip(loops, 0.0, None))
    return P


def _uniform(n):
    return np.full(n, 1.0 / n)


# ---------------------------------------------------------------------------
# cycles and pince-nez


def cycle(n: int, step: float = 1.0 / 3.0) -> ReversibleChain:
    """Walk on the ``n``-cycle moving to each neighbour with probability ``step``."""
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    P = np.zeros((n, n))
    for x in range(n):
        P[x, (x + 1) % n] += step
        P[x, (x - 1) % n] += step
    return build_chain(_fill_loops(P), _uniform(n))


def pince_nez(n: int, p: float) -> ZooInstance:
    """Two ``n``-cycles (step 1/3) joined by one edge of probability ``p``.

    States ``0..n-1`` form the first cycle, ``n..2n-1`` the second; the bridge
    joins state ``0`` and state ``n``.
    """
    if n < 3 or not 0 < p <= 1.0 / 3.0:
        raise ValueError("need n >= 3 and 0 < p <= 1/3")
    P = np.zeros((2 * n, 2 * n))
    for base in (0, n):
        for k in range(n):
            x = base + k
            P[x, base + (k + 1) % n] += 1.0 / 3.0
            P[x, base + (k - 1) % n] += 1.0 / 3.0
    P[0, n] = P[n, 0] = p
    chain = build_chain(_fill_loops(P), _uniform(2 * n))
    part = make_partition(chain, [0] * n + [1] * n)
    return ZooInstance(chain, part, {"example": "pince-nez", "n": n, "p": p, "bridge": [0, n]})


# ---------------------------------------------------------------------------
# products


def product_chain(X: ReversibleChain, Y: ReversibleChain) -> ZooInstance:
    """Chain on ``X x Y`` moving one coordinate per step; blocks indexed by ``x``.

    State ``(x, y)`` has index ``x * |Y| + y``. Requires
    ``P_X(x, x) + P_Y(y, y) >= 1`` for every pair.
    """
    nx_, ny = X.n, Y.n
    dx, dy = np.diag(X.P), np.diag(Y.P)
    if np.min(dx[:, None] + dy[None, :]) < 1.0 - LOOP_TOL:
        raise NegativeLoop("product needs P_X(x,x) + P_Y(y,y) >= 1 for all pairs")
    offX = X.P - np.diag(dx)
    offY = Y.P - np.diag(dy)
    P = np.kron(offX, np.eye(ny)) + np.kron(np.eye(nx_), offY)
    P += np.diag(np.clip((dx[:, None] + dy[None, :] - 1.0).ravel(), 0.0, None))
    pi = np.kron(X.pi, Y.pi)
    chain = build_chain(P, pi)
    part = make_partition(chain, np.repeat(np.arange(nx_), ny))
    return ZooInstance(chain, part, {"example": "product", "nx": nx_, "ny": ny})


def two_state(a: float, b: Optional[float] = None) -> ReversibleChain:
    """Two-state chain with ``P(0,1) = a`` and ``P(1,0) = b`` (default ``b = a``)."""
    b = a if b is None else b
    return build_chain([[1.0 - a, a], [b, 1.0 - b]])


# ---------------------------------------------------------------------------
# Ising path


def _ising_energy(spins: np.ndarray, boundary) -> float:
    left, right = boundary
    ext = np.concatenate(([left], spins, [right]))
    return float(np.sum(1.0 - ext[:-1] * ext[1:]) / 2.0)


def ising_path(n: int, beta: float, boundary=(1, 1), n_select: Optional[int] = None) -> ZooInstance:
    """Single-site heat-bath dynamics for the ferromagnetic Ising path.

    Sites ``0..n-1`` sit between two frozen spins ``boundary = (left,
    right)``; the energy counts unlike adjacent pairs including the two
    bonds to the frozen spins. Each step picks a site with probability
    ``1/n_select`` (default ``n``; larger values model a segment embedded in
    a longer path) and resamples it from its conditional law. Bit ``i`` of a
    state index is 1 when site ``i`` carries spin ``+1``. The canonical
    partition splits on the spin at ``floor(n/2)``: block 0 is ``+1``.
    """
    if n < 1 or beta < 0:
        raise ValueError("need n >= 1 and beta >= 0")
    n_select = n if n_select is None else int(n_select)
    if n_select < n:
        raise ValueError("n_select must be >= n")
    S = 1 << n
    spins = np.array([[1 if (s >> i) & 1 else -1 for i in range(n)] for s in range(S)], dtype=float)
    H = np.array([_ising_energy(sp, boundary) for sp in spins])
    weight = np.exp(-beta * (H - H.min()))
    pi = weight / weight.sum()
    P = np.zeros((S, S))
    for s in range(S):
        for i in range(n):
            up, down = s | (1 << i), s & ~(1 << i)
            wu, wd = weight[up], weight[down]
            p_up = wu / (wu + wd)
            P[s, up] += p_up / n_select
            P[s, down] += (1.0 - p_up) / n_select
    P[np.diag_indices(S)] += 1.0 - P.sum(axis=1)
    chain = build_chain(P, pi)
    part = None
    if n >= 2:
        mid = n // 2
        part = make_partition(chain, [0 if (s >> mid) & 1 else 1 for s in range(S)])
    meta = {"example": "ising-path", "n": n, "beta": beta, "boundary": list(boundary),
            "n_select": n_select, "split_site": n // 2}
    return ZooInstance(chain, part, meta)


# ---------------------------------------------------------------------------
# Boolean cube


def boolean_cube(n: int, moves: Optional[int] = None) -> ZooInstance:
    """Walk on ``{0,1}^n`` flipping each coordinate with probability ``1/moves``.

    ``moves`` defaults to ``n + 1`` (one extra move is the loop). The
    canonical partition splits on the last coordinate.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    moves = n + 1 if moves is None else int(moves)
    if moves < n:
        raise ValueError("moves must be >= n")
    S = 1 << n
    P = np.zeros((S, S))
    for s in range(S):
        for i in range(n):
            P[s, s ^ (1 << i)] = 1.0 / moves
    chain = build_chain(_fill_loops(P), _uniform(S))
    part = None
    if n >= 2:
        part = make_partition(chain, [(s >> (n - 1)) & 1 for s in range(S)])
    return ZooInstance(chain, part, {"example": "cube", "n": n, "moves": moves})


# ---------------------------------------------------------------------------
# graphic matroid bases-exchange walk


def named_graph(name: str) -> list:
    """Edge lists for ``K<n>`` (complete) and ``C<n>`` (cycle) graphs."""
    kind, size = name[0].upper(), int(name[1:])
    if kind == "K":
        return [(u, v) for u in range(size) for v in range(u + 1, size)]
    if kind == "C":
        return [(u, (u + 1) % size) for u in range(size)]
    raise ValueError(f"unknown graph name {name!r}")


def spanning_trees(edges, max_bases: int = 400) -> list:
    """All spanning trees as sorted tuples of edge indices (backtracking)."""
    verts = sorted({v for e in edges for v in e})
    index = {v: k for k, v in enumerate(verts)}
    nv = len(verts)
    r = nv - 1
    E = [(index[u], index[v]) for u, v in edges]
    if any(u == v for u, v in E):
        raise ValueError("self-loops are not supported")
    g = nx.MultiGraph()
    g.add_nodes_from(range(nv))
    g.add_edges_from(E)
    if nv == 0 or not nx.is_connected(g):
        raise Disconnected("graph must be connected")

    out = []

    def find(parent, a):
        while parent[a] != a:
            a = parent[a]
        return a

    def rec(k, chosen, parent):
        if len(chosen) == r:
            out.append(tuple(chosen))
            if len(out) > max_bases:
                raise TooManyBases(f"more than {max_bases} spanning trees")
            return
        if len(E) - k < r - len(chosen):
            return
        u, v = E[k]
        ru, rv = find(parent, u), find(parent, v)
        if ru != rv:
            p2 = list(parent)
            p2[ru] = rv
            rec(k + 1, chosen + [k], p2)
        rec(k + 1, chosen, parent)

    rec(0, [], list(range(nv)))
    return out


def graphic_matroid_walk(edges, e: Optional[int] = 0, max_bases: int = 400) -> ZooInstance:
    """Bases-exchange walk on the spanning trees of a graph.

    From tree ``X`` pick an edge ``a`` and a tree edge ``b`` uniformly
    (``r * m`` choices); move to ``X + a - b`` when that is a tree, otherwise
    stay. The canonical partition splits on whether edge index ``e`` is in
    the tree: block 0 excludes it, block 1 contains it. ``e=None`` skips the
    partition (useful when every split has a single-tree side, as on a cycle).
    """
    edges = [tuple(x) for x in edges]
    trees = spanning_trees(edges, max_bases)
    m = len(edges)
    r = len(trees[0])
    if e is not None and not 0 <= e < m:
        raise ValueError(f"edge index {e} out of range")
    pos = {frozenset(t): k for k, t in enumerate(trees)}
    S = len(trees)
    P = np.zeros((S, S))
    rate = 1.0 / (r * m)
    for k, t in enumerate(trees):
        X = frozenset(t)
        for a in range(m):
            if a in X:
                continue
            for b in X:
                j = pos.get((X - {b}) | {a})
                if j is not None:
                    P[k, j] += rate
    chain = build_chain(_fill_loops(P), _uniform(S),
                        labels=["-".join(map(str, t)) for t in trees])
    part = None
    if e is not None:
        block_of = [1 if e in t else 0 for t in trees]
        if len(set(block_of)) < 2:
            raise InvalidPartition(f"edge {e} lies in every spanning tree or in none")
        part = make_partition(chain, block_of)
    meta = {"example": "matroid", "edges": [list(x) for x in edges], "e": e,
            "r": r, "m": m, "bases": S}
    return ZooInstance(chain, part, meta)


@dataclass(frozen=True)
class FractionalMatching:
    """Weights ``w[a, b]`` between block-0 state ``a`` and block-1 state ``b``."""

    w: np.ndarray
    rows: np.ndarray  # state indices of block 0
    cols: np.ndarray  # state indices of block 1


def fractional_matching(instance: ZooInstance, tol: float = 1e-10) -> FractionalMatching:
    """Cross-block weights with row sums ``pi(block 1)`` and column sums ``pi(block 0)``.

    Solved as a max-flow (Edmonds-Karp on nodes inserted in index order, so
    the answer is reproducible) with arcs only where ``P(x, y) > 0``.
    """
    chain, part = instance.chain, instance.partition
    if part is None or part.m != 2:
        raise ValueError("fractional matching needs a two-block partition")
    A, B = part.block(0), part.block(1)
    mass0, mass1 = float(chain.pi[A].sum()), float(chain.pi[B].sum())
    # rescale so capacities are O(1); weights are mapped back at the end
    scale = 1.0 / min(mass0, mass1)
    g = nx.DiGraph()
    g.add_node("s")
    for a in A:
        g.add_edge("s", ("a", int(a)), capacity=mass1 * scale)
    for a in A:
        for b in B:
            if chain.P[a, b] > 0:
                g.add_edge(("a", int(a)), ("b", int(b)))
    for b in B:
        g.add_edge(("b", int(b)), "t", capacity=mass0 * scale)
    g.add_node("t")
    value, flow = nx.maximum_flow(g, "s", "t", flow_func=nx.algorithms.flow.edmonds_karp)
    supply = len(A) * mass1 * scale
    demand = len(B) * mass0 * scale
    if abs(supply - demand) > tol * max(1.0, supply) or value < supply * (1 - tol):
        raise NoFractionalMatching(f"max flow {value / scale!r} below required {supply / scale!r}")
    w = np.zeros((len(A), len(B)))
    for ia, a in enumerate(A):
        for (_, b), v in flow[("a", int(a))].items():
            w[ia, int(np.searchsorted(B, b))] = v / scale
    rows_ok = np.allclose(w.sum(axis=1), mass1, atol=tol, rtol=0)
    cols_ok = np.allclose(w.sum(axis=0), mass0, atol=tol, rtol=0)
    if not (rows_ok and cols_ok):
        raise NoFractionalMatching("flow does not meet the marginal constraints")
    w.setflags(write=False)
    return FractionalMatching(w=w, rows=A, cols=B)


def thin_matroid_chain(instance: ZooInstance, w: FractionalMatching, boosted: bool = False,
                       rate: Optional[float] = None) -> ReversibleChain:
    """Replace cross-block moves by the matching weights.

    ``P_hat(x, y) = w(x, y) * rate`` with ``rate = 1/(r m)``; the boosted
    variant divides by ``min(pi(block 0), pi(block 1))`` as well. Moves inside
    blocks are kept and loops are refilled.
    """
    chain, part = instance.chain, instance.partition
    if rate is None:
        rate = 1.0 / (instance.metadata["r"] * instance.metadata["m"])
    A, B = w.rows, w.cols
    mass0, mass1 = float(chain.pi[A].sum()), float(chain.pi[B].sum())
    c = rate / min(mass0, mass1) if boosted else rate
    P = np.array(chain.P)
    cross = np.asarray(w.w) * c
    P[np.ix_(A, B)] = cross
    P[np.ix_(B, A)] = cross.T
    P = _fill_loops(P)
    off = P - np.diag(np.diag(P))
    if boosted:
        if np.max(off) > rate * (1 + 1e-12):
            raise DecompMCError("boosted chain has a move above 1/(rm)")
    elif np.any(off > chain.P * (1 + 1e-12) + 1e-15):
        raise DecompMCError("thinned chain exceeds the original transition probabilities")
    return build_chain(P, chain.pi)


# ---------------------------------------------------------------------------
# hard-core model on a regular tree


def regular_tree(Delta: int, d: int):
    """Children lists of the depth-``d`` tree with branching ``Delta`` (BFS order, root 0)."""
    children = [[]]
    frontier = [0]
    for _ in range(d):
        nxt = []
        for v in frontier:
            for _ in range(Delta):
                children.append([])
                c = len(children) - 1
                children[v].append(c)
                nxt.append(c)
        frontier = nxt
    return children


def independent_sets(children, max_states: int = 200000) -> list:
    nv = len(children)
    parent = [-1] * nv
    for v, cs in enumerate(children):
        for c in cs:
            parent[c] = v
    out = []

    def rec(v, mask):
        if v == nv:
            out.append(mask)
            if len(out) > max_states:
                raise TooManyBases(f"more than {max_states} independent sets")
            return
        rec(v + 1, mask)
        if parent[v] < 0 or not (mask >> parent[v]) & 1:
            rec(v + 1, mask | (1 << v))

    rec(0, 0)
    return sorted(out)


def hardcore_tree(Delta: int, d: int, fugacity: float, N: Optional[int] = None) -> ZooInstance:
    """Glauber dynamics for the hard-core model on the rooted regular tree.

    Each step picks one of ``N`` clock slots; slots ``0..n-1`` are the tree
    vertices. The chosen vertex is removed with probability
    ``1/(1+fugacity)`` or added with probability ``fugacity/(1+fugacity)``
    when that leaves an independent set. Canonical partition on the root
    ``v = 0``: block 0 holds sets containing ``v``, block 1 sets to which
    ``v`` could be added, block 2 the rest. For ``d = 0`` the third block is
    empty and no partition is attached.
    """
    if Delta < 1 or d < 0 or not fugacity > 0:
        raise ValueError("need Delta >= 1, d >= 0, fugacity > 0")
    children = regular_tree(Delta, d)
    n = len(children)
    N = n if N is None else int(N)
    if N < n:
        raise ValueError(f"N = {N} below vertex count {n}")
    nbr = [set(cs) for cs in children]
    for v, cs in enumerate(children):
        for c in cs:
            nbr[c].add(v)
    sets = independent_sets(children)
    pos = {s: k for k, s in enumerate(sets)}
    S = len(sets)
    lam = fugacity
    P = np.zeros((S, S))
    for k, s in enumerate(sets):
        for z in range(n):
            if (s >> z) & 1:
                P[k, pos[s & ~(1 << z)]] += 1.0 / ((1.0 + lam) * N)
            elif not any((s >> u) & 1 for u in nbr[z]):
                P[k, pos[s | (1 << z)]] += lam / ((1.0 + lam) * N)
    sizes = np.array([bin(s).count("1") for s in sets])
    logw = sizes * math.log(lam)
    w = np.exp(logw - logw.max())
    pi = w / w.sum()
    chain = build_chain(_fill_loops(P), pi)
    block_of = []
    for s in sets:
        if s & 1:
            block_of.append(0)
        elif not any((s >> c) & 1 for c in children[0]):
            block_of.append(1)
        else:
            block_of.append(2)
    part = make_partition(chain, block_of) if d >= 1 else None
    meta = {"example": "hardcore", "Delta": Delta, "d": d, "fugacity": lam, "n": n, "N": N,
            "states": S}
    return ZooInstance(chain, part, meta)


def hardcore_bijection(instance: ZooInstance) -> list:
    """Pairs ``(x, nu(x))``: each root-occupied set matched with the set minus the root."""
    labels = instance.partition.labels()
    n = instance.chain.n
    # state index order follows sorted bitmasks; rebuild them
    meta = instance.metadata
    sets = independent_sets(regular_tree(meta["Delta"], meta["d"]))
    pos = {s: k for k, s in enumerate(sets)}
    assert len(sets) == n
    return [(k, pos[s & ~1]) for k, s in enumerate(sets) if labels[k] == 0]


def hardcore_aux_chain(pi_bar, fugacity: float, slowdown: float = 1.0) -> ReversibleChain:
    """Three-state birth-death chain on the root blocks.

    Off-diagonal entries ``P(1,2) = 1/(1+fugacity)`` (removing the root,
    ``N`` times the projection rate), ``P(2,1) = fugacity/(1+fugacity)``,
    ``P(2,3) = min(1, pi3/pi2)``, ``P(3,2) = min(1, pi2/pi3)``, all divided by
    ``slowdown``. Block masses must satisfy ``pi1 = fugacity * pi2``. Raises
    :class:`NegativeLoop` when the rows overflow; see
    :func:`hardcore_aux_alpha` for the constant of the undivided form.
    """
    w = np.asarray(getattr(pi_bar, "weights", pi_bar), dtype=float)
    if w.shape != (3,) or np.any(w <= 0):
        raise ValueError("need a positive distribution on three blocks")
    w = w / w.sum()
    lam = fugacity
    P = np.zeros((3, 3))
    P[0, 1] = 1.0 / (1.0 + lam)
    P[1, 0] = lam / (1.0 + lam)
    P[1, 2] = min(1.0, w[2] / w[1])
    P[2, 1] = min(1.0, w[1] / w[2])
    P /= slowdown
    P = _fill_loops(P)
    resid = float(np.max(np.abs(w @ P - w)))
    if resid > 1e-12:
        raise DecompMCError(f"block masses are not stationary (residual {resid:.2e}); "
                            "pi1 must equal fugacity * pi2")
    return build_chain(P, w)


def aux_overflow(pi_bar, fugacity: float) -> float:
    """Largest off-diagonal row sum of the undivided three-state chain."""
    w = np.asarray(getattr(pi_bar, "weights", pi_bar), dtype=float)
    lam = fugacity
    return max(1.0 / (1.0 + lam), lam / (1.0 + lam) + min(1.0, w[2] / w[1]), min(1.0, w[1] / w[2]))


def hardcore_aux_alpha(pi_bar, fugacity: float, starts: int = 16, seed: int = 0) -> float:
    """Log-Sobolev constant of the three-state block chain.

    The constant only depends on the Dirichlet form, so when a row of the
    undivided chain sums past 1 the chain is slowed down by that factor and
    the resulting constant multiplied back.
    """
    from .spectral import log_sobolev_constant

    s = max(1.0, aux_overflow(pi_bar, fugacity))
    chain = hardcore_aux_chain(pi_bar, fugacity, slowdown=s)
    return s * log_sobolev_constant(chain, starts=starts, seed=seed).alpha_estimate


def independent_resampling_chain(pi_bar) -> ReversibleChain:
    """Chain jumping to ``j`` with probability ``pi_bar(j)`` from every state."""
    w = np.asarray(getattr(pi_bar, "weights", pi_bar), dtype=float)
    w = w / w.sum()
    return build_chain(np.tile(w, (w.size, 1)), w)


# ---------------------------------------------------------------------------
# random instances


def random_reversible(n: int, rng: np.random.Generator, density: float = 0.6,
                      min_loop: float = 0.05) -> ReversibleChain:
    """Random irreducible reversible chain.

    Symmetric edge weights on a random graph (with a Hamiltonian path added
    for connectivity) divided by random stationary masses, scaled so every
    holding probability is at least ``min_loop``.
    """
    pi = rng.uniform(0.2, 1.0, size=n)
    pi /= pi.sum()
    Q = np.triu(rng.uniform(0.0, 1.0, size=(n, n)) * (rng.uniform(size=(n, n)) < density), 1)
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        u, v = min(a, b), max(a, b)
        if Q[u, v] == 0:
            Q[u, v] = rng.uniform(0.1, 1.0)
    Q = Q + Q.T
    rows = Q.sum(axis=1) / pi
    Q *= (1.0 - min_loop) / rows.max() * rng.uniform(0.3, 1.0)
    P = Q / pi[:, None]
    P[np.diag_indices(n)] = 1.0 - P.sum(axis=1)
    return build_chain(P, pi)


def random_partition(chain: ReversibleChain, m: int, rng: np.random.Generator,
                     max_tries: int = 2000) -> Partition:
    """Uniformly random labelling into ``m`` blocks, redrawn until valid."""
    for _ in range(max_tries):
        labels = rng.integers(0, m, size=chain.n)
        try:
            part = Partition(tuple(labels))
            if part.m != m:
                continue
            validate_partition(chain, part)
            return part
        except (InvalidPartition, DecompMCError):
            continue
    raise InvalidPartition(f"no valid {m}-block partition found in {max_tries} draws")


# ---------------------------------------------------------------------------
# registry used by the CLI

GENERATORS = {
    "pince-nez": ("n", "p"),
    "product": ("chain_a", "chain_b"),
    "ising-path": ("n", "beta"),
    "cube": ("n",),
    "matroid": ("edges", "e"),
    "hardcore": ("delta", "d", "lambda", "N"),
    "random": ("n", "m", "seed"),
}
