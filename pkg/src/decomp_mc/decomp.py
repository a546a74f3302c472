"""Projection and restriction chains of a partitioned state space.

Given a reversible chain and a partition of its states into blocks
``0..m-1``, this module builds the aggregated projection chain on blocks,
the restriction chain inside each block (escape mass folded into the loop),
the escape probability ``gamma``, the exit distributions ``pi_hat[i][j]``,
their pointwise distance ``eta`` from the block distributions, and the
refined parameter ``gamma_hat``. The ``check_*`` functions return residuals
of the exact variance/Dirichlet/entropy splitting identities and
:func:`inequality_pairs` evaluates both sides of the auxiliary inequalities
the bounds rely on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .chain import (
    ReversibleChain,
    build_chain,
    dirichlet_form,
    expectation,
    lsob_entropy,
    variance,
)
from .errors import (
    InvalidPartition,
    LengthMismatch,
    NotIrreducible,
    PrecisionLoss,
    ProjectionNotIrreducible,
    RestrictionNotIrreducible,
    UndefinedHat,
)

UNDERFLOW = 1e-300


@dataclass(frozen=True)
class Partition:
    """Assignment ``block_of[x] in {0..m-1}`` of every state to a block."""

    block_of: tuple

    def __post_init__(self):
        b = tuple(int(i) for i in self.block_of)
        object.__setattr__(self, "block_of", b)
        if not b:
            raise InvalidPartition("empty partition")
        m = max(b) + 1
        if min(b) < 0:
            raise InvalidPartition("block indices must be nonnegative")
        counts = np.bincount(b, minlength=m)
        if np.any(counts == 0):
            raise InvalidPartition(f"blocks {np.flatnonzero(counts == 0).tolist()} are empty")
        if m < 2:
            raise InvalidPartition("a partition needs at least two blocks")

    @property
    def m(self) -> int:
        return max(self.block_of) + 1

    @property
    def n(self) -> int:
        return len(self.block_of)

    def labels(self) -> np.ndarray:
        return np.asarray(self.block_of)

    def block(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.labels() == i)

    def blocks(self) -> list:
        lab = self.labels()
        return [np.flatnonzero(lab == i) for i in range(self.m)]

    def indicator(self) -> np.ndarray:
        B = np.zeros((self.n, self.m))
        B[np.arange(self.n), self.labels()] = 1.0
        return B

    def to_dict(self) -> dict:
        return {"block_of": list(self.block_of)}


def partition_from_dict(d: dict) -> Partition:
    return Partition(tuple(d["block_of"]))


def dump_partition(partition: Partition, path) -> None:
    Path(path).write_text(json.dumps(partition.to_dict()) + "\n")


def load_partition(path) -> Partition:
    return partition_from_dict(json.loads(Path(path).read_text()))


def _check_sizes(chain: ReversibleChain, partition: Partition):
    if partition.n != chain.n:
        raise LengthMismatch(f"partition covers {partition.n} states, chain has {chain.n}")


def validate_partition(chain: ReversibleChain, partition: Partition) -> None:
    """Raise unless the projection and every restriction are irreducible.

    Single-state blocks are admitted only when ``m > 2``; their restriction
    carries no variance or entropy and is treated as having infinite
    constants.
    """
    _check_sizes(chain, partition)
    project(chain, partition)
    sizes = [len(b) for b in partition.blocks()]
    if partition.m == 2 and min(sizes) == 1:
        raise InvalidPartition("single-state blocks need at least three blocks")
    for i, size in enumerate(sizes):
        if size > 1:
            restrict(chain, partition, i)


def make_partition(chain: ReversibleChain, block_of) -> Partition:
    part = Partition(tuple(block_of))
    validate_partition(chain, part)
    return part


# ---------------------------------------------------------------------------
# projection / restriction


def block_masses(chain: ReversibleChain, partition: Partition) -> np.ndarray:
    _check_sizes(chain, partition)
    return partition.indicator().T @ chain.pi


def block_flows(chain: ReversibleChain, partition: Partition) -> np.ndarray:
    """``Q(i, j) = sum_{x in i, y in j} pi(x) P(x, y)``."""
    B = partition.indicator()
    return B.T @ chain.flow() @ B


def projection_matrix(chain: ReversibleChain, partition: Partition) -> np.ndarray:
    pi_bar = block_masses(chain, partition)
    return block_flows(chain, partition) / pi_bar[:, None]


def project(chain: ReversibleChain, partition: Partition) -> ReversibleChain:
    """Aggregate chain on blocks with ``pi_bar(i) = pi(block i)``."""
    pi_bar = block_masses(chain, partition)
    Q = block_flows(chain, partition)
    Q = 0.5 * (Q + Q.T)
    Pbar = Q / pi_bar[:, None]
    try:
        return build_chain(Pbar, pi_bar)
    except NotIrreducible as exc:
        raise ProjectionNotIrreducible(str(exc)) from exc


def restrict(chain: ReversibleChain, partition: Partition, i: int) -> ReversibleChain:
    """Chain confined to block ``i``; off-block moves become holds."""
    _check_sizes(chain, partition)
    idx = partition.block(i)
    if idx.size == 0:
        raise InvalidPartition(f"block {i} is empty")
    if idx.size == 1:
        raise RestrictionNotIrreducible(f"block {i} has a single state")
    Pi = chain.P[np.ix_(idx, idx)].copy()
    np.fill_diagonal(Pi, 0.0)
    np.fill_diagonal(Pi, 1.0 - Pi.sum(axis=1))
    pi_i = chain.pi[idx] / chain.pi[idx].sum()
    labels = None if chain.labels is None else [chain.labels[x] for x in idx]
    try:
        return build_chain(Pi, pi_i, labels)
    except NotIrreducible as exc:
        raise RestrictionNotIrreducible(f"block {i}: {exc}") from exc


def escape_probabilities(chain: ReversibleChain, partition: Partition) -> np.ndarray:
    """Per-state probability of leaving the current block in one step."""
    _check_sizes(chain, partition)
    lab = partition.labels()
    cross = lab[:, None] != lab[None, :]
    return np.sum(chain.P * cross, axis=1)


def escape_probability(chain: ReversibleChain, partition: Partition) -> float:
    return float(np.max(escape_probabilities(chain, partition)))


def _exit_mass(chain, partition, i, j):
    """``P(x, block j)`` for every ``x`` in block ``i``."""
    return chain.P[np.ix_(partition.block(i), partition.block(j))].sum(axis=1)


def hat_distribution(chain: ReversibleChain, partition: Partition, i: int, j: int) -> np.ndarray:
    """Distribution on block ``i`` of the departure state of a jump into block ``j``."""
    if i == j:
        raise UndefinedHat("exit distribution needs distinct blocks")
    idx = partition.block(i)
    pi_i = chain.pi[idx] / chain.pi[idx].sum()
    w = pi_i * _exit_mass(chain, partition, i, j)
    total = w.sum()
    if not total > 0:
        raise UndefinedHat(f"no transitions from block {i} to block {j}")
    return w / total


def defined_pairs(chain: ReversibleChain, partition: Partition) -> list:
    """Ordered pairs ``(i, j)``, ``i != j``, with positive projection probability."""
    Q = block_flows(chain, partition)
    m = partition.m
    return [(i, j) for i in range(m) for j in range(m) if i != j and Q[i, j] > 0]


def eta(chain: ReversibleChain, partition: Partition) -> float:
    """Smallest ``eta`` with ``(1-eta) pi_i <= pi_hat[i][j] <= (1+eta) pi_i``.

    Uses ``pi_hat / pi_i = P(x, block j) / Pbar(i, j)`` so no division by
    state masses is needed.
    """
    worst = 0.0
    for i, j in defined_pairs(chain, partition):
        idx = partition.block(i)
        pi_i = chain.pi[idx] / chain.pi[idx].sum()
        if np.min(pi_i) < UNDERFLOW:
            raise PrecisionLoss(f"block {i} has states with mass below {UNDERFLOW}")
        exit_mass = _exit_mass(chain, partition, i, j)
        pbar_ij = float(pi_i @ exit_mass)
        worst = max(worst, float(np.max(np.abs(exit_mass / pbar_ij - 1.0))))
    return worst


def gamma_hat(chain: ReversibleChain, partition: Partition, eta_value: Optional[float] = None) -> float:
    if eta_value is None:
        eta_value = eta(chain, partition)
    Pbar = projection_matrix(chain, partition)
    off = Pbar.sum(axis=1) - np.diag(Pbar)
    return 2.0 * eta_value * float(np.max(off))


def cross_terms(chain: ReversibleChain, partition: Partition, f) -> np.ndarray:
    """Matrix ``C[i, j] = sum_{x in i, y in j} pi(x) P(x, y) (f(x) - f(y))^2``."""
    _check_sizes(chain, partition)
    f = np.asarray(f, dtype=float)
    if f.shape != (chain.n,):
        raise LengthMismatch("test function length must equal the state count")
    B = partition.indicator()
    d = f[:, None] - f[None, :]
    return B.T @ (chain.flow() * d * d) @ B


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class DecompositionReport:
    partition: Partition
    projection: ReversibleChain
    restrictions: list  # None for single-state blocks
    gamma: float
    eta: float
    gamma_hat: float

    @property
    def pi_bar(self) -> np.ndarray:
        return self.projection.pi

    def to_dict(self) -> dict:
        return {
            "block_of": list(self.partition.block_of),
            "pi_bar": self.pi_bar.tolist(),
            "projection": self.projection.to_dict(),
            "restrictions": [None if r is None else r.to_dict() for r in self.restrictions],
            "gamma": self.gamma,
            "eta": self.eta,
            "gamma_hat": self.gamma_hat,
        }


def decompose(chain: ReversibleChain, partition: Partition) -> DecompositionReport:
    validate_partition(chain, partition)
    restrictions = [
        restrict(chain, partition, i) if len(b) > 1 else None
        for i, b in enumerate(partition.blocks())
    ]
    e = eta(chain, partition)
    return DecompositionReport(
        partition=partition,
        projection=project(chain, partition),
        restrictions=restrictions,
        gamma=escape_probability(chain, partition),
        eta=e,
        gamma_hat=gamma_hat(chain, partition, e),
    )


# ---------------------------------------------------------------------------
# identities


def _block_dist(chain, partition, i):
    idx = partition.block(i)
    return idx, chain.pi[idx] / chain.pi[idx].sum()


def check_variance_decomposition(chain: ReversibleChain, partition: Partition, f) -> float:
    """Residual of: total variance = mean within-block variance + between-block variance."""
    f = np.asarray(f, dtype=float)
    pi_bar = block_masses(chain, partition)
    total = variance(chain.pi, f)
    mean = expectation(chain.pi, f)
    within = between = 0.0
    for i in range(partition.m):
        idx, pi_i = _block_dist(chain, partition, i)
        within += pi_bar[i] * variance(pi_i, f[idx])
        between += pi_bar[i] * (expectation(pi_i, f[idx]) - mean) ** 2
    return abs(total - within - between)


def check_dirichlet_decomposition(chain: ReversibleChain, partition: Partition, f) -> float:
    """Residual of: Dirichlet form = mean restricted forms + half the off-diagonal cross terms."""
    f = np.asarray(f, dtype=float)
    pi_bar = block_masses(chain, partition)
    total = dirichlet_form(chain, f)
    inner = 0.0
    for i, idx in enumerate(partition.blocks()):
        if idx.size > 1:
            inner += pi_bar[i] * dirichlet_form(restrict(chain, partition, i), f[idx])
    C = cross_terms(chain, partition, f)
    cross = 0.5 * (C.sum() - np.trace(C))
    return abs(total - inner - cross)


def _entropy_or_zero(pi, f):
    if not np.any(f != 0):
        return 0.0
    return lsob_entropy(pi, f)


def check_entropy_decomposition(chain: ReversibleChain, partition: Partition, f) -> float:
    """Residual of the entropy splitting into within-block and between-block parts."""
    f = np.asarray(f, dtype=float)
    pi_bar = block_masses(chain, partition)
    total = lsob_entropy(chain.pi, f)
    m_all = expectation(chain.pi, f * f)
    within = between = 0.0
    for i in range(partition.m):
        idx, pi_i = _block_dist(chain, partition, i)
        fi = f[idx]
        within += pi_bar[i] * _entropy_or_zero(pi_i, fi)
        mi = expectation(pi_i, fi * fi)
        if mi > 0:
            between += pi_bar[i] * mi * (math.log(mi) - math.log(m_all))
    return abs(total - within - between)


def inequality_pairs(chain: ReversibleChain, partition: Partition, f,
                     eta_value: Optional[float] = None) -> dict:
    """Left and right sides of the auxiliary inequalities, per defined block pair.

    Keys:

    ``hat_mean_spread``
        ``(E_hat f - E_i f)^2 <= sum_x pi_hat(x) (f(x) - E_i f)^2``
    ``hat_mean_eta``
        ``(E_i f - E_hat f)^2 <= 2 eta Var_i f``
    ``cross_root_coupled``
        ``(sqrt E_hat_ij f^2 - sqrt E_hat_ji f^2)^2`` against the jump-coupled
        mean of ``(f(x) - f(y))^2``
    ``within_root_independent``
        ``(sqrt E_i f^2 - sqrt E_hat f^2)^2`` against the same quantity under
        the independent coupling of ``pi_i`` and ``pi_hat``
    ``within_root_eta``
        ``(sqrt E_i f^2 - sqrt E_hat f^2)^2 <= 2 eta Var_i f``

    Returns a dict mapping key to a list of ``(lhs, rhs)``.
    """
    f = np.asarray(f, dtype=float)
    if eta_value is None:
        eta_value = eta(chain, partition)
    Q = block_flows(chain, partition)
    F = chain.flow()
    out = {k: [] for k in ("hat_mean_spread", "hat_mean_eta", "cross_root_coupled",
                           "within_root_independent", "within_root_eta")}
    for i, j in defined_pairs(chain, partition):
        idx_i, pi_i = _block_dist(chain, partition, i)
        idx_j = partition.block(j)
        fi = f[idx_i]
        hat_ij = hat_distribution(chain, partition, i, j)
        hat_ji = hat_distribution(chain, partition, j, i)
        mean_i = pi_i @ fi
        mean_hat = hat_ij @ fi
        var_i = variance(pi_i, fi)
        out["hat_mean_spread"].append(((mean_hat - mean_i) ** 2, hat_ij @ (fi - mean_i) ** 2))
        out["hat_mean_eta"].append(((mean_i - mean_hat) ** 2, 2.0 * eta_value * var_i))

        root_hat_ij = math.sqrt(hat_ij @ fi ** 2)
        root_hat_ji = math.sqrt(hat_ji @ f[idx_j] ** 2)
        joint = F[np.ix_(idx_i, idx_j)] / Q[i, j]
        d = fi[:, None] - f[idx_j][None, :]
        out["cross_root_coupled"].append(((root_hat_ij - root_hat_ji) ** 2, float(np.sum(joint * d * d))))

        root_i = math.sqrt(pi_i @ fi ** 2)
        dd = fi[:, None] - fi[None, :]
        indep = float(np.sum(pi_i[:, None] * hat_ij[None, :] * dd * dd))
        lhs = (root_i - root_hat_ij) ** 2
        out["within_root_independent"].append((lhs, indep))
        out["within_root_eta"].append((lhs, 2.0 * eta_value * var_i))
    return out


def inequality_sides(chain: ReversibleChain, partition: Partition, F,
                     eta_value: Optional[float] = None) -> dict:
    """Batched :func:`inequality_pairs` for the rows of ``F`` (shape ``(k, n)``).

    Returns a dict mapping each key to ``(lhs, rhs)`` arrays of shape
    ``(k, number of defined pairs)``.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[1] != chain.n:
        raise LengthMismatch("test functions must have one value per state")
    if eta_value is None:
        eta_value = eta(chain, partition)
    Q = block_flows(chain, partition)
    flow = chain.flow()
    keys = ("hat_mean_spread", "hat_mean_eta", "cross_root_coupled",
            "within_root_independent", "within_root_eta")
    cols = {k: ([], []) for k in keys}
    for i, j in defined_pairs(chain, partition):
        idx_i, pi_i = _block_dist(chain, partition, i)
        idx_j = partition.block(j)
        Fi, Fj = F[:, idx_i], F[:, idx_j]
        hat_ij = hat_distribution(chain, partition, i, j)
        hat_ji = hat_distribution(chain, partition, j, i)
        mean_i = Fi @ pi_i
        mean_hat = Fi @ hat_ij
        centred = Fi - mean_i[:, None]
        var_i = (centred ** 2) @ pi_i
        gap2 = (mean_hat - mean_i) ** 2
        _push(cols, "hat_mean_spread", gap2, (centred ** 2) @ hat_ij)
        _push(cols, "hat_mean_eta", gap2, 2.0 * eta_value * var_i)

        joint = flow[np.ix_(idx_i, idx_j)] / Q[i, j]
        d = Fi[:, :, None] - Fj[:, None, :]
        coupled = np.einsum("xy,kxy->k", joint, d * d)
        lhs = (np.sqrt((Fi ** 2) @ hat_ij) - np.sqrt((Fj ** 2) @ hat_ji)) ** 2
        _push(cols, "cross_root_coupled", lhs, coupled)

        dd = Fi[:, :, None] - Fi[:, None, :]
        indep = np.einsum("x,y,kxy->k", pi_i, hat_ij, dd * dd)
        lhs = (np.sqrt((Fi ** 2) @ pi_i) - np.sqrt((Fi ** 2) @ hat_ij)) ** 2
        _push(cols, "within_root_independent", lhs, indep)
        _push(cols, "within_root_eta", lhs, 2.0 * eta_value * var_i)
    out = {}
    for k, (lhs, rhs) in cols.items():
        if lhs:
            out[k] = (np.stack(lhs, axis=1), np.stack(rhs, axis=1))
        else:
            out[k] = (np.zeros((F.shape[0], 0)), np.zeros((F.shape[0], 0)))
    return out


def _push(cols, key, lhs, rhs):
    cols[key][0].append(lhs)
    cols[key][1].append(rhs)
