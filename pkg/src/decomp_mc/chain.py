"""Finite reversible Markov chains and the functionals built on them.

A chain is stored densely: a row-stochastic matrix ``P`` and a strictly
positive stationary distribution ``pi`` with ``pi[x] P[x, y] == pi[y] P[y, x]``.
Test functions are plain 1-d float arrays indexed by state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    AllZeroFunction,
    LengthMismatch,
    NotIrreducible,
    NotReversible,
    NotStochastic,
)

#: validation tolerance for user-supplied matrices and distributions
INPUT_TOL = 1e-9
#: tolerance for identities that hold exactly in exact arithmetic
IDENTITY_TOL = 1e-12
#: row-sum / normalization residuals below this are left alone so that
#: rebuilding a chain from its own output is bit-for-bit idempotent
ROUNDOFF = 1e-13


@dataclass(frozen=True)
class Distribution:
    """Probability vector on ``len(weights)`` points."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise LengthMismatch("distribution must be a nonempty vector")
        if np.any(w < 0) or abs(w.sum() - 1.0) > IDENTITY_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size


def _weights(pi) -> np.ndarray:
    if isinstance(pi, Distribution):
        return pi.weights
    if isinstance(pi, ReversibleChain):
        return pi.pi
    return np.asarray(pi, dtype=float)


def _paired(pi, f):
    w = _weights(pi)
    f = np.asarray(f, dtype=float)
    if f.shape != w.shape:
        raise LengthMismatch(f"function has shape {f.shape}, distribution {w.shape}")
    return w, f


@dataclass(frozen=True)
class ReversibleChain:
    """Immutable reversible chain. Build instances with :func:`build_chain`."""

    P: np.ndarray
    pi: np.ndarray
    labels: Optional[tuple] = field(default=None)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def min_loop(self) -> float:
        """Smallest holding probability ``min_x P(x, x)``."""
        return float(np.min(np.diag(self.P)))

    def flow(self) -> np.ndarray:
        """Edge measure ``Q(x, y) = pi(x) P(x, y)``; symmetric."""
        return self.pi[:, None] * self.P

    def to_dict(self) -> dict:
        out = {"P": self.P.tolist(), "pi": self.pi.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out


def _strongly_connected(P: np.ndarray) -> bool:
    adj = (P > 0).astype(np.int8)
    np.fill_diagonal(adj, 0)
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    return ncomp == 1


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` by a direct linear solve.

    The chain must be irreducible so that the bordered system is nonsingular.
    """
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def build_chain(P, pi=None, labels: Optional[Sequence[str]] = None,
                tol: float = INPUT_TOL) -> ReversibleChain:
    """Validate ``P`` (and ``pi``) and return a :class:`ReversibleChain`.

    Parameters
    ----------
    P : (n, n) array_like
        Transition matrix. Row sums may be off by at most ``tol``; the
        residual is folded into the diagonal.
    pi : (n,) array_like, optional
        Stationary distribution. Solved from ``pi P = pi`` when omitted.
    labels : sequence of str, optional
        Per-state names, carried through serialization.
    tol : float
        Validation tolerance for stochasticity and detailed balance.

    Raises
    ------
    NotStochastic, NotIrreducible, NotReversible
    """
    P = np.array(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise NotStochastic(f"P must be a nonempty square matrix, got shape {P.shape}")
    n = P.shape[0]
    if np.any(~np.isfinite(P)) or np.any(P < -tol) or np.any(P > 1 + tol):
        raise NotStochastic("entries of P must lie in [0, 1]")
    P = np.clip(P, 0.0, 1.0)
    rows = P.sum(axis=1)
    bad = np.abs(rows - 1.0) > tol
    if np.any(bad):
        x = int(np.argmax(bad))
        raise NotStochastic(f"row {x} sums to {rows[x]!r}")
    fold = np.abs(rows - 1.0) > ROUNDOFF
    P[fold, fold.nonzero()[0]] += 1.0 - rows[fold]
    if np.any(np.diag(P) < 0):
        raise NotStochastic("row-sum correction made a loop probability negative")
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise LengthMismatch("labels must have one entry per state")

    if not _strongly_connected(P):
        raise NotIrreducible("transition graph is not strongly connected")

    if pi is None:
        pi = stationary_distribution(P)
    else:
        pi = np.array(pi, dtype=float)
        if pi.shape != (n,):
            raise LengthMismatch(f"pi has shape {pi.shape}, expected ({n},)")
        if abs(pi.sum() - 1.0) > tol:
            raise NotReversible(f"pi sums to {pi.sum()!r}")
    if np.any(~np.isfinite(pi)) or np.any(pi <= 0):
        raise NotReversible("stationary distribution must be strictly positive")
    if abs(pi.sum() - 1.0) > ROUNDOFF:
        pi = pi / pi.sum()

    F = pi[:, None] * P
    imbalance = float(np.max(np.abs(F - F.T)))
    if imbalance > tol:
        raise NotReversible(f"detailed balance violated by {imbalance:.3e}")

    P.setflags(write=False)
    pi.setflags(write=False)
    return ReversibleChain(P=P, pi=pi, labels=labels)


# ---------------------------------------------------------------------------
# functionals


def expectation(pi, f) -> float:
    w, f = _paired(pi, f)
    return float(w @ f)


def variance(pi, f) -> float:
    w, f = _paired(pi, f)
    mean = w @ f
    return float(w @ (f - mean) ** 2)


def dirichlet_form(chain: ReversibleChain, f) -> float:
    """Half the ``pi``-weighted mean squared jump of ``f`` along transitions."""
    _, f = _paired(chain.pi, f)
    diff = f[:, None] - f[None, :]
    return 0.5 * float(np.sum(chain.flow() * diff * diff))


def _rlogr_minus(r: np.ndarray) -> np.ndarray:
    """``r ln r - r + 1`` elementwise, accurate near ``r = 1``; 0 ln 0 = 0."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    d = r - 1.0
    small = np.abs(d) < 1e-3
    ds = d[small]
    # (1+d) log1p(d) - d = sum_{k>=2} (-1)^k d^k / (k (k-1))
    acc = np.zeros_like(ds)
    p = ds * ds
    for k in range(2, 10):
        acc += (-1) ** k * p / (k * (k - 1))
        p = p * ds
    out[small] = acc
    big = ~small
    rb = r[big]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(rb > 0, rb * np.log(np.where(rb > 0, rb, 1.0)), 0.0)
    out[big] = val - rb + 1.0
    return out


def lsob_entropy(pi, f) -> float:
    """Entropy functional ``E[f^2 (ln f^2 - ln E f^2)]`` under ``pi``.

    Evaluated as ``E f^2 * sum_x pi(x) phi(f(x)^2 / E f^2)`` with
    ``phi(r) = r ln r - r + 1 >= 0``, which equals the defining expression
    because the correction terms sum to zero, and stays accurate when ``|f|``
    is close to constant.
    """
    w, f = _paired(pi, f)
    sq = f * f
    m = float(w @ sq)
    if m <= 0.0:
        raise AllZeroFunction("entropy undefined for f == 0 almost everywhere")
    return m * float(w @ _rlogr_minus(sq / m))


# ---------------------------------------------------------------------------
# serialization


def chain_from_dict(d: dict) -> ReversibleChain:
    return build_chain(d["P"], d.get("pi"), d.get("labels"))


def dump_chain(chain: ReversibleChain, path) -> None:
    Path(path).write_text(json.dumps(chain.to_dict()) + "\n")


def load_chain(path) -> ReversibleChain:
    return chain_from_dict(json.loads(Path(path).read_text()))
