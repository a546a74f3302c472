"""Spectral gap, numerical log-Sobolev constant and mixing-time estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .chain import ReversibleChain, dirichlet_form, lsob_entropy, variance
from .errors import EigenFailure, NotMixedWithin, OptimizerStall, StateTooHeavy

WITNESS_TOL = 1e-8
NEAR_CONSTANT_STEPS = (1e-2, 1e-3, 1e-4, 1e-5)
# candidates with max |f^2 / E f^2 - 1| below this are too close to constant
# for the ratio to be resolved in double precision
MIN_CONTRAST = 1e-6


@dataclass(frozen=True)
class SpectralCertificate:
    gap: float
    second_eigenvalue: float
    witness: np.ndarray

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "second_eigenvalue": self.second_eigenvalue,
            "witness": self.witness.tolist(),
            "estimate_flags": {"gap": False},
        }


@dataclass(frozen=True)
class LsobCertificate:
    """Best log-Sobolev ratio found; an upper bound on the true constant."""

    alpha_estimate: float
    witness: np.ndarray
    half_gap: float

    def to_dict(self) -> dict:
        return {
            "alpha_estimate": self.alpha_estimate,
            "half_gap": self.half_gap,
            "witness": self.witness.tolist(),
            "estimate_flags": {"alpha_estimate": True, "upper_bound": True},
        }


def rayleigh_quotient(chain: ReversibleChain, f) -> float:
    return dirichlet_form(chain, f) / variance(chain.pi, f)


def lsob_ratio(chain: ReversibleChain, f) -> float:
    return dirichlet_form(chain, f) / lsob_entropy(chain.pi, f)


def spectral_gap(chain: ReversibleChain) -> SpectralCertificate:
    """Exact Poincare constant ``1 - mu_2`` of a reversible chain.

    Diagonalizes ``S = D^{1/2} P D^{-1/2}`` (``D = diag(pi)``), which is
    symmetric by detailed balance. The witness is the second eigenvector
    mapped back through ``D^{-1/2}``.
    """
    if chain.n < 2:
        raise EigenFailure("spectral gap needs at least two states")
    s = np.sqrt(chain.pi)
    S = s[:, None] * chain.P / s[None, :]
    S = 0.5 * (S + S.T)
    try:
        vals, vecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    mu2 = float(vals[-2])
    gap = 1.0 - mu2
    witness = vecs[:, -2] / s
    witness = witness / np.max(np.abs(witness))
    # sign convention: largest-magnitude entry positive
    if witness[np.argmax(np.abs(witness))] < 0:
        witness = -witness
    rq = rayleigh_quotient(chain, witness)
    if not gap > 0 or abs(rq - gap) > WITNESS_TOL * max(1.0, gap):
        raise EigenFailure(f"witness Rayleigh quotient {rq!r} disagrees with gap {gap!r}")
    witness.setflags(write=False)
    return SpectralCertificate(gap=gap, second_eigenvalue=mu2, witness=witness)


# ---------------------------------------------------------------------------
# log-Sobolev search


class _Ratio:
    """Ratio E(f)/L(f) and its gradient on the nonnegative orthant.

    ``L`` only depends on ``|f|`` and ``E(|f|) <= E(f)``, so restricting the
    search to ``f >= 0`` loses nothing.
    """

    def __init__(self, chain: ReversibleChain):
        self.pi = chain.pi
        self.K = chain.flow()
        self.K = 0.5 * (self.K + self.K.T)
        self.scale = 1.0

    def __call__(self, f):
        pi = self.pi
        sq = f * f
        m = pi @ sq
        Kf = self.K @ f
        E = m - f @ Kf
        gE = 2.0 * (pi * f - Kf)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.where(sq > 0, np.log(np.where(sq > 0, sq, 1.0) / m), 0.0)
        L = pi @ (sq * lg)
        if not L > 1e-300:
            return 1e300, np.zeros_like(f)
        gL = 2.0 * pi * f * lg
        R = E / L
        g = (gE * L - E * gL) / (L * L)
        return R / self.scale, g / self.scale


def _local_search(obj: _Ratio, f0: np.ndarray, maxiter: int, rtol: float):
    f0 = np.clip(f0, 0.0, None)
    m = obj.pi @ (f0 * f0)
    if m <= 0:
        return None
    f0 = f0 / math.sqrt(m)
    obj.scale = 1.0
    r0, _ = obj(f0)
    if not np.isfinite(r0) or r0 >= 1e300:
        return f0
    obj.scale = max(r0, 1e-300)
    res = minimize(obj, f0, jac=True, method="L-BFGS-B",
                   bounds=[(0.0, None)] * f0.size,
                   options={"maxiter": maxiter, "ftol": rtol, "gtol": 1e-12})
    return res.x


def log_sobolev_constant(chain: ReversibleChain, starts: int = 32, seed: int = 0,
                         gap: SpectralCertificate | None = None,
                         n_indicator: int = 8, maxiter: int = 400,
                         rtol: float = 1e-10) -> LsobCertificate:
    """Estimate the log-Sobolev constant by multistart local search.

    Candidates, in a fixed order: near-constant perturbations
    ``1 +/- eps * witness`` along the spectral-gap witness (these realize the
    ``gap/2`` limit), local searches from the two half-amplitude witness
    seeds, from indicators and complements of the ``n_indicator`` lightest
    states, and from ``starts`` log-normal random vectors drawn from
    ``seed``. Every candidate is rescored with :func:`dirichlet_form` and
    :func:`lsob_entropy`; the smallest ratio wins (first on ties).

    The result is an upper bound on the true constant. It is exact only
    where it meets a proven lower bound.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    cert = gap if gap is not None else spectral_gap(chain)
    v = np.asarray(cert.witness)
    n = chain.n
    rng = np.random.default_rng(seed)
    obj = _Ratio(chain)

    direct = []
    for sign in (1.0, -1.0):
        for eps in NEAR_CONSTANT_STEPS:
            direct.append(1.0 + sign * eps * v)
    seeds = [1.0 + 0.5 * v, 1.0 - 0.5 * v]
    order = np.argsort(chain.pi, kind="stable")[: min(n, n_indicator)]
    for x in order:
        e = np.zeros(n)
        e[x] = 1.0
        seeds.append(e)
        seeds.append(1.0 - e)
    for _ in range(starts):
        seeds.append(np.exp(rng.normal(0.0, 1.0, size=n)))

    candidates = direct + [_local_search(obj, s, maxiter, rtol) for s in seeds]

    best, best_f = math.inf, None
    for f in candidates:
        if f is None:
            continue
        sq = f * f
        m = chain.pi @ sq
        if not m > 0 or np.max(np.abs(sq / m - 1.0)) < MIN_CONTRAST:
            continue
        try:
            L = lsob_entropy(chain.pi, f)
        except ValueError:
            continue
        if not L > 0:
            continue
        r = dirichlet_form(chain, f) / L
        if np.isfinite(r) and r < best:
            best, best_f = r, np.array(f, dtype=float)
    if best_f is None:
        raise OptimizerStall("no admissible nonconstant start")
    best_f.setflags(write=False)
    return LsobCertificate(alpha_estimate=float(best), witness=best_f,
                           half_gap=cert.gap / 2.0)


# ---------------------------------------------------------------------------
# mixing time


def _check_eps(eps):
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")


def poincare_mixing_estimate(gap: float, pi_x: float, eps: float) -> float:
    """``(1/gap) (ln 1/pi(x) + ln 1/eps)`` with the hidden constant set to 1."""
    _check_eps(eps)
    return (math.log(1.0 / pi_x) + math.log(1.0 / eps)) / gap


def lsob_mixing_estimate(alpha: float, pi_x: float, eps: float) -> float:
    """``(1/alpha) (ln ln 1/pi(x) + ln 1/eps)``; requires ``pi(x) <= 1/e``."""
    _check_eps(eps)
    if pi_x > math.exp(-1.0):
        raise StateTooHeavy(f"pi(x) = {pi_x!r} exceeds 1/e")
    return (math.log(math.log(1.0 / pi_x)) + math.log(1.0 / eps)) / alpha


def mixing_time_poincare(chain: ReversibleChain, x: int, eps: float,
                         gap: float | None = None) -> float:
    """Order-of-magnitude mixing estimate from the spectral gap (not a certified bound)."""
    if gap is None:
        gap = spectral_gap(chain).gap
    return poincare_mixing_estimate(gap, float(chain.pi[x]), eps)


def mixing_time_lsob(chain: ReversibleChain, x: int, eps: float,
                     alpha: float | None = None, seed: int = 0) -> float:
    """Order-of-magnitude mixing estimate from the log-Sobolev constant."""
    if chain.pi[x] > math.exp(-1.0):
        raise StateTooHeavy(f"pi({x}) = {chain.pi[x]!r} exceeds 1/e")
    if alpha is None:
        alpha = log_sobolev_constant(chain, seed=seed).alpha_estimate
    return lsob_mixing_estimate(alpha, float(chain.pi[x]), eps)


def tv_distance(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def tv_mixing_time_exact(chain: ReversibleChain, x: int, eps: float, t_max: int) -> int:
    """First ``t <= t_max`` with ``||P^t(x, .) - pi||_TV <= eps``, by exact evolution."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    if eps >= 1.0:
        return 0
    row = np.zeros(chain.n)
    row[x] = 1.0
    for t in range(t_max + 1):
        if tv_distance(row, chain.pi) <= eps:
            return t
        row = row @ chain.P
    raise NotMixedWithin(f"TV distance above {eps} after {t_max} steps")
