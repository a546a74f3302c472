"""Bind decomposition bounds to brute-force oracles on one chain + partition."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import lsob_bound, poincare_bound
from .chain import ReversibleChain
from .decomp import (
    Partition,
    check_dirichlet_decomposition,
    check_entropy_decomposition,
    check_variance_decomposition,
    decompose,
    inequality_sides,
)
from .spectral import log_sobolev_constant, spectral_gap

#: gamma_hat at or below this is treated as zero so cor3/cor6 apply
ZERO_GAMMA = 1e-12


@dataclass(frozen=True)
class Tolerances:
    """Slack allowed in each oracle comparison."""

    gap: float = 1e-9
    alpha: float = 1e-6
    identity: float = 1e-10
    inequality: float = 1e-10


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 0
    starts: int = 32
    n_functions: int = 1000
    n_identity: int = 32
    tol: Tolerances = field(default_factory=Tolerances)
    timing: bool = False


@dataclass
class Check:
    name: str
    passed: bool
    lhs: float
    rhs: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VerificationReport:
    metadata: dict
    measured: dict
    bounds: dict
    checks: list
    runtime: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        out = {
            "metadata": self.metadata,
            "status": "PASS" if self.passed else "FAIL",
            "measured": self.measured,
            "bounds": self.bounds,
            "checks": [c.to_dict() for c in self.checks],
        }
        if self.runtime:
            out["runtime"] = self.runtime
        return out


def random_test_functions(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Mix of Gaussian, log-normal, sparse and two-valued test functions."""
    kinds = rng.integers(0, 4, size=k)
    F = rng.normal(size=(k, n))
    F[kinds == 1] = np.exp(F[kinds == 1])
    sparse = kinds == 2
    F[sparse] *= rng.uniform(size=(int(sparse.sum()), n)) < 0.3
    two = kinds == 3
    F[two] = np.where(rng.uniform(size=(int(two.sum()), n)) < 0.5, 1.0, rng.uniform(0, 3))
    return F


def _restriction_constant(restrictions, fn):
    vals = [fn(r) for r in restrictions if r is not None]
    return min(vals) if vals else math.inf


def verify(chain: ReversibleChain, partition: Partition, config: VerifyConfig = VerifyConfig(),
           metadata: dict | None = None) -> VerificationReport:
    """Measure every constant, evaluate every applicable rule, check soundness.

    ``lambda_min`` and ``alpha_min`` are minima over the multi-state
    restrictions (``inf`` if every block is a single state). cor3/cor6 are
    evaluated when ``gamma_hat <= ZERO_GAMMA``.
    """
    tol = config.tol
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    rep = decompose(chain, partition)

    def alpha(c):
        return log_sobolev_constant(c, starts=config.starts, seed=config.seed).alpha_estimate

    gap = spectral_gap(chain).gap
    alpha_full = alpha(chain)
    measured = {
        "gap": gap,
        "alpha_estimate": alpha_full,
        "bar_lambda": spectral_gap(rep.projection).gap,
        "lambda_min": _restriction_constant(rep.restrictions, lambda c: spectral_gap(c).gap),
        "bar_alpha": alpha(rep.projection),
        "alpha_min": _restriction_constant(rep.restrictions, alpha),
        "gamma": rep.gamma,
        "eta": rep.eta,
        "gamma_hat": rep.gamma_hat,
        "min_loop": chain.min_loop,
    }
    t_measure = time.perf_counter()

    zero = rep.gamma_hat <= ZERO_GAMMA
    results = [
        poincare_bound("thm1", measured["bar_lambda"], measured["lambda_min"], rep.gamma),
        poincare_bound("cor2", measured["bar_lambda"], measured["lambda_min"], rep.gamma_hat),
        lsob_bound("thm4", measured["bar_alpha"], measured["alpha_min"], rep.gamma),
        lsob_bound("cor5", measured["bar_alpha"], measured["alpha_min"], rep.gamma_hat),
    ]
    if zero:
        results.append(poincare_bound("cor3", measured["bar_lambda"], measured["lambda_min"], 0.0))
        results.append(lsob_bound("cor6", measured["bar_alpha"], measured["alpha_min"], 0.0))
    checks = []
    for b in results:
        if b.rule in ("thm1", "cor2", "cor3"):
            checks.append(Check(f"sound_{b.rule}", b.value <= gap + tol.gap, b.value, gap))
        else:
            checks.append(Check(f"sound_{b.rule}", b.value <= alpha_full + tol.alpha, b.value, alpha_full))
    checks.append(Check("alpha_le_half_gap", alpha_full <= gap / 2 + 1e-8, alpha_full, gap / 2))

    # identities, with constant functions included; residuals relative to
    # max(1, E f^2), which dominates Var f, the Dirichlet form / 2 and L(f)
    F = random_test_functions(chain.n, config.n_identity, rng)
    F = np.vstack([np.ones(chain.n), F])
    worst = {"variance_identity": 0.0, "dirichlet_identity": 0.0, "entropy_identity": 0.0}
    for f in F:
        if not np.any(f != 0):
            continue
        scale = max(1.0, 2.0 * float(chain.pi @ (f * f)))
        for name, fn in (("variance_identity", check_variance_decomposition),
                         ("dirichlet_identity", check_dirichlet_decomposition),
                         ("entropy_identity", check_entropy_decomposition)):
            worst[name] = max(worst[name], fn(chain, partition, f) / scale)
    for name, r in worst.items():
        checks.append(Check(name, r <= tol.identity, r, tol.identity))

    F = random_test_functions(chain.n, config.n_functions, rng)
    sides = inequality_sides(chain, partition, F, rep.eta)
    for name, (lhs, rhs) in sides.items():
        slack = rhs + tol.inequality * np.maximum(1.0, np.abs(rhs)) - lhs
        if slack.size:
            k = np.unravel_index(np.argmin(slack), slack.shape)
            checks.append(Check(name, bool(slack[k] >= 0), float(lhs[k]), float(rhs[k])))
        else:
            checks.append(Check(name, True, 0.0, 0.0))

    runtime = {}
    if config.timing:
        t1 = time.perf_counter()
        runtime = {"measure_s": t_measure - t0, "checks_s": t1 - t_measure}
    return VerificationReport(
        metadata=dict(metadata or {}, n=chain.n, m=partition.m, seed=config.seed),
        measured=measured,
        bounds={b.rule: b.to_dict() for b in results},
        checks=checks,
        runtime=runtime,
    )
