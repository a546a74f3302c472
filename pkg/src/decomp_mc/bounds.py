"""Decomposition bounds on Poincare and log-Sobolev constants, and the
inductive recurrences built from them.

Rule identifiers
----------------
``thm1`` / ``cor2``
    ``min(bar/3, bar * low / (3 g + bar))`` with ``g`` the escape
    probability ``gamma`` (thm1) or the refined ``gamma_hat`` (cor2).
``cor3``
    ``min(bar, low)``; only valid when ``gamma_hat == 0``.
``thm4`` / ``cor5`` / ``cor6``
    The same three forms for log-Sobolev constants.

The denominator of the first form is ``3 g + bar`` (projection constant),
which is what the variance bookkeeping produces; the worked pince-nez
numbers only reproduce under this reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Cor3NonzeroGamma, DegenerateHalf

POINCARE_RULES = ("thm1", "cor2", "cor3")
LSOB_RULES = ("thm4", "cor5", "cor6")

DENOMINATOR_NOTE = "denominator 3*gamma + bar_constant (projection constant)"
K3_PARSE_NOTE = "K3 denominator read as ln((1 - pi_min) / pi_min)"


@dataclass(frozen=True)
class BoundResult:
    rule: str
    bar_constant: float
    min_constant: float
    gamma: float
    value: float
    parse_notes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "inputs": {
                "bar_constant": self.bar_constant,
                "min_constant": self.min_constant,
                "gamma_or_gamma_hat": self.gamma,
            },
            "value": self.value,
            "parse_notes": list(self.parse_notes),
        }


def _evaluate(rule, bar, low, gamma, zero_gamma_rule):
    if not bar > 0 or not low > 0:
        raise ValueError("projection and restriction constants must be positive")
    if not gamma >= 0:
        raise ValueError("gamma must be nonnegative")
    if rule == zero_gamma_rule:
        if gamma != 0:
            raise Cor3NonzeroGamma(f"rule {rule} requires gamma_hat == 0, got {gamma!r}")
        return BoundResult(rule, bar, low, gamma, min(bar, low))
    # integer literals keep exact (Fraction) inputs exact
    if math.isinf(low):
        value = bar / 3
    else:
        value = min(bar / 3, bar * low / (3 * gamma + bar))
    return BoundResult(rule, bar, low, gamma, value, (DENOMINATOR_NOTE,))


def poincare_bound(rule: str, bar_lambda: float, lambda_min: float, gamma: float) -> BoundResult:
    """Poincare constant of a chain from its projection/restriction constants.

    ``lambda_min = inf`` is accepted (all restrictions are single states).
    """
    if rule not in POINCARE_RULES:
        raise ValueError(f"unknown Poincare rule {rule!r}; expected one of {POINCARE_RULES}")
    return _evaluate(rule, bar_lambda, lambda_min, gamma, "cor3")


def lsob_bound(rule: str, bar_alpha: float, alpha_min: float, gamma: float) -> BoundResult:
    """Log-Sobolev constant of a chain from its projection/restriction constants."""
    if rule not in LSOB_RULES:
        raise ValueError(f"unknown log-Sobolev rule {rule!r}; expected one of {LSOB_RULES}")
    return _evaluate(rule, bar_alpha, alpha_min, gamma, "cor6")


# ---------------------------------------------------------------------------
# Ising path recursion


def ising_factor(beta: float) -> float:
    """``1 + (3/4)(e^{2 beta} + 1)``: the per-level loss of the path recursion."""
    return 1.0 + 0.75 * (math.exp(2.0 * beta) + 1.0)


def ising_exponent(beta: float) -> float:
    """Polynomial exponent ``c`` of the gap bound ``Omega(n^-c)``."""
    return 1.0 + math.log2(ising_factor(beta))


def ising_lsob_exponent(beta: float) -> float:
    return 1.0 + math.log2(1.0 + 1.5 * (math.exp(2.0 * beta) + 1.0))


@dataclass
class RecursionResult:
    bound: float
    exponent: float
    levels: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"bound": self.bound, "exponent": self.exponent, "levels": self.levels}


def ising_base_gap(k: int, beta: float, n_select: int) -> float:
    """Exact gap of a ``k``-site path, minimized over fixed boundary spins."""
    from .spectral import spectral_gap
    from .zoo import ising_path

    return min(
        spectral_gap(ising_path(k, beta, boundary=b, n_select=n_select).chain).gap
        for b in ((1, 1), (1, -1))
    )


def ising_recursion(beta: float, n: int, depth_cap: int | None = None,
                    base_max: int = 3) -> RecursionResult:
    """Lower bound on the heat-bath gap of the ``n``-site Ising path.

    Splits a ``k``-site segment at its middle spin into two independent
    segments of ``floor(k/2)`` and ``k - floor(k/2) - 1`` sites. Each level
    takes ``min(1/(3 cosh^2(beta) n), min(child gaps) / ising_factor(beta))``.
    Segments of at most ``base_max`` sites (at most 8 states for the default),
    or segments reached at ``depth_cap``, are solved exactly with the global
    site-selection probability ``1/n``.
    """
    if beta < 0 or n < 2:
        raise ValueError("need beta >= 0 and n >= 2")
    cap = 1.0 / (3.0 * math.cosh(beta) ** 2 * n)
    factor = ising_factor(beta)
    levels = []
    memo = {}

    def lam(k, depth):
        key = (k, depth if depth_cap is not None else 0)
        if key in memo:
            return memo[key]
        if k <= base_max or (depth_cap is not None and depth >= depth_cap):
            if k > 12:
                raise ValueError(f"exact base case at {k} sites exceeds desk scale")
            val = ising_base_gap(k, beta, n)
            levels.append({"k": k, "depth": depth, "source": "exact", "value": val})
        else:
            left = k // 2
            right = k - left - 1
            sub = lam(left, depth + 1)
            if right > 0:
                sub = min(sub, lam(right, depth + 1))
            val = min(cap, sub / factor)
            levels.append({"k": k, "depth": depth, "source": "recurrence",
                           "cap": cap, "child": sub, "value": val})
        memo[key] = val
        return val

    bound = lam(n, 0)
    return RecursionResult(bound=bound, exponent=ising_exponent(beta), levels=levels)


# ---------------------------------------------------------------------------
# hard-core recursion


def g_delta(Delta: int, fugacity: float) -> float:
    """Per-level loss ``g`` of the hard-core tree recursion."""
    if Delta < 1 or not fugacity > 0:
        raise ValueError("need Delta >= 1 and fugacity > 0")
    lam = fugacity
    return (6.0 * min(1.0 / lam, (1.0 + lam) ** Delta - 1.0, 1.0) * (1.0 + lam) ** 2
            * math.log((1.0 + lam) ** (Delta + 2) / min(1.0, lam)))


@dataclass(frozen=True)
class K3Bound:
    value: float
    weaker: float
    pi_min: float
    flagged: bool = False
    parse_notes: tuple = (K3_PARSE_NOTE,)


def alpha_k3_from_min(pi_min: float) -> K3Bound:
    """Log-Sobolev lower bound for the independent-resampling chain on three
    points, as a function of the smallest stationary mass.

    ``(1 - 2 p) / ln((1 - p) / p)``, together with the weaker
    ``1 / (3 ln(1/p))``. At ``p = 1/2`` the first expression is replaced by
    its limit ``1/2`` and the result is flagged.
    """
    p = float(pi_min)
    if not 0 < p <= 0.5:
        raise DegenerateHalf(f"pi_min must lie in (0, 1/2], got {p!r}")
    weaker = 1.0 / (3.0 * math.log(1.0 / p))
    if p == 0.5:
        return K3Bound(0.5, weaker, p, flagged=True)
    return K3Bound((1.0 - 2.0 * p) / math.log((1.0 - p) / p), weaker, p)


def alpha_k3_bound(pi_bar) -> K3Bound:
    w = np.asarray(getattr(pi_bar, "weights", pi_bar), dtype=float)
    if w.shape != (3,) or np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("need a strictly positive distribution on three points")
    return alpha_k3_from_min(float(w.min()))


def claim7_bound(alpha_k3: float, fugacity: float) -> float:
    """Log-Sobolev lower bound of the 3-state block chain: ``alpha_k3 / (2 (1 + fugacity))``."""
    if not alpha_k3 > 0 or fugacity < 0:
        raise ValueError("need alpha_k3 > 0 and fugacity >= 0")
    return alpha_k3 / (2.0 * (1.0 + fugacity))


def tree_size(Delta: int, d: int) -> int:
    return sum(Delta ** k for k in range(d + 1))


def hardcore_block_mass_bounds(Delta: int, fugacity: float) -> dict:
    """Uniform bounds on the block masses of the root decomposition."""
    lam = fugacity
    return {
        "pi1_lower": lam / (1.0 + lam) ** (Delta + 1),
        "pi2_lower": 1.0 / (1.0 + lam) ** (Delta + 1),
        "pi3_lower": lam / (1.0 + lam) ** (Delta + 2),
        "pi2_upper": 1.0 / lam,
        "pi3_upper": (1.0 + lam) ** Delta - 1.0,
        "pi4_lower": 1.0 / (1.0 + lam),
    }


def hardcore_exponent(Delta: int, fugacity: float) -> float:
    """``1 + log_Delta(1 + g)``: exponent of the inverse-polynomial bound."""
    return 1.0 + math.log(1.0 + g_delta(Delta, fugacity)) / math.log(Delta)


def hardcore_recursion(Delta: int, d: int, fugacity: float, N: int | None = None,
                       starts: int = 16, seed: int = 0) -> RecursionResult:
    """Lower bound on the log-Sobolev constant of Glauber dynamics on ``T_d``.

    ``alpha_d >= min(alpha_{d-2}, alpha_{d-1} / (1 + r / a_hat), a_hat / N)``
    where ``a_hat`` is the three-state bound from :func:`alpha_k3_from_min`
    and :func:`claim7_bound` evaluated at the uniform lower bound on the
    smallest block mass, and ``r`` bounds ``min(pi2, pi3) / pi4``. The
    depth-0 and depth-1 constants are computed numerically with the same
    ``N`` (one vertex clock for every level).
    """
    from .spectral import log_sobolev_constant
    from .zoo import hardcore_tree

    if Delta < 2:
        raise ValueError("branching factor must be >= 2")
    if d < 0:
        raise ValueError("depth must be >= 0")
    n = tree_size(Delta, d)
    N = n if N is None else int(N)
    if N < n:
        raise ValueError(f"N = {N} is below the vertex count {n}")
    lam = fugacity
    b = hardcore_block_mass_bounds(Delta, lam)
    pi_min_lower = min(b["pi1_lower"], b["pi2_lower"], b["pi3_lower"])
    k3 = alpha_k3_from_min(min(pi_min_lower, 0.5))
    a_hat = claim7_bound(k3.value, lam)
    ratio_upper = min(1.0 / lam, (1.0 + lam) ** Delta - 1.0, 1.0) * (1.0 + lam)
    factor = 1.0 + ratio_upper / a_hat

    levels = []
    alphas = {}
    for k in range(min(d, 1) + 1):
        cert = log_sobolev_constant(hardcore_tree(Delta, k, lam, N).chain, starts=starts, seed=seed)
        alphas[k] = cert.alpha_estimate
        levels.append({"d": k, "source": "numeric", "value": alphas[k]})
    for k in range(2, d + 1):
        terms = [alphas[k - 2], alphas[k - 1] / factor, a_hat / N]
        alphas[k] = min(terms)
        levels.append({"d": k, "source": "recurrence", "terms": terms, "value": alphas[k]})
    return RecursionResult(bound=alphas[d], exponent=hardcore_exponent(Delta, lam),
                           levels=[dict(lv, a_hat=a_hat, factor=factor) for lv in levels])
