import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from decomp_mc.chain import build_chain, dirichlet_form, lsob_entropy, variance
from decomp_mc.errors import NotMixedWithin, StateTooHeavy
from decomp_mc.spectral import (
    log_sobolev_constant,
    lsob_mixing_estimate,
    mixing_time_lsob,
    mixing_time_poincare,
    poincare_mixing_estimate,
    rayleigh_quotient,
    spectral_gap,
    tv_distance,
    tv_mixing_time_exact,
)
from decomp_mc import zoo

from conftest import chains


def gap_from_eigvals(P):
    # oracle: nonsymmetric eigensolver on P itself
    mu = np.sort(np.linalg.eigvals(P).real)
    return 1.0 - mu[-2]


def two_state_alpha(a, b):
    """Brute-force 1-d minimization over f = (1, t), t >= 0."""
    c = zoo.two_state(a, b)

    def ratio(t):
        f = np.array([1.0, t])
        L = lsob_entropy(c.pi, f)
        return dirichlet_form(c, f) / L if L > 1e-14 else np.inf

    grid = np.concatenate([np.linspace(0, 0.999, 2000), np.linspace(1.001, 50, 2000)])
    vals = [ratio(t) for t in grid]
    t0 = grid[int(np.argmin(vals))]
    res = minimize_scalar(ratio, bounds=(max(0.0, t0 - 0.05), t0 + 0.05), method="bounded",
                          options={"xatol": 1e-12})
    # the ratio tends to gap/2 as t -> 1
    return min(res.fun, min(vals), spectral_gap(c).gap / 2)


class TestGap:
    def test_two_state(self):
        assert spectral_gap(zoo.two_state(0.25)).gap == pytest.approx(0.5, abs=1e-12)

    def test_cycle(self):
        expected = (2 / 3) * (1 - math.cos(2 * math.pi / 8))
        assert spectral_gap(zoo.cycle(8)).gap == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.19526, abs=1e-5)

    def test_cube(self):
        assert spectral_gap(zoo.boolean_cube(3).chain).gap == pytest.approx(0.5, abs=1e-12)

    def test_certificate(self):
        c = spectral_gap(zoo.cycle(6))
        d = c.to_dict()
        assert set(d) >= {"gap", "witness", "estimate_flags"}
        assert c.second_eigenvalue == pytest.approx(1 - c.gap)


@given(chains())
def test_gap_matches_eigvals_oracle(chain):
    cert = spectral_gap(chain)
    assert 0 < cert.gap <= 2
    assert cert.gap == pytest.approx(gap_from_eigvals(chain.P), abs=1e-9)
    assert rayleigh_quotient(chain, cert.witness) == pytest.approx(cert.gap, abs=1e-8)


@settings(max_examples=15)
@given(chains(max_n=12), st.integers(0, 2**32 - 1))
def test_gap_is_min_of_rayleigh_quotients(chain, seed):
    # 10,000 random nonconstant f: none beats the gap, and the witness attains it
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(10000, chain.n)) * rng.exponential(size=(10000, 1))
    K = chain.pi[:, None] * chain.P
    means = F @ chain.pi
    var = ((F - means[:, None]) ** 2) @ chain.pi
    D = F[:, :, None] - F[:, None, :]
    dirichlet = 0.5 * np.einsum("xy,kxy->k", K, D * D)
    rq = dirichlet / var
    gap = spectral_gap(chain).gap
    assert rq.min() >= gap - 1e-10
    w = spectral_gap(chain).witness
    assert dirichlet_form(chain, w) / variance(chain.pi, w) == pytest.approx(gap, abs=1e-8)


class TestLogSobolev:
    @pytest.mark.parametrize("q", [0.05, 0.25, 0.5])
    def test_symmetric_two_state(self, q):
        cert = log_sobolev_constant(zoo.two_state(q))
        assert abs(cert.alpha_estimate - q) <= 1e-4

    @pytest.mark.parametrize("a,b", [(0.3, 0.1), (0.05, 0.6), (0.5, 0.01)])
    def test_asymmetric_two_state(self, a, b):
        got = log_sobolev_constant(zoo.two_state(a, b)).alpha_estimate
        assert got == pytest.approx(two_state_alpha(a, b), rel=1e-6)

    def test_cube_two(self):
        cert = log_sobolev_constant(zoo.boolean_cube(2).chain)
        assert abs(cert.alpha_estimate - 1 / 3) <= 1e-3

    def test_witness_realizes_estimate(self):
        c = zoo.pince_nez(4, 0.2).chain
        cert = log_sobolev_constant(c, starts=8)
        w = cert.witness
        assert dirichlet_form(c, w) / lsob_entropy(c.pi, w) == pytest.approx(cert.alpha_estimate, abs=1e-8)
        assert cert.to_dict()["estimate_flags"]["alpha_estimate"] is True

    def test_deterministic(self):
        c = zoo.random_reversible(8, np.random.default_rng(3))
        a = log_sobolev_constant(c, starts=6, seed=11)
        b = log_sobolev_constant(c, starts=6, seed=11)
        assert a.alpha_estimate == b.alpha_estimate
        assert np.array_equal(a.witness, b.witness)

    def test_starts_validated(self):
        with pytest.raises(ValueError):
            log_sobolev_constant(zoo.two_state(0.2), starts=0)


@settings(max_examples=20)
@given(chains(max_n=8))
def test_alpha_below_half_gap(chain):
    cert = log_sobolev_constant(chain, starts=4)
    assert 0 < cert.alpha_estimate <= cert.half_gap + 1e-8


class TestMixingEstimates:
    def test_poincare_value(self):
        assert poincare_mixing_estimate(0.5, 0.5, 0.5) == pytest.approx(4 * math.log(2))
        assert poincare_mixing_estimate(0.5, 1.0, 1.0) == 0.0

    def test_poincare_doubling(self):
        a = poincare_mixing_estimate(0.3, 0.1, 0.2)
        b = poincare_mixing_estimate(0.3, 0.1, 0.1)
        assert b - a == pytest.approx(math.log(2) / 0.3)

    def test_lsob_value(self):
        assert lsob_mixing_estimate(0.5, math.exp(-math.e), math.exp(-1)) == pytest.approx(4.0)

    def test_lsob_heavy(self):
        with pytest.raises(StateTooHeavy):
            lsob_mixing_estimate(0.5, 0.5, 0.1)
        with pytest.raises(StateTooHeavy):
            mixing_time_lsob(zoo.two_state(0.3), 0, 0.1)

    def test_lsob_monotone(self):
        vals = [lsob_mixing_estimate(0.2, 0.01, e) for e in (0.01, 0.1, 0.5, 0.9)]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_eps_range(self):
        with pytest.raises(ValueError):
            poincare_mixing_estimate(0.5, 0.5, 0.0)

    def test_chain_wrappers(self):
        c = zoo.cycle(8)
        gap = spectral_gap(c).gap
        assert mixing_time_poincare(c, 0, 0.1) == pytest.approx(poincare_mixing_estimate(gap, 1 / 8, 0.1))
        assert mixing_time_lsob(c, 0, 0.1, alpha=0.05) == pytest.approx(lsob_mixing_estimate(0.05, 1 / 8, 0.1))


def tv_oracle(chain, x, eps, t_max):
    for t in range(t_max + 1):
        row = np.linalg.matrix_power(chain.P, t)[x]
        if 0.5 * np.abs(row - chain.pi).sum() <= eps:
            return t
    return None


class TestTV:
    def test_trivial_eps(self):
        assert tv_mixing_time_exact(zoo.cycle(5), 0, 1.0, 10) == 0

    def test_two_state_half(self):
        assert tv_mixing_time_exact(zoo.two_state(0.5), 0, 0.1, 10) == 1

    def test_pince_nez_matches_matrix_powers(self):
        c = zoo.pince_nez(4, 1 / 3).chain
        got = tv_mixing_time_exact(c, 0, 0.25, 500)
        assert got == tv_oracle(c, 0, 0.25, 500)

    def test_not_mixed(self):
        with pytest.raises(NotMixedWithin):
            tv_mixing_time_exact(zoo.pince_nez(6, 0.001).chain, 0, 0.01, 5)

    def test_distance(self):
        assert tv_distance([1, 0], [0.5, 0.5]) == 0.5


def lazy_zoo():
    yield zoo.two_state(0.3)
    for n in (1, 2, 3):
        yield zoo.boolean_cube(n).chain
    for n in (2, 3, 4):
        for beta in (0.0, 0.5, 1.0):
            yield zoo.ising_path(n, beta).chain
    yield zoo.pince_nez(4, 0.05).chain
    yield zoo.hardcore_tree(2, 1, 1.0).chain
    yield zoo.hardcore_tree(2, 2, 0.5).chain
    yield zoo.product_chain(zoo.two_state(0.25), zoo.two_state(0.4)).chain


def test_tv_below_poincare_estimate_in_lazy_regime():
    checked = 0
    for chain in lazy_zoo():
        if chain.min_loop < 0.25:
            continue
        checked += 1
        gap = spectral_gap(chain).gap
        for x in range(chain.n):
            for eps in (0.25, 0.1, 0.01):
                bound = math.ceil(mixing_time_poincare(chain, x, eps, gap=gap))
                assert tv_mixing_time_exact(chain, x, eps, bound + 1) <= bound
    assert checked >= 10
