import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decomp_mc import zoo
from decomp_mc.bounds import (
    DENOMINATOR_NOTE,
    alpha_k3_bound,
    alpha_k3_from_min,
    claim7_bound,
    g_delta,
    hardcore_block_mass_bounds,
    hardcore_exponent,
    hardcore_recursion,
    ising_exponent,
    ising_factor,
    ising_recursion,
    lsob_bound,
    poincare_bound,
    tree_size,
)
from decomp_mc.decomp import decompose
from decomp_mc.errors import Cor3NonzeroGamma, DegenerateHalf
from decomp_mc.spectral import log_sobolev_constant, spectral_gap

pos = st.floats(1e-6, 2.0)


class TestPoincare:
    @pytest.mark.parametrize("n", [3, 5, 8, 13])
    @pytest.mark.parametrize("p", [Fraction(1, 3), Fraction(1, 100), Fraction(1, 10**4)])
    def test_pince_nez_closed_form_exact(self, n, p):
        # exact rational arithmetic: both sides must agree identically
        b = poincare_bound("thm1", 2 * p / n, Fraction(10, n * n), p)
        assert b.value == min(2 * p / (3 * n), Fraction(20, 3 * n**3 + 2 * n**2))

    def test_pince_nez_n8(self):
        b = poincare_bound("thm1", 2 / 24, 10 / 64, 1 / 3)
        assert b.value == pytest.approx(20 / 1664, rel=1e-14)
        assert b.value == pytest.approx(0.012019, abs=1e-6)

    def test_cor3_cube(self):
        for n in range(2, 9):
            assert poincare_bound("cor3", 2 / (n + 1), 2 / (n + 1), 0.0).value == 2 / (n + 1)

    def test_cor3_rejects_gamma(self):
        with pytest.raises(Cor3NonzeroGamma):
            poincare_bound("cor3", 0.5, 0.5, 1e-3)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            poincare_bound("thm4", 0.5, 0.5, 0.1)
        with pytest.raises(ValueError):
            poincare_bound("thm1", 0.0, 0.5, 0.1)
        with pytest.raises(ValueError):
            poincare_bound("thm1", 0.5, 0.5, -0.1)

    def test_infinite_restriction(self):
        assert poincare_bound("thm1", 0.3, math.inf, 0.2).value == pytest.approx(0.1)

    def test_dict(self):
        d = poincare_bound("cor2", 0.2, 0.1, 0.05).to_dict()
        assert d["rule"] == "cor2"
        assert set(d["inputs"]) == {"bar_constant", "min_constant", "gamma_or_gamma_hat"}
        assert DENOMINATOR_NOTE in d["parse_notes"]


class TestLogSobolev:
    @pytest.mark.parametrize("n", [3, 6, 10])
    @pytest.mark.parametrize("p", [Fraction(1, 3), Fraction(1, 1000)])
    def test_pince_nez_closed_form_exact(self, n, p):
        b = lsob_bound("thm4", p / n, Fraction(2, n * n), p)
        assert b.value == min(p / (3 * n), Fraction(2, 3 * n**3 + n**2))

    def test_cor6_cube(self):
        for n in range(2, 9):
            assert lsob_bound("cor6", 1 / (n + 1), 1 / (n + 1), 0.0).value == 1 / (n + 1)

    @given(pos, pos)
    def test_cor6_beats_thm4_at_zero_gamma(self, a, b):
        assert lsob_bound("cor6", a, b, 0.0).value >= lsob_bound("thm4", a, b, 0.0).value * (1 - 1e-15)


@given(pos, pos, st.floats(0, 1))
def test_value_invariants(bar, low, g):
    for fn, rules in ((poincare_bound, ("thm1", "cor2")), (lsob_bound, ("thm4", "cor5"))):
        for r in rules:
            v = fn(r, bar, low, g).value
            assert 0 < v <= bar
    assert poincare_bound("cor3", bar, low, 0.0).value <= min(bar, low)
    assert poincare_bound("cor3", bar, low, 0.0).value >= poincare_bound("thm1", bar, low, 0.0).value * (1 - 1e-15)


@given(pos, pos, st.floats(0, 1), st.floats(1.0, 3.0), st.floats(0, 1))
def test_monotone(bar, low, g, scale, dg):
    for fn, r in ((poincare_bound, "thm1"), (lsob_bound, "thm4")):
        base = fn(r, bar, low, g).value
        assert fn(r, bar * scale, low, g).value >= base * (1 - 1e-12)
        assert fn(r, bar, low * scale, g).value >= base * (1 - 1e-12)
        assert fn(r, bar, low, g + dg).value <= base * (1 + 1e-12)


class TestIsing:
    def test_exponent_limit(self):
        assert ising_exponent(0.0) == pytest.approx(1 + math.log2(2.5), abs=1e-12)
        assert ising_exponent(1e-6) == pytest.approx(2.3219, abs=1e-3)
        assert ising_exponent(1e-6) < 2.33

    def test_factor(self):
        assert ising_factor(0.0) == 2.5

    def test_beta_zero_n4_hits_cap(self):
        res = ising_recursion(0.0, 4)
        assert res.bound == pytest.approx(1 / 12)
        top = res.levels[-1]
        assert top["k"] == 4 and top["value"] == top["cap"]

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
    def test_rate(self, beta):
        c = ising_exponent(beta)
        ratios = [ising_recursion(beta, n).bound * n**c for n in range(4, 65)]
        assert 0.5 < min(ratios) and max(ratios) < 50

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("n", [2, 5, 8])
    def test_below_exact_gap(self, beta, n):
        exact = spectral_gap(zoo.ising_path(n, beta).chain).gap
        assert ising_recursion(beta, n).bound <= exact + 1e-12

    def test_depth_cap(self):
        a = ising_recursion(0.5, 16, depth_cap=1)
        assert a.levels[0]["source"] == "exact"
        with pytest.raises(ValueError):
            ising_recursion(0.5, 1)


class TestHardcoreConstants:
    def test_g_delta_value(self):
        assert g_delta(2, 1.0) == pytest.approx(24 * math.log(16))
        assert g_delta(2, 1.0) == pytest.approx(66.542, abs=1e-3)

    def test_g_delta_vanishes(self):
        vals = [g_delta(3, lam) for lam in (1e-2, 1e-4, 1e-6, 1e-8)]
        assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-5

    def test_g_delta_order(self):
        r = [g_delta(D, lam) / (D * lam * (1 + abs(math.log(lam))))
             for D in range(2, 7) for lam in np.logspace(-4, 1, 40)]
        assert max(r) < 40

    def test_exponent_tends_to_one(self):
        assert hardcore_exponent(2, 1e-6) == pytest.approx(1.0, abs=1e-3)
        assert hardcore_exponent(2, 1.0) == pytest.approx(1 + math.log2(1 + g_delta(2, 1.0)))

    def test_k3_values(self):
        b = alpha_k3_from_min(1 / 3)
        assert b.value == pytest.approx((1 / 3) / math.log(2), abs=1e-15)
        assert b.value == pytest.approx(0.48090, abs=1e-5)
        assert b.weaker == pytest.approx(1 / (3 * math.log(3)))
        assert b.weaker == pytest.approx(0.30341, abs=1e-5)

    def test_k3_half(self):
        b = alpha_k3_from_min(0.5)
        assert b.value == 0.5 and b.flagged
        with pytest.raises(DegenerateHalf):
            alpha_k3_from_min(0.6)

    @given(st.floats(1e-6, 0.4999))
    def test_k3_forms_ordered(self, p):
        b = alpha_k3_from_min(p)
        assert b.value >= b.weaker
        assert b.value <= 0.5

    def test_claim7(self):
        assert claim7_bound(0.48, 0.0) == 0.24
        assert claim7_bound(0.48, 1.0) == pytest.approx(0.12)

    def test_tree_size(self):
        assert tree_size(2, 2) == 7 and tree_size(3, 0) == 1


@settings(max_examples=15)
@given(st.lists(st.floats(0.05, 1.0), min_size=3, max_size=3))
def test_k3_bound_below_numeric(w):
    pi_bar = np.array(w) / sum(w)
    bound = alpha_k3_bound(pi_bar).value
    numeric = log_sobolev_constant(zoo.independent_resampling_chain(pi_bar), starts=8).alpha_estimate
    assert bound <= numeric + 1e-6


@settings(max_examples=15)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_claim7_below_numeric_aux(lam, pi3_rel):
    # block masses with pi1 = lam * pi2, as on the hard-core tree
    pi_bar = np.array([lam, 1.0, pi3_rel])
    pi_bar /= pi_bar.sum()
    bound = claim7_bound(alpha_k3_bound(pi_bar).value, lam)
    assert bound <= zoo.hardcore_aux_alpha(pi_bar, lam, starts=8) + 1e-6


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("d", [1, 2])
def test_block_mass_bounds(lam, d):
    inst = zoo.hardcore_tree(2, d, lam)
    pb = decompose(inst.chain, inst.partition).pi_bar
    b = hardcore_block_mass_bounds(2, lam)
    assert pb[0] >= b["pi1_lower"] and pb[1] >= b["pi2_lower"] and pb[2] >= b["pi3_lower"]
    assert pb[1] <= b["pi2_upper"] and pb[2] <= b["pi3_upper"]
    assert pb[1] + pb[2] >= b["pi4_lower"]


class TestHardcoreRecursion:
    def test_base_case_is_numeric(self):
        res = hardcore_recursion(2, 1, 1.0, starts=8)
        num = log_sobolev_constant(zoo.hardcore_tree(2, 1, 1.0).chain, starts=8).alpha_estimate
        assert res.bound == pytest.approx(num)
        assert res.levels[-1]["source"] == "numeric"

    @pytest.mark.parametrize("lam", [0.5, 1.0])
    def test_sound_at_depth_two(self, lam):
        res = hardcore_recursion(2, 2, lam, starts=8)
        num = log_sobolev_constant(zoo.hardcore_tree(2, 2, lam).chain, starts=8).alpha_estimate
        assert 0 < res.bound <= num + 1e-6

    def test_deeper_levels_shrink(self):
        res = hardcore_recursion(2, 5, 0.5, starts=4)
        vals = [lv["value"] for lv in res.levels]
        assert all(b <= a + 1e-15 for a, b in zip(vals[1:], vals[2:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            hardcore_recursion(2, 2, 1.0, N=3)
        with pytest.raises(ValueError):
            hardcore_recursion(1, 2, 1.0)
