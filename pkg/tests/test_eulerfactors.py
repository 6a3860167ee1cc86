import math
import random
from fractions import Fraction

import pytest

from quadtwist import eulerfactors as ef
from quadtwist.errors import DomainError
from quadtwist.resonator import ResonatorParams


@pytest.fixture(scope="module")
def efs(cfg, table_small):
    return ef.EulerFactorSet(table_small, cfg, 5, pmax=20000)


@pytest.fixture(scope="module")
def efs_res(cfg, table_small):
    res = ResonatorParams(M=500, sign=1, window_override=(3, 60))
    return ef.EulerFactorSet(table_small, cfg, 5, res, pmax=20000)


class TestH:
    def test_h19_exact(self, table_small):
        got = ef.h_factor_exact(19, 0)
        assert got == Fraction(361, 381)
        assert abs(ef.h_factor(table_small, 19) - 361 / 381) < 1e-15

    def test_h_exact_matches_float(self, cfg, table_small):
        idx = {int(p): int(t) for p, t in zip(table_small.primes[:500], table_small.ap_int[:500])}
        for p, trace in list(idx.items())[:100]:
            if cfg.N0 % p == 0:
                continue
            assert abs(float(ef.h_factor_exact(p, trace)) - ef.h_factor(table_small, p)) < 1e-14

    def test_h_near_one(self, table_small):
        for p in (53, 101, 997, 9973):
            assert abs(ef.h_factor(table_small, p) - 1.0) <= 10.0 / p

    def test_h_in_unit_interval(self, cfg, table_small):
        for p in table_small.primes[table_small.primes <= 10**4]:
            p = int(p)
            if cfg.N0 % p == 0:
                continue
            h = ef.h_factor(table_small, p)
            assert 0.0 < h <= 1.0

    def test_h_rejects_bad(self, table_small):
        with pytest.raises(DomainError):
            ef.h_factor(table_small, 11)
        with pytest.raises(DomainError):
            ef.h_factor(table_small, 2)


class TestHTilde:
    def test_parity_ratio(self, table_small):
        for p in (3, 5, 7, 19, 101):
            odd = ef.h_tilde(table_small, p, 1)
            even = ef.h_tilde(table_small, p, 2)
            assert abs(even / odd - (1 + 1 / p)) < 1e-14
            assert abs(ef.h_tilde(table_small, p, 3) - odd) < 1e-16
            assert abs(ef.h_tilde(table_small, p, 4) - even) < 1e-16

    def test_h_from_h_tilde(self, table_small):
        for p in (3, 5, 19, 101):
            assert abs(
                ef.h_factor(table_small, p) - (1 + 1 / p) * ef.h_tilde(table_small, p, 1)
            ) < 1e-15

    def test_unit_interval(self, cfg, table_small):
        for p in table_small.primes[table_small.primes <= 10**4]:
            p = int(p)
            if cfg.N0 % p == 0:
                continue
            for k in (1, 2, 3, 4):
                v = ef.h_tilde(table_small, p, k)
                assert 0.0 < v <= 1.0


class TestCE:
    def test_positive(self, efs):
        assert efs.ce.value > 0

    def test_stabilization(self, cfg, table_small):
        c1 = ef.C_E(table_small, cfg, 10**4)
        c2 = ef.C_E(table_small, cfg, 2 * 10**4)
        assert abs(c2.value - c1.value) / c1.value < 1e-3
        assert abs(math.log(c2.value / c1.value)) < c1.tail_bound

    def test_local_identity(self, cfg, table_small):
        # C_p(E) h~(p,1) = (1-1/p)^2 at good p
        for p in (3, 5, 7, 19, 103):
            lhs = ef.C_p(table_small, cfg, p) * ef.h_tilde(table_small, p, 1)
            assert abs(lhs - (1 - 1 / p) ** 2) < 1e-15

    def test_zeta2_product(self, cfg, table_small):
        pmax = 10**4
        prod = 1.0
        for p in table_small.primes[table_small.primes <= pmax]:
            prod /= 1.0 - 1.0 / float(p) ** 2
        assert abs(prod - math.pi**2 / 6) < 1.0 / pmax


class TestG:
    def test_trivial_args(self, efs):
        assert efs.G(1, 1) == efs.ce.value

    def test_u_even_power_branch(self, efs, table_small):
        assert abs(efs.G(9, 1) / efs.ce.value - ef.h_tilde(table_small, 3, 2)) < 1e-12

    def test_ell_branch(self, efs, table_small):
        assert abs(efs.G(1, 3) / efs.ce.value - ef.h_factor(table_small, 3)) < 1e-12

    def test_u1_branch(self, efs, table_small):
        assert abs(efs.G(3, 1) / efs.ce.value - ef.h_tilde(table_small, 3, 1)) < 1e-12

    def test_identity_random_pairs(self, efs):
        # all four local branches hit across 100 random (u, l) pairs
        rng = random.Random(17)
        count = 0
        while count < 100:
            u = rng.randint(1, 400)
            ell = rng.choice([1, 3, 5, 7, 13, 15, 17, 19, 21, 35])
            if math.gcd(u, ell) != 1 or math.gcd(u * ell, 88) != 1:
                continue
            lhs = efs.G(u, ell)
            rhs = efs.G_via_identity(u, ell)
            assert abs(lhs / rhs - 1.0) < 1e-10, (u, ell)
            count += 1

    def test_preconditions(self, efs):
        with pytest.raises(DomainError):
            efs.G(3, 3)  # not coprime
        with pytest.raises(DomainError):
            efs.G(11, 1)  # shares N0
        with pytest.raises(DomainError):
            efs.G(1, 9)  # ell not squarefree


class TestDensities:
    def test_g1_outside_window(self, efs_res, table_small):
        # b = 0 there, so g1(p) = h(p)/p
        p = 101
        assert abs(efs_res.g1(p) - ef.h_factor(table_small, p) / p) < 1e-15

    def test_g1_window_positive_unit(self, cfg, efs_res, table_small):
        res = efs_res.res
        for p in res.window_primes(table_small):
            p = int(p)
            if cfg.N0 % p == 0:
                continue
            v = ef._g1_p(res, table_small, p)
            assert 0.0 < v < 1.0

    def test_g1_minus_sign_bracket_reported(self, cfg, table_small):
        res = ResonatorParams(M=500, sign=-1, window_override=(3, 60))
        made = ef.EulerFactorSet(table_small, cfg, 5, res, pmax=10**4)
        assert made.bracket_violations == []

    def test_g_multiplicative(self, efs_res):
        for ell1, ell2 in ((3, 5), (7, 13), (3, 35)):
            assert abs(efs_res.g1(ell1 * ell2) - efs_res.g1(ell1) * efs_res.g1(ell2)) < 1e-15
            assert abs(efs_res.g2(ell1 * ell2) - efs_res.g2(ell1) * efs_res.g2(ell2)) < 1e-15

    def test_g2_no_resonator_prime(self, cfg, table_small):
        res = ResonatorParams(M=100, sign=1, window_override=(3, 2))  # empty
        made = ef.EulerFactorSet(table_small, cfg, 5, res, pmax=10**4)
        for p in (3, 7, 101):
            assert abs(made.g2(p) - 1.0 / (p + 1)) < 1e-15

    def test_g2_upper_bound(self, efs_res):
        for p in (3, 5, 7, 13, 29, 53):
            assert efs_res.g2(p) <= 1.0 / (p + 1) + 1e-16

    def test_g_zero_on_bad(self, efs_res):
        # vanishing (not an error) at p | N0 is part of the definition
        assert efs_res.g1(1) == 1.0
        assert efs_res.g1(11) == 0.0
        assert efs_res.g2(11) == 0.0


class TestMainTerms:
    def test_linear_in_X(self, efs_res):
        x1a = efs_res.main_term_X1(1e5, 1.5)
        x1b = efs_res.main_term_X1(2e5, 1.5)
        assert abs(x1b / x1a - 2.0) < 1e-12
        x2a = efs_res.main_term_X2(1e5, 1.5)
        x2b = efs_res.main_term_X2(2e5, 1.5)
        assert abs(x2b / x2a - 2.0) < 1e-12

    def test_x1_positive_plus_sign(self, efs_res):
        assert efs_res.main_term_X1(1e5, 1.5) > 0

    def test_x2_empty_window_closed_form(self, cfg, table_small):
        res = ResonatorParams(M=100, sign=1, window_override=(3, 2))
        made = ef.EulerFactorSet(table_small, cfg, 5, res, pmax=10**4)
        X, phi0 = 1e5, 1.5
        expect = X * phi0 / (88 * ef.ZETA2)
        for p in (2, 11):
            expect /= 1.0 - 1.0 / p**2
        assert abs(made.main_term_X2(X, phi0) - expect) < 1e-12

    def test_positivity_combination(self, efs):
        assert efs.la_half * efs.sym2 * efs.ce.value > 0
