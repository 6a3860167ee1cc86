import math

import numpy as np
import pytest

from quadtwist.arith import kronecker
from quadtwist.errors import DomainError
from quadtwist.resonator import (
    ResonatorParams,
    b_coeff,
    b_prime,
    resonate,
    resonate_family,
)


def brute_resonator(params, table, d):
    """Direct loop over odd m <= M, factoring each m."""
    lo, hi = params.window
    total = 0.0
    for m in range(1, params.M + 1, 2):
        val, mm, ok = 1.0, m, True
        p = 3
        while p * p <= mm:
            if mm % p == 0:
                mm //= p
                if mm % p == 0:
                    ok = False
                    break
                val *= b_prime(params, table, p)
            p += 2
        if not ok:
            continue
        if mm > 1:
            val *= b_prime(params, table, mm)
        total += val * kronecker(d, m)
    return total


class TestParams:
    def test_trivial_below_three(self, table_small):
        params = ResonatorParams(M=1, sign=1)
        assert params.regime == "trivial"
        assert resonate(params, table_small, 5).value == 1.0

    def test_paper_window_rejected_small_M(self):
        with pytest.raises(DomainError) as exc:
            ResonatorParams(M=10**6, sign=1)
        assert "window" in str(exc.value)

    def test_paper_window_accepted_huge_M(self, table_small):
        # log M loglog M > e^4 needs M beyond e^19
        M = 10**9
        params = ResonatorParams(M=M, sign=1)
        assert params.regime == "paper"
        L = math.sqrt(math.log(M) * math.log(math.log(M)))
        assert params.window == (L**2, math.exp(math.log(L) ** 2))

    def test_override(self):
        params = ResonatorParams(M=100, sign=-1, window_override=(3, 50))
        assert params.regime == "override"
        assert params.window == (3.0, 50.0)

    def test_bad_sign(self):
        with pytest.raises(DomainError):
            ResonatorParams(M=10, sign=0)


class TestBCoeff:
    def test_prime_squares_vanish(self, table_small):
        params = ResonatorParams(M=10**4, sign=1, window_override=(3, 100))
        for p in (3, 5, 7, 11, 13):
            assert b_coeff(params, table_small, p * p) == 0.0

    def test_outside_window_vanishes(self, table_small):
        params = ResonatorParams(M=10**4, sign=1, window_override=(10, 50))
        assert b_coeff(params, table_small, 3) == 0.0
        assert b_coeff(params, table_small, 53) == 0.0
        assert b_coeff(params, table_small, 2) == 0.0  # oddness always

    def test_window_value(self, table_small):
        params = ResonatorParams(M=10**4, sign=-1, window_override=(3, 100))
        p = 7
        expect = -float(table_small.a[7]) * params.L / (math.sqrt(7) * math.log(7))
        assert abs(b_coeff(params, table_small, 7) - expect) < 1e-15

    def test_multiplicative(self, table_small):
        params = ResonatorParams(M=10**4, sign=1, window_override=(3, 100))
        for p1, p2 in ((3, 7), (5, 13), (7, 23)):
            assert (
                abs(
                    b_coeff(params, table_small, p1 * p2)
                    - b_coeff(params, table_small, p1) * b_coeff(params, table_small, p2)
                )
                < 1e-15
            )


class TestResonate:
    def test_empty_window_gives_one(self, table_small):
        params = ResonatorParams(M=100, sign=1, window_override=(3, 2))
        rv = resonate(params, table_small, 5)
        assert rv.value == 1.0 and rv.support_count == 1

    def test_against_brute_force(self, table_small):
        params = ResonatorParams(M=2000, sign=1, window_override=(3, 60))
        for d in (1, 5, 21, -7):
            assert abs(resonate(params, table_small, d).value - brute_resonator(params, table_small, d)) < 1e-12

    def test_d1_sums_coefficients(self, table_small):
        params = ResonatorParams(M=5000, sign=1, window_override=(3, 40))
        rv = resonate(params, table_small, 1)
        assert abs(rv.value - brute_resonator(params, table_small, 1)) < 1e-12

    def test_sign_flip_parity(self, table_small):
        # negating b at every prime flips odd-support terms only
        plus = ResonatorParams(M=500, sign=1, window_override=(3, 30))
        minus = ResonatorParams(M=500, sign=-1, window_override=(3, 30))
        d = 5
        rp = resonate(plus, table_small, d).value
        rm = resonate(minus, table_small, d).value
        even_part = brute_even_support(plus, table_small, d)
        assert abs((rp + rm) / 2 - even_part) < 1e-12

    def test_support_is_odd_squarefree(self, table_small):
        params = ResonatorParams(M=3000, sign=1, window_override=(3, 50))
        rv = resonate(params, table_small, 5)
        count = count_supported(params, table_small)
        assert rv.support_count == count

    def test_family_matches_single(self, table_small):
        params = ResonatorParams(M=1000, sign=-1, window_override=(3, 40))
        ds = [1, 5, 21, 37]
        fam = resonate_family(params, table_small, ds)
        for i, d in enumerate(ds):
            assert fam[i] == resonate(params, table_small, d).value


def brute_even_support(params, table, d):
    lo, hi = params.window
    total = 0.0
    for m in range(1, params.M + 1, 2):
        val, mm, k, ok = 1.0, m, 0, True
        p = 3
        while p * p <= mm:
            if mm % p == 0:
                mm //= p
                if mm % p == 0:
                    ok = False
                    break
                val *= b_prime(params, table, p)
                k += 1
            p += 2
        if not ok:
            continue
        if mm > 1:
            val *= b_prime(params, table, mm)
            k += 1
        if k % 2 == 0:
            total += val * kronecker(d, m)
    return total


def count_supported(params, table):
    n = 0
    for m in range(1, params.M + 1, 2):
        if b_coeff(params, table, m) != 0.0:
            n += 1
    return n


class TestWeightedAverage:
    def test_sandwich_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            L = rng.uniform(0, 3, size=50)
            w = rng.uniform(0, 1, size=50)
            r2 = rng.uniform(0, 2, size=50) ** 2
            den = float(np.sum(r2 * w))
            if den <= 0:
                continue
            avg = float(np.sum(L * r2 * w)) / den
            assert L.min() - 1e-12 <= avg <= L.max() + 1e-12
