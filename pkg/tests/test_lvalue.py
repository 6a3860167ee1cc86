import math
import os

import pytest

from quadtwist import _kernels
from quadtwist.cache import LValueCache
from quadtwist.errors import DomainError, ResourceLimitError
from quadtwist.lvalue import (
    central_value,
    central_values,
    completed_value,
    conductor_scale,
    ensure_central_values,
    local_factor_La,
    truncation_length,
)
from quadtwist.twists import root_number

from conftest import CACHE_DIR


class TestCentralValue:
    def test_root_minus_one_vanishes(self, cfg, table_small):
        # 13 = 2 mod 11 is a non-residue, so the sign is -1
        assert root_number(cfg, 13) == -1
        cv = central_value(cfg, table_small, 13, 1e-8)
        assert cv.value == 0.0 and cv.truncation == 0 and cv.tail_bound == 0.0

    def test_d5_value(self, cfg, table_small):
        cv8 = central_value(cfg, table_small, 5, 1e-8)
        cv12 = central_value(cfg, table_small, 5, 1e-12)
        assert abs(cv8.value - cv12.value) <= cv8.tail_bound + cv12.tail_bound
        assert cv8.tail_bound < 1e-8

    def test_truncation_doubling(self, cfg, table_small):
        for d in (5, 21, 89, 1005):
            if root_number(cfg, d) != 1:
                continue
            Q = conductor_scale(cfg, d)
            T = truncation_length(cfg, d, 1e-8)
            s1 = _kernels._smoothed_sum(d, Q, T, table_small.w, table_small.spf)
            s2 = _kernels._smoothed_sum(d, Q, 2 * T, table_small.w, table_small.spf)
            assert abs(s1 - s2) < 1e-8

    def test_trivial_twist_identity(self, cfg, table_small):
        # d=1: plain smoothed sum with weight e^{-2 pi n / sqrt N}
        cv = central_value(cfg, table_small, 1, 1e-10)
        q = math.sqrt(11) / (2 * math.pi)
        direct = 2 * sum(
            float(table_small.a[n]) / math.sqrt(n) * math.exp(-n / q) for n in range(1, 200)
        )
        assert abs(cv.value - direct) < 1e-10

    def test_balanced_cross_check(self, cfg, table_small):
        # second evaluator with the balance point moved off center
        cv = central_value(cfg, table_small, 1, 1e-10)
        lam = completed_value(cfg, table_small, 1, 0.5, 1e-10, x0=2.0)
        q = math.sqrt(11) / (2 * math.pi)
        assert abs(lam / math.sqrt(q) - cv.value) < 1e-6

    def test_inadmissible(self, cfg, table_small):
        with pytest.raises(DomainError):
            central_value(cfg, table_small, 33, 1e-8)  # shares 11
        with pytest.raises(DomainError):
            central_value(cfg, table_small, 9, 1e-8)  # not fundamental

    def test_resource_error_carries_requirement(self, cfg, table_small):
        with pytest.raises(ResourceLimitError) as exc:
            central_value(cfg, table_small, 99991 * 4 + 1, 1e-10)
        assert exc.value.required > table_small.nmax

    def test_tolerance_scaling(self, cfg, table_small):
        for d in (5, 37, 201):
            if root_number(cfg, d) != 1:
                continue
            a = central_value(cfg, table_small, d, 1e-6)
            b = central_value(cfg, table_small, d, 5e-7)
            assert abs(a.raw - b.raw) <= a.tail_bound + b.tail_bound

    def test_bulk_matches_single(self, cfg, table_small):
        ds = [5, 13, 21, 37, 53]
        bulk = central_values(cfg, table_small, ds, 1e-8)
        for cv in bulk:
            single = central_value(cfg, table_small, cv.d, 1e-8)
            assert cv.raw == single.raw and cv.value == single.value


class TestFunctionalEquation:
    def test_offcenter_consistency(self, cfg, table_small):
        # Lambda(1/2+u) = eps Lambda(1/2-u) with both sides from the
        # balanced evaluator; the balance point makes the two expressions
        # genuinely different term-by-term
        u = 0.1
        for d in (5, 21, 89):
            eps = root_number(cfg, d)
            lhs = completed_value(cfg, table_small, d, 0.5 + u, 1e-10, x0=2.0)
            rhs = eps * completed_value(cfg, table_small, d, 0.5 - u, 1e-10, x0=2.0)
            assert abs(lhs - rhs) / max(abs(lhs), 1e-30) < 1e-6

    def test_zero_sign_twist_offcenter(self, cfg, table_small):
        # root number -1: Lambda(1/2+u) = -Lambda(1/2-u), values nonzero off center
        u = 0.1
        d = 13
        lhs = completed_value(cfg, table_small, d, 0.5 + u, 1e-10, x0=1.5)
        rhs = -completed_value(cfg, table_small, d, 0.5 - u, 1e-10, x0=1.5)
        assert abs(lhs - rhs) / max(abs(lhs), 1e-30) < 1e-6

    def test_strip_guard(self, cfg, table_small):
        with pytest.raises(DomainError):
            completed_value(cfg, table_small, 5, 1.2)


class TestLocalFactor:
    def test_class_value(self, cfg, table_small):
        # a=5: chi(2) = -1, chi(11) = +1; factors 2 and 11/10
        val = local_factor_La(cfg, table_small, 5, 0.5)
        assert abs(val - 2.2) < 1e-14

    def test_euler_vs_series_at_large_s(self, cfg, table_small):
        # absolutely convergent regime: partial sums converge fast
        for a in (5, 9, 1):
            e = local_factor_La(cfg, table_small, a, 2.0)
            s = local_factor_La(cfg, table_small, a, 2.0, terms=10**6)
            assert abs(e - s) < 1e-8

    def test_euler_vs_series_at_half(self, cfg, table_small):
        # at s=1/2 the smooth tail decays like 2^{-k/2}: agreement is at the
        # computable tail scale, not 1e-8
        e = local_factor_La(cfg, table_small, 5, 0.5)
        s = local_factor_La(cfg, table_small, 5, 0.5, terms=10**6)
        assert abs(e - s) < 5e-3
        s2 = local_factor_La(cfg, table_small, 5, 0.5, terms=10**9)
        assert abs(e - s2) < abs(e - s)

    def test_bad_prime_factor_is_one_when_trace_zero(self, cfg, table_small):
        # zero out a(11): its (bad-prime) local factor degenerates to 1
        a = table_small.a.copy()
        a.setflags(write=True)
        a[11] = 0.0
        import dataclasses

        patched = dataclasses.replace(table_small, a=a)
        v = local_factor_La(cfg, patched, 5, 0.5)
        # only the p=2 factor remains
        ap2 = float(table_small.a[2])
        expect = 1.0 / (1.0 - ap2 * (-1) * 2**-0.5 + 2**-1.0)
        assert abs(v - expect) < 1e-14

    def test_class_independence(self, cfg, table_small):
        from quadtwist.arith import kronecker

        for a in (5, 9):
            members = [d for d in range(1, 5000) if d % 88 == a and d % 2]
            members = [d for d in members if math.gcd(d, 22) == 1][:20]
            for p in (2, 11):
                vals = {kronecker(d, p) for d in members}
                assert len(vals) == 1

    def test_inadmissible_class(self, cfg, table_small):
        with pytest.raises(DomainError):
            local_factor_La(cfg, table_small, 3, 0.5)


class TestCache:
    def test_roundtrip(self, cfg, table_small, tmp_path):
        cache = LValueCache(str(tmp_path), cfg.label, 1e-8)
        cvs = ensure_central_values(cfg, table_small, [5, 13, 21], 1e-8, cache)
        cache.close()
        assert os.path.getsize(cache.path) == 28 * 3
        reopened = LValueCache(str(tmp_path), cfg.label, 1e-8)
        assert len(reopened) == 3
        got = ensure_central_values(cfg, table_small, [5, 13, 21], 1e-8, reopened)
        for d in (5, 13, 21):
            assert got[d].raw == cvs[d].raw
            assert got[d].truncation == cvs[d].truncation
        reopened.close()

    def test_session_cache_dir_used(self, cfg, table_small):
        cache = LValueCache(CACHE_DIR, cfg.label, 1e-7)
        try:
            ensure_central_values(cfg, table_small, [5], 1e-7, cache)
            assert 5 in cache
        finally:
            cache.close()
