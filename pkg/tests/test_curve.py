import json
import math

import numpy as np
import pytest

from quadtwist.curve import (
    CurveConfig,
    _count_affine_brute,
    ap_point_count,
    ap_unnormalized,
    load_curve,
    pnt_ratio,
    sym2_local,
    sym2_value,
)
from quadtwist.errors import ConfigError, DomainError
from quadtwist import _kernels


class TestConfig:
    def test_bundled_11a1(self, cfg):
        assert cfg.label == "11a1"
        assert cfg.conductor == 11
        assert cfg.N0 == 88
        assert cfg.discriminant == -(11**5)
        assert cfg.c_invariants == (496, 20008)

    def test_load_from_file(self, cfg, tmp_path):
        path = tmp_path / "curve.json"
        path.write_text(
            json.dumps(
                {
                    "label": "test",
                    "weierstrass": [0, -1, 1, -10, -20],
                    "conductor": 11,
                    "root_number": 1,
                    "real_period": 1.25,
                    "torsion_order": 5,
                    "u_tilde": 1.0,
                    "bad_tamagawa": {"2": 1, "11": 1},
                }
            )
        )
        assert load_curve(str(path)).conductor == 11

    def test_missing_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"label": "x"}))
        with pytest.raises(ConfigError):
            load_curve(str(path))

    def test_unknown_label(self):
        with pytest.raises(ConfigError):
            load_curve("definitely-not-a-curve")

    def test_singular_model_rejected(self):
        with pytest.raises(ConfigError):
            CurveConfig("sing", (0, 0, 0, 0, 0), 11, 1, 1.0, 1, 1.0, {})

    def test_torsion_bounds(self):
        with pytest.raises(ConfigError):
            CurveConfig("t", (0, -1, 1, -10, -20), 11, 1, 1.0, 13, 1.0, {})


class TestPointCounting:
    def test_a3_brute_force(self, cfg):
        # brute-force count over F_3 of the full five-coefficient model
        count = _count_affine_brute(cfg, 3) + 1
        assert 3 + 1 - count == -1
        assert ap_unnormalized(cfg, 3) == -1
        assert abs(ap_point_count(cfg, 3) + 1 / math.sqrt(3)) < 1e-15

    def test_a2_full_model(self, cfg):
        assert ap_unnormalized(cfg, 2) == -2

    def test_a19_vanishes(self, cfg):
        assert ap_unnormalized(cfg, 19) == 0
        assert _count_affine_brute(cfg, 19) + 1 == 20

    def test_bad_prime_rejected(self, cfg):
        with pytest.raises(DomainError):
            ap_point_count(cfg, 11)

    def test_bad_prime_rule(self, cfg):
        # split multiplicative reduction at 11 for this model
        assert ap_unnormalized(cfg, 11) == 1

    def test_chi_table_matches_brute(self, cfg):
        for p in (5, 7, 13, 23, 101, 211):
            assert ap_unnormalized(cfg, p) == p + 1 - (_count_affine_brute(cfg, p) + 1)

    def test_bsgs_matches_chi_table(self, cfg):
        from quadtwist.arith import sieve_primes

        ps = sieve_primes(130_000).primes
        band = ps[(ps > 120_000)].astype(np.int64)
        c4, c6 = cfg.c_invariants
        b2, b4, b6, _ = cfg.b_invariants
        bsgs = _kernels.ap_bsgs_bulk(band, c4, c6)
        chi = _kernels.ap_chi_table_bulk(band, b2, b4, b6)
        assert np.array_equal(bsgs, chi)


class TestCoefficientTable:
    def test_basic_values(self, table_small):
        a = table_small.a
        assert a[1] == 1.0
        # eta-product expansion of the level-11 newform, normalized
        expected = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2]
        got = a[1:13] * np.sqrt(np.arange(1, 13, dtype=float))
        assert np.allclose(got, expected, atol=1e-12)

    def test_hecke_recursion(self, table_small):
        a = table_small.a
        for p in (2, 3, 5, 7, 13, 101):
            assert abs(a[p * p] - (a[p] ** 2 - 1)) < 1e-12

    def test_bad_prime_powers(self, table_small):
        a = table_small.a
        assert abs(a[11 * 11] - a[11] ** 2) < 1e-14

    def test_multiplicativity(self, table_small):
        a = table_small.a
        assert abs(a[6] - a[2] * a[3]) < 1e-14
        assert abs(a[35] - a[5] * a[7]) < 1e-14

    def test_full_expansion_oracle(self, cfg, table_small):
        # recompute a(n) for n <= 1000 from prime powers, independently
        a = table_small.a
        vals = {1: 1.0}
        for n in range(2, 1001):
            m, p = n, 2
            while p * p <= m:
                if m % p == 0:
                    break
                p += 1
            else:
                p = m
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            if cfg.is_bad(p):
                pk = a[p] ** e
            else:
                prev, cur = 1.0, a[p]
                for _ in range(e - 1):
                    prev, cur = cur, a[p] * cur - prev
                pk = cur
            vals[n] = pk * vals.get(m, 1.0) if m > 1 else pk
            assert abs(a[n] - vals[n]) < 1e-10, n

    def test_tau_bound(self, table_small):
        a = table_small.a
        for n in range(1, 2000):
            tau = len([d for d in range(1, n + 1) if n % d == 0])
            assert abs(a[n]) <= tau + 1e-9

    def test_integrality_and_hasse(self, cfg, table_small):
        ps = table_small.primes[table_small.primes <= 10**4]
        traces = table_small.ap_int[: len(ps)]
        good = np.array([not cfg.is_bad(int(p)) for p in ps])
        assert np.all(np.abs(traces[good]) <= 2 * np.sqrt(ps[good].astype(float)))
        # integer trace recovers the normalized value exactly
        recon = traces / np.sqrt(ps.astype(float))
        assert np.allclose(recon, table_small.a[ps], atol=1e-13)

    def test_satake(self, table_small):
        for p in (2, 3, 5, 7, 101, 431):
            alpha, beta = table_small.satake(p)
            assert abs(alpha * beta - 1) < 1e-14
            assert abs(abs(alpha) - 1) < 1e-14
            ap2 = table_small.a[p * p]
            assert abs(complex(ap2) - (alpha**2 + 1 + beta**2)) < 1e-12

    def test_satake_bad_prime_rejected(self, table_small):
        with pytest.raises(DomainError):
            table_small.satake(11)


class TestDiagnostics:
    def test_pnt_small(self, table_small):
        r = pnt_ratio(table_small, 10**3)
        assert 0.75 <= r <= 1.25

    def test_pnt_trivial_bound(self, table_small):
        x = 10**4
        r = pnt_ratio(table_small, x)
        pi_x = int(np.sum(table_small.primes <= x))
        assert 0 <= r <= 4 * pi_x * math.log(x) / x + 1

    def test_sym2_positive_locals(self, cfg, table_small):
        for p in (2, 3, 5, 19, 11, 997):
            assert sym2_local(table_small, cfg, p) > 0

    def test_sym2_ap_zero_expansion(self, cfg, table_small):
        # at a(p)=0 the good factor is [(1+2/p+1/p^2)(1-1/p)]^{-1}
        p = 19
        assert table_small.ap_int[list(table_small.primes).index(19)] == 0
        expect = 1.0 / ((1 + 2 / p + 1 / p**2) * (1 - 1 / p))
        assert abs(sym2_local(table_small, cfg, p) - expect) < 1e-15

    def test_sym2_stabilization(self, cfg, table_small):
        # the product converges conditionally (oscillating a(p^2)/p), so the
        # doubling increment shrinks like p^{-1/2}: ~2e-3 at 1e4, <1e-3 by 8e4
        res = sym2_value(table_small, cfg, 2 * 10**4)
        assert res.value > 0
        assert abs(res.value - res.value_half) < 5e-3
        res2 = sym2_value(table_small, cfg, 8 * 10**4)
        assert abs(res2.value - res2.value_half) < 1e-3

    def test_sym2_override(self, table_small, tmp_path, cfg):
        override = CurveConfig(
            label=cfg.label,
            weierstrass=cfg.weierstrass,
            conductor=cfg.conductor,
            root_number=cfg.root_number,
            real_period=cfg.real_period,
            torsion_order=cfg.torsion_order,
            u_tilde=cfg.u_tilde,
            bad_tamagawa=cfg.bad_tamagawa,
            sym2_bad_factors={11: 2.5},
        )
        assert sym2_local(table_small, override, 11) == 2.5
