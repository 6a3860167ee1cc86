"""Closed-form arithmetic factors of the moment formulas: h, h-tilde, C(E),
G(1;u,l), the resonated densities g1, g2, and the main-term normalizations
X1, X2.

Everything is built from the single real quantity
    u_p = (1 - alpha_p^2/p)(1 - beta_p^2/p) = 1 - (a(p)^2 - 2)/p + 1/p^2
and the shared denominator 1 + u_p/p + 1/p, so no complex arithmetic ever
enters.  Infinite products are truncated at a shared pmax with the tail
reported as a bound, never silently dropped.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .arith import factorize, sieve_primes
from .curve import CoefficientTable, CurveConfig, sym2_local, sym2_value
from .errors import DomainError
from .lvalue import local_factor_La
from .resonator import ResonatorParams, b_prime

ZETA2 = math.pi**2 / 6.0

DEFAULT_PMAX = 100_000


def _alpha_term(table: CoefficientTable, p: int) -> float:
    ap = float(table.a[p])
    return 1.0 - (ap * ap - 2.0) / p + 1.0 / (p * p)


def _denom(table: CoefficientTable, p: int) -> float:
    return 1.0 + _alpha_term(table, p) / p + 1.0 / p


def h_factor(table: CoefficientTable, p: int) -> float:
    """h(p) = (1 + 1/p) / (1 + u_p/p + 1/p), in (0, 1]."""
    if math.lcm(8, table.conductor) % p == 0:
        raise DomainError(f"h(p) undefined at p={p} | N0")
    return (1.0 + 1.0 / p) / _denom(table, p)


def h_factor_exact(p: int, trace: int) -> Fraction:
    """h(p) in exact rational arithmetic from the integer trace a(p)sqrt(p)."""
    ap_sq = Fraction(trace * trace, p)
    u = 1 - (ap_sq - 2) / p + Fraction(1, p * p)
    return (1 + Fraction(1, p)) / (1 + u / p + Fraction(1, p))


def h_tilde(table: CoefficientTable, p: int, k: int) -> float:
    """h~(p^k): the odd-k case is 1/denom, the even-k case carries an extra
    (1+1/p); so h~(even)/h~(odd) = 1 + 1/p and h(p) = (1+1/p) h~(p, odd)."""
    if math.lcm(8, table.conductor) % p == 0:
        raise DomainError(f"h~(p^k) undefined at p={p} | N0")
    if k < 1:
        raise DomainError("k must be >= 1")
    base = 1.0 / _denom(table, p)
    return base * (1.0 + 1.0 / p) if k % 2 == 0 else base


def h_of_ell(table: CoefficientTable, ell: int, n0: int) -> float:
    """Multiplicative h(l) over squarefree l coprime to N0."""
    if ell == 1:
        return 1.0
    fac = _small_factorize(ell)
    if any(e > 1 for _, e in fac):
        raise DomainError(f"l={ell} is not squarefree")
    if math.gcd(ell, n0) != 1:
        raise DomainError(f"l={ell} shares a factor with N0={n0}")
    out = 1.0
    for p, _ in fac:
        out *= h_factor(table, p)
    return out


def h_tilde_of_u(table: CoefficientTable, u: int, n0: int) -> float:
    """Multiplicative h~(u) over u coprime to N0."""
    if u == 1:
        return 1.0
    if math.gcd(u, n0) != 1:
        raise DomainError(f"u={u} shares a factor with N0={n0}")
    out = 1.0
    for p, e in _small_factorize(u):
        out *= h_tilde(table, p, e)
    return out


@lru_cache(maxsize=None)
def _primes_upto(n: int):
    return sieve_primes(max(2, n)).primes


def _small_factorize(n: int):
    return factorize(n, sieve_primes(max(2, math.isqrt(abs(n)) + 1))).factors


def squarefree_part(u: int) -> int:
    """u1 with u = u1 u2^2, u1 squarefree."""
    out = 1
    for p, e in _small_factorize(u):
        if e % 2 == 1:
            out *= p
    return out


class TruncatedProduct(NamedTuple):
    value: float
    pmax: int
    tail_bound: float  # bound on |log(true/value)|


def C_p(table: CoefficientTable, cfg: CurveConfig, p: int) -> float:
    """Local constant: L_p(1, sym^2 E)^{-1} at p | N0, else
    (1-1/p)^2 (1 + u_p/p + 1/p); note C_p(E) h~(p,1) = (1-1/p)^2 exactly."""
    if cfg.N0 % p == 0:
        return 1.0 / sym2_local(table, cfg, p)
    return (1.0 - 1.0 / p) ** 2 * _denom(table, p)


def C_E(table: CoefficientTable, cfg: CurveConfig, pmax: int = DEFAULT_PMAX) -> TruncatedProduct:
    """Truncated product of C_p(E) with a tail bound from
    |log C_p| <= (a(p)^2 + 1 + o(1))/p^2 <= 6/p^2 for large p."""
    log_total = 0.0
    for p in _primes_upto(pmax):
        p = int(p)
        if p > pmax:
            break
        log_total += math.log(C_p(table, cfg, p))
    return TruncatedProduct(math.exp(log_total), pmax, 6.0 / pmax)


def G_factor(
    table: CoefficientTable,
    cfg: CurveConfig,
    u: int,
    ell: int,
    pmax: int = DEFAULT_PMAX,
) -> float:
    """G(1;u,l) as the four-case local product, truncated at pmax.

    The identity G(1;u,l) = C(E) h~(u) h(l) holds prime by prime; tests
    verify both routes agree to 1e-10 relative under matching truncation.
    """
    if math.gcd(u, ell) != 1:
        raise DomainError("u and l must be coprime")
    if math.gcd(u * ell, cfg.N0) != 1:
        raise DomainError("u*l must be coprime to N0")
    ell_fac = _small_factorize(ell)
    if any(e > 1 for _, e in ell_fac):
        raise DomainError(f"l={ell} is not squarefree")
    u1 = squarefree_part(u)
    log_total = 0.0
    for p in _primes_upto(pmax):
        p = int(p)
        if p > pmax:
            break
        if cfg.N0 % p == 0:
            val = 1.0 / sym2_local(table, cfg, p)
        elif u1 % p == 0:
            val = (1.0 - 1.0 / p) ** 2
        elif (u * ell) % p == 0:
            val = (1.0 - 1.0 / p) * (1.0 - 1.0 / (p * p))
        else:
            val = (1.0 - 1.0 / p) ** 2 * _denom(table, p)
        log_total += math.log(val)
    return math.exp(log_total)


# ---------------------------------------------------------------------------
# Resonated densities and main-term normalizations
# ---------------------------------------------------------------------------


def _bracket1(params: ResonatorParams, table: CoefficientTable, p: int) -> float:
    """1 + b(p)^2 h~(p^2) + 2 a(p) b(p) h~(p) / sqrt(p)."""
    b = b_prime(params, table, p)
    if b == 0.0:
        return 1.0
    ap = float(table.a[p])
    return 1.0 + b * b * h_tilde(table, p, 2) + 2.0 * ap * b * h_tilde(table, p, 1) / math.sqrt(p)


def _bracket2(params: ResonatorParams, table: CoefficientTable, p: int) -> float:
    """1 + b(p)^2 p/(p+1)."""
    b = b_prime(params, table, p)
    return 1.0 + b * b * p / (p + 1.0)


def g1(params: ResonatorParams, table: CoefficientTable, ell: int) -> float:
    """Multiplicative density of the L-weighted congruence sums; zero at
    p | N0, h(p)/p at primes outside the resonator support."""
    return _g_mult(params, table, ell, _g1_p)


def g2(params: ResonatorParams, table: CoefficientTable, ell: int) -> float:
    """Multiplicative density of the resonator-square sums."""
    return _g_mult(params, table, ell, _g2_p)


def _g1_p(params, table, p):
    if math.lcm(8, table.conductor) % p == 0:
        return 0.0
    return h_factor(table, p) / p / _bracket1(params, table, p)


def _g2_p(params, table, p):
    if math.lcm(8, table.conductor) % p == 0:
        return 0.0
    return 1.0 / (p + 1.0) / _bracket2(params, table, p)


def _g_mult(params, table, ell, local):
    if ell < 1:
        raise DomainError("l must be >= 1")
    if ell == 1:
        return 1.0
    fac = _small_factorize(ell)
    if any(e > 1 for _, e in fac):
        raise DomainError(f"l={ell} is not squarefree")
    out = 1.0
    for p, _ in fac:
        out *= local(params, table, p)
    return out


class EulerFactorSet:
    """Shared context caching the s=1 factors for one (curve, class,
    resonator) combination at a fixed truncation pmax.

    ``bracket_violations`` lists window primes where the minus-sign bracket
    1 + b^2 h~(p^2) + 2 a b h~(p)/sqrt(p) failed to stay positive (reported,
    not assumed impossible).
    """

    def __init__(
        self,
        table: CoefficientTable,
        cfg: CurveConfig,
        a_residue: int,
        res_params: ResonatorParams = None,
        pmax: int = DEFAULT_PMAX,
    ):
        self.table = table
        self.cfg = cfg
        self.a_residue = a_residue
        self.res = res_params
        self.pmax = pmax
        self.la_half = local_factor_La(cfg, table, a_residue, 0.5)
        self.sym2 = sym2_value(table, cfg, pmax).value
        self.ce = C_E(table, cfg, pmax)
        self.bracket_violations = []
        if res_params is not None:
            self._scan_brackets()
        if self.la_half * self.sym2 * self.ce.value <= 0:
            raise DomainError("L_a(1/2) L(1,sym^2 E) C(E) must be positive")

    def _scan_brackets(self):
        for p in self.res.window_primes(self.table):
            p = int(p)
            if self.cfg.N0 % p == 0:
                continue
            if _bracket1(self.res, self.table, p) <= 0.0:
                self.bracket_violations.append(p)

    def h(self, ell: int) -> float:
        return h_of_ell(self.table, ell, self.cfg.N0)

    def h_tilde_u(self, u: int) -> float:
        return h_tilde_of_u(self.table, u, self.cfg.N0)

    def G(self, u: int, ell: int) -> float:
        return G_factor(self.table, self.cfg, u, ell, self.pmax)

    def G_via_identity(self, u: int, ell: int) -> float:
        return self.ce.value * self.h_tilde_u(u) * self.h(ell)

    def g1(self, ell: int) -> float:
        self._need_resonator()
        return g1(self.res, self.table, ell)

    def g2(self, ell: int) -> float:
        self._need_resonator()
        return g2(self.res, self.table, ell)

    def main_term_X1(self, X: float, phi0: float) -> float:
        """Bracket product over the window times
        (2X/N0) Phi^(0) L_a(1/2) L(1,sym^2 E) C(E)."""
        self._need_resonator()
        prod = 1.0
        for p in self.res.window_primes(self.table):
            p = int(p)
            if self.cfg.N0 % p == 0:
                continue
            prod *= _bracket1(self.res, self.table, p)
        return prod * (2.0 * X / self.cfg.N0) * phi0 * self.la_half * self.sym2 * self.ce.value

    def main_term_X2(self, X: float, phi0: float) -> float:
        """X/(N0 zeta(2)) Phi^(0) prod_{p|N0}(1-1/p^2)^{-1} times the
        resonator-square window product."""
        self._need_resonator()
        prod = 1.0
        for p in self.res.window_primes(self.table):
            p = int(p)
            if self.cfg.N0 % p == 0:
                continue
            prod *= _bracket2(self.res, self.table, p)
        bad = 1.0
        for p, _ in _small_factorize(self.cfg.N0):
            bad /= 1.0 - 1.0 / (p * p)
        return X / (self.cfg.N0 * ZETA2) * phi0 * bad * prod

    def _need_resonator(self):
        if self.res is None:
            raise DomainError("this EulerFactorSet was built without resonator params")
