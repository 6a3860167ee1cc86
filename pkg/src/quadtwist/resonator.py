"""Resonator weights b(m) and resonator values R(d).

The multiplicative weights live on squarefree odd m whose prime factors all
fall in a window of primes; at each window prime,
b(p) = sign * a(p) * L / (sqrt(p) log p) with L = sqrt(log M loglog M).

The window from the asymptotic analysis, [L^2, exp((log L)^2)], is empty
unless M is astronomically large, so a ``window_override`` decouples the
support interval from M for desk-scale experiments; ``regime`` records which
rule is in force.  M < 3 makes L undefined and the resonator trivial
(R = 1), which is exactly what the replication-mode parameters produce at
reachable X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import kronecker, sieve_primes
from .curve import CoefficientTable
from .errors import DomainError, ResourceLimitError

MAX_WINDOW_PRIMES = 1_000_000


@dataclass(frozen=True)
class ResonatorParams:
    M: int
    sign: int
    window_override: tuple = None
    L: float = field(init=False)
    window: tuple = field(init=False)
    regime: str = field(init=False)

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError("resonator sign must be +-1")
        if self.M < 1:
            raise DomainError("M must be a positive integer")
        if self.M < 3:
            object.__setattr__(self, "L", 0.0)
            object.__setattr__(self, "window", (3.0, 2.0))  # empty
            object.__setattr__(self, "regime", "trivial")
            return
        L = math.sqrt(math.log(self.M) * math.log(math.log(self.M)))
        object.__setattr__(self, "L", L)
        if self.window_override is not None:
            lo, hi = self.window_override
            object.__setattr__(self, "window", (float(lo), float(hi)))
            object.__setattr__(self, "regime", "override")
            return
        if math.log(self.M) * math.log(math.log(self.M)) <= math.exp(4.0):
            raise DomainError(
                f"paper window [L^2, exp((log L)^2)] is empty for M={self.M}: "
                f"log M loglog M = {math.log(self.M) * math.log(math.log(self.M)):.3f} "
                f"<= e^4; pass window_override for desk-scale runs"
            )
        object.__setattr__(self, "window", (L**2, math.exp(math.log(L) ** 2)))
        object.__setattr__(self, "regime", "paper")

    def window_primes(self, table: CoefficientTable) -> np.ndarray:
        """Odd primes in the support window, capped at M (larger primes
        cannot divide any m <= M)."""
        lo, hi = self.window
        hi = min(hi, float(self.M))
        if hi < lo or hi < 3:
            return np.empty(0, dtype=np.int64)
        if hi > MAX_WINDOW_PRIMES * 20:
            raise ResourceLimitError(f"window prime bound {hi:.3e} beyond budget")
        ps = sieve_primes(int(hi)).primes
        ps = ps[(ps >= max(lo, 3)) & (ps <= hi)]
        if len(ps) > MAX_WINDOW_PRIMES:
            raise ResourceLimitError(f"{len(ps)} window primes beyond budget")
        if len(ps) and int(ps[-1]) > table.nmax:
            raise ResourceLimitError(
                f"window prime {int(ps[-1])} beyond coefficient table", required=int(ps[-1])
            )
        return ps.astype(np.int64)


@dataclass(frozen=True)
class ResonatorValue:
    d: int
    value: float
    support_count: int


def b_prime(params: ResonatorParams, table: CoefficientTable, p: int) -> float:
    """b(p) at a single prime; zero outside the odd-prime window."""
    lo, hi = params.window
    if p < 3 or not lo <= p <= hi or params.L == 0.0:
        return 0.0
    return params.sign * float(table.a[p]) * params.L / (math.sqrt(p) * math.log(p))


def b_coeff(params: ResonatorParams, table: CoefficientTable, m: int) -> float:
    """Multiplicative b(m); zero unless m is squarefree with all prime
    factors in the window."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if m == 1:
        return 1.0
    val = 1.0
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0.0
            val *= b_prime(params, table, p)
            if val == 0.0:
                return 0.0
        p += 1 if p == 2 else 2
    if m > 1:
        val *= b_prime(params, table, m)
    return val


def _dfs_terms(primes, bvals, chivals, M):
    """Depth-first walk over squarefree products of window primes <= M.

    Yields (term, is_supported): term = prod b(p)chi(p); supported counts
    every visited m (b(m) != 0 by construction).
    """
    k = len(primes)
    stack = [(0, 1, 1.0)]  # (next index, product, coefficient term)
    while stack:
        i, prod, term = stack.pop()
        yield term
        for j in range(i, k):
            p = int(primes[j])
            np_ = prod * p
            if np_ > M:
                break  # primes ascending: later ones only bigger
            stack.append((j + 1, np_, term * bvals[j] * chivals[j]))


def _support(params: ResonatorParams, table: CoefficientTable):
    """Window primes with b(p) != 0 (primes where a(p) = 0 drop out)."""
    primes = params.window_primes(table)
    kept = []
    bvals = []
    for p in primes:
        b = b_prime(params, table, int(p))
        if b != 0.0:
            kept.append(int(p))
            bvals.append(b)
    return kept, bvals


def resonate(params: ResonatorParams, table: CoefficientTable, d: int) -> ResonatorValue:
    """R(d) = sum over odd squarefree window-supported m <= M of b(m)chi_d(m).

    Kahan-compensated accumulation: the terms span many orders of magnitude.
    """
    primes, bvals = _support(params, table)
    chivals = [kronecker(d, p) for p in primes]
    acc = 0.0
    comp = 0.0
    count = 0
    for term in _dfs_terms(primes, bvals, chivals, params.M):
        count += 1
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return ResonatorValue(d=d, value=acc, support_count=count)


def resonate_family(params: ResonatorParams, table: CoefficientTable, ds) -> np.ndarray:
    """R(d) for every d, sharing the window/prime setup across the family."""
    primes, bvals = _support(params, table)
    out = np.empty(len(ds))
    for i, d in enumerate(ds):
        chivals = [kronecker(int(d), p) for p in primes]
        acc = 0.0
        comp = 0.0
        for term in _dfs_terms(primes, bvals, chivals, params.M):
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        out[i] = acc
    return out
