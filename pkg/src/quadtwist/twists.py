"""Enumeration of the quadratic-twist family: fundamental discriminants in a
fixed residue class mod N0 with prescribed sign, coprime to 2N, constant root
number +1, plus almost-prime and rough filters.

Discriminants here are always odd (the class constraint a = 1 or 5 mod 8
forces d = 1 mod 4), so fundamental just means squarefree.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .arith import Factorization, kronecker, sieve_primes
from .curve import CurveConfig
from .errors import DomainError

log = logging.getLogger(__name__)

ENUM_SEGMENT = 1 << 21

# the operating point of the linear sieve in replication mode
PAPER_S = 2.023


def root_number(cfg: CurveConfig, d: int) -> int:
    """Sign of the functional equation of the twist: eps_E * chi_d(-N)."""
    if math.gcd(d, 2 * cfg.conductor) != 1:
        raise DomainError(f"d={d} shares a factor with 2N")
    return cfg.root_number * kronecker(d, -cfg.conductor)


@dataclass(frozen=True)
class FamilyParams:
    """Descriptor of one family Omega(a, sign) and its window/filters."""

    a: int
    sign: int
    X: float
    W: int
    z: float
    D: float
    s: float
    M: int

    @classmethod
    def paper_regime(cls, a: int, sign: int, X: float, W: int) -> "FamilyParams":
        """Lock z, D, s, M to the relations used in the extreme-value proof."""
        if W < 20:
            raise DomainError(f"replication mode requires W >= 20, got W={W}")
        if X < 16:
            raise DomainError("X must be >= 16")
        z = X ** (1.0 / (W + 0.5))
        D = X ** (PAPER_S / (W + 0.5))
        M = max(1, int(X ** ((W - 19.73) / (22 * W + 12))))
        return cls(a=a, sign=sign, X=X, W=W, z=z, D=D, s=PAPER_S, M=M)

    def validate(self, cfg: CurveConfig) -> None:
        if self.sign not in (1, -1):
            raise DomainError("sign must be +-1")
        if self.a % 8 not in (1, 5):
            raise DomainError(f"residue a={self.a} is not 1 or 5 mod 8")
        if math.gcd(self.a, cfg.N0) != 1:
            raise DomainError(f"residue a={self.a} shares a factor with N0={cfg.N0}")
        if self.X <= 0 or self.W < 1 or self.M < 1:
            raise DomainError("X, W, M must be positive")


@dataclass(frozen=True)
class TwistDiscriminant:
    d: int
    omega: int
    factorization: Factorization

    @property
    def min_prime(self) -> int:
        if not self.factorization.factors:
            return 0  # d = +-1, the trivial twist
        return self.factorization.factors[0][0]


def _segment_scan(lo: int, hi: int, base_primes: np.ndarray):
    """Squarefree flags and omega counts for the integers in [lo, hi)."""
    n = hi - lo
    rem = np.arange(lo, hi, dtype=np.int64)
    om = np.zeros(n, dtype=np.int16)
    sqf = np.ones(n, dtype=bool)
    top = hi - 1
    for p in base_primes:
        p = int(p)
        if p * p > top:
            break
        om[(-lo) % p :: p] += 1
        sqf[(-lo) % (p * p) :: p * p] = False
        pk = p
        while pk <= top:
            rem[(-lo) % pk :: pk] //= p
            if pk > top // p:
                break
            pk *= p
    om += (rem > 1).astype(np.int16)
    return sqf, om


def enum_family(cfg: CurveConfig, params: FamilyParams) -> list:
    """All family members with |d| in [X/2, 5X/2], ascending in |d|.

    The emitted d satisfy: fundamental, coprime to 2N, d = a mod N0,
    sign*d > 0, and (by class admissibility, spot-checked by the root-number
    invariant tests) eps_E(d) = +1.
    """
    params.validate(cfg)
    lo = math.ceil(params.X / 2)
    hi = math.floor(5 * params.X / 2)
    if hi < lo:
        return []
    n0 = cfg.N0
    residue = (params.sign * params.a) % n0  # |d| = sign*a mod N0
    base = sieve_primes(max(2, math.isqrt(hi) + 1)).primes
    out = []
    seg_lo = lo
    while seg_lo <= hi:
        seg_hi = min(seg_lo + ENUM_SEGMENT, hi + 1)
        sqf, om = _segment_scan(seg_lo, seg_hi, base)
        start = (residue - seg_lo) % n0
        for idx in range(start, seg_hi - seg_lo, n0):
            if not sqf[idx]:
                continue
            t = seg_lo + idx
            factors = []
            m = t
            for p in base:
                p = int(p)
                if p * p > m:
                    break
                if m % p == 0:
                    factors.append((p, 1))
                    m //= p
            if m > 1:
                factors.append((m, 1))
            out.append(
                TwistDiscriminant(
                    d=params.sign * t,
                    omega=int(om[idx]),
                    factorization=Factorization(t, tuple(factors)),
                )
            )
        seg_lo = seg_hi
    return out


def filter_almost_prime(family, W: int) -> list:
    """Keep members with at most W distinct prime factors."""
    return [t for t in family if t.omega <= W]


def filter_rough(family, z: float) -> list:
    """Keep members free of prime factors below z (primes dividing N0
    cannot divide d anyway)."""
    return [t for t in family if t.omega == 0 or t.min_prime >= z]


def discover_classes(cfg: CurveConfig, sign: int, samples: int = 100) -> list:
    """Residues a mod N0 whose fundamental discriminants of the given sign
    all carry root number +1, validated on ``samples`` members each.

    chi_d(-N) is determined by d mod N0 and the sign, so the sampling is a
    guard against implementation bugs, not a mathematical gamble; a class
    showing mixed root numbers is reported and excluded.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +-1")
    n0 = cfg.N0
    found = []
    for a in range(1, n0, 2):
        if a % 8 not in (1, 5) or math.gcd(a, n0) != 1:
            continue
        t = (sign * a) % n0
        if t == 0:
            continue
        seen = 0
        ok = True
        mixed = False
        while seen < samples:
            if _is_odd_fundamental(t):
                r = root_number(cfg, sign * t)
                if r != 1:
                    ok = False
                    mixed = seen > 0
                    break
                seen += 1
            t += n0
        if ok:
            found.append(a)
        elif mixed:
            log.warning(
                "class a=%d mod %d sign=%+d has mixed root numbers on samples", a, n0, sign
            )
    return found


def _is_odd_fundamental(t: int) -> bool:
    # t odd positive; squarefree is the only remaining condition
    p = 3
    while p * p <= t:
        if t % (p * p) == 0:
            return False
        p += 2
    return True


def family_arrays(family) -> tuple:
    """(d, |d|, omega) int64/int16 arrays for vectorized sweeps."""
    d = np.array([t.d for t in family], dtype=np.int64)
    return d, np.abs(d), np.array([t.omega for t in family], dtype=np.int16)
