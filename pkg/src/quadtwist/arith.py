"""Integer and real primitives: primes, Kronecker symbol, fundamental
discriminants, factorization, and the smooth cutoff weight with its Mellin
transform.

Everything here is pure and immutable after construction, safe to share
across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, IncompleteFactorizationError, NumericalError, ResourceLimitError

# Segment length for the segmented sieve; keeps peak memory at
# O(sqrt(limit) + SEGMENT) booleans.
SEGMENT = 1 << 20

# Refuse sieves whose *output* (the prime list itself) would not fit a
# modest memory budget.  pi(4e9) ~ 2e8 primes ~ 1.6 GB of int64.
MAX_SIEVE_LIMIT = 4 * 10**9


@dataclass(frozen=True)
class PrimeTable:
    """Ascending primes up to ``limit``."""

    limit: int
    primes: np.ndarray

    def __post_init__(self):
        self.primes.setflags(write=False)

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)


def _simple_sieve(n: int) -> np.ndarray:
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if mask[i]:
            mask[i * i :: i] = False
    return np.nonzero(mask)[0].astype(np.int64)


def sieve_primes(limit: int) -> PrimeTable:
    """Segmented sieve of Eratosthenes.

    Parameters
    ----------
    limit : int
        Inclusive upper bound, >= 2.

    Returns
    -------
    PrimeTable
    """
    if limit < 2:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    if limit > MAX_SIEVE_LIMIT:
        raise ResourceLimitError(
            f"sieve limit {limit} exceeds budget {MAX_SIEVE_LIMIT}", required=limit
        )
    root = math.isqrt(limit)
    base = _simple_sieve(root)
    if limit <= root:
        return PrimeTable(limit, base[base <= limit])
    chunks = [base]
    lo = root + 1
    while lo <= limit:
        hi = min(lo + SEGMENT, limit + 1)
        mask = np.ones(hi - lo, dtype=bool)
        for p in base:
            start = (-lo) % p
            mask[start::p] = False
        chunks.append(np.nonzero(mask)[0].astype(np.int64) + lo)
        lo = hi
    return PrimeTable(limit, np.concatenate(chunks))


def kronecker(d: int, n: int) -> int:
    """Full Kronecker symbol (d|n), defined for all integers n.

    Completely multiplicative in n; agrees with the Legendre symbol when n
    is an odd prime not dividing d.  Conventions for n <= 0 and even n are
    the standard extension.
    """
    if n == 0:
        return 1 if d in (1, -1) else 0
    if d % 2 == 0 and n % 2 == 0:
        return 0
    k = 1
    v = 0
    while n % 2 == 0:
        v += 1
        n //= 2
    if v % 2 == 1 and d % 8 in (3, 5):
        k = -k
    if n < 0:
        n = -n
        if d < 0:
            k = -k
    # now n is positive and odd: Jacobi-style reciprocity loop
    d %= n
    while d != 0:
        v = 0
        while d % 2 == 0:
            v += 1
            d //= 2
        if v % 2 == 1 and n % 8 in (3, 5):
            k = -k
        if d % 4 == 3 and n % 4 == 3:
            k = -k
        d, n = n % d, d
    return k if n == 1 else 0


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    if n % 4 == 0:
        return False
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 2
    return True


def is_fundamental_discriminant(d: int) -> bool:
    """d is the discriminant of a quadratic field (d=1 counts as the
    trivial discriminant)."""
    if d == 0:
        raise DomainError("d must be nonzero")
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class Factorization:
    """Prime factorization of a positive integer, primes ascending."""

    n: int
    factors: tuple  # ((p, e), ...)

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)

    def __str__(self):
        if not self.factors:
            return "1"
        return "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)


def factorize(n: int, table: PrimeTable) -> Factorization:
    """Trial division against ``table``; guaranteed complete for
    |n| <= limit^2, where any surviving cofactor is necessarily prime."""
    m = abs(n)
    if m == 0:
        raise DomainError("cannot factor 0")
    factors = []
    rest = m
    for p in table.primes:
        p = int(p)
        if p * p > rest:
            break
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            factors.append((p, e))
    if rest > 1:
        if rest > table.limit**2:
            raise IncompleteFactorizationError(
                f"cofactor {rest} exceeds limit^2; cannot certify prime", cofactor=rest
            )
        # no prime factor <= limit and rest <= limit^2 force rest prime
        factors.append((rest, 1))
    return Factorization(m, tuple(factors))


def omega(n: int, table: PrimeTable) -> int:
    """Number of distinct prime factors of |n|."""
    return factorize(n, table).omega


# ---------------------------------------------------------------------------
# Smooth cutoff weight
# ---------------------------------------------------------------------------

SUPPORT = (0.5, 2.5)
PLATEAU = (1.0, 2.0)


@dataclass(frozen=True)
class BumpFunction:
    """C^inf cutoff: 1 on [1,2], 0 outside [1/2,5/2], smoothstep transitions.

    The transitions use g(t) = s(t)/(s(t)+s(1-t)) with s(t) = exp(-shape/t),
    which is symmetric: g(t) + g(1-t) = 1.  That symmetry makes the total
    mass exactly 3/2 regardless of ``shape``.
    """

    shape: float = 1.0

    inner: tuple = field(default=PLATEAU, init=False)
    support: tuple = field(default=SUPPORT, init=False)

    def _step(self, t):
        # rises 0 -> 1 across [0, 1]
        t = np.clip(t, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            a = np.where(t > 0, np.exp(-self.shape / np.maximum(t, 1e-300)), 0.0)
            b = np.where(t < 1, np.exp(-self.shape / np.maximum(1 - t, 1e-300)), 0.0)
        return a / (a + b)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        rising = self._step((x - 0.5) / 0.5)
        falling = self._step((2.5 - x) / 0.5)
        out = np.where(
            (x >= 1.0) & (x <= 2.0),
            1.0,
            np.where(
                (x > 0.5) & (x < 1.0),
                rising,
                np.where((x > 2.0) & (x < 2.5), falling, 0.0),
            ),
        )
        return float(out) if out.ndim == 0 else out


def bump_eval(phi: BumpFunction, x) -> float:
    return phi(x)


def bump_mellin(phi: BumpFunction, s: float) -> float:
    """Mellin transform integral of Phi(x) x^s over (0, inf).

    Exact plateau contribution plus adaptive quadrature on the two
    transition intervals; absolute error below 1e-12.
    """
    if s == -1.0:
        plateau = math.log(2.0)
    else:
        plateau = (2.0 ** (s + 1) - 1.0) / (s + 1)
    total_err = 0.0
    total = plateau
    for lo, hi in ((0.5, 1.0), (2.0, 2.5)):
        val, err = quad(lambda x: phi(x) * x**s, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
        total_err += err
    if total_err > 1e-12:
        raise NumericalError(f"mellin quadrature error {total_err:.2e} above 1e-12")
    return total
