"""Central values L(1/2, E_d) by the exact smoothed identity, the balanced
off-center evaluator used as a cross-check, and the N0-local factor L_a(s).

The workhorse identity (root number +1):

    L(1/2, E_d) = 2 sum_{n>=1} a(n) chi_d(n) n^{-1/2} e^{-n/Q},
    Q = sqrt(N) |d| / (2 pi),

obtained by unsmoothing the Mellin pair Gamma(u) <-> e^{-y} against the
completed L-function and its reflection.  Root number -1 forces the value 0.
Truncation at T = ceil(Q (log(1/tol) + log(Q+2) + 4)) keeps the tail, via
tau(n) <= 2 sqrt(n), below 4 e^{-(T+1)/Q} / (1 - e^{-1/Q}) < tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma_fn, gammaincc

from . import _kernels
from .arith import factorize, is_fundamental_discriminant, kronecker, sieve_primes
from .curve import CoefficientTable, CurveConfig
from .errors import DomainError, NumericalError, ResourceLimitError
from .twists import root_number

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CentralValue:
    d: int
    value: float  # clamped to 0 when within tol of 0 (Waldspurger)
    truncation: int
    tail_bound: float
    raw: float  # unclamped sum, for nonnegativity diagnostics


def conductor_scale(cfg: CurveConfig, d: int) -> float:
    """Q = sqrt(N)|d|/(2 pi), the analytic length of the twisted sum."""
    return math.sqrt(cfg.conductor) * abs(d) / TWO_PI


def truncation_length(cfg: CurveConfig, d: int, tol: float) -> int:
    Q = conductor_scale(cfg, d)
    return int(math.ceil(Q * (math.log(1.0 / tol) + math.log(Q + 2.0) + 4.0)))


def _admissible(cfg: CurveConfig, d: int) -> None:
    if math.gcd(d, 2 * cfg.conductor) != 1:
        raise DomainError(f"d={d} shares a factor with 2N")
    if not is_fundamental_discriminant(d):
        raise DomainError(f"d={d} is not a fundamental discriminant")


def central_value(cfg: CurveConfig, table: CoefficientTable, d: int, tol: float) -> CentralValue:
    """L(1/2, E_d) to absolute accuracy tol."""
    _admissible(cfg, d)
    if root_number(cfg, d) == -1:
        return CentralValue(d=d, value=0.0, truncation=0, tail_bound=0.0, raw=0.0)
    vals, tails, Ts = _kernels.central_values_bulk(
        np.array([d], dtype=np.int64), table.w, table.spf, cfg.conductor, tol
    )
    if math.isnan(vals[0]):
        raise ResourceLimitError(
            f"need coefficients to {Ts[0]} for d={d}, table has {table.nmax}",
            required=int(Ts[0]),
        )
    return _pack(d, float(vals[0]), float(tails[0]), int(Ts[0]), tol)


def _pack(d, raw, tail, T, tol):
    if raw < -(tol + tail):
        raise NumericalError(f"negative central value {raw} at d={d} beyond tolerance")
    value = 0.0 if abs(raw) <= tol else raw
    return CentralValue(d=d, value=value, truncation=T, tail_bound=tail, raw=raw)


def central_values(cfg: CurveConfig, table: CoefficientTable, ds, tol: float) -> list:
    """Bulk evaluation over many discriminants; root-number -1 short-circuits."""
    ds = [int(d) for d in ds]
    plus = np.array([d for d in ds if root_number(cfg, d) == 1], dtype=np.int64)
    results = {d: CentralValue(d, 0.0, 0, 0.0, 0.0) for d in ds}
    if len(plus):
        vals, tails, Ts = _kernels.central_values_bulk(
            plus, table.w, table.spf, cfg.conductor, tol
        )
        bad = np.isnan(vals)
        if bad.any():
            need = int(Ts[bad].max())
            raise ResourceLimitError(
                f"need coefficients to {need}, table has {table.nmax}", required=need
            )
        for d, v, t, T in zip(plus, vals, tails, Ts):
            results[int(d)] = _pack(int(d), float(v), float(t), int(T), tol)
    return [results[d] for d in ds]


def ensure_central_values(cfg, table, ds, tol, cache=None) -> dict:
    """d -> CentralValue, reading/writing the on-disk cache when given."""
    ds = [int(d) for d in ds]
    out = {}
    missing = []
    for d in ds:
        hit = cache.get(d) if cache is not None else None
        if hit is not None:
            raw, tail, T = hit
            out[d] = _pack(d, raw, tail, T, tol)
        else:
            missing.append(d)
    if missing:
        for cv in central_values(cfg, table, missing, tol):
            out[cv.d] = cv
            if cache is not None:
                cache.put(cv.d, cv.raw, cv.tail_bound, cv.truncation)
        if cache is not None:
            cache.flush()
    return out


def central_value_map(cfg, table, ds, tol, cache=None) -> dict:
    """d -> clamped central value (plain floats, the shape the moment and
    search sweeps consume)."""
    return {d: cv.value for d, cv in ensure_central_values(cfg, table, ds, tol, cache).items()}


# ---------------------------------------------------------------------------
# Balanced off-center evaluator (cross-check oracle)
# ---------------------------------------------------------------------------


def completed_value(
    cfg: CurveConfig,
    table: CoefficientTable,
    d: int,
    s: float,
    tol: float = 1e-10,
    x0: float = 1.0,
) -> float:
    """Lambda(s, E_d) by the balanced absolutely-convergent pair

        sum a(n)chi_d(n) (Q/n)^s Gamma(s+1/2, n/(x0 Q))
      + eps * sum a(n)chi_d(n) (Q/n)^{1-s} Gamma(3/2-s, n x0/Q).

    x0 shifts weight between the two sums; the value is independent of x0,
    which is exactly what makes two choices of x0 an implementation oracle.
    """
    _admissible(cfg, d)
    if not 0.0 < s < 1.0:
        raise DomainError("s must lie in the critical strip (0,1)")
    eps = root_number(cfg, d)
    Q = conductor_scale(cfg, d)
    part_a = _incgamma_sum(table, d, Q, s, x0 * Q, tol)
    part_b = _incgamma_sum(table, d, Q, 1.0 - s, Q / x0, tol)
    return part_a + eps * part_b


def _incgamma_sum(table, d, Q, s, L, tol):
    # sum a(n)chi(n)(Q/n)^s Gamma(s+1/2, n/L); terms die like e^{-n/L}
    T = int(math.ceil(L * (math.log(1.0 / tol) + math.log(L + 2.0) + 6.0)))
    if T > table.nmax:
        raise ResourceLimitError(
            f"balanced evaluator needs coefficients to {T}", required=T
        )
    ad = abs(d)
    period = np.empty(ad, dtype=np.int8)
    _kernels.chi_period(d, table.spf, period)
    n = np.arange(1, T + 1, dtype=np.float64)
    chi = period[np.arange(1, T + 1) % ad].astype(np.float64)
    b = s + 0.5
    terms = table.a[1 : T + 1] * chi * (Q / n) ** s
    terms *= gammaincc(b, n / L) * _gamma_fn(b)
    return float(np.sum(terms))


# ---------------------------------------------------------------------------
# The local factor L_a(s)
# ---------------------------------------------------------------------------


def _class_chi(cfg: CurveConfig, a_residue: int, p: int) -> int:
    # chi_d(p) is constant on the class: it depends only on d mod p (odd p)
    # or d mod 8 (p = 2), both pinned by d = a mod N0
    return kronecker(a_residue, p)


def _check_class(cfg: CurveConfig, a_residue: int) -> None:
    if a_residue % 8 not in (1, 5) or math.gcd(a_residue, cfg.N0) != 1:
        raise DomainError(f"a={a_residue} is not an admissible class mod N0={cfg.N0}")


def local_factor_La(
    cfg: CurveConfig,
    table: CoefficientTable,
    a_residue: int,
    s: float,
    terms: int = 0,
) -> float:
    """L_a(s): the Dirichlet series over N0-smooth n, as a finite Euler
    product; with ``terms`` > 0 the direct partial sum over smooth n <= terms
    instead (the two must agree, which tests exploit)."""
    _check_class(cfg, a_residue)
    if s <= 0:
        raise DomainError("s must be positive")
    bad_ps = [p for p, _ in factorize(cfg.N0, sieve_primes(max(2, cfg.N0))).factors]
    if terms > 0:
        return _la_series(cfg, table, a_residue, s, terms, bad_ps)
    val = 1.0
    for p in bad_ps:
        chi = _class_chi(cfg, a_residue, p)
        ap = float(table.a[p])
        x = chi * p ** (-s)
        if cfg.is_bad(p):
            val /= 1.0 - ap * x
        else:
            # good prime dividing N0 (p=2 for odd N): full Hecke factor,
            # chi(p)^2 = 1 since d is coprime to N0
            val /= 1.0 - ap * x + p ** (-2.0 * s)
    return val


def _la_series(cfg, table, a_residue, s, terms, bad_ps):
    # a(p^k) from the prime-power recursions, so only the primes dividing
    # N0 must sit inside the coefficient table
    powers = {}
    for p in bad_ps:
        if p > table.nmax:
            raise ResourceLimitError(f"table must cover p={p}", required=p)
        ap = float(table.a[p])
        vals = [1.0, ap]
        q = p * p
        while q <= terms:
            if cfg.is_bad(p):
                vals.append(vals[-1] * ap)
            else:
                vals.append(ap * vals[-1] - vals[-2])
            q *= p
        powers[p] = vals
    total = 0.0
    stack = [(0, 1, 1.0)]
    while stack:
        i, n, coef = stack.pop()
        total += coef * n ** (-s)
        for j in range(i, len(bad_ps)):
            p = bad_ps[j]
            chi = _class_chi(cfg, a_residue, p)
            q = n * p
            k = 1
            while q <= terms:
                stack.append((j + 1, q, coef * powers[p][k] * chi**k))
                q *= p
                k += 1
    return total
