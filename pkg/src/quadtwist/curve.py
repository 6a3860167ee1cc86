"""The fixed elliptic curve: Weierstrass data, normalized Hecke coefficients
from point counting, Satake parameters, the symmetric-square value, and the
prime-number-theorem diagnostic.

Curve constants that come from global invariants (real period, torsion,
period-scaling constant, bad-prime Tamagawa numbers) are configuration
inputs, not computed here.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import NamedTuple

import numpy as np

from . import _kernels
from .arith import sieve_primes
from .errors import ConfigError, DomainError, ResourceLimitError

# chi-table point counting below this bound, group-order BSGS above
AP_BSGS_THRESHOLD = 100_000

# coefficient tables beyond this would not fit the memory budget
MAX_NMAX = 200_000_000


@dataclass(frozen=True)
class CurveConfig:
    """A rational elliptic curve plus the constants downstream modules need.

    ``bad_tamagawa`` carries the (d-independent) local Tamagawa numbers of
    the twisted curves at p | N0.  ``sym2_bad_factors`` optionally overrides
    the local symmetric-square factor L_p(1, sym^2 E) at p | N0; without an
    override the standard multiplicative-reduction convention
    (1 - a(p)^2/p)^{-1} is used at p | N, and the good-prime formula at
    p | N0 with p coprime to N.
    """

    label: str
    weierstrass: tuple  # (a1, a2, a3, a4, a6)
    conductor: int
    root_number: int
    real_period: float
    torsion_order: int
    u_tilde: float
    bad_tamagawa: dict
    sym2_bad_factors: dict = field(default_factory=dict)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = self.weierstrass
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if disc == 0:
            raise ConfigError("singular Weierstrass model (discriminant 0)")
        if self.conductor < 1:
            raise ConfigError("conductor must be positive")
        if self.root_number not in (1, -1):
            raise ConfigError("root_number must be +-1")
        if not 1 <= self.torsion_order <= 12:
            raise ConfigError("torsion_order outside Mazur range [1,12]")
        if self.real_period <= 0 or self.u_tilde <= 0:
            raise ConfigError("real_period and u_tilde must be positive")
        if round(2 * self.u_tilde) != 2 * self.u_tilde:
            raise ConfigError("u_tilde must be a half-integer")
        object.__setattr__(self, "discriminant", disc)
        object.__setattr__(self, "b_invariants", (b2, b4, b6, b8))
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
        object.__setattr__(self, "c_invariants", (c4, c6))

    @property
    def N0(self) -> int:
        return math.lcm(8, self.conductor)

    def is_bad(self, p: int) -> bool:
        return self.conductor % p == 0

    def tamagawa_at(self, p: int) -> int:
        if p not in self.bad_tamagawa:
            raise ConfigError(f"no configured Tamagawa number at p={p}")
        return self.bad_tamagawa[p]


def load_curve(path_or_label) -> CurveConfig:
    """Load a curve config from a JSON file, or a bundled one by label."""
    text = None
    try:
        with open(path_or_label, "r", encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, TypeError):
        ref = resources.files("quadtwist.data").joinpath(f"{path_or_label}.json")
        if not ref.is_file():
            raise ConfigError(f"no curve file or bundled label: {path_or_label!r}")
        text = ref.read_text(encoding="utf-8")
    raw = json.loads(text)
    try:
        return CurveConfig(
            label=raw["label"],
            weierstrass=tuple(raw["weierstrass"]),
            conductor=int(raw["conductor"]),
            root_number=int(raw["root_number"]),
            real_period=float(raw["real_period"]),
            torsion_order=int(raw["torsion_order"]),
            u_tilde=float(raw["u_tilde"]),
            bad_tamagawa={int(k): int(v) for k, v in raw["bad_tamagawa"].items()},
            sym2_bad_factors={
                int(k): float(v) for k, v in raw.get("sym2_bad_factors", {}).items()
            },
        )
    except KeyError as exc:
        raise ConfigError(f"curve file missing key {exc}") from exc


# ---------------------------------------------------------------------------
# Point counting
# ---------------------------------------------------------------------------


def _count_affine_brute(cfg: CurveConfig, p: int) -> int:
    a1, a2, a3, a4, a6 = cfg.weierstrass
    count = 0
    for x in range(p):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y) % p == rhs:
                count += 1
    return count


def ap_unnormalized(cfg: CurveConfig, p: int) -> int:
    """Trace of Frobenius p + 1 - #E(F_p) via direct counting.

    Works at every prime: for odd p the completed square reduces the count
    to a quadratic-character sum over the 2-division polynomial, which for
    bad p counts the nonsingular locus correctly (a_p = 1, -1, 0 for
    split/nonsplit/additive reduction).
    """
    if p == 2:
        return 2 - _count_affine_brute(cfg, 2)
    b2, b4, b6, _ = cfg.b_invariants
    return int(_kernels.ap_chi_table(p, b2, b4, b6))


def ap_point_count(cfg: CurveConfig, p: int) -> float:
    """Normalized a(p) = (p + 1 - #E(F_p)) / sqrt(p) for good p."""
    if cfg.is_bad(p):
        raise DomainError(f"p={p} divides the conductor; use the bad-prime rule")
    ap = ap_unnormalized(cfg, p)
    apn = ap / math.sqrt(p)
    if abs(apn) > 2:
        raise AssertionError(f"Hasse bound violated at p={p}: a_p={ap}")
    return apn


# ---------------------------------------------------------------------------
# Coefficient table
# ---------------------------------------------------------------------------


@dataclass
class CoefficientTable:
    """Normalized Hecke eigenvalues a(n) for n <= nmax.

    ``a`` is indexed directly: a[n] is the coefficient (a[0] unused).
    ``ap_int`` holds the integer traces a(p) sqrt(p) aligned with
    ``primes``.  ``spf`` (smallest prime factors, built lazily) backs the
    bulk character/L-value kernels.
    """

    label: str
    conductor: int
    nmax: int
    a: np.ndarray
    primes: np.ndarray
    ap_int: np.ndarray
    _spf: np.ndarray = field(default=None, repr=False)
    _w: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.a.setflags(write=False)
        self.primes.setflags(write=False)
        self.ap_int.setflags(write=False)

    @property
    def spf(self) -> np.ndarray:
        if self._spf is None:
            self._spf = _kernels.spf_sieve(self.nmax)
            self._spf.setflags(write=False)
        return self._spf

    @property
    def w(self) -> np.ndarray:
        """a(n)/sqrt(n), the weights of the smoothed central-value sum."""
        if self._w is None:
            w = np.zeros(self.nmax + 1)
            n = np.arange(1, self.nmax + 1, dtype=np.float64)
            w[1:] = self.a[1:] / np.sqrt(n)
            w.setflags(write=False)
            self._w = w
        return self._w

    def ap(self, p: int) -> float:
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise DomainError(f"{p} is not a prime <= nmax")
        return float(self.a[p])

    def satake(self, p: int) -> tuple:
        """Unit Satake pair (alpha_p, beta_p) with alpha+beta=a(p),
        alpha*beta=1; good p only."""
        if self.conductor % p == 0:
            raise DomainError(f"p={p} is a bad prime; no unitary Satake pair")
        ap = self.ap(p)
        disc = cmath.sqrt(complex(ap * ap - 4.0))
        alpha = (ap + disc) / 2.0
        return alpha, 1.0 / alpha

    def alpha_sq_term(self, p: int) -> float:
        """(1 - alpha_p^2/p)(1 - beta_p^2/p) in its exact real form
        1 - (a(p)^2 - 2)/p + 1/p^2."""
        ap = float(self.a[p])
        return 1.0 - (ap * ap - 2.0) / p + 1.0 / (p * p)


def build_coefficients(
    cfg: CurveConfig, nmax: int, bsgs_threshold: int = AP_BSGS_THRESHOLD
) -> CoefficientTable:
    """Point-count every prime <= nmax and extend multiplicatively.

    Small and bad primes use the exact O(p) character-sum count; large good
    primes use baby-step/giant-step group-order search, falling back to the
    O(p) count in the (rare) ambiguous cases.
    """
    if nmax < 1:
        raise DomainError("nmax must be >= 1")
    if nmax > MAX_NMAX:
        raise ResourceLimitError(f"nmax {nmax} exceeds budget {MAX_NMAX}", required=nmax)
    primes = sieve_primes(max(nmax, 2)).primes
    primes = primes[primes <= nmax] if nmax >= 2 else primes[:0]
    ap_int = np.zeros(len(primes), dtype=np.int64)

    b2, b4, b6, _ = cfg.b_invariants
    c4, c6 = cfg.c_invariants
    if max(abs(c4), abs(c6)) >= 1 << 50:
        raise ResourceLimitError("curve invariants too large for int64 kernels")

    is_bad = np.array([cfg.conductor % int(p) == 0 for p in primes])
    small = (primes <= bsgs_threshold) | is_bad
    small_odd = (primes > 2) & small
    if len(primes) and primes[0] == 2:
        ap_int[0] = 2 - _count_affine_brute(cfg, 2)
    if small_odd.any():
        ap_int[small_odd] = _kernels.ap_chi_table_bulk(primes[small_odd], b2, b4, b6)
    big = ~small
    if big.any():
        traces = _kernels.ap_bsgs_bulk(primes[big], c4, c6)
        ambiguous = traces == (1 << 60)
        if ambiguous.any():
            retry = primes[big][ambiguous]
            traces[ambiguous] = _kernels.ap_chi_table_bulk(retry, b2, b4, b6)
        ap_int[big] = traces

    good = ~is_bad
    hasse = 2.0 * np.sqrt(primes[good].astype(np.float64))
    if np.any(np.abs(ap_int[good]) > hasse):
        raise AssertionError("Hasse bound violated in bulk point counts")

    apn = ap_int / np.sqrt(primes.astype(np.float64))
    spf = _kernels.spf_sieve(nmax)
    a = _kernels.fill_multiplicative(nmax, spf, primes, apn, cfg.conductor)
    table = CoefficientTable(
        label=cfg.label,
        conductor=cfg.conductor,
        nmax=nmax,
        a=a,
        primes=primes,
        ap_int=ap_int,
        _spf=spf,
    )
    spf.setflags(write=False)
    return table


# ---------------------------------------------------------------------------
# Diagnostics and the symmetric square
# ---------------------------------------------------------------------------


def pnt_ratio(table: CoefficientTable, x: int) -> float:
    """(sum_{p<=x} a(p)^2 log p) / x; tends to 1."""
    if x > table.nmax:
        raise DomainError(f"x={x} beyond table nmax={table.nmax}")
    mask = table.primes <= x
    ps = table.primes[mask].astype(np.float64)
    apn = table.ap_int[mask] / np.sqrt(ps)
    return float(np.sum(apn * apn * np.log(ps))) / x


def sym2_local(table: CoefficientTable, cfg: CurveConfig, p: int) -> float:
    """Local factor L_p(1, sym^2 E).

    Good p: [(1-alpha^2/p)(1-1/p)(1-beta^2/p)]^{-1}.  Bad p: configured
    override if present, else the multiplicative convention
    (1 - a(p)^2/p)^{-1}.
    """
    if p in cfg.sym2_bad_factors:
        return cfg.sym2_bad_factors[p]
    ap = float(table.a[p])
    if cfg.is_bad(p):
        return 1.0 / (1.0 - ap * ap / p)
    return 1.0 / ((1.0 - 1.0 / p) * table.alpha_sq_term(p))


class Sym2Result(NamedTuple):
    value: float
    value_half: float  # truncation at pmax/2, for the stabilization report
    rel_change: float


def sym2_value(table: CoefficientTable, cfg: CurveConfig, pmax: int) -> Sym2Result:
    """Partial Euler product for L(1, sym^2 E) over p <= pmax."""
    if pmax > table.nmax:
        raise DomainError(f"pmax={pmax} beyond table nmax={table.nmax}")
    ps = table.primes[table.primes <= pmax]
    log_total = 0.0
    log_half = 0.0
    half = pmax / 2
    for p in ps:
        p = int(p)
        lf = math.log(sym2_local(table, cfg, p))
        log_total += lf
        if p <= half:
            log_half += lf
    value = math.exp(log_total)
    value_half = math.exp(log_half)
    return Sym2Result(value, value_half, abs(value - value_half) / value)
