"""The headline computations: extreme central values over almost-prime and
rough twists, the resonance ratio bounds sandwiching them, the asymptotic
comparison bound, and the conjectural Tate-Shafarevich orders S(E_d).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .arith import factorize, sieve_primes
from .curve import CurveConfig, CoefficientTable
from .errors import ConfigError, DomainError
from .resonator import ResonatorParams, resonate_family
from .twists import FamilyParams, filter_almost_prime, filter_rough

# the exponent constant of the comparison bound: 2 sqrt((W-19.73)/(22W+12))
W_SHIFT = 19.73
W_SLOPE = 22
W_OFFSET = 12


def bound_coefficient(W: int) -> float:
    return 2.0 * math.sqrt((W - W_SHIFT) / (W_SLOPE * W + W_OFFSET))


def theorem_bound(X: float, W: int) -> float:
    """exp(2 sqrt((W-19.73)/(22W+12)) sqrt(log X / loglog X)).

    The o(1) term of the asymptotic statement is set to 0 and reported as
    such; at finite X this is an illustration, not a proven inequality.
    """
    if W < 20:
        raise DomainError(f"the bound requires W >= 20, got {W}")
    if X < 16:
        raise DomainError("X must be >= 16 (loglog X must be positive)")
    lx = math.log(X)
    return math.exp(bound_coefficient(W) * math.sqrt(lx / math.log(lx)))


@dataclass
class ExtremeReport:
    """Extremes over the rough subfamily plus the resonance-weighted ratios
    that sandwich them; superset fields cover the almost-prime family."""

    params: dict
    max_d: int
    min_d: int
    max_value: float
    min_value: float
    ratio_plus: float
    ratio_minus: float
    theorem_bound: float
    family_size: int
    superset_max_d: int = None
    superset_min_d: int = None
    superset_max_value: float = None
    superset_min_value: float = None
    superset_size: int = None
    flags: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def _argbest(pairs, better):
    """(d, value) with extremal value, ties to smaller |d| for bit-stable
    reruns regardless of partitioning."""
    sel_d, sel_v = None, None
    for d, v in pairs:
        if sel_v is None or better(v, sel_v) or (v == sel_v and abs(d) < abs(sel_d)):
            sel_d, sel_v = d, v
    return sel_d, sel_v


def extreme_search(
    cfg: CurveConfig,
    params: FamilyParams,
    family,
    lvalues: dict,
    table: CoefficientTable,
    phi,
    resonator_window: tuple = None,
) -> ExtremeReport:
    """Max/min central values over the rough family, their resonance-ratio
    sandwich, and the almost-prime superset extremes.

    The chain being checked numerically: superset max >= rough max >=
    (sum L R+^2 Phi)/(sum R+^2 Phi), and symmetrically for the minimum with
    the minus resonator.
    """
    superset = filter_almost_prime(family, params.W)
    rough = filter_rough(superset, params.z)
    for t in rough:
        if t.omega > params.W:
            raise AssertionError(
                f"roughness failed to force omega<=W at d={t.d}: omega={t.omega}"
            )
    if not rough:
        raise DomainError("family is empty after the rough filter")

    flags = []
    vals = {t.d: lvalues[t.d] for t in rough}
    ds = [t.d for t in rough]
    phi_w = {d: float(phi(abs(d) / params.X)) for d in ds}

    ratios = {}
    for sign in (1, -1):
        res = ResonatorParams(M=params.M, sign=sign, window_override=resonator_window)
        rv = resonate_family(res, table, ds)
        num = math.fsum(vals[d] * rv[i] * rv[i] * phi_w[d] for i, d in enumerate(ds))
        den = math.fsum(rv[i] * rv[i] * phi_w[d] for i, d in enumerate(ds))
        if den <= 0.0:
            ratios[sign] = None
            flags.append(f"resonator sign {sign:+d} orthogonal to family (zero denominator)")
        else:
            ratios[sign] = num / den

    max_d, max_v = _argbest(((d, vals[d]) for d in ds), lambda a, b: a > b)
    min_d, min_v = _argbest(((d, vals[d]) for d in ds), lambda a, b: a < b)
    smax_d, smax_v = _argbest(((t.d, lvalues[t.d]) for t in superset), lambda a, b: a > b)
    smin_d, smin_v = _argbest(((t.d, lvalues[t.d]) for t in superset), lambda a, b: a < b)

    if ratios[1] is not None and max_v < ratios[1] - 1e-9:
        raise AssertionError(f"sandwich violated: max {max_v} < ratio+ {ratios[1]}")
    if ratios[-1] is not None and min_v > ratios[-1] + 1e-9:
        raise AssertionError(f"sandwich violated: min {min_v} > ratio- {ratios[-1]}")

    tb = None
    try:
        tb = theorem_bound(params.X, params.W)
    except DomainError as exc:
        flags.append(f"theorem bound unavailable: {exc}")

    return ExtremeReport(
        params={
            "a": params.a,
            "sign": params.sign,
            "X": params.X,
            "W": params.W,
            "z": params.z,
            "M": params.M,
        },
        max_d=max_d,
        min_d=min_d,
        max_value=max_v,
        min_value=min_v,
        ratio_plus=ratios[1],
        ratio_minus=ratios[-1],
        theorem_bound=tb,
        family_size=len(rough),
        superset_max_d=smax_d,
        superset_min_d=smin_d,
        superset_max_value=smax_v,
        superset_min_value=smin_v,
        superset_size=len(superset),
        flags=flags,
    )


# ---------------------------------------------------------------------------
# BSD quantities
# ---------------------------------------------------------------------------


def _poly_mulmod(a, b, mod3, p):
    """Product of two degree<3 polynomials reduced mod (x^3 + c2x^2 + c1x + c0, p).

    Polynomials are (coeff0, coeff1, coeff2); mod3 = (c0, c1, c2).
    """
    c0, c1, c2 = mod3
    r = [0] * 5
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                r[i + j] = (r[i + j] + ai * bj) % p
    for k in (4, 3):
        t = r[k]
        if t:
            r[k] = 0
            r[k - 1] = (r[k - 1] - t * c2) % p
            r[k - 2] = (r[k - 2] - t * c1) % p
            r[k - 3] = (r[k - 3] - t * c0) % p
    return (r[0] % p, r[1] % p, r[2] % p)


def _poly_norm(h, p):
    h = [c % p for c in h]
    while len(h) > 1 and h[-1] == 0:
        h.pop()
    return h


def _poly_rem(f, g, p):
    """f mod g over F_p; coefficient lists, low to high, g != 0."""
    f = list(f)
    dg = len(g) - 1
    inv = pow(g[-1], -1, p)
    while len(f) - 1 >= dg and not (len(f) == 1 and f[0] == 0):
        lead = f[-1] * inv % p
        shift = len(f) - 1 - dg
        for i in range(dg + 1):
            f[shift + i] = (f[shift + i] - lead * g[i]) % p
        f = _poly_norm(f, p)
    return f


def _poly_gcd_deg(f, g, p):
    """Degree of gcd(f, g) mod p; coefficient lists, low to high."""
    f = _poly_norm(f, p)
    g = _poly_norm(g, p)
    while not (len(g) == 1 and g[0] == 0):
        f, g = g, _poly_rem(f, g, p)
    if len(f) == 1 and f[0] == 0:
        return 0
    return len(f) - 1


def count_twocubic_roots(cfg: CurveConfig, p: int) -> int:
    """Distinct roots mod p of the 2-division cubic of the curve.

    Computed as deg gcd(x^p - x, cubic) via modular exponentiation of x, so
    large p | d stay cheap.  Good reduction makes the cubic squarefree mod
    p, so the answer is 0, 1, or 3.
    """
    if p < 3:
        raise DomainError("p must be an odd prime")
    if cfg.discriminant % p == 0:
        raise DomainError(f"cubic not squarefree mod {p}")
    b2, b4, b6, _ = cfg.b_invariants
    inv4 = pow(4, -1, p)
    mod3 = (b6 * inv4 % p, 2 * b4 * inv4 % p, b2 * inv4 % p)
    # x^p mod (cubic, p) by square-and-multiply
    result = (1, 0, 0)
    base = (0, 1, 0)
    e = p
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod3, p)
        base = _poly_mulmod(base, base, mod3, p)
        e >>= 1
    # x^p - x
    frob = [result[0], (result[1] - 1) % p, result[2]]
    cubic = [mod3[0], mod3[1], mod3[2], 1]
    nroots = _poly_gcd_deg(cubic, frob, p)
    if nroots not in (0, 1, 3):
        raise AssertionError(f"squarefree cubic mod {p} reported {nroots} roots")
    return nroots


def tamagawa_twist(cfg: CurveConfig, p: int, d: int) -> int:
    """Local Tamagawa number of the twisted curve at an odd p | d of good
    reduction: the twist acquires the star fiber there, whose component
    count is 1 + #roots of the reduced cubic, hence lands in {1, 2, 4}."""
    if p % 2 == 0 or p < 3:
        raise DomainError("rule applies at odd primes only")
    if cfg.N0 % p == 0:
        raise DomainError(f"p={p} divides N0; use the configured Tamagawa number")
    if d % p != 0:
        raise DomainError(f"p={p} does not divide d={d}")
    return 1 + count_twocubic_roots(cfg, p)


def twist_torsion_order(cfg: CurveConfig) -> int:
    """Rational torsion order shared by all but finitely many twists.

    Away from finitely many d, the twists carry only 2-torsion, and
    rational 2-torsion corresponds to integer roots of the monic form
    X^3 + b2 X^2 + 8 b4 X + 16 b6 of the 2-division cubic, which twisting
    preserves.  Returns 1, 2, or 4.
    """
    b2, b4, b6, _ = cfg.b_invariants
    c = 16 * b6
    roots = set()
    if c == 0:
        roots.add(0)
        disc = b2 * b2 - 32 * b4
        if disc >= 0:
            r = math.isqrt(disc)
            if r * r == disc:
                for num in (-b2 + r, -b2 - r):
                    if num % 2 == 0:
                        roots.add(num // 2)
    else:
        table = sieve_primes(max(2, math.isqrt(abs(c)) + 1))
        divisors = [1]
        for q, e in factorize(c, table).factors:
            divisors = [dv * q**k for dv in divisors for k in range(e + 1)]
        for dv in divisors:
            for x in (dv, -dv):
                if ((x + b2) * x + 8 * b4) * x + 16 * b6 == 0:
                    roots.add(x)
    return 1 + len(roots)


@dataclass(frozen=True)
class ShaReport:
    d: int
    L_value: float
    torsion_sq: int
    period_twist: float
    tamagawa: int
    S_value: float
    flagged: bool = False

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def sha_table(cfg: CurveConfig, family, lvalues: dict) -> list:
    """S(E_d) = L(1/2,E_d) |tors|^2 / (Omega(E_d) Tam(E_d)) per member.

    Omega(E_d) = u~(1) Omega(E) / sqrt|d| (constant u~ on squarefree d
    coprime to 2N); Tam multiplies the configured values at p | N0 with the
    star-fiber counts at p | d.
    """
    for p, _ in factorize(cfg.N0, sieve_primes(max(2, cfg.N0))).factors:
        if p not in cfg.bad_tamagawa:
            raise ConfigError(f"bad_tamagawa missing p={p}")
    tors = twist_torsion_order(cfg)
    base_tam = 1
    for p, _ in factorize(cfg.N0, sieve_primes(max(2, cfg.N0))).factors:
        base_tam *= cfg.bad_tamagawa[p]
    out = []
    for t in family:
        d = t.d
        lv = lvalues[d]
        omega_d = cfg.u_tilde * cfg.real_period / math.sqrt(abs(d))
        tam = base_tam
        for p, _ in t.factorization.factors:
            tam *= tamagawa_twist(cfg, p, d)
        flagged = lv == 0.0
        s_val = lv * tors * tors / (omega_d * tam)
        out.append(
            ShaReport(
                d=d,
                L_value=lv,
                torsion_sq=tors * tors,
                period_twist=omega_d,
                tamagawa=tam,
                S_value=s_val,
                flagged=flagged,
            )
        )
    return out


def sha_summary(reports, X: float, W: int) -> dict:
    """Headline line: the largest S(E_d) against sqrt(X) times the
    comparison bound."""
    best = max(reports, key=lambda r: r.S_value)
    try:
        tb = math.sqrt(X) * theorem_bound(X, W)
    except DomainError:
        tb = None
    return {
        "max_S": best.S_value,
        "argmax_d": best.d,
        "sqrtX_times_bound": tb,
        "count": len(reports),
    }
