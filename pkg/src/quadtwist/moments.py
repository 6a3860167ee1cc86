"""Empirical verification harness: character-sum moments, the twisted first
moment, and the resonated congruence sums C and D against their predicted
main terms, with remainder ledgers.

Error-term constants in the source formulas are unknowable, so every report
carries (empirical, predicted, ratio, remainder_scale) and acceptance works
on ratios and trends, never absolute differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .arith import BumpFunction, bump_mellin, kronecker
from .curve import CoefficientTable, CurveConfig
from .errors import DomainError
from .eulerfactors import DEFAULT_PMAX, ZETA2, EulerFactorSet, _small_factorize, squarefree_part
from .resonator import ResonatorParams, resonate_family
from .twists import FamilyParams, family_arrays

KINDS = ("char_square", "char_nonsquare", "first_moment", "C_sum", "D_sum")


@dataclass(frozen=True)
class MomentReport:
    kind: str
    params: dict
    empirical: float
    predicted: float
    ratio: float  # None when predicted == 0
    remainder_scale: float
    family_size: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "params": self.params,
                "empirical": self.empirical,
                "predicted": self.predicted,
                "ratio": self.ratio,
                "remainder_scale": self.remainder_scale,
                "family_size": self.family_size,
            },
            sort_keys=True,
        )


def write_reports(path: str, reports) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rep in reports:
            fh.write(rep.to_json() + "\n")


class MomentContext:
    """Precomputed family arrays, weights, and factor caches for one sweep.

    ``lvalues``: d -> clamped central value, required only by the L-weighted
    moments.  Resonator values are cached per sign.
    """

    def __init__(
        self,
        cfg: CurveConfig,
        table: CoefficientTable,
        fam: FamilyParams,
        family,
        phi: BumpFunction = None,
        lvalues: dict = None,
        resonator_M: int = None,
        resonator_window: tuple = None,
        pmax: int = DEFAULT_PMAX,
    ):
        self.cfg = cfg
        self.table = table
        self.fam = fam
        self.family = family
        self.phi = phi or BumpFunction()
        self.d, self.absd, self.omega = family_arrays(family)
        self.phi_w = self.phi(self.absd / fam.X)
        self.phi0 = bump_mellin(self.phi, 0.0)
        self.lvalues = lvalues
        self.resonator_M = resonator_M if resonator_M is not None else fam.M
        self.resonator_window = resonator_window
        self.pmax = pmax
        self._efs = {}
        self._rsq = {}

    def efs(self, sign: int = 0) -> EulerFactorSet:
        """Factor cache; sign 0 means no resonator attached."""
        if sign not in self._efs:
            res = None if sign == 0 else self._res_params(sign)
            self._efs[sign] = EulerFactorSet(
                self.table, self.cfg, self.fam.a, res, pmax=self.pmax
            )
        return self._efs[sign]

    def _res_params(self, sign: int) -> ResonatorParams:
        return ResonatorParams(
            M=self.resonator_M, sign=sign, window_override=self.resonator_window
        )

    def resonator_sq(self, sign: int) -> np.ndarray:
        if sign not in self._rsq:
            r = resonate_family(self._res_params(sign), self.table, self.d)
            self._rsq[sign] = r * r
        return self._rsq[sign]

    def _lvalue_array(self) -> np.ndarray:
        if self.lvalues is None:
            raise DomainError("this moment needs central values; pass lvalues")
        return np.array([self.lvalues[int(d)] for d in self.d])

    def _mask(self, ell: int) -> np.ndarray:
        return self.absd % ell == 0

    # -- Operations --------------------------------------------------------

    def char_moment(self, n: int, ell: int) -> MomentReport:
        """sum_{l|d} chi_d(n) Phi(eps d/X) against its main term (square n)
        or against 0 at the error scale sqrt(X n) (nonsquare n).

        The main-term formula needs (n, N0) = 1; the oscillation bound for
        nonsquare n does not (the family is coprime to 2N, so chi_d(n) is a
        genuine +-1 either way), and n = 2 is its canonical test case.
        """
        self._check_ell(ell)
        if math.gcd(n, ell) != 1:
            raise DomainError(f"n={n} and l={ell} must be coprime")
        mask = self._mask(ell)
        sel = self.d[mask]
        chi = np.array([kronecker(int(d), n) for d in sel], dtype=np.float64)
        empirical = float(math.fsum(chi * self.phi_w[mask]))
        root = math.isqrt(n)
        X = self.fam.X
        if root * root == n:
            if math.gcd(n, self.cfg.N0) != 1:
                raise DomainError(f"square n={n} must be coprime to N0 for the main term")
            pred = self.phi0 * X / (ell * self.cfg.N0)
            for p, _ in _small_factorize(n * ell):
                pred /= 1.0 + 1.0 / p
            bad = 1.0
            for p, _ in _small_factorize(self.cfg.N0):
                bad /= 1.0 - 1.0 / (p * p)
            pred *= bad / ZETA2
            kind = "char_square"
        else:
            pred = 0.0
            kind = "char_nonsquare"
        return self._report(
            kind,
            {"n": n, "ell": ell, "X": X},
            empirical,
            pred,
            scale=math.sqrt(X) * math.sqrt(n),
            size=int(mask.sum()),
        )

    def first_moment(self, u: int, ell: int) -> MomentReport:
        """S(X;u,l) = sum_{l|d} L(1/2,E_d) chi_d(u) Phi against
        2X a(u1)/(l sqrt(u1) N0) Phi^(0) L_a(1/2) L(1,sym^2 E) G(1;u,l)."""
        self._check_pair(u, ell)
        mask = self._mask(ell)
        sel = self.d[mask]
        lv = self._lvalue_array()[mask]
        chi = np.array([kronecker(int(d), u) for d in sel], dtype=np.float64)
        empirical = float(math.fsum(lv * chi * self.phi_w[mask]))
        u1 = squarefree_part(u)
        efs = self.efs(0)
        X = self.fam.X
        pred = (
            2.0
            * X
            * float(self.table.a[u1])
            / (ell * math.sqrt(u1) * self.cfg.N0)
            * self.phi0
            * efs.la_half
            * efs.sym2
            * efs.G(u, ell)
        )
        return self._report(
            "first_moment",
            {"u": u, "ell": ell, "X": X},
            empirical,
            pred,
            scale=X ** (7.0 / 8.0) * u ** (3.0 / 8.0) * ell**0.25,
            size=int(mask.sum()),
        )

    def congruence_C(self, ell: int, sign: int) -> MomentReport:
        """sum_{l|d} L(1/2,E_d) R(d)^2 Phi against g1(l) X1."""
        self._check_ell(ell)
        mask = self._mask(ell)
        lv = self._lvalue_array()[mask]
        rsq = self.resonator_sq(sign)[mask]
        empirical = float(math.fsum(lv * rsq * self.phi_w[mask]))
        efs = self.efs(sign)
        pred = efs.g1(ell) * efs.main_term_X1(self.fam.X, self.phi0)
        M = self.resonator_M
        return self._report(
            "C_sum",
            {"ell": ell, "sign": sign, "X": self.fam.X, "M": M},
            empirical,
            pred,
            scale=self.fam.X ** (7.0 / 8.0) * M ** (11.0 / 4.0) * ell**0.25,
            size=int(mask.sum()),
        )

    def congruence_D(self, ell: int, sign: int) -> MomentReport:
        """sum_{l|d} R(d)^2 Phi against g2(l) X2."""
        self._check_ell(ell)
        mask = self._mask(ell)
        rsq = self.resonator_sq(sign)[mask]
        empirical = float(math.fsum(rsq * self.phi_w[mask]))
        efs = self.efs(sign)
        pred = efs.g2(ell) * efs.main_term_X2(self.fam.X, self.phi0)
        M = self.resonator_M
        return self._report(
            "D_sum",
            {"ell": ell, "sign": sign, "X": self.fam.X, "M": M},
            empirical,
            pred,
            scale=M**3 * math.sqrt(self.fam.X),
            size=int(mask.sum()),
        )

    def residual_ledger(self, kind: str, sign: int, D: float, z: float):
        """(ell, r_ell) over squarefree l <= D built from primes < z outside
        N0, plus the accumulated R(D, z) = sum |r_ell|.

        This is the remainder input the linear sieve consumes.
        """
        if kind not in ("C", "D"):
            raise DomainError("ledger kind must be 'C' or 'D'")
        op = self.congruence_C if kind == "C" else self.congruence_D
        ledger = []
        total = 0.0
        for ell in sieve_support(D, z, self.cfg.N0):
            rep = op(ell, sign)
            r = rep.empirical - rep.predicted
            ledger.append((ell, r))
            total += abs(r)
        return ledger, total

    # -- helpers ------------------------------------------------------------

    def _check_pair(self, n: int, ell: int):
        self._check_ell(ell)
        if math.gcd(n, ell) != 1:
            raise DomainError(f"n={n} and l={ell} must be coprime")
        if math.gcd(n, self.cfg.N0) != 1:
            raise DomainError(f"n={n} must be coprime to N0")

    def _check_ell(self, ell: int):
        if ell < 1:
            raise DomainError("l must be positive")
        if math.gcd(ell, self.cfg.N0) != 1:
            raise DomainError(f"l={ell} must be coprime to N0")
        if ell > 1 and any(e > 1 for _, e in _small_factorize(ell)):
            raise DomainError(f"l={ell} must be squarefree")

    def _report(self, kind, params, empirical, pred, scale, size) -> MomentReport:
        ratio = empirical / pred if pred != 0.0 else None
        return MomentReport(
            kind=kind,
            params=params,
            empirical=empirical,
            predicted=pred,
            ratio=ratio,
            remainder_scale=scale,
            family_size=size,
        )


def sieve_support(D: float, z: float, N0: int) -> list:
    """Squarefree l <= D composed of primes < z coprime to N0, ascending."""
    from .arith import sieve_primes

    if z <= 2:
        return [1]
    ps = [int(p) for p in sieve_primes(max(2, int(math.ceil(z)) - 1)).primes if p < z and N0 % int(p) != 0]
    out = [1]
    stack = [(0, 1)]
    while stack:
        i, prod = stack.pop()
        for j in range(i, len(ps)):
            nxt = prod * ps[j]
            if nxt > D:
                break
            out.append(nxt)
            stack.append((j + 1, nxt))
    return sorted(out)
