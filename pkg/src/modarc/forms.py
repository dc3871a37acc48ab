"""Canonical bases f, g for Gamma0(2) and f for Gamma0(3).

Level 2: write k = 4*ell + k' with k' in {0, 2}.  The element f_{k,n} is the
unique weakly holomorphic form q^-n + O(q^(ell+1)); it equals
S4^ell * F_{k'} * F(phi) for a monic integer polynomial F of degree n + ell.
The g family (vanishing at the cusp 0) is q^-n + O(q^ell) and starts from
S4^ell * F_{k'} * phi.

Level 3: k = 6*ell + k' with k' in {0, 2, 4} and s = 2*ell + k'//3; f_{k,n} is
q^-n + O(q^(s+1)), built from a seed of exact order s at infinity.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .errors import (
    IndexBelowRange,
    PrecisionTooLow,
    SeedConstructionFailed,
    UnsupportedLevel,
    WeightMismatch,
)
from .faber import FaberPolynomial
from .qseries import LaurentSeries, eisenstein, eta_quotient, invert

FAMILIES = ("f", "g")


@dataclass(frozen=True)
class WeightDecomposition:
    level: int
    k: int
    ell: int
    kprime: int

    @classmethod
    def of(cls, level: int, k: int) -> "WeightDecomposition":
        if level not in (2, 3):
            raise UnsupportedLevel(f"level {level} is not supported (expected 2 or 3)")
        if k % 2:
            raise WeightMismatch(f"weight must be even, got {k}")
        period = 4 if level == 2 else 6
        ell, kprime = divmod(k, period)
        return cls(level, k, ell, kprime)

    @property
    def base_order(self) -> int:
        """Order at infinity of the seed form S4^ell F_k' (level 2) or its level-3 analogue."""
        if self.level == 2:
            return self.ell
        return 2 * self.ell + self.kprime // 3

    def gap_top(self, family: str) -> int:
        """Highest exponent forced to vanish (besides the leading q^-n)."""
        if family == "g":
            return self.ell - 1
        return self.base_order

    def min_index(self, family: str) -> int:
        if family == "g":
            if self.level != 2:
                raise UnsupportedLevel("the g family is only implemented at level 2")
            return -self.ell + 1
        return -self.base_order

    def valence(self, n: int) -> int:
        """Degree of the Faber polynomial of f_{k,n}, i.e. n + ell (level 2) or n + s (level 3)."""
        return n + self.base_order


@dataclass(frozen=True)
class BasisSpec:
    level: int
    k: int
    n: int
    family: str = "f"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be 'f' or 'g', got {self.family!r}")
        if self.family == "g" and self.level != 2:
            raise UnsupportedLevel("the g family is only implemented at level 2")

    def to_json(self) -> dict:
        return {"level": self.level, "k": self.k, "n": self.n, "family": self.family}


@dataclass(frozen=True)
class BasisElement:
    spec: BasisSpec
    series: LaurentSeries
    ell: int
    kprime: int
    faber: FaberPolynomial

    @property
    def decomposition(self) -> tuple:
        return (self.ell, self.kprime, self.faber)

    @property
    def weight(self) -> WeightDecomposition:
        return WeightDecomposition.of(self.spec.level, self.spec.k)

    def base_series(self, precision: Optional[int] = None) -> LaurentSeries:
        """S4^ell F_k' (level 2) or the level-3 seed, at the element's truncation."""
        prec = self.series.truncation if precision is None else precision
        return base_form(self.spec.level, self.spec.k, prec)

    def recompose(self) -> LaurentSeries:
        """base * F(phi), computed afresh; must equal ``series``."""
        T = self.series.truncation
        work = _work_precision(self.weight, self.spec.n, T)
        phi = eta_quotient(self.spec.level, work)
        value = self.faber.evaluate_series(phi)
        return (base_form(self.spec.level, self.spec.k, work) * value).truncate(T)

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "series": self.series.to_json(),
            "ell": self.ell,
            "kprime": self.kprime,
            "faber": [int(c) for c in self.faber.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BasisElement":
        spec = BasisSpec(**data["spec"])
        return cls(
            spec,
            LaurentSeries.from_json(data["series"]),
            int(data["ell"]),
            int(data["kprime"]),
            FaberPolynomial(tuple(int(c) for c in data["faber"]), spec.level, spec.family, int(data["kprime"])),
        )


# seeds ---------------------------------------------------------------------


def _solve_exact(columns: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve the (possibly overdetermined) system sum_j x_j columns[j] = rhs exactly."""
    ncols = len(columns)
    rows = [[Fraction(columns[j][i]) for j in range(ncols)] + [Fraction(rhs[i])] for i in range(len(rhs))]
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    for i in range(r, len(rows)):
        if rows[i][-1] != 0:
            raise SeedConstructionFailed("seed system is inconsistent")
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = rows[i][-1]
    return x


def _seed_combination(generators: list[LaurentSeries], order: int, precision: int) -> LaurentSeries:
    """Combination of ``generators`` equal to q^order + O(q^(order+1)).

    All coefficients through q^precision are imposed, so the answer is checked
    against every coefficient we know rather than only the leading ones.
    """
    exps = range(0, order + 1)
    columns = [[g[e] for e in exps] for g in generators]
    target = [1 if e == order else 0 for e in exps]
    x = _solve_exact(columns, target)
    out = LaurentSeries.zero(precision)
    for c, g in zip(x, generators):
        if c:
            out = out + g * c
    if any(out[e] != (1 if e == order else 0) for e in exps):
        raise SeedConstructionFailed(f"could not reach q^{order} + O(q^{order + 1})")
    return out


@lru_cache(maxsize=16)
def level3_seed(kprime: int, precision: int) -> LaurentSeries:
    """Weight-k' seeds at level 3: 1, E2 combination (order 0), weight 4 (order 1), weight 6 (order 2).

    ``kprime=6`` returns the weight 6 form q^2 + O(q^3) whose powers shift ell.
    """
    if kprime == 0:
        return LaurentSeries.constant(1)
    e2 = eisenstein("E2_level3", precision)
    e4 = eisenstein("E4", precision)
    e4_3 = eisenstein("E4_3z", precision)
    if kprime == 2:
        return _seed_combination([e2], 0, precision)
    if kprime == 4:
        return _seed_combination([e2 * e2, e4, e4_3], 1, precision)
    if kprime == 6:
        # weight-6 products of these generators all lie in E2 * M_4, a 2-dimensional
        # space with nothing of order 2 at infinity.  G4^2 / E2 is holomorphic: the
        # only zero of E2 (order 2/3 at the elliptic point) is cancelled by G4^2.
        g4 = level3_seed(4, precision + 2)
        delta = (g4 * g4 * invert(level3_seed(2, precision + 2))).truncate(precision)
        if not delta.is_integral() or delta.valuation != 2 or delta[2] != 1:
            raise SeedConstructionFailed("G4^2 / E2 is not q^2 + O(q^3) with integral coefficients")
        return delta
    raise ValueError(f"no level-3 seed of weight {kprime}")


@lru_cache(maxsize=64)
def base_form(level: int, k: int, precision: int) -> LaurentSeries:
    """S4^ell F_k' at level 2, Delta3^ell G_k' at level 3, known through q^precision."""
    dec = WeightDecomposition.of(level, k)
    work = precision + 2 * abs(dec.ell) + 4
    if level == 2:
        unit = eisenstein("S4_level2", work)
        extra = eisenstein("F2_level2", work) if dec.kprime == 2 else LaurentSeries.constant(1)
    else:
        unit = level3_seed(6, work)
        extra = level3_seed(dec.kprime, work)
    # unit has no zeros in the upper half plane, so negative powers are honest forms
    power = unit ** dec.ell if dec.ell >= 0 else invert(unit) ** (-dec.ell)
    out = power * extra
    if not out.exact and out.truncation < precision:
        raise PrecisionTooLow("internal working precision too small for the base form")
    return out.truncate(precision)


# chains ----------------------------------------------------------------------


def _work_precision(dec: WeightDecomposition, n: int, precision: int) -> int:
    return precision + max(dec.valence(n), 0) + 2 * abs(dec.ell) + 6


_chain_lock = threading.Lock()


@lru_cache(maxsize=256)
def _chain(level: int, family: str, k: int, n: int, precision: int) -> tuple:
    """All (series, faber coefficients) for indices min_index..n, truncated at ``precision``."""
    dec = WeightDecomposition.of(level, k)
    top = dec.gap_top(family)
    n0 = dec.min_index(family)
    work = _work_precision(dec, n, precision)
    phi = eta_quotient(level, work)
    base = base_form(level, k, work)
    first_poly = [1]
    if family == "g":
        base = base * phi
        first_poly = [0, 1]
    chain: list[tuple[LaurentSeries, list]] = [(base, first_poly)]
    for m in range(n0 + 1, n + 1):
        prev, prev_poly = chain[-1]
        h = phi * prev
        poly = [0] + list(prev_poly)
        for e in range(-m + 1, top + 1):
            c = h[e]
            if c:
                other, other_poly = chain[-e - n0]
                h = h - other * c
                for i, a in enumerate(other_poly):
                    poly[i] -= c * a
        chain.append((h, poly))
    out = []
    for s, poly in chain:
        if not s.exact and s.truncation < precision:
            raise PrecisionTooLow("working precision exhausted; increase the requested precision")
        out.append((s.truncate(precision), tuple(poly)))
    return tuple(out)


def _check_gap(series: LaurentSeries, n: int, top: int) -> None:
    if series[-n] != 1 or series.valuation != -n:
        raise ArithmeticError(f"leading term is not q^{-n}")
    for e in range(-n + 1, top + 1):
        if series[e] != 0:
            raise ArithmeticError(f"gap coefficient at q^{e} is {series[e]}, expected 0")


def _build(level: int, family: str, k: int, n: int, precision: int) -> BasisElement:
    dec = WeightDecomposition.of(level, k)
    n0 = dec.min_index(family)
    if n < n0:
        raise IndexBelowRange(f"n={n} is below the smallest index {n0} for weight {k} ({family} family)")
    top = dec.gap_top(family)
    if precision < top + 1:
        raise PrecisionTooLow(f"precision {precision} does not reach past the gap (needs >= {top + 1})")
    with _chain_lock:
        chain = _chain(level, family, k, n, precision)
    series, poly = chain[n - n0]
    _check_gap(series, n, top)
    if level == 2 and not series.is_integral():
        raise ArithmeticError("level-2 basis element has non-integral coefficients")
    if not all(Fraction(c).denominator == 1 for c in poly):
        raise ArithmeticError("Faber polynomial is not integral")
    faber = FaberPolynomial(tuple(int(c) for c in poly), level, family, dec.kprime)
    return BasisElement(BasisSpec(level, k, n, family), series, dec.ell, dec.kprime, faber)


DEFAULT_BASIS_PRECISION = 40


def build_f2(k: int, n: int, precision: int = DEFAULT_BASIS_PRECISION) -> BasisElement:
    """f_{k,n} = q^-n + O(q^(ell+1)) on Gamma0(2), truncated at q^precision."""
    return _build(2, "f", k, n, precision)


def build_g2(k: int, n: int, precision: int = DEFAULT_BASIS_PRECISION) -> BasisElement:
    """g_{k,n} = q^-n + O(q^ell), vanishing at the cusp 0, truncated at q^precision."""
    return _build(2, "g", k, n, precision)


def build_f3(k: int, n: int, precision: int = DEFAULT_BASIS_PRECISION) -> BasisElement:
    """f^(3)_{k,n} = q^-n + O(q^(s+1)) on Gamma0(3), s = 2*ell + k'//3."""
    return _build(3, "f", k, n, precision)


def build(spec: BasisSpec, precision: int = DEFAULT_BASIS_PRECISION) -> BasisElement:
    if spec.level == 2:
        return _build(2, spec.family, spec.k, spec.n, precision)
    return build_f3(spec.k, spec.n, precision)


# identities ------------------------------------------------------------------


def _coefficient_or_zero(level: int, family: str, k: int, n: int, m: int, precision: int):
    dec = WeightDecomposition.of(level, k)
    if n < dec.min_index(family):
        # below the basis range the form does not exist; its coefficients read as zero
        return 0
    return _build(level, family, k, n, max(precision, dec.gap_top(family) + 1)).series[m]


def duality_check(k: int, n: int, m: int, precision: Optional[int] = None) -> bool:
    """coeff_m(f_{k,n}) == -coeff_n(g_{2-k,m}), reading out-of-range forms as zero."""
    prec = max(m, n, 1) if precision is None else precision
    if prec < max(m, n):
        raise PrecisionTooLow("precision must reach both q^m and q^n")
    lhs = _coefficient_or_zero(2, "f", k, n, m, prec)
    rhs = _coefficient_or_zero(2, "g", 2 - k, m, n, prec)
    return lhs == -rhs


@dataclass(frozen=True)
class GeneratingFunctionReport:
    k: int
    r_powers: int
    precision: int
    discrepancies: tuple  # (n, max |coefficient difference|)

    @property
    def max_discrepancy(self):
        return max((d for _, d in self.discrepancies), default=0)

    @property
    def ok(self) -> bool:
        return self.max_discrepancy == 0

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "rPowers": self.r_powers,
            "precision": self.precision,
            "discrepancies": [[n, str(d)] for n, d in self.discrepancies],
            "maxDiscrepancy": str(self.max_discrepancy),
            "ok": self.ok,
        }


def generating_function_check(k: int, r_powers: int = 3, precision: int = 20) -> GeneratingFunctionReport:
    """Compare f_{k,n} with the r^n coefficient of the closed-form generating function.

    With r = e^{2 pi i tau}, expanding 1/(phi(tau) - phi(z)) as
    sum_j phi(z)^j / phi(tau)^(j+1) shows the r^n coefficient of the right side
    is base(z) * sum_j c_{n,j} phi(z)^j with
    c_{n,j} = [r^n] F2(tau) / (base(tau) phi(tau)^j).  The check is exact.
    """
    if isinstance(k, bool) or not isinstance(k, int):
        raise WeightMismatch("weight must be an integer")
    dec = WeightDecomposition.of(2, k)
    if r_powers < 1:
        raise ValueError("r_powers must be positive")
    n0 = -dec.ell
    n_last = n0 + r_powers - 1
    if precision < dec.ell + 1:
        raise PrecisionTooLow(f"precision must be at least {dec.ell + 1}")
    work = _work_precision(dec, n_last, precision) + abs(n_last)
    phi = eta_quotient(2, work)
    base = base_form(2, k, work)
    f2 = eisenstein("F2_level2", work)
    kernel = f2 * invert(base)  # F2(tau)/base(tau), valuation -ell
    inv_phi = invert(phi)
    discrepancies = []
    for n in range(n0, n_last + 1):
        degree = n + dec.ell
        total = LaurentSeries.zero(work)
        term = kernel
        for j in range(degree + 1):
            c = term[n]
            if c:
                total = total + (phi ** j) * c
            term = term * inv_phi
        rhs = (base * total).truncate(precision)
        lhs = build_f2(k, n, precision).series
        diff = lhs - rhs
        worst = max((abs(c) for c in diff.coeffs), default=0)
        if diff.truncation < precision:
            raise PrecisionTooLow("generating-function expansion lost precision")
        discrepancies.append((n, worst))
    return GeneratingFunctionReport(k, r_powers, precision, tuple(discrepancies))
