"""Generalized Faber polynomials of basis elements and their roots.

A basis element factors as base(z) * F(phi(z)).  Roots of F in the image of
the lower boundary arc under phi ([-64, 0] at level 2, [-27, 0] at level 3)
correspond to zeros on the arc; every other root is an off-arc zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import NonExactDivision, RootOutOfRange
from .qseries import LaurentSeries, eta_quotient, invert

#: phi maps the lower boundary arc onto these closed intervals.
ARC_IMAGE = {2: (Fraction(-64), Fraction(0)), 3: (Fraction(-27), Fraction(0))}

ROOT_TOLERANCE = Fraction(1, 10**8)


@dataclass(frozen=True)
class FaberPolynomial:
    """Integer polynomial F(x), coefficients in ascending degree."""

    coeffs: tuple
    level: int = 2
    family: str = "f"
    kprime: int = 0

    def __post_init__(self):
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(int(x) for x in c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def evaluate_series(self, phi: LaurentSeries) -> LaurentSeries:
        acc = LaurentSeries.constant(0)
        for c in reversed(self.coeffs):
            acc = acc * phi + c
        return acc

    def __str__(self) -> str:
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0 and self.degree > 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and abs(c) == 1:
                terms.append(("-" if c < 0 else "+") + " " + mono)
            else:
                terms.append(("-" if c < 0 else "+") + " " + (f"{abs(c)}*{mono}" if mono else f"{abs(c)}"))
        s = " ".join(terms)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs), "level": self.level, "family": self.family, "kprime": self.kprime}


def extract(elem, precision: Optional[int] = None) -> FaberPolynomial:
    """Recover F from the series alone: divide by the base form, then peel off powers of phi.

    Works from the highest pole downward with exact arithmetic; any residue
    left in the known range raises :class:`NonExactDivision`.
    """
    series = elem.series
    T = series.truncation if precision is None else min(precision, series.truncation)
    base = elem.base_series(T + 2 * abs(elem.ell) + 4)
    quotient = series * invert(base)
    top = quotient.truncation
    if top < 0:
        raise NonExactDivision("not enough terms to determine the Faber polynomial")
    degree = -quotient.valuation
    if degree < 0:
        raise NonExactDivision("quotient has no pole at infinity")
    phi = eta_quotient(elem.spec.level, top + degree + 2)
    coeffs = [0] * (degree + 1)
    rest = quotient
    for j in range(degree, -1, -1):
        c = rest[-j]
        if Fraction(c).denominator != 1:
            raise NonExactDivision(f"non-integral Faber coefficient {c} at x^{j}")
        coeffs[j] = int(c)
        if c:
            rest = rest - (phi ** j) * c
    rest = rest.truncate(top)
    if not rest.is_zero():
        raise NonExactDivision(f"series is not base * F(phi): residue starts at q^{rest.valuation}")
    return FaberPolynomial(tuple(coeffs), elem.spec.level, elem.spec.family, elem.kprime)


# exact polynomial arithmetic (ascending Fraction lists) -------------------------


def _trim(p: list) -> list:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _deriv(p: list) -> list:
    return _trim([i * p[i] for i in range(1, len(p))] or [Fraction(0)])


def _divmod(a: list, b: list) -> tuple[list, list]:
    a = [Fraction(x) for x in a]
    b = _trim([Fraction(x) for x in b])
    if len(b) == 1 and b[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and not (len(a) == 1 and a[0] == 0):
        shift = len(a) - len(b)
        f = a[-1] / b[-1]
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a.pop()
        a = _trim(a) if a else [Fraction(0)]
    return _trim(q), _trim(a)


def _is_zero(p: list) -> bool:
    return len(p) == 1 and p[0] == 0


def _gcd(a: list, b: list) -> list:
    a, b = _trim([Fraction(x) for x in a]), _trim([Fraction(x) for x in b])
    while not _is_zero(b):
        _, r = _divmod(a, b)
        a, b = b, r
    lead = a[-1]
    return [c / lead for c in a]


def _eval(p: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def squarefree_decomposition(coeffs: Sequence[int]) -> list[tuple[list, int]]:
    """Yun's algorithm: [(a_i, i)] with p = lead * prod a_i^i, each a_i squarefree and monic."""
    p = _trim([Fraction(c) for c in coeffs])
    lead = p[-1]
    p = [c / lead for c in p]
    out = []
    dp = _deriv(p)
    a = _gcd(p, dp)
    b, _ = _divmod(p, a)
    c, _ = _divmod(dp, a)
    d = [x - y for x, y in _pad(c, _deriv(b))]
    i = 1
    while len(b) > 1:
        a = _gcd(b, d)
        if len(a) > 1:
            out.append((a, i))
        b, _ = _divmod(b, a)
        c, _ = _divmod(d, a)
        d = [x - y for x, y in _pad(c, _deriv(b))]
        i += 1
    return out


def _pad(a: list, b: list):
    n = max(len(a), len(b))
    return zip(list(a) + [Fraction(0)] * (n - len(a)), list(b) + [Fraction(0)] * (n - len(b)))


def sturm_sequence(p: list) -> list[list]:
    seq = [_trim([Fraction(c) for c in p]), _deriv([Fraction(c) for c in p])]
    while not _is_zero(seq[-1]):
        _, r = _divmod(seq[-2], seq[-1])
        seq.append([-c for c in r])
    return seq[:-1]


def _variations(seq: list[list], x: Fraction) -> int:
    signs = [s for s in (_sign(_eval(p, x)) for p in seq) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _cauchy_bound(p: list) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(Fraction(c)) / lead for c in p[:-1]), default=Fraction(0))


@dataclass(frozen=True)
class RealRoot:
    """A real root enclosed in [lo, hi] (lo == hi when the root is rational and found exactly)."""

    lo: Fraction
    hi: Fraction
    multiplicity: int = 1

    @property
    def midpoint(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def radius(self) -> float:
        return float((self.hi - self.lo) / 2)

    def to_json(self) -> dict:
        return {
            "kind": "real",
            "lo": str(self.lo),
            "hi": str(self.hi),
            "center": self.midpoint,
            "radius": self.radius,
            "multiplicity": self.multiplicity,
        }


def isolate_real_roots(sqf: list, tol: Fraction = ROOT_TOLERANCE, cuts: Sequence[Fraction] = ()) -> list[RealRoot]:
    """Isolate and refine all real roots of a squarefree polynomial by Sturm bisection.

    Intervals never straddle a point of ``cuts``: a root equal to a cut point
    is returned exactly, otherwise the interval is refined until it lies on
    one side.
    """
    p = _trim([Fraction(c) for c in sqf])
    if len(p) <= 1:
        return []
    seq = sturm_sequence(p)
    B = _cauchy_bound(p)
    count = lambda a, b: _variations(seq, a) - _variations(seq, b)  # roots in (a, b]
    out: list[RealRoot] = []
    stack = [(-B, B)]
    while stack:
        a, b = stack.pop()
        n = count(a, b)
        if n == 0:
            continue
        if n == 1:
            out.append(_refine(p, a, b, tol, cuts))
            continue
        m = (a + b) / 2
        stack.append((m, b))
        stack.append((a, m))
    return sorted(out, key=lambda r: r.lo)


def _refine(p: list, a: Fraction, b: Fraction, tol: Fraction, cuts: Sequence[Fraction]) -> RealRoot:
    """Single root in (a, b]; shrink to width <= tol and off every cut point."""
    if _eval(p, b) == 0:
        return RealRoot(b, b)
    sa = _sign(_eval(p, a))
    if sa == 0:
        # a is the neighbouring root; p just right of a has the sign of p'(a)
        sa = _sign(_eval(_deriv(list(p)), a))
    while True:
        for c in cuts:
            if a < c < b:
                vc = _eval(p, c)
                if vc == 0:
                    return RealRoot(c, c)
                if _sign(vc) == sa:
                    a = c
                else:
                    b = c
        if b - a <= tol:
            return RealRoot(a, b)
        m = (a + b) / 2
        vm = _eval(p, m)
        if vm == 0:
            return RealRoot(m, m)
        if _sign(vm) == sa:
            a = m
        else:
            b = m


@dataclass(frozen=True)
class ComplexRoot:
    real: float
    imag: float
    radius: float
    multiplicity: int = 1

    def to_json(self) -> dict:
        return {
            "kind": "complex",
            "center": [self.real, self.imag],
            "radius": self.radius,
            "multiplicity": self.multiplicity,
        }


@dataclass(frozen=True)
class RootReport:
    degree: int
    interval: tuple
    arc_roots: tuple  # RealRoot inside the arc image
    off_arc_roots: tuple  # RealRoot outside, or ComplexRoot
    trivial_zeros: tuple = ()

    @property
    def real_roots_in_arc_image(self) -> int:
        return sum(r.multiplicity for r in self.arc_roots)

    @property
    def off_arc_count(self) -> int:
        return sum(r.multiplicity for r in self.off_arc_roots)

    @property
    def complex_roots(self) -> tuple:
        return tuple(r for r in self.off_arc_roots if isinstance(r, ComplexRoot))

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "arcImage": [str(self.interval[0]), str(self.interval[1])],
            "realRootsInArcImage": self.real_roots_in_arc_image,
            "arcRoots": [r.to_json() for r in self.arc_roots],
            "offArcRoots": [r.to_json() for r in self.off_arc_roots],
            "trivialZeros": list(self.trivial_zeros),
        }


def _trivial_zeros(p: FaberPolynomial) -> tuple:
    # F_2 (level 2) and the weight 2, 4 seeds (level 3) vanish at the elliptic point
    if p.kprime in (2, 4):
        return ("elliptic/trivial",)
    return ()


def root_report(p: FaberPolynomial, tol: Fraction = ROOT_TOLERANCE) -> RootReport:
    if p.degree < 1:
        lo, hi = ARC_IMAGE[p.level]
        return RootReport(p.degree, (lo, hi), (), (), _trivial_zeros(p))
    lo, hi = ARC_IMAGE[p.level]
    arc, off = [], []
    real_total = 0
    for factor, mult in squarefree_decomposition(p.coeffs):
        for r in isolate_real_roots(factor, tol, cuts=(lo, hi)):
            root = RealRoot(r.lo, r.hi, mult)
            real_total += mult
            (arc if lo <= r.lo and r.hi <= hi else off).append(root)
    complex_part = _complex_roots(p)
    if real_total + sum(r.multiplicity for r in complex_part) != p.degree:
        raise ArithmeticError("root count does not match the degree")
    arc.sort(key=lambda r: r.lo)
    return RootReport(p.degree, (lo, hi), tuple(arc), tuple(off) + tuple(complex_part), _trivial_zeros(p))


def _complex_roots(p: FaberPolynomial) -> list[ComplexRoot]:
    """Non-real roots with certified enclosures from flint's complex root finder."""
    from flint import fmpz_poly

    roots = []
    for r, mult in fmpz_poly(list(p.coeffs)).complex_roots():
        if r.imag.contains(0):
            continue  # real; handled exactly by the Sturm code
        rad = max(float(r.real.rad()), float(r.imag.rad()))
        roots.append(ComplexRoot(float(r.real.mid()), float(r.imag.mid()), rad * math.sqrt(2), int(mult)))
    return roots


# pulling roots back to the arc ----------------------------------------------------


@dataclass(frozen=True)
class ArcRoot:
    """theta enclosure of phi^{-1}(root) on the lower boundary arc."""

    theta_lo: float
    theta_hi: float

    @property
    def theta(self) -> float:
        return (self.theta_lo + self.theta_hi) / 2

    @property
    def width(self) -> float:
        return self.theta_hi - self.theta_lo


_ENDPOINT = {2: math.pi / 2, 3: 2 * math.pi / 3}


def arc_root_pullback(
    p: Optional[FaberPolynomial],
    root: Union[float, Fraction, RealRoot],
    level: Optional[int] = None,
    width: float = 1e-8,
    prec: int = 128,
) -> ArcRoot:
    """theta with phi(-1/N + e^{i theta}/N) = root, by bisection on the decreasing Hauptmodul.

    The enclosure is certified: phi is evaluated with ball arithmetic at
    both ends of the returned interval.
    """
    lvl = level if level is not None else (p.level if p is not None else 2)
    lo_x, hi_x = ARC_IMAGE[lvl]
    if isinstance(root, RealRoot):
        r_lo, r_hi = root.lo, root.hi
    else:
        r_lo = r_hi = Fraction(root)
    if r_lo < lo_x or r_hi > hi_x:
        raise RootOutOfRange(f"root {float(r_lo)} is outside the arc image [{lo_x}, {hi_x}]")
    end = _ENDPOINT[lvl]
    if r_hi == 0:
        return ArcRoot(0.0, 0.0 if r_lo == 0 else _bisect(lvl, r_lo, 0.0, end, width, prec, upper=True))
    if r_lo == lo_x:
        t_lo = end if r_hi == lo_x else _bisect(lvl, r_hi, 0.0, end, width, prec, upper=False)
        return ArcRoot(t_lo, end)
    t_lo = _bisect(lvl, r_hi, 0.0, end, width, prec, upper=False)
    t_hi = _bisect(lvl, r_lo, 0.0, end, width, prec, upper=True)
    return ArcRoot(t_lo, t_hi)


def _bisect(level: int, target: Fraction, a: float, b: float, width: float, prec: int, upper: bool) -> float:
    """One end of a theta enclosure for phi(theta) = target.

    Keeps phi(a) > target > phi(b) in certified arithmetic and returns b when
    ``upper`` (a theta known to lie past the root), else a.
    """
    from flint import arb

    from .arczeros import hauptmodul_on_arc

    t = arb(target.numerator) / target.denominator
    while b - a > width / 2:
        m = (a + b) / 2
        v = hauptmodul_on_arc(m, level, prec)
        if v > t:
            a = m
        elif v < t:
            b = m
        elif prec < 2048:
            prec *= 2
        else:
            # the root sits inside the ball at m; bracket it with nearby points
            d = width / 8
            if hauptmodul_on_arc(m - d, level, prec) > t and hauptmodul_on_arc(m + d, level, prec) < t:
                return m + d if upper else m - d
            raise ArithmeticError("could not separate the root from the bisection point")
    return b if upper else a
