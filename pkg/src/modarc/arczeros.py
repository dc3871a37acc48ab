"""Basis elements restricted to the lower boundary arc z = -1/N + e^{i theta}/N.

``e^{ik theta/2} e^{-2 pi n sin(theta)/N} f(z)`` is real on the arc and stays
close to the cosine predictor, so sign changes of the predictor force zeros.

Values are computed through the Fricke involution: w = -1/(Nz) equals
1/2 + (i/2) cot(theta/2), so x = q(w) = -exp(-pi cot(theta/2)) is real and
tiny (|x| <= e^-pi on the level-2 arc).  Every factor of a basis element then
becomes a real, fast-converging product or divisor series in x with an explicit
tail bound.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from flint import acb, arb, ctx

from .errors import InconclusiveSample, RealnessViolation, TailBoundUnavailable, UnsupportedLevel
from .qseries import LaurentSeries, sigma_table
from .rigor.tails import TailCertificate, power_tail, tail_bound

DEFAULT_PREC = 200
MAX_PREC = 1600
DEFAULT_GRID = 4096

#: theta at the elliptic point that closes the arc.
ARC_END = {2: math.pi / 2, 3: 2 * math.pi / 3}

#: Contour height for level 3.  The admissible theta range is
#: [asin(3 h), 2 pi/3]; the predictor argument needs sin(theta)/3 > h.
LEVEL3_HEIGHT = 0.15

ASYMPTOTIC_LEVEL3 = (0.9618, 0.2792)


@dataclass(frozen=True)
class ArcPoint:
    theta: float
    level: int = 2

    @property
    def z(self) -> complex:
        N = self.level
        return complex(-1 / N + math.cos(self.theta) / N, math.sin(self.theta) / N)


def evaluate_series(
    s: LaurentSeries,
    z,
    tail: Optional[TailCertificate] = None,
    prec: int = DEFAULT_PREC,
) -> acb:
    """Value of the series at q = e^{2 pi i z}, as a ball including the tail.

    Exact (polynomial) series need no certificate; anything else needs a tail
    certificate whose t covers |q| and whose N the series reaches.
    """
    with ctx.workprec(prec):
        zz = z if isinstance(z, acb) else acb(complex(z).real, complex(z).imag)
        if not zz.imag > 0:
            raise ValueError("z must lie in the upper half plane")
        q = (2 * acb.pi() * acb(0, 1) * zz).exp()
        if s.exact:
            top, radius = s.truncation, None
        else:
            if tail is None:
                raise TailBoundUnavailable("an inexact series needs a tail certificate")
            if not abs(q) <= arb(tail.t):
                raise TailBoundUnavailable(f"|q| = {abs(q).mid()} exceeds the certificate's t = {tail.t}")
            if tail.N > s.truncation:
                raise TailBoundUnavailable("series is shorter than the certificate's N")
            top, radius = tail.N, arb(tail.bound)
        value = acb(0)
        for e in range(top, s.valuation - 1, -1):
            value = value * q + s[e]
        if s.valuation > 0:
            value = value * q**s.valuation
        elif s.valuation < 0:
            value = value / q ** (-s.valuation)
        if radius is not None:
            value = value + acb(arb(0, radius), arb(0, radius))
        return value


# Fricke-side building blocks ---------------------------------------------------


def _fricke_x(theta: arb) -> arb:
    return -(-arb.pi() * (1 / (theta / 2).tan())).exp()


def _terms_needed(ax: arb, prec: int) -> int:
    mag = float(ax.upper())
    if mag <= 0:
        return 1
    if mag >= 0.9:
        raise TailBoundUnavailable("theta too close to pi: the Fricke expansion converges too slowly")
    return int(prec * math.log(2) / -math.log(mag)) + 4


def eta_product(x: arb, exponents: dict, prec: int) -> arb:
    """prod_{n>=1} prod_m (1 - x^(m n))^(r_m), real x with |x| < 1, with a certified tail.

    |log(1 - y)| <= |y| / (1 - |y|), so the omitted factors lie within
    exp(+-sum_m |r_m| eps_m), eps_m = sum_{n>M} |x|^(mn) / (1 - |x|^(mn)).
    """
    ax = abs(x)
    M = _terms_needed(ax, prec)
    value = arb(1)
    for n in range(1, M + 1):
        for m, r in exponents.items():
            value *= (1 - x ** (m * n)) ** r
    axu = arb(ax.upper())
    delta = arb(0)
    for m, r in exponents.items():
        head = axu ** (m * (M + 1))
        eps = head / ((1 - axu**m) * (1 - head))
        delta += abs(r) * eps
    spread = delta.exp() - 1
    return value * arb(1, spread.upper())


def divisor_series(x: arb, coeff, degree: int, scale: int, prec: int, const=1) -> arb:
    """const + sum_{n>=1} coeff(n) x^n for real |x| < 1.

    Requires |coeff(n)| <= scale * sigma_k(n) with k = ``degree`` odd; the
    tail is then bounded by scale * sum (n^((k+1)/2) + n^(k+1)) |x|^n.
    """
    ax = abs(x)
    M = _terms_needed(ax, prec)
    value = arb(const)
    acc = arb(0)
    for n in range(M, 0, -1):
        acc = (acc + coeff(n)) * x
    value = value + acc
    axu = arb(ax.upper())
    half = (degree + 1) // 2
    tail = scale * (power_tail(half, M + 1, axu) + power_tail(degree + 1, M + 1, axu))
    return value + arb(0, tail.upper())


def _sigma(k: int, n: int) -> int:
    return sigma_table(max(256, 2 * n)).sigma(k, n)


def _sigma_odd(k: int, n: int) -> int:
    return sigma_table(max(256, 2 * n)).sigma_odd(k, n)


def hauptmodul_on_arc(theta, level: int = 2, prec: int = 128) -> arb:
    """phi_N(-1/N + e^{i theta}/N) = N^(e/2) x prod((1 - x^(Nn)) / (1 - x^n))^e, e = 24/(N-1)."""
    if level not in (2, 3):
        raise UnsupportedLevel(f"no Hauptmodul for level {level}")
    with ctx.workprec(prec):
        th = theta if isinstance(theta, arb) else arb(theta)
        if not th > 0:
            if th == 0:
                return arb(0)
            raise ValueError("theta must be positive")
        x = _fricke_x(th)
        e = 24 // (level - 1)
        prod = eta_product(x, {level: e, 1: -e}, prec)
        return (level ** (e // 2)) * x * prod


def _rotated_base(level: int, ell: int, kprime: int, theta: arb, prec: int) -> arb:
    """e^{i k theta/2} * base(z) as a real ball, base = S4^ell F_k' or Delta3^ell G_k'."""
    x = _fricke_x(theta)
    s = (theta / 2).sin()
    if level == 2:
        # S4(z) = w^4 G(w)/16 with G = eta^16/eta(2.)^8 and F2(z) = -2 w^2 F2(w)
        unit = eta_product(x, {1: 16, 2: -8}, prec) / (256 * s**4)
        out = unit**ell if ell >= 0 else (1 / unit) ** (-ell)
        if kprime == 2:
            f2w = divisor_series(x, lambda n: 24 * _sigma_odd(1, n), 1, 24, prec)
            out = out * f2w / (2 * s**2)
        return out
    # Delta3(z) = -w^6/27 eta^18/eta(3.)^6;  E2f(z) = -3 w^2 E2f(w);  G4(z) = w^4 H(w)
    unit = eta_product(x, {1: 18, 3: -6}, prec) / (1728 * s**6)
    out = unit**ell if ell >= 0 else (1 / unit) ** (-ell)
    if kprime == 2:
        e2w = divisor_series(
            x, lambda n: 12 * _sigma(1, n) - (36 * _sigma(1, n // 3) if n % 3 == 0 else 0), 1, 24, prec
        )
        out = out * 3 * e2w / (4 * s**2)
    elif kprime == 4:
        hw = divisor_series(
            x,
            lambda n: (81 * _sigma(3, n // 3) if n % 3 == 0 else 0) - _sigma(3, n),
            3,
            4,
            prec,
            const=arb(1) / 3,
        )
        out = out * hw / (16 * s**4)
    return out


def normalized_restriction(elem, theta, prec: int = DEFAULT_PREC, method: str = "fricke") -> arb:
    """Re(e^{ik theta/2} e^{-2 pi n sin(theta)/N} f(z)) as a certified real ball.

    ``method='series'`` evaluates the q-expansion directly with tail
    certificates (level 2, theta in [pi/6, pi/2]) and checks that the
    imaginary part vanishes within the error radius.
    """
    level, k, n = elem.spec.level, elem.spec.k, elem.spec.n
    if elem.spec.family != "f":
        raise ValueError("arc restriction is implemented for the f family")
    with ctx.workprec(prec):
        th = theta if isinstance(theta, arb) else arb(theta)
        if not th > 0:
            raise ValueError("theta must be positive (theta = 0 is the cusp)")
        damp = (-2 * arb.pi() * n * th.sin() / level).exp()
        if method == "series":
            return _series_restriction(elem, th, damp, prec)
        if method != "fricke":
            raise ValueError("method must be 'fricke' or 'series'")
        phi = hauptmodul_on_arc(th, level, prec)
        F = arb(0)
        for c in reversed(elem.faber.coeffs):
            F = F * phi + c
        return damp * _rotated_base(level, elem.ell, elem.kprime, th, prec) * F


def _series_restriction(elem, th: arb, damp: arb, prec: int) -> arb:
    from .rigor.extrema import truncated_series

    if elem.spec.level != 2:
        raise TailBoundUnavailable("series evaluation has tail certificates only at level 2")
    # no slack: float(pi/6) sits just below pi/6, where |q| exceeds the certified t
    if not (th >= arb.pi() / 6):
        raise TailBoundUnavailable("tail certificates cover theta >= pi/6 only")
    z = acb(-0.5) + acb(th.cos(), th.sin()) / 2
    s4 = evaluate_series(truncated_series("S4"), z, tail_bound("S4", 50, "arc"), prec)
    phi = evaluate_series(truncated_series("phi_level2", 50), z, tail_bound("phi_level2", 50, "arc"), prec)
    base = s4**elem.ell if elem.ell >= 0 else (1 / s4) ** (-elem.ell)
    if elem.kprime == 2:
        base = base * evaluate_series(truncated_series("F2"), z, tail_bound("F2", 50, "arc"), prec)
    F = acb(0)
    for c in reversed(elem.faber.coeffs):
        F = F * phi + c
    value = (acb(0, elem.spec.k * th / 2)).exp() * damp * base * F
    if not value.imag.contains(0):
        raise RealnessViolation(f"imaginary part {value.imag} at theta = {th.mid()} is not zero within the radius")
    return arb(value.real.mid(), value.real.rad() + abs(value.imag).upper())


def predictor(k: int, n: int, theta: float, level: int = 2) -> float:
    """Cosine predictor: (-1)^n 2cos(k theta/2 - pi n cos theta) at level 2, and at level N
    2cos(k theta/2 + 2 pi n/N - (2 pi n/N) cos theta)."""
    if level == 2:
        return (-1) ** (n % 2) * 2 * math.cos(k * theta / 2 - math.pi * n * math.cos(theta))
    a = 2 * math.pi * n / level
    return 2 * math.cos(k * theta / 2 + a - a * math.cos(theta))


def guaranteed_floor(k: int, n: int) -> int:
    """floor(sqrt(3)/2 n + k/6), exactly: the largest m with 6m - k <= 3 sqrt(3) n."""
    m = math.floor(math.sqrt(3) / 2 * n + k / 6)
    while not _floor_ok(m, k, n):
        m -= 1
    while _floor_ok(m + 1, k, n):
        m += 1
    return m


def _floor_ok(m: int, k: int, n: int) -> bool:
    lhs = 6 * m - k
    if n >= 0:
        return lhs <= 0 or lhs * lhs <= 27 * n * n
    return lhs < 0 and lhs * lhs >= 27 * n * n


def level3_theta_range(height: float = LEVEL3_HEIGHT) -> tuple[float, float]:
    """theta for which z and z/(3z+1) sit at height >= ``height`` (both have Im = sin(theta)/3)."""
    if not 0 < height < 1 / 3:
        raise ValueError("contour height must be in (0, 1/3)")
    return math.asin(3 * height), ARC_END[3]


@dataclass(frozen=True)
class ArcSample:
    theta: float
    value: float
    radius: float
    predictor: float
    flag: str = ""  # "", "elliptic/trivial" or "uncounted"

    @property
    def sign(self) -> int:
        if self.flag == "elliptic/trivial":
            return 0
        if self.value - self.radius > 0:
            return 1
        if self.value + self.radius < 0:
            return -1
        return 0


@dataclass
class ArcProfile:
    level: int
    k: int
    n: int
    samples: list
    sign_changes: int
    guaranteed_floor: Optional[int]
    valence_count: int
    max_predictor_gap: float
    metadata: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "schemaVersion": 1,
            "level": self.level,
            "k": self.k,
            "n": self.n,
            "signChanges": self.sign_changes,
            "guaranteedFloor": self.guaranteed_floor,
            "valenceCount": self.valence_count,
            "maxPredictorGap": self.max_predictor_gap,
            "samples": len(self.samples),
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "value", "radius", "predictor"])
        for s in self.samples:
            w.writerow([repr(s.theta), repr(s.value), repr(s.radius), repr(s.predictor)])
        return buf.getvalue()


def _is_trivial(elem, theta: float) -> bool:
    return elem.kprime in (2, 4) and abs(theta - ARC_END[elem.spec.level]) < 1e-12


def _decide(elem, theta: float, prec: int, max_prec: int) -> tuple[arb, int]:
    p = prec
    while True:
        v = normalized_restriction(elem, theta, p)
        if not v.contains(0) or p >= max_prec:
            return v, p
        p *= 2


def count_arc_zeros(
    elem,
    theta_range: Optional[Sequence[float]] = None,
    grid_size: int = DEFAULT_GRID,
    prec: int = DEFAULT_PREC,
    max_prec: int = MAX_PREC,
    height: Optional[float] = None,
) -> ArcProfile:
    """Certified sign changes of the normalized restriction on a uniform theta grid.

    A sign change counts only when two consecutive enclosures exclude zero on
    opposite sides.  At level 2 only theta in [pi/6, pi/2] counts toward the
    guarantee; samples below pi/6 are reported with flag 'uncounted'.
    """
    level, k, n = elem.spec.level, elem.spec.k, elem.spec.n
    degree = elem.faber.degree
    if grid_size < 2 * max(degree, 0) + 16:
        raise ValueError(f"grid_size must be at least {2 * max(degree, 0) + 16} for this element")
    meta: dict = {"precisionBits": prec}
    if level == 2:
        lo, hi = theta_range if theta_range is not None else (math.pi / 6, math.pi / 2)
        counted = (math.pi / 6, math.pi / 2)
        floor = guaranteed_floor(k, n)
    else:
        h = LEVEL3_HEIGHT if height is None else height
        counted = level3_theta_range(h)
        lo, hi = theta_range if theta_range is not None else counted
        floor = None
        a, b = ASYMPTOTIC_LEVEL3
        meta.update(
            {
                "contourHeight": h,
                "admissibleThetaRange": list(counted),
                "asymptoticReference": a * n + b * k,
            }
        )
    meta["thetaRange"] = [lo, hi]
    meta["countedRange"] = list(counted)
    if not 0 < lo < hi <= ARC_END[level] + 1e-15:
        raise ValueError("theta range must satisfy 0 < lo < hi <= end of arc")
    step = (hi - lo) / (grid_size - 1)
    samples: list[ArcSample] = []
    used_prec = prec
    for i in range(grid_size):
        theta = lo + step * i if i < grid_size - 1 else hi
        pred = predictor(k, n, theta, level)
        flag = "" if counted[0] - 1e-12 <= theta <= counted[1] + 1e-12 else "uncounted"
        if _is_trivial(elem, theta):
            samples.append(ArcSample(theta, 0.0, 0.0, pred, "elliptic/trivial"))
            continue
        v, p = _decide(elem, theta, prec, max_prec)
        used_prec = max(used_prec, p)
        if v.contains(0):
            # nudge off a zero that sits on the grid point
            for d in (step / 4, -step / 4, step / 8, -step / 8):
                t2 = min(max(theta + d, lo), hi)
                v, p = _decide(elem, t2, prec, max_prec)
                if not v.contains(0):
                    theta = t2
                    pred = predictor(k, n, theta, level)
                    break
            else:
                raise InconclusiveSample(f"cannot decide the sign near theta = {theta}", theta)
        samples.append(ArcSample(theta, float(v.mid()), float(v.rad()), pred, flag))
    changes = 0
    last = 0
    gap = 0.0
    for s in samples:
        if s.flag:
            continue
        gap = max(gap, abs(s.value - s.predictor) + s.radius)
        if s.sign == 0:
            continue
        if last and s.sign != last:
            changes += 1
        last = s.sign
    meta["precisionBits"] = used_prec
    return ArcProfile(level, k, n, samples, changes, floor, degree, gap, meta)
