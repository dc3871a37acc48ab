"""Certified bounds for D(z, tau) = phi(z) / (phi(tau) - phi(z)).

z runs over the arc theta in [pi/6, pi/2], where phi(z) is real and negative;
tau = u + i/5 runs over u in [-1/2, 1/2].  Since Re phi(tau) is even in u and
Im phi(tau) is odd, |D| and |1 + D| are even in u and only [-1/2, 0] is
computed.

phi(tau) is enclosed leaf by leaf from the product q^-1 prod (1 + q^n)^-24,
with u entered as a ball covering the whole leaf, so each leaf yields a
rectangle that provably contains phi(tau) for every u in it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from flint import acb, arb, ctx

from ..errors import CertificationFailed
from .extrema import CertifiedBound
from .tails import PREC, lower_float, upper_float

HEIGHT = arb(1) / 5
DEFAULT_LEAVES = 2000
MAX_DEPTH = 12

SEGMENT_REGIME = {
    "name": "segment",
    "range": [-0.5, 0.0],
    "description": "tau = u + i/5, u in [-1/2, 0]; [0, 1/2] by symmetry; z on the arc theta in [pi/6, pi/2]",
}

# Subintervals and constants of the published case analysis.
PUBLISHED_CUTS = (-0.5, -0.21516, -0.18884, -0.12878, 0.0)
PUBLISHED_POSITIVE_RE = (-0.45787, -0.22531)
PUBLISHED_PHI_Z_MAX = -0.03314


@dataclass(frozen=True)
class Box:
    """Axis-parallel rectangle [xlo, xhi] + i[ylo, yhi] containing phi(tau) on a leaf."""

    xlo: float
    xhi: float
    ylo: float
    yhi: float

    @classmethod
    def of(cls, v: acb) -> "Box":
        return cls(
            lower_float(v.real), upper_float(v.real), lower_float(v.imag), upper_float(v.imag)
        )

    @property
    def dy(self) -> float:
        """Distance from the box to the real axis."""
        if self.ylo <= 0 <= self.yhi:
            return 0.0
        return min(abs(self.ylo), abs(self.yhi))

    @property
    def max_abs(self) -> arb:
        x = max(abs(self.xlo), abs(self.xhi))
        y = max(abs(self.ylo), abs(self.yhi))
        return (arb(x) ** 2 + arb(y) ** 2).sqrt()


def phi_tau(u: arb, prec: int = PREC) -> acb:
    """phi(u + i/5) for every u in the ball ``u``, with the omitted product factors as a radius."""
    with ctx.workprec(prec):
        q = (2 * acb.pi() * acb(0, 1) * acb(u, HEIGHT)).exp()
        t = (-2 * arb.pi() * HEIGHT).exp()
        M = max(16, int(prec * math.log(2) / 1.2566) + 8)
        prod = acb(1)
        qn = acb(1)
        for _ in range(M):
            qn *= q
            prod *= 1 + qn
        tu = arb(t.upper())
        head = tu ** (M + 1)
        # |log(1 + y)| <= |y| / (1 - |y|), summed over n > M
        eps = 24 * head / ((1 - tu) * (1 - head))
        r = (eps.exp() - 1).upper()
        value = 1 / (q * prod**24)
        return value * (1 + acb(arb(0, r), arb(0, r)))


def leaf_box(lo: float, hi: float, prec: int = PREC) -> Box:
    with ctx.workprec(prec):
        u = arb((arb(lo) + arb(hi)) / 2)
        u = arb(u.mid(), (arb(hi) - arb(lo)).upper() / 2 * (1 + 2.0**-40))
        return Box.of(phi_tau(u, prec))


@dataclass(frozen=True)
class ArcRange:
    """Certified hull [lo, hi] of the real values phi(z) on the arc, hi < 0."""

    lo: float
    hi: float

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


def _log_derivative_x(x: arb, prec: int) -> arb:
    """d/dx log(4096 x prod (1 + x^n)^24) = 1/x + 24 sum n x^(n-1) / (1 + x^n), with its tail."""
    ax = arb(abs(x).upper())
    M = max(8, int(prec * math.log(2) / -math.log(float(ax.upper()))) + 4)
    total = 1 / x
    for n in range(1, M + 1):
        total += 24 * n * x ** (n - 1) / (1 + x**n)
    # sum_{n>M} n |x|^(n-1) / (1 - |x|^n) <= (M + 1) |x|^M / ((1 - |x|)^2 (1 - |x|))
    tail = 24 * (M + 1) * ax**M / ((1 - ax) ** 3)
    return total + arb(0, tail.upper())


def _piece_values(left: arb, right: arb, prec: int, depth: int, max_depth: int = 24) -> list:
    # arczeros imports the tails module, so it is loaded lazily here
    from ..arczeros import _fricke_x, hauptmodul_on_arc

    mid = (left + right) / 2
    th = arb(mid.mid(), ((right - left) / 2).upper() * (1 + 2.0**-40))
    # dx/dtheta < 0 and phi < 0, so d phi / d theta has the sign of the log derivative
    slope = _log_derivative_x(_fricke_x(th), prec)
    if slope < 0 or slope > 0:
        return [hauptmodul_on_arc(e, level=2, prec=prec) for e in (left, right)]
    if depth >= max_depth:
        return [hauptmodul_on_arc(th, level=2, prec=prec)]
    return _piece_values(left, mid, prec, depth + 1, max_depth) + _piece_values(mid, right, prec, depth + 1, max_depth)


def arc_phi_range(pieces: int = 256, prec: int = PREC) -> ArcRange:
    """Hull of phi(z) over theta in [pi/6, pi/2].

    On each piece the sign of d phi / d theta is checked in ball arithmetic;
    where it is certified, phi is monotone there and the piece contributes its
    endpoint values.  Other pieces are bisected; near the elliptic point
    theta = pi/2, where the derivative vanishes, the last piece is evaluated
    with theta as a ball.
    """
    with ctx.workprec(prec):
        a, b = arb.pi() / 6, arb.pi() / 2
        step = (b - a) / pieces
        values = []
        for i in range(pieces):
            values.extend(_piece_values(a + step * i, a + step * (i + 1), prec, 0))
        lo = min(lower_float(v) for v in values)
        hi = max(upper_float(v) for v in values)
    if not hi < 0:
        raise CertificationFailed("phi on the arc is not certified negative")
    return ArcRange(lo, hi)


def _dist_lower(p: arb, box: Box) -> arb:
    """Lower bound on |w - p| for real p in the ball ``p`` and w in ``box``."""
    dx = max(box.xlo - float(p.upper()), 0.0, float(p.lower()) - box.xhi)
    return (arb(dx) ** 2 + arb(box.dy) ** 2).sqrt()


def sup_abs_d(box: Box, arc: ArcRange) -> float:
    """Upper bound for |p| / |w - p| over p in the arc range and w in the box.

    For p left of the box the ratio peaks at p = xlo + dy^2 / xlo; otherwise it
    is monotone between the breakpoints xlo and xhi, so the maximum is among
    the endpoints, the breakpoints and the two stationary points.
    """
    dy = arb(box.dy)
    cands = [arb(arc.lo), arb(arc.hi), arb(box.xlo), arb(box.xhi)]
    for x in (box.xlo, box.xhi):
        if x != 0:
            cands.append(arb(x) + dy * dy / x)
    best = 0.0
    for p in cands:
        if p.upper() < arc.lo or p.lower() > arc.hi:
            continue
        # clip the ball to the arc range
        plo = max(float(p.lower()), arc.lo)
        phi = min(float(p.upper()), arc.hi)
        pb = arb((plo + phi) / 2, (phi - plo) / 2 * (1 + 2.0**-40))
        d = _dist_lower(pb, box)
        if not d > 0:
            return math.inf
        best = max(best, upper_float(abs(arb(plo)) / d))
    return best


def sup_abs_one_plus_d(box: Box, arc: ArcRange, sup_d: float) -> float:
    """Upper bound for |w| / |w - p| = |1 + D|."""
    bounds = [1 + sup_d]
    if box.xlo >= 0:
        # Re w >= 0 > p gives |w - p| >= |w|
        bounds.append(1.0)
    dx = max(box.xlo - arc.hi, 0.0, arc.lo - box.xhi)
    d = (arb(dx) ** 2 + arb(box.dy) ** 2).sqrt()
    if d > 0:
        bounds.append(upper_float(box.max_abs / d))
    return min(bounds)


@dataclass(frozen=True)
class Leaf:
    lo: float
    hi: float
    box: Box
    sup_d: float
    sup_one_plus_d: float


def _leaf(lo: float, hi: float, arc: ArcRange, prec: int) -> Leaf:
    box = leaf_box(lo, hi, prec)
    sd = sup_abs_d(box, arc)
    return Leaf(lo, hi, box, sd, sup_abs_one_plus_d(box, arc, sd) if math.isfinite(sd) else math.inf)


def _refine(lo: float, hi: float, arc: ArcRange, prec: int, tol: float, depth: int) -> list:
    leaf = _leaf(lo, hi, arc, prec)
    box = leaf.box
    width = max(box.xhi - box.xlo, box.yhi - box.ylo)
    dist = float(_dist_lower(arb((arc.lo + arc.hi) / 2, (arc.hi - arc.lo) / 2), box).lower())
    if depth >= MAX_DEPTH or (dist > 0 and width <= tol * dist):
        return [leaf]
    mid = (lo + hi) / 2
    return _refine(lo, mid, arc, prec, tol, depth + 1) + _refine(mid, hi, arc, prec, tol, depth + 1)


def segment_leaves(leaves: int = DEFAULT_LEAVES, prec: int = PREC, tol: float = 0.02) -> tuple[list, ArcRange]:
    """Leaves covering [-1/2, 0], bisected until each box is narrow relative to its distance from the arc range."""
    if leaves < 1:
        raise ValueError("leaves must be positive")
    arc = arc_phi_range(prec=prec)
    out = []
    for i in range(leaves):
        lo = -0.5 + 0.5 * i / leaves
        hi = -0.5 + 0.5 * (i + 1) / leaves
        out.extend(_refine(lo, hi, arc, prec, tol, 0))
    return out, arc


@dataclass(frozen=True)
class DIntegralResult:
    sup_d: CertifiedBound
    integral_d: CertifiedBound
    integral_one_plus_d: CertifiedBound
    leaves: int
    arc: ArcRange

    def to_json(self) -> dict:
        return {
            "supD": self.sup_d.to_json(),
            "integralD": self.integral_d.to_json(),
            "integralOnePlusD": self.integral_one_plus_d.to_json(),
            "leaves": self.leaves,
            "arcRange": self.arc.to_json(),
        }


def d_integral_bound(leaves: int = DEFAULT_LEAVES, prec: int = PREC) -> DIntegralResult:
    """Certified sup |D|, sup_z int |D| du and sup_z int |1 + D| du over u in [-1/2, 1/2].

    The integrals are bounded by integrating the leafwise suprema over z, then
    doubling for the symmetric half.
    """
    parts, arc = segment_leaves(leaves, prec)
    with ctx.workprec(prec):
        sup_d = 0.0
        half_d = arb(0)
        half_1d = arb(0)
        for leaf in parts:
            if not math.isfinite(leaf.sup_d):
                raise CertificationFailed(f"phi(tau) meets the arc range near u = {leaf.lo}")
            w = arb(leaf.hi) - arb(leaf.lo)
            sup_d = max(sup_d, leaf.sup_d)
            half_d += w * arb(leaf.sup_d)
            half_1d += w * arb(leaf.sup_one_plus_d)
        total_d = upper_float(2 * half_d)
        total_1d = upper_float(2 * half_1d)
    common = [
        {"step": "phi(z) on the arc lies in the certified hull", "lower": arc.lo, "upper": arc.hi},
        {"step": f"phi(tau) enclosed on {len(parts)} leaves covering u in [-1/2, 0] by ball evaluation of the eta product"},
        {"step": "per leaf: sup over p of |p| / dist(p, box) at endpoints, breakpoints and stationary points"},
    ]
    sd = CertifiedBound("sup |D(z, tau)|", "upper", sup_d, SEGMENT_REGIME, tuple(common))
    idd = CertifiedBound(
        "sup_z int_{-1/2}^{1/2} |D(z, tau)| du",
        "upper",
        total_d,
        SEGMENT_REGIME,
        tuple(common + [{"step": "2 * sum of leaf width * leaf sup", "upper": total_d}]),
    )
    i1d = CertifiedBound(
        "sup_z int_{-1/2}^{1/2} |1 + D(z, tau)| du",
        "upper",
        total_1d,
        SEGMENT_REGIME,
        tuple(
            common
            + [
                {"step": "|1 + D| <= min(1 + |D|, |w| / dist, 1 when Re w >= 0)"},
                {"step": "2 * sum of leaf width * leaf sup", "upper": total_1d},
            ]
        ),
    )
    return DIntegralResult(sd, idd, i1d, len(parts), arc)


# ---------------------------------------------------------------------------
# the published piecewise analysis


@dataclass(frozen=True)
class PartitionCheck:
    interval: tuple
    claim: str
    holds: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"interval": list(self.interval), "claim": self.claim, "holds": self.holds, "detail": self.detail}


def _prove(lo: float, hi: float, pred, prec: int, depth: int = 0, max_depth: int = 40) -> bool:
    """Whether ``pred`` holds on the enclosure of every piece of an adaptive bisection of [lo, hi]."""
    if pred(leaf_box(lo, hi, prec)):
        return True
    if depth >= max_depth:
        return False
    mid = (lo + hi) / 2
    return _prove(lo, mid, pred, prec, depth + 1, max_depth) and _prove(mid, hi, pred, prec, depth + 1, max_depth)


def _prove_on(lo: float, hi: float, pred, pieces: int, prec: int) -> bool:
    step = (hi - lo) / pieces
    return all(_prove(lo + step * i, lo + step * (i + 1), pred, prec) for i in range(pieces))


def _trichotomy(b: Box) -> bool:
    # each case forces |w - p| > 64 >= |p| or Re w - p >= |p|
    return b.xlo > 0 or b.xhi < -128 or b.dy > 64


def verify_published_partition(per_piece: int = 64, prec: int = PREC) -> list:
    """Check each claim of the published case analysis on its own subinterval."""
    arc = arc_phi_range(prec=prec)
    checks = []

    # the stated trichotomy, then |D| < 1 derived from the certified arc hull rather than assumed
    literal = _prove_on(-0.5, -0.21516, _trichotomy, per_piece, prec)
    derived = _prove_on(-0.5, -0.21516, lambda b: sup_abs_d(b, arc) < 1, per_piece, prec)
    checks.append(
        PartitionCheck(
            (-0.5, -0.21516),
            "Re phi > 0, Re phi < -128 or |Im phi| > 64; hence |D| < 1",
            literal and derived,
            f"trichotomy proved: {literal}; |D| < 1 proved against phi(z) in [{arc.lo:.5f}, {arc.hi:.5f}]: {derived}",
        )
    )
    ok = _prove_on(*PUBLISHED_POSITIVE_RE, lambda b: b.xlo > 0, per_piece, prec)
    checks.append(PartitionCheck(PUBLISHED_POSITIVE_RE, "Re phi(tau) > 0", ok))
    ok = _prove_on(-0.21516, -0.18884, lambda b: b.ylo > 1 and b.xlo > -0.0175, per_piece, prec)
    checks.append(PartitionCheck((-0.21516, -0.18884), "Im phi(tau) > 1 and Re phi(tau) > -.0175", ok))
    ok = _prove_on(-0.18884, -0.12878, lambda b: b.ylo >= 0.033 and b.xlo > -0.0175, per_piece, prec)
    checks.append(PartitionCheck((-0.18884, -0.12878), "Im phi(tau) >= .033 and Re phi(tau) > -.0175", ok))
    ok = _prove_on(-0.12878, 0.0, lambda b: b.xlo > -0.01424, per_piece, prec)
    checks.append(PartitionCheck((-0.12878, 0.0), "Re phi(tau) > -.01424", ok))
    checks.append(
        PartitionCheck(
            (math.pi / 6, math.pi / 2),
            "phi(z) <= -.03314 for theta",
            arc.hi <= PUBLISHED_PHI_Z_MAX * (1 - 1e-5),
            f"certified max {arc.hi:.7f}",
        )
    )
    return checks


def published_step_bounds() -> dict:
    """The step-function bounds for |D| and the resulting integrals, in ball arithmetic.

    Each constant is recomputed from the stated enclosures of phi(tau): the
    bound sqrt((Re/A)^2 + 1) for Im >= A, and |p| / (|p| - r) when Re > -r.
    """
    with ctx.workprec(PREC):
        c2 = ((arb("0.0175") / 1) ** 2 + 1).sqrt()
        c3 = ((arb("0.0175") / arb("0.033")) ** 2 + 1).sqrt()
        pz = -arb(PUBLISHED_PHI_Z_MAX)
        c4 = pz / (pz - arb("0.01424"))
        cuts = [arb(s) for s in ("-0.5", "-0.21516", "-0.18884", "-0.12878", "0")]
        steps = [arb(1), c2, c3, c4]
        half = sum(((cuts[i + 1] - cuts[i]) * steps[i] for i in range(4)), arb(0))
        lo, hi = (arb(s) for s in ("-0.45787", "-0.22531"))
        # |1 + D| <= 1 + |D| except where Re phi(tau) > 0, there <= 1
        half_1d = (cuts[-1] - cuts[0]) + half - (hi - lo)
        return {
            "piece_bounds": [upper_float(s) for s in steps],
            "sup_d": upper_float(max(steps, key=lambda s: float(s.mid()))),
            "half_integral_d": upper_float(half),
            "integral_d": upper_float(2 * half),
            "integral_one_plus_d": upper_float(2 * half_1d),
        }


@dataclass(frozen=True)
class DerivedPartition:
    positive_re: tuple
    im_above_one: Optional[tuple]
    im_above_033: Optional[tuple]
    trichotomy_end: float
    min_re_near_zero: float

    def to_json(self) -> dict:
        return {
            "positiveRe": list(self.positive_re),
            "imAboveOne": list(self.im_above_one) if self.im_above_one else None,
            "imAbove033": list(self.im_above_033) if self.im_above_033 else None,
            "trichotomyEnd": self.trichotomy_end,
            "minReNearZero": self.min_re_near_zero,
        }


def _certified_edge(start: float, stop: float, pred, prec: int, tol: float) -> float:
    """Furthest c between start and stop with ``pred`` proved on [start, c] (or [c, start])."""
    c, w = start, stop - start
    while abs(w) > tol:
        w /= 2
        lo, hi = sorted((c, c + w))
        if _prove(lo, hi, pred, prec, max_depth=16):
            c += w
    return c


def _grow(seed: float, pred, prec: int, tol: float, lo: float = -0.5, hi: float = 0.0) -> Optional[tuple]:
    """Certified interval around ``seed`` on which ``pred`` holds, grown outward in leaves of doubling size."""
    a, b = seed - tol, seed + tol
    if not _prove(a, b, pred, prec):
        return None
    for side in (-1, 1):
        step = tol
        while True:
            edge = a if side < 0 else b
            limit = lo if side < 0 else hi
            if edge == limit:
                break
            nxt = max(lo, edge - step) if side < 0 else min(hi, edge + step)
            if _prove(*sorted((edge, nxt)), pred, prec, max_depth=8):
                if side < 0:
                    a = nxt
                else:
                    b = nxt
                step *= 2
            elif step > tol:
                step /= 2
            else:
                found = _certified_edge(edge, nxt, pred, prec, tol * 1e-3)
                if side < 0:
                    a = found
                else:
                    b = found
                break
    return a, b


def derive_partition(prec: int = PREC, tol: float = 1e-5) -> DerivedPartition:
    """Certified subintervals of [-1/2, 0] on which each case of the analysis holds.

    Each interval is grown from a seed point until the predicate can no longer
    be proved on a further leaf of width ``tol``; the published cut points
    should lie inside them.
    """
    pos = _grow(-0.3, lambda b: b.xlo > 0, prec, tol)
    one = _grow(-0.2, lambda b: b.ylo > 1, prec, tol)
    small = _grow(-0.15, lambda b: b.ylo >= 0.033, prec, tol)
    tri = _grow(-0.3, _trichotomy, prec, tol)
    pieces = 256
    near = min(leaf_box(-0.12878 * (1 - i / pieces), -0.12878 * (1 - (i + 1) / pieces), prec).xlo for i in range(pieces))
    return DerivedPartition(pos, one, small, tri[1] if tri and tri[0] == -0.5 else -0.5, near)
