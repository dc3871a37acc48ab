"""Index thresholds above which the contour integral is provably below 2.

For theta in [pi/6, pi/2] the integral is at most

    c^n * R^|ell| * max|F2(tau)| * int |1 + D| du,

with c >= e^(-pi (sin theta - 2/5)) and R the ratio bound for S4 between the
arc and the segment.  The threshold splits this as (c^8 * C) * (c^m R)^|ell|
with both factors certified below 2 and 1 respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from flint import arb, ctx

from ..errors import CertificationFailed
from .tails import PREC, upper_float

DECAY = "0.73041"
F2_SEGMENT_MAX = "12.50005"
ONE_PLUS_D_INTEGRAL = "1.74520"
# max|S4(z)| / min|S4(tau)| = .99995 / .014 and max|S4(tau)| / min|S4(z)| = 2.44141 / .03
RATIO_POSITIVE = "71.425"
RATIO_NEGATIVE = "81.38034"
BASE_INDEX = 8
SLOPE = {1: 14, -1: 15}


def decay_factor(prec: int = PREC) -> arb:
    """e^(-pi (sin theta - 2/5)) at theta = pi/6, its largest value on [pi/6, pi/2]."""
    with ctx.workprec(prec):
        return (-arb.pi() * (arb(1) / 2 - arb(2) / 5)).exp()


@dataclass(frozen=True)
class ThresholdReport:
    ell: int
    threshold: int
    minimal_index: int
    constants: dict
    steps: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "threshold": self.threshold,
            "minimalIndex": self.minimal_index,
            "constants": self.constants,
            "steps": [dict(s) for s in self.steps],
        }


def ratio_bounds(prec: int = PREC) -> dict:
    """The two S4 ratio bounds, recomputed from the max/min targets they come from."""
    with ctx.workprec(prec):
        pos = arb("0.99995") / arb("0.014")
        neg = arb("2.44141") / arb("0.03")
    return {"positive": upper_float(pos), "negative": upper_float(neg)}


def _bound(n: int, ell: int, c: arb, base: arb, rpos: arb, rneg: arb) -> arb:
    r = rpos if ell >= 0 else rneg
    return c**n * r ** abs(ell) * base


def threshold_report(ell: int, constants: Optional[dict] = None, prec: int = PREC) -> ThresholdReport:
    """Threshold for ``ell`` with every inequality behind it re-checked in ball arithmetic.

    ``constants`` may override decay, f2_max, one_plus_d, ratio_positive and
    ratio_negative (as strings or floats), e.g. with freshly certified values.
    """
    ell = int(ell)
    given = {
        "decay": DECAY,
        "f2_max": F2_SEGMENT_MAX,
        "one_plus_d": ONE_PLUS_D_INTEGRAL,
        "ratio_positive": RATIO_POSITIVE,
        "ratio_negative": RATIO_NEGATIVE,
    }
    if constants:
        unknown = set(constants) - set(given)
        if unknown:
            raise ValueError(f"unknown constants {sorted(unknown)}")
        given.update({k: str(v) for k, v in constants.items()})
    sign = 1 if ell >= 0 else -1
    slope = SLOPE[sign]
    threshold = BASE_INDEX + slope * abs(ell)
    with ctx.workprec(prec):
        c = arb(given["decay"])
        base = arb(given["f2_max"]) * arb(given["one_plus_d"])
        rpos, rneg = arb(given["ratio_positive"]), arb(given["ratio_negative"])
        r = rpos if sign > 0 else rneg
        true_decay = decay_factor(prec)
        head = c**BASE_INDEX * base
        per_ell = c**slope * r
        before = c ** (slope - 1) * r
        checks = [
            ("e^(-pi/10) < decay", true_decay < c),
            (f"decay^{BASE_INDEX} * f2_max * one_plus_d < 2", head < 2),
            (f"decay^{slope} * ratio < 1", per_ell < 1),
        ]
        steps = [
            {"step": "e^(-pi (sin theta - 2/5)) is largest at theta = pi/6", "upper": upper_float(true_decay)},
            {"step": f"decay^{BASE_INDEX} * f2_max * one_plus_d", "upper": upper_float(head)},
            {"step": f"decay^{slope} * ratio", "upper": upper_float(per_ell)},
            {"step": f"decay^{slope - 1} * ratio (the slope cannot be lowered)", "lower": float(before.lower())},
        ]
        for what, ok in checks:
            if not ok:
                raise CertificationFailed(f"threshold inequality fails: {what}")
        n = 0
        while not _bound(n, ell, c, base, rpos, rneg) < 2:
            n += 1
        direct = _bound(threshold, ell, c, base, rpos, rneg)
        if not direct < 2:
            raise CertificationFailed(f"bound at n = {threshold} is not below 2")
        steps.append({"step": f"direct bound at n = {threshold}", "upper": upper_float(direct)})
    return ThresholdReport(ell, threshold, n, dict(given), tuple(steps))


def theorem_threshold(ell: int) -> int:
    """14 ell + 8 for ell >= 0 and 15 |ell| + 8 for ell < 0, after re-verifying the inequalities."""
    return threshold_report(ell).threshold
