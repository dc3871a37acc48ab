"""Certified minima and maxima of |f| on the arc and on the horizontal segment.

A truncated series is evaluated in ball arithmetic on a uniform grid.  Between
grid points |f_trunc| moves by at most (derivative bound) * (half step); the
tail certificate covers the rest of the series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from flint import acb, acb_poly, arb, ctx

from ..errors import CertificationFailed, InvalidRegime
from ..qseries import LaurentSeries, eisenstein, eta_quotient
from .tails import PREC, lower_float, regime_t, tail_bound, upper_float

#: Truncations used for each named series: N = 50 for Eisenstein series, 30 for phi.
DEFAULT_N = {"S4": 50, "F2": 50, "E4_2z": 50, "phi_level2": 30}

#: Grid sizes of the published computation: 40000 steps on the arc, 123000 on the segment.
DEFAULT_GRID = {"arc": 40001, "segment": 123001}


@dataclass(frozen=True)
class Regime:
    """A one-parameter path in the upper half plane and the |q| range along it."""

    name: str
    lo: float
    hi: float
    description: str

    def z(self, x: arb) -> acb:
        if self.name == "arc":
            return acb(-0.5) + acb(x.cos(), x.sin()) / 2
        return acb(x, arb(1) / 5)

    def q(self, x: arb) -> acb:
        return (2 * acb.pi() * acb(0, 1) * self.z(x)).exp()

    @property
    def derivative_factor(self) -> arb:
        # |d q^n / dx| = factor * n * |q|^n
        return arb.pi() if self.name == "arc" else 2 * arb.pi()

    def bounds(self) -> tuple[arb, arb]:
        if self.name == "arc":
            return arb.pi() / 6, arb.pi() / 2
        return arb(-0.5), arb(0)

    def to_json(self) -> dict:
        return {"name": self.name, "range": [self.lo, self.hi], "description": self.description}


ARC = Regime("arc", math.pi / 6, math.pi / 2, "z = -1/2 + e^(i theta)/2, theta in [pi/6, pi/2], |q| <= e^(-pi/2)")
SEGMENT = Regime(
    "segment", -0.5, 0.0, "tau = u + i/5, u in [-1/2, 0] (u in [0, 1/2] by symmetry), |q| = e^(-2 pi/5)"
)
REGIMES = {"arc": ARC, "segment": SEGMENT}


def get_regime(name) -> Regime:
    if isinstance(name, Regime):
        return name
    try:
        return REGIMES[name]
    except KeyError:
        raise InvalidRegime(f"unknown regime {name!r}; expected one of {sorted(REGIMES)}") from None


@dataclass(frozen=True)
class CertifiedBound:
    quantity: str
    kind: str  # "upper" or "lower"
    value: float
    regime: dict
    steps: tuple = field(default=(), compare=False)

    def holds(self, target: float, rel: float = 0.0) -> bool:
        """Whether this bound is at least as strong as ``target`` (with relative slack ``rel``)."""
        if self.kind == "upper":
            return self.value <= target * (1 + rel)
        return self.value >= target * (1 - rel)

    def to_json(self) -> dict:
        return {
            "quantity": self.quantity,
            "kind": self.kind,
            "value": self.value,
            "regime": self.regime,
            "steps": [dict(s) for s in self.steps],
        }


def truncated_series(name: str, N: Optional[int] = None) -> LaurentSeries:
    N = DEFAULT_N[name] if N is None else N
    if name == "phi_level2":
        return eta_quotient(2, N + 1).truncate(N)
    source = {"S4": "S4_level2", "F2": "F2_level2", "E4_2z": "E4_2z"}[name]
    return eisenstein(source, N).truncate(N)


class TruncatedEvaluator:
    """Ball evaluation of q^v * P(q) for a truncated series."""

    def __init__(self, series: LaurentSeries):
        self.valuation = min(series.valuation, 0)
        self.poly = acb_poly([series[e] for e in range(self.valuation, series.truncation + 1)])

    def __call__(self, q: acb) -> acb:
        value = self.poly(q)
        if self.valuation:
            value = value * q**self.valuation
        return value


def derivative_bound(series: LaurentSeries, regime: Regime) -> arb:
    """sum factor * |n| |a(n)| |q|^n over the regime, |q|^n maximal at t (n > 0) or t_min (n < 0)."""
    t, t_min = regime_t(regime.name)
    total = arb(0)
    for n, c in series.items():
        if n == 0:
            continue
        total += abs(n) * abs(c) * (t**n if n > 0 else t_min**n)
    return regime.derivative_factor * total


def majorant(series: LaurentSeries, regime: Regime) -> arb:
    t, t_min = regime_t(regime.name)
    return sum((abs(c) * (t**n if n >= 0 else t_min**n) for n, c in series.items()), arb(0))


def _grid_abs(series: LaurentSeries, regime: Regime, grid_size: int):
    lo, hi = regime.bounds()
    ev = TruncatedEvaluator(series)
    step = (hi - lo) / (grid_size - 1)
    lo_min, hi_max = None, None
    arg_min = arg_max = 0
    for i in range(grid_size):
        x = lo + step * i
        v = abs(ev(regime.q(x)))
        if lo_min is None or v.lower() < lo_min:
            lo_min, arg_min = v.lower(), i
        if hi_max is None or v.upper() > hi_max:
            hi_max, arg_max = v.upper(), i
    return lo_min, hi_max, step / 2, (lo + step * arg_min), (lo + step * arg_max)


def certify_extremum(
    series: str,
    regime,
    kind: str,
    grid_size: Optional[int] = None,
    N: Optional[int] = None,
    tail_exact_terms: int = 10,
) -> CertifiedBound:
    """Certified lower bound for min |f| (kind='min') or upper bound for max |f| (kind='max')."""
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    reg = get_regime(regime)
    grid_size = DEFAULT_GRID[reg.name] if grid_size is None else int(grid_size)
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    N = DEFAULT_N[series] if N is None else N
    trunc = truncated_series(series, N)
    tail = tail_bound(series, N, reg.name, exact_terms=tail_exact_terms)
    with ctx.workprec(PREC):
        D = derivative_bound(trunc, reg)
        lo_min, hi_max, half, x_min, x_max = _grid_abs(trunc, reg, grid_size)
        slack = D * half
        steps = [
            {"step": f"truncate at q^{N}; evaluate |f_trunc| at {grid_size} grid points in ball arithmetic"},
            _bstep("derivative bound for f_trunc", D),
            _bstep("half grid step", half),
            _bstep("grid slack = derivative bound * half step", slack),
            {"step": "tail certificate", "upper": tail.bound, "detail": tail.to_json()},
        ]
        if kind == "min":
            value = lo_min - slack - tail.bound
            steps.insert(1, {"step": "min over grid of |f_trunc|", "lower": lower_float(lo_min), "at": float(x_min)})
            if not value > 0:
                raise CertificationFailed(
                    f"grid slack swamps the minimum of |{series}| on the {reg.name}; increase grid_size"
                )
            out = lower_float(value)
            label = "lower"
        else:
            value = hi_max + slack + tail.bound
            steps.insert(1, {"step": "max over grid of |f_trunc|", "upper": upper_float(hi_max), "at": float(x_max)})
            out = upper_float(value)
            label = "upper"
    return CertifiedBound(f"{kind} |{series}|", label, out, reg.to_json(), tuple(steps))


def certify_majorant(series: str, regime, N: Optional[int] = None) -> CertifiedBound:
    """max |f| <= sum |a(n)| t^n + tail, the coefficient-majorant bound."""
    reg = get_regime(regime)
    N = DEFAULT_N[series] if N is None else N
    trunc = truncated_series(series, N)
    tail = tail_bound(series, N, reg.name)
    with ctx.workprec(PREC):
        m = majorant(trunc, reg)
        value = upper_float(m + tail.bound)
        steps = (
            _bstep(f"sum_(n<={N}) |a(n)| t^n", m),
            {"step": "tail certificate", "upper": tail.bound, "detail": tail.to_json()},
        )
    return CertifiedBound(f"max |{series}|", "upper", value, reg.to_json(), steps)


def _bstep(what: str, value: arb) -> dict:
    return {"step": what, "upper": upper_float(value)}
