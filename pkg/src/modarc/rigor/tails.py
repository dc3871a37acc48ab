"""Certified bounds on truncated Fourier series tails.

For |q| <= t the tail sum_{n>N} a(n) q^n is bounded by summing the next
``exact_terms`` coefficients exactly and a divisor-sum majorant beyond that.
Majorant sums sum_{n>=M} n^j t^n are evaluated in closed form through
Eulerian polynomials, so nothing is subtracted and no cancellation occurs.

The Hauptmodul has no usable coefficient bound, so its tail goes through
phi = E4(2z)/S4 - 16 and the Eisenstein tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

from flint import arb, ctx

from ..errors import InvalidRegime, TailBoundUnavailable
from ..qseries import eisenstein, eta_quotient, sigma_table

PREC = 128

SERIES_NAMES = ("S4", "F2", "E4_2z", "phi_level2")


def upper_float(x: arb) -> float:
    """A float >= every point of the ball."""
    return math.nextafter(float(x.upper()), math.inf)


def lower_float(x: arb) -> float:
    return math.nextafter(float(x.lower()), -math.inf)


def sigma_bound(k: int, n: int) -> float:
    """n^((k+1)/2) + n^(k+1), an upper bound for sigma_k(n) from pairing d with n/d."""
    if k < 1 or n < 1:
        raise ValueError("sigma_bound needs k >= 1 and n >= 1")
    if (k + 1) % 2 == 0:
        return float(n ** ((k + 1) // 2) + n ** (k + 1))
    with ctx.workprec(PREC):
        return upper_float(arb(n) ** (arb(k + 1) / 2) + arb(n) ** (k + 1))


@lru_cache(maxsize=None)
def eulerian_row(r: int) -> tuple:
    """Eulerian numbers A(r, 0..r-1)."""
    if r == 0:
        return (1,)
    row = [1]
    for m in range(2, r + 1):
        new = [0] * m
        for i in range(m):
            left = row[i - 1] if 0 < i <= len(row) else 0
            mid = row[i] if i < len(row) else 0
            new[i] = (i + 1) * mid + (m - i) * left
        row = new
    return tuple(row)


def moment_series(r: int, t: arb) -> arb:
    """sum_{m>=0} m^r t^m = t A_r(t) / (1-t)^(r+1) (r >= 1), 1/(1-t) for r = 0."""
    if r == 0:
        return 1 / (1 - t)
    poly = arb(0)
    for c in reversed(eulerian_row(r)):
        poly = poly * t + c
    return t * poly / (1 - t) ** (r + 1)


def power_tail(j: int, M: int, t: arb) -> arb:
    """sum_{n>=M} n^j t^n, expanded as t^M sum_r C(j,r) M^(j-r) sum_m m^r t^m."""
    total = arb(0)
    for r in range(j + 1):
        total += math.comb(j, r) * arb(M) ** (j - r) * moment_series(r, t)
    return t**M * total


def _as_arb(t) -> arb:
    if isinstance(t, arb):
        return t
    if isinstance(t, str):
        try:
            return arb(t)
        except ValueError:
            raise InvalidRegime(f"unknown regime {t!r}; expected 'arc', 'segment' or a number") from None
    return arb(t)


@dataclass(frozen=True)
class TailCertificate:
    """bound >= |sum_{n>N} a(n) q^n| whenever |q| <= t."""

    series: str
    N: int
    t: float
    bound: float
    exact_terms: int = 10
    steps: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "series": self.series,
            "N": self.N,
            "t": self.t,
            "bound": self.bound,
            "exactTerms": self.exact_terms,
            "steps": [dict(s) for s in self.steps],
        }


def _step(what: str, value: arb) -> dict:
    return {"step": what, "upper": upper_float(value)}


def s4_coefficient(n: int) -> int:
    tab = sigma_table(max(2 * n, 64))
    return tab.sigma(3, n) - (tab.sigma(3, n // 2) if n % 2 == 0 else 0)


def f2_coefficient(n: int) -> int:
    return 24 * sigma_table(max(2 * n, 64)).sigma_odd(1, n)


def _s4_tail(N: int, t: arb, E: int) -> tuple[arb, list]:
    head = sum((s4_coefficient(n) * t**n for n in range(N + 1, N + E + 1)), arb(0))
    start = N + E + 1
    majorant = power_tail(2, start, t) + power_tail(4, start, t)
    # even n = 2m carry -sigma_3(m) <= -(1 + m^3) once m >= 2
    m0 = -(-start // 2)
    t2 = t * t
    rebate = power_tail(0, m0, t2) + power_tail(3, m0, t2)
    steps = [
        _step(f"exact |a(n)| t^n for n = {N + 1}..{N + E}", head),
        _step(f"sum_(n>={start}) (n^2 + n^4) t^n, from sigma_3(n) <= n^2 + n^4", majorant),
        {"step": f"minus sum_(m>={m0}) (1 + m^3) t^(2m), from sigma_3(m) >= 1 + m^3", "lower": lower_float(rebate)},
    ]
    return head + majorant - rebate, steps


def _f2_tail(N: int, t: arb, E: int) -> tuple[arb, list]:
    head = sum((f2_coefficient(n) * t**n for n in range(N + 1, N + E + 1)), arb(0))
    start = N + E + 1
    # odd-divisor sums are at most sigma(n) <= n(n+1)/2 <= n/2 + n^2
    majorant = 24 * (power_tail(1, start, t) / 2 + power_tail(2, start, t))
    steps = [
        _step(f"exact |a(n)| t^n for n = {N + 1}..{N + E}", head),
        _step(f"24 sum_(n>={start}) (n/2 + n^2) t^n", majorant),
    ]
    return head + majorant, steps


def _e4_2z_tail(N: int, t: arb, E: int) -> tuple[arb, list]:
    tab = sigma_table(max(N + E + 2, 64))
    m1 = N // 2 + 1  # first omitted term is q^(2 m1)
    t2 = t * t
    head = sum((240 * tab.sigma(3, m) * t2**m for m in range(m1, m1 + E)), arb(0))
    start = m1 + E
    majorant = 240 * (power_tail(2, start, t2) + power_tail(4, start, t2))
    steps = [
        _step(f"exact 240 sigma_3(m) t^(2m) for m = {m1}..{m1 + E - 1}", head),
        _step(f"240 sum_(m>={start}) (m^2 + m^4) t^(2m)", majorant),
    ]
    return head + majorant, steps


def regime_t(name: str) -> tuple[arb, arb]:
    """(max |q|, min |q|) on a named regime."""
    if name == "arc":
        return (-arb.pi() / 2).exp(), (-arb.pi()).exp()
    if name == "segment":
        v = (-2 * arb.pi() / 5).exp()
        return v, v
    raise InvalidRegime(f"unknown regime {name!r}; expected 'arc' or 'segment'")


def phi_tail_components(
    N: int,
    t: arb,
    t_min: arb,
    s4_lower: float,
    exact_terms: int = 10,
    eisenstein_N: int = 50,
) -> dict:
    """Pieces of the Hauptmodul tail bound, for audit and for reproducing published figures."""
    E = exact_terms
    Np = N + E
    M = eisenstein_N
    phi = eta_quotient(2, Np + M + 2)
    head = sum((abs(phi[n]) * t**n for n in range(N + 1, Np + 1)), arb(0))
    # A >= |phi_trunc + 16| on the regime; the pole is largest where |q| is smallest
    A = 1 / t_min + sum((abs(phi[n] + (16 if n == 0 else 0)) * t**n for n in range(0, Np + 1)), arb(0))
    s4 = eisenstein("S4_level2", M).truncate(M)
    e42 = eisenstein("E4_2z", M).truncate(M)
    phi_t = phi.truncate(Np) + 16
    # the product is a polynomial: its coefficients past q^M are known exactly
    full = _poly_product(phi_t, s4)
    B = arb(0)
    for n in range(0, Np + M + 1):
        c = (e42[n] if n <= M else 0) - full.get(n, 0)
        if c:
            B += abs(c) * t**n
    rs4, _ = _s4_tail(M, t, 10)
    re4, _ = _e4_2z_tail(M, t, 10)
    smin = arb(s4_lower)
    remainder = (A * rs4 + B + re4) / smin
    return {
        "head": head,
        "A": A,
        "B": B,
        "RS4": rs4,
        "RE4_2z": re4,
        "s4_lower": smin,
        "remainder": remainder,
        "bound": head + remainder,
        "N_prime": Np,
    }


def _poly_product(a, b) -> dict:
    out: dict[int, int] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return out


@lru_cache(maxsize=4)
def _default_s4_lower(regime: str) -> float:
    from .extrema import certify_extremum

    return certify_extremum("S4", regime, "min").value


def tail_bound(
    series: str,
    N: int,
    t: Union[float, str, arb],
    exact_terms: int = 10,
    t_min: Union[float, str, arb, None] = None,
    s4_lower: Optional[float] = None,
) -> TailCertificate:
    """Certified bound on |sum_{n>N} a(n) q^n| for |q| <= t.

    ``t`` may be a number or a regime name ('arc' for the lower boundary arc
    with theta in [pi/6, pi/2], 'segment' for the horizontal line at height
    1/5).  The Hauptmodul needs a lower bound for |S4| on the regime and a
    lower bound for |q| (the q^-1 term); regime names supply both.
    """
    if series not in SERIES_NAMES:
        raise TailBoundUnavailable(f"no tail formula for {series!r}; known: {SERIES_NAMES}")
    if N < 10:
        raise ValueError("N must be at least 10")
    if exact_terms < 0:
        raise ValueError("exact_terms must be non-negative")
    with ctx.workprec(PREC):
        regime = t if isinstance(t, str) and t in ("arc", "segment") else None
        if regime is not None:
            tt, tmin = regime_t(regime)
        else:
            tt = _as_arb(t)
            tmin = _as_arb(t_min) if t_min is not None else tt
        if not (tt > 0) or not (tt < 1):
            raise InvalidRegime(f"need 0 < t < 1, got {tt}")
        E = exact_terms
        if series == "S4":
            value, steps = _s4_tail(N, tt, E)
        elif series == "F2":
            value, steps = _f2_tail(N, tt, E)
        elif series == "E4_2z":
            value, steps = _e4_2z_tail(N, tt, E)
        else:
            if s4_lower is None:
                if regime is None:
                    raise TailBoundUnavailable("the Hauptmodul tail needs s4_lower (or a regime name)")
                s4_lower = _default_s4_lower(regime)
            if not s4_lower > 0:
                raise InvalidRegime("s4_lower must be positive")
            comp = phi_tail_components(N, tt, tmin, s4_lower, E)
            value = comp["bound"]
            steps = [
                _step(f"exact |a(n)| t^n for n = {N + 1}..{comp['N_prime']}", comp["head"]),
                _step(f"A >= |phi_{comp['N_prime']} + 16| (pole bounded by 1/t_min)", comp["A"]),
                _step("B = sum |c(n)| t^n for E4(2z)_50 - (phi_trunc + 16) S4_50", comp["B"]),
                _step("|R S4| at N = 50", comp["RS4"]),
                _step("|R E4(2z)| at N = 50", comp["RE4_2z"]),
                {"step": "|S4| >= s4_lower on the regime", "lower": float(s4_lower)},
                _step("(A |R S4| + B + |R E4(2z)|) / s4_lower", comp["remainder"]),
            ]
        bound = upper_float(value)
        t_float = upper_float(tt)
    return TailCertificate(series, N, t_float, bound, E, tuple(steps))
