"""Exact truncated Laurent series in q and the standard level 1-3 q-expansions.

Every modular form in this package is carried around as a
:class:`LaurentSeries` with ``int``/``Fraction`` coefficients.  A series knows
the highest exponent it is correct to (``truncation``); arithmetic never
claims more than it can prove.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Union

from .errors import UnsupportedLevel, ZeroLeadingCoefficient

Rational = Union[int, Fraction]

#: Default truncation for standard series: 60 terms past the N = 50 used for
#: the Eisenstein tail certificates.
DEFAULT_PRECISION = 110


def _exact(x) -> Rational:
    if isinstance(x, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return _exact(Fraction(x))
    raise TypeError(f"coefficients must be exact rationals, got {type(x).__name__}")


@dataclass(frozen=True)
class LaurentSeries:
    """``sum(coeffs[i] * q**(valuation + i)) + O(q**(truncation + 1))``.

    ``exact=True`` marks a Laurent polynomial: every coefficient above
    ``truncation`` is known to vanish.  Leading zeros are stripped on
    construction, so ``valuation`` is the true order unless the series is zero,
    in which case ``valuation == truncation + 1`` and ``coeffs`` is empty.
    """

    valuation: int
    coeffs: tuple
    truncation: int = None  # type: ignore[assignment]
    exact: bool = False

    def __post_init__(self):
        coeffs = [_exact(c) for c in self.coeffs]
        val = int(self.valuation)
        trunc = val + len(coeffs) - 1 if self.truncation is None else int(self.truncation)
        if len(coeffs) > trunc - val + 1:
            raise ValueError("more coefficients than the truncation allows")
        # pad silently up to the stated truncation
        coeffs.extend([0] * (trunc - val + 1 - len(coeffs)))
        start = 0
        while start < len(coeffs) and coeffs[start] == 0:
            start += 1
        if start == len(coeffs):
            val, coeffs = trunc + 1, []
        else:
            val += start
            coeffs = coeffs[start:]
        if self.exact:
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()
                trunc -= 1
            if not coeffs:
                val = trunc + 1
        object.__setattr__(self, "valuation", val)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "truncation", trunc)

    # construction helpers

    @classmethod
    def zero(cls, truncation: int) -> "LaurentSeries":
        return cls(truncation + 1, (), truncation)

    @classmethod
    def constant(cls, c: Rational, exact: bool = True, truncation: int = 0) -> "LaurentSeries":
        return cls(0, (c,), truncation, exact=exact)

    @classmethod
    def monomial(cls, exponent: int, c: Rational = 1) -> "LaurentSeries":
        return cls(exponent, (c,), exponent, exact=True)

    @classmethod
    def from_dict(cls, terms: dict, truncation: int, exact: bool = False) -> "LaurentSeries":
        if not terms:
            return cls.zero(truncation)
        lo = min(terms)
        coeffs = [terms.get(e, 0) for e in range(lo, truncation + 1)]
        return cls(lo, tuple(coeffs), truncation, exact=exact)

    # access

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, exponent: int) -> Rational:
        if exponent < self.valuation:
            return 0
        if exponent > self.truncation:
            if self.exact:
                return 0
            raise IndexError(f"coefficient of q^{exponent} is beyond the truncation O(q^{self.truncation + 1})")
        return self.coeffs[exponent - self.valuation]

    def items(self) -> Iterator[tuple[int, Rational]]:
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.valuation + i, c

    def coefficient_list(self, start: int, stop: int) -> list:
        """Coefficients of q^start .. q^stop inclusive."""
        return [self[e] for e in range(start, stop + 1)]

    @property
    def leading_coefficient(self) -> Rational:
        if not self.coeffs:
            return 0
        return self.coeffs[0]

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.coeffs)

    def agrees(self, other: "LaurentSeries", upto: Optional[int] = None) -> bool:
        """Same coefficients for every exponent both series determine (up to ``upto``)."""
        top = min(self._known_to(), other._known_to())
        if upto is not None:
            top = min(top, upto)
        lo = min(self.valuation, other.valuation)
        if top == float("inf"):
            top = max(self.truncation, other.truncation)
        return all(self[e] == other[e] for e in range(lo, int(top) + 1))

    def truncate(self, truncation: int) -> "LaurentSeries":
        if truncation >= self.truncation:
            return self
        keep = max(0, truncation - self.valuation + 1)
        return LaurentSeries(min(self.valuation, truncation + 1), self.coeffs[:keep], truncation)

    def _known_to(self) -> float:
        return float("inf") if self.exact else self.truncation

    # arithmetic

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.valuation, tuple(-c for c in self.coeffs), self.truncation, self.exact)

    def __add__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(_exact(other))
        exact = self.exact and other.exact
        if exact:
            trunc = max(self.truncation, other.truncation)
        else:
            trunc = int(min(self._known_to(), other._known_to()))
        lo = min(self.valuation, other.valuation)
        if lo > trunc:
            return LaurentSeries.zero(trunc) if not exact else LaurentSeries(trunc + 1, (), trunc, exact=True)
        coeffs = []
        for e in range(lo, trunc + 1):
            a = self[e] if e <= self.truncation or self.exact else 0
            b = other[e] if e <= other.truncation or other.exact else 0
            coeffs.append(a + b)
        return LaurentSeries(lo, tuple(coeffs), trunc, exact)

    __radd__ = __add__

    def __sub__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(_exact(other))
        return self + (-other)

    def __rsub__(self, other) -> "LaurentSeries":
        return (-self) + other

    def scale(self, c: Rational) -> "LaurentSeries":
        c = _exact(c)
        return LaurentSeries(self.valuation, tuple(c * x for x in self.coeffs), self.truncation, self.exact)

    def __mul__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        return mul(self, other)

    def __rmul__(self, other) -> "LaurentSeries":
        return self.scale(other)

    def __pow__(self, e: int) -> "LaurentSeries":
        e = int(e)
        if e < 0:
            return invert(self) ** (-e)
        result = LaurentSeries.constant(1)
        base = self
        while e:
            if e & 1:
                result = mul(result, base)
            e >>= 1
            if e:
                base = mul(base, base)
        return result

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by q^k."""
        return LaurentSeries(self.valuation + k, self.coeffs, self.truncation + k, self.exact)

    def substitute(self, m: int) -> "LaurentSeries":
        """Replace q by q^m (m >= 1), e.g. E4(z) -> E4(mz)."""
        if m < 1:
            raise ValueError("m must be positive")
        terms = {m * e: c for e, c in self.items()}
        if self.exact:
            return LaurentSeries.from_dict(terms, m * self.truncation, exact=True)
        return LaurentSeries.from_dict(terms, m * (self.truncation + 1) - 1)

    # serialization

    def to_json(self) -> dict:
        return {
            "valuation": self.valuation,
            "truncation": self.truncation,
            "coeffs": [str(c) for c in self.coeffs],
            "exact": self.exact,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LaurentSeries":
        return cls(
            int(data["valuation"]),
            tuple(_exact(c) for c in data["coeffs"]),
            int(data["truncation"]),
            bool(data.get("exact", False)),
        )

    def __str__(self) -> str:
        parts = []
        for e, c in list(self.items())[:8]:
            mono = "" if e == 0 else ("q" if e == 1 else f"q^{e}")
            if mono and c == 1:
                parts.append(mono)
            elif mono and c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}" if mono else f"{c}")
        body = " + ".join(parts).replace("+ -", "- ") or "0"
        if self.exact:
            return body
        more = " + ..." if len(list(self.items())) > 8 else ""
        return f"{body}{more} + O(q^{self.truncation + 1})"


def mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    """Cauchy product, truncated to what both factors determine."""
    exact = a.exact and b.exact
    val = a.valuation + b.valuation
    if exact:
        trunc = a.truncation + b.truncation
    else:
        trunc = int(min(a.valuation + b._known_to(), b.valuation + a._known_to()))
    if a.is_zero() or b.is_zero():
        return LaurentSeries(trunc + 1, (), trunc, exact)
    n = trunc - val + 1
    if n <= 0:
        return LaurentSeries.zero(trunc)
    A, B = a.coeffs, b.coeffs
    la, lb = len(A), len(B)
    out = [0] * n
    for i in range(min(la, n)):
        x = A[i]
        if not x:
            continue
        stop = min(lb, n - i)
        for j in range(stop):
            y = B[j]
            if y:
                out[i + j] += x * y
    return LaurentSeries(val, tuple(out), trunc, exact)


def invert(a: LaurentSeries) -> LaurentSeries:
    """Multiplicative inverse by long division; relative precision is kept."""
    if a.is_zero() or a.leading_coefficient == 0:
        raise ZeroLeadingCoefficient("cannot invert a series with zero leading coefficient")
    if a.exact and len(a.coeffs) == 1:
        return LaurentSeries.monomial(-a.valuation, Fraction(1) / a.coeffs[0])
    u = a.coeffs
    rel = (a.truncation if not a.exact else a.truncation + 64) - a.valuation
    inv0 = Fraction(1) / u[0] if u[0] not in (1, -1) else u[0]
    b = [0] * (rel + 1)
    b[0] = inv0
    lu = len(u)
    for n in range(1, rel + 1):
        s = 0
        for i in range(1, min(n, lu - 1) + 1):
            if u[i]:
                s += u[i] * b[n - i]
        b[n] = _exact(-s * inv0)
    return LaurentSeries(-a.valuation, tuple(b), -a.valuation + rel)


class SigmaTable:
    """Divisor power sums ``sigma_k(n)`` and odd-divisor sums, sieved up to ``limit``."""

    def __init__(self, limit: int):
        self.limit = int(limit)
        self._full: dict[int, list[int]] = {}
        self._odd: dict[int, list[int]] = {}

    def _sieve(self, k: int, odd_only: bool) -> list[int]:
        table = [0] * (self.limit + 1)
        step = 2 if odd_only else 1
        for d in range(1, self.limit + 1, step):
            dk = d**k
            for m in range(d, self.limit + 1, d):
                table[m] += dk
        return table

    def _check(self, n: int) -> None:
        if not 1 <= n <= self.limit:
            raise ValueError(f"n={n} outside 1..{self.limit}")

    def sigma(self, k: int, n: int) -> int:
        self._check(n)
        if k not in self._full:
            self._full[k] = self._sieve(k, False)
        return self._full[k][n]

    def sigma_odd(self, k: int, n: int) -> int:
        self._check(n)
        if k not in self._odd:
            self._odd[k] = self._sieve(k, True)
        return self._odd[k][n]


@lru_cache(maxsize=8)
def sigma_table(limit: int) -> SigmaTable:
    return SigmaTable(limit)


def _sigma_series(k: int, scale: int, constant: int, precision: int) -> LaurentSeries:
    tab = sigma_table(max(precision, 1))
    coeffs = [constant] + [scale * tab.sigma(k, n) for n in range(1, precision + 1)]
    return LaurentSeries(0, tuple(coeffs), precision)


def euler_product(precision: int) -> LaurentSeries:
    """prod_{n >= 1} (1 - q^n) up to q^precision, by multiplying out the factors."""
    c = [0] * (precision + 1)
    c[0] = 1
    for n in range(1, precision + 1):
        for i in range(precision, n - 1, -1):
            if c[i - n]:
                c[i] -= c[i - n]
    return LaurentSeries(0, tuple(c), precision)


@lru_cache(maxsize=32)
def eta_quotient(level: int, precision: int = DEFAULT_PRECISION) -> LaurentSeries:
    """Hauptmodul (eta(z)/eta(p z))^(24/(p-1)) = q^-1 + O(1) for p in {2, 3}."""
    if level not in (2, 3):
        raise UnsupportedLevel(f"no Hauptmodul implemented for level {level}")
    if precision < 1:
        raise ValueError("precision must be >= 1")
    rel = precision + 1
    e = euler_product(rel)
    e_p = euler_product(rel // level + 1).substitute(level).truncate(rel)
    ratio = (e * invert(e_p)) ** (24 // (level - 1))
    phi = ratio.truncate(rel).shift(-1)
    assert phi.is_integral(), "Hauptmodul coefficients must be integers"
    return phi


def _e2(precision: int) -> LaurentSeries:
    return _sigma_series(1, -24, 1, precision)


def _e4(precision: int) -> LaurentSeries:
    return _sigma_series(3, 240, 1, precision)


def _at_multiple(series_fn, m: int, precision: int) -> LaurentSeries:
    return series_fn(precision // m + 1).substitute(m).truncate(precision)


def _s4_level2(precision: int) -> LaurentSeries:
    s = (_e4(precision) - _at_multiple(_e4, 2, precision)) * Fraction(1, 240)
    assert s.is_integral()
    return s


def _f2_level2(precision: int) -> LaurentSeries:
    f = _at_multiple(_e2, 2, precision) * 2 - _e2(precision)
    assert f.is_integral()
    return f


def _e2_level3(precision: int) -> LaurentSeries:
    f = (_at_multiple(_e2, 3, precision) * 3 - _e2(precision)) * Fraction(1, 2)
    assert f.is_integral()
    return f


def _s4_level3(precision: int) -> LaurentSeries:
    s = (_e4(precision) - _at_multiple(_e4, 3, precision)) * Fraction(1, 240)
    assert s.is_integral()
    return s


_EISENSTEIN = {
    "E2": _e2,
    "E4": _e4,
    "E4_2z": lambda p: _at_multiple(_e4, 2, p),
    "E4_3z": lambda p: _at_multiple(_e4, 3, p),
    "F2_level2": _f2_level2,
    "S4_level2": _s4_level2,
    "E2_level3": _e2_level3,
    "S4_level3": _s4_level3,
}

EISENSTEIN_NAMES = tuple(_EISENSTEIN)


@lru_cache(maxsize=64)
def eisenstein(name: str, precision: int = DEFAULT_PRECISION) -> LaurentSeries:
    """Integral q-expansion of a named Eisenstein-type series up to q^precision.

    ``F2_level2`` is 2E2(2z) - E2(z), ``S4_level2`` is (E4(z) - E4(2z))/240,
    ``E2_level3`` is (3E2(3z) - E2(z))/2 and ``S4_level3`` is
    (E4(z) - E4(3z))/240.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    try:
        fn = _EISENSTEIN[name]
    except KeyError:
        raise ValueError(f"unknown series {name!r}; expected one of {EISENSTEIN_NAMES}") from None
    return fn(precision)


def coefficients(series: LaurentSeries, start: int, stop: int) -> list:
    return series.coefficient_list(start, stop)


def as_polynomial(coeffs: Sequence[Rational], valuation: int = 0) -> LaurentSeries:
    """Exact Laurent polynomial with the given coefficients."""
    return LaurentSeries(valuation, tuple(coeffs), valuation + len(coeffs) - 1, exact=True)
