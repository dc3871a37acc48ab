from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from modarc.errors import UnsupportedLevel, ZeroLeadingCoefficient
from modarc.qseries import (
    LaurentSeries,
    SigmaTable,
    eisenstein,
    eta_quotient,
    invert,
)


def coeffs(series, lo, hi):
    return [series[e] for e in range(lo, hi + 1)]


# construction and basic arithmetic -------------------------------------------


def test_leading_zeros_are_stripped():
    s = LaurentSeries(-2, (0, 0, 3, 4), truncation=5)
    assert s.valuation == 0
    assert s[0] == 3 and s[1] == 4 and s[5] == 0


def test_zero_series_has_valuation_past_truncation():
    z = LaurentSeries.zero(7)
    assert z.is_zero()
    assert z.valuation == 8


def test_indexing_past_truncation_raises():
    s = LaurentSeries(0, (1, 2), truncation=3)
    with pytest.raises(IndexError):
        s[4]
    assert LaurentSeries.constant(5)[100] == 0


def test_truncated_product_knows_its_precision():
    a = LaurentSeries(-1, (1, 1), truncation=4)
    b = LaurentSeries(0, (1, 1), truncation=4)
    # a is known through q^4 and starts at q^-1, so a*b is known through q^3
    assert (a * b).truncation == 3


def test_invert_of_unit_leading_coefficient():
    a = LaurentSeries(0, (1, -1), truncation=10)
    inv = invert(a)
    assert coeffs(inv, 0, 10) == [1] * 11


def test_invert_zero_raises():
    with pytest.raises(ZeroLeadingCoefficient):
        invert(LaurentSeries.zero(5))


def test_fractional_coefficients_stay_exact():
    a = LaurentSeries(0, (2, 1), truncation=6)
    inv = invert(a)
    assert inv[0] == Fraction(1, 2)
    assert inv[1] == Fraction(-1, 4)
    assert not inv.is_integral()


def test_substitute_scales_exponents():
    s = LaurentSeries(-1, (1, 2, 3), truncation=1)
    t = s.substitute(2)
    assert t[-2] == 1 and t[0] == 2 and t[2] == 3 and t[1] == 0


def test_json_round_trip():
    s = eta_quotient(2, 30)
    assert LaurentSeries.from_json(s.to_json()) == s


def test_str_mentions_truncation():
    s = LaurentSeries(0, (1, 8), truncation=3)
    assert str(s).endswith("O(q^4)")


# hypothesis: ring laws on random truncated series ----------------------------

small_ints = st.integers(min_value=-50, max_value=50)


@st.composite
def series(draw, unit=False):
    v = draw(st.integers(min_value=-3, max_value=3))
    body = draw(st.lists(small_ints, min_size=1, max_size=8))
    if unit:
        body[0] = draw(st.sampled_from([1, -1]))
    elif body[0] == 0:
        body[0] = 1
    return LaurentSeries(v, tuple(body), truncation=v + 10)


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_multiplication_is_associative_and_commutative(a, b, c):
    assert (a * b).agrees(b * a)
    assert ((a * b) * c).agrees(a * (b * c))


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_distributive(a, b, c):
    assert (a * (b + c)).agrees(a * b + a * c)


@settings(max_examples=60, deadline=None)
@given(series(unit=True))
def test_inverse_times_series_is_one(a):
    prod = a * invert(a)
    assert prod.agrees(LaurentSeries.constant(1), upto=prod.truncation)


@settings(max_examples=40, deadline=None)
@given(series(), st.integers(min_value=0, max_value=4))
def test_power_matches_repeated_product(a, e):
    acc = LaurentSeries.constant(1)
    for _ in range(e):
        acc = acc * a
    assert (a**e).agrees(acc)


# divisor sums -------------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=1, max_value=400), st.integers(min_value=0, max_value=5))
def test_sigma_table_matches_trial_division(n, k):
    tab = SigmaTable(400)
    assert tab.sigma(k, n) == oracles.sigma(k, n)
    assert tab.sigma_odd(k, n) == oracles.sigma_odd(k, n)


# named series against brute force -----------------------------------------------


def test_hauptmodul_level2_matches_eta_product():
    phi = eta_quotient(2, 60)
    ref = oracles.hauptmodul_level2(60)
    assert coeffs(phi, -1, 60) == [ref[e] for e in range(-1, 61)]
    assert coeffs(phi, -1, 2) == [1, -24, 276, -2048]


def test_hauptmodul_level3_matches_eta_product():
    phi = eta_quotient(3, 50)
    ref = oracles.hauptmodul_level3(50)
    assert coeffs(phi, -1, 50) == [ref[e] for e in range(-1, 51)]
    assert all(isinstance(c, int) for _, c in phi.items())


def test_s4_from_divisor_sums_and_from_eta():
    s4 = eisenstein("S4_level2", 60)
    assert coeffs(s4, 0, 60) == oracles.s4_level2(60) == oracles.s4_eta(60)
    assert coeffs(s4, 1, 3) == [1, 8, 28]


def test_f2_and_e4_2z():
    assert coeffs(eisenstein("F2_level2", 40), 0, 40) == oracles.f2_level2(40)
    assert coeffs(eisenstein("E4_2z", 40), 0, 40) == oracles.e4(40, 2)
    assert coeffs(eisenstein("F2_level2", 5), 0, 4) == [1, 24, 24, 96, 24]


def test_level3_weight2_series_is_cubic_theta_squared():
    e2 = eisenstein("E2_level3", 40)
    a = oracles.cubic_theta(40)
    assert coeffs(e2, 0, 40) == oracles.mul(a, a, 40)


def test_unknown_names_and_levels():
    with pytest.raises(ValueError):
        eisenstein("E6_level7", 10)
    with pytest.raises(UnsupportedLevel):
        eta_quotient(5, 10)


# exact identities -------------------------------------------------------------


def test_j_from_hauptmodul():
    phi = eta_quotient(2, 40)
    j = (phi + 256) ** 3 * invert(phi**2)
    ref = oracles.j_invariant(30)
    assert coeffs(j, -1, 30) == [ref[e] for e in range(-1, 31)]


def test_second_identity_gives_j_at_2z():
    phi = eta_quotient(2, 70)
    j2 = (phi + 16) ** 3 * invert(phi)
    ref = oracles.j_invariant(30)
    # (phi + 16)^3 / phi = j(2z): its q^(2m) coefficient is the q^m coefficient of j
    assert j2[-2] == 1
    for e in range(-2, 61):
        expected = ref.get(e // 2, 0) if e % 2 == 0 else 0
        assert j2[e] == expected


def test_phi_times_s4_identity():
    phi = eta_quotient(2, 60)
    s4 = eisenstein("S4_level2", 60)
    lhs = phi * s4
    rhs = eisenstein("E4_2z", 60) - 16 * s4
    assert lhs.agrees(rhs, upto=lhs.truncation)
