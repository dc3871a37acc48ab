import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modarc.arczeros import hauptmodul_on_arc
from modarc.errors import NonExactDivision, RootOutOfRange
from modarc.faber import (
    FaberPolynomial,
    RealRoot,
    arc_root_pullback,
    extract,
    isolate_real_roots,
    root_report,
    squarefree_decomposition,
    sturm_sequence,
)
from modarc.forms import BasisElement, build_f2, build_f3, build_g2
from modarc.qseries import LaurentSeries


def test_str_and_call():
    p = FaberPolynomial((24, 0, 1))
    assert str(p) == "x^2 + 24"
    assert p(2) == 28
    assert str(FaberPolynomial((-8, 1))) == "x - 8"
    assert FaberPolynomial((3, 0, 0)).degree == 0


# extraction -------------------------------------------------------------------


@pytest.mark.parametrize("k,n", [(0, 1), (0, 5), (4, 3), (6, 2), (-4, 4), (-2, 5), (12, -1)])
def test_extract_recovers_the_chain_polynomial_f(k, n):
    f = build_f2(k, n, 30)
    assert extract(f) == f.faber


@pytest.mark.parametrize("k,n", [(0, 2), (2, 1), (-4, 3)])
def test_extract_g_family(k, n):
    g = build_g2(k, n, 30)
    assert extract(g) == g.faber


@pytest.mark.parametrize("k,n", [(0, 3), (2, 2), (4, 1), (6, 2)])
def test_extract_level3(k, n):
    f = build_f3(k, n, 30)
    assert extract(f) == f.faber


def test_extract_rejects_a_perturbed_series():
    f = build_f2(0, 2, 20)
    bad = f.series + LaurentSeries.monomial(7, 1)
    fake = BasisElement(f.spec, bad, f.ell, f.kprime, f.faber)
    with pytest.raises(NonExactDivision):
        extract(fake)


# closed forms for low degree -------------------------------------------------------


@pytest.mark.parametrize("ell", range(-8, 9))
def test_degree_one_formulas(ell):
    assert build_f2(4 * ell, 1 - ell, 12).faber.coeffs == (-(8 * ell - 24), 1)
    assert build_f2(4 * ell + 2, 1 - ell, 12).faber.coeffs == (-8 * ell, 1)


@pytest.mark.parametrize("ell", range(-8, 9))
def test_degree_two_formula_and_discriminant(ell):
    f = build_f2(4 * ell, 2 - ell, 12)
    assert f.faber.coeffs == (32 * ell * ell - 188 * ell + 24, 48 - 8 * ell, 1)
    rep = root_report(f.faber)
    complex_pair = len(rep.complex_roots) > 0
    assert complex_pair == (ell < -6 or ell >= 6)


# root isolation ----------------------------------------------------------------------


def test_squarefree_decomposition():
    # (x - 1)^2 (x + 2)^3 x
    poly = np.polynomial.polynomial.polyfromroots([1, 1, -2, -2, -2, 0])
    coeffs = [int(round(c)) for c in poly]
    parts = squarefree_decomposition(coeffs)
    mults = sorted(m for _, m in parts)
    assert mults == [1, 2, 3]
    deg = sum((len(f) - 1) * m for f, m in parts)
    assert deg == 6


def test_sturm_sequence_counts_roots():
    p = [Fraction(c) for c in (-6, 11, -6, 1)]  # (x-1)(x-2)(x-3)
    seq = sturm_sequence(p)
    assert len(seq) >= 3
    roots = isolate_real_roots(p, Fraction(1, 10**6))
    assert len(roots) == 3
    for r, true in zip(roots, (1, 2, 3)):
        assert r.lo <= true <= r.hi and r.hi - r.lo <= Fraction(1, 10**6)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(min_value=-40, max_value=40), min_size=1, max_size=6, unique=True))
def test_isolation_finds_known_integer_roots(roots):
    poly = [1]
    for r in roots:
        poly = [(poly[i - 1] if i else 0) - r * (poly[i] if i < len(poly) else 0) for i in range(len(poly) + 1)]
    found = isolate_real_roots(poly, Fraction(1, 10**6), cuts=(Fraction(-64), Fraction(0)))
    assert len(found) == len(roots)
    for r, true in zip(found, sorted(roots)):
        assert r.lo <= true <= r.hi


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=-30, max_value=30), min_size=2, max_size=7))
def test_root_report_accounts_for_every_root(coeffs):
    coeffs = coeffs[:-1] + [1]
    p = FaberPolynomial(tuple(coeffs))
    rep = root_report(p)
    assert rep.real_roots_in_arc_image + rep.off_arc_count == p.degree
    ref = np.roots(list(reversed(coeffs)))
    real_ref = sorted(z.real for z in ref if abs(z.imag) < 1e-6)
    inside = sum(1 for x in real_ref if -64 + 1e-6 < x < -1e-6)
    # near-boundary numpy roots are ambiguous; only compare clear cases
    if all(abs(x + 64) > 1e-4 and abs(x) > 1e-4 for x in real_ref) and all(
        abs(z.imag) > 1e-4 or abs(z.imag) < 1e-9 for z in ref
    ):
        assert rep.real_roots_in_arc_image == inside


def test_arc_roots_of_f_0_8():
    f = build_f2(0, 8, 20)
    rep = root_report(f.faber)
    assert rep.real_roots_in_arc_image == 8 and rep.off_arc_count == 0
    for r in rep.arc_roots:
        assert -64 <= r.lo and r.hi <= 0 and r.hi - r.lo <= Fraction(1, 10**8)


def test_counterexample_root_off_the_arc():
    f = build_f2(16, -3, 20)
    rep = root_report(f.faber)
    assert f.faber.coeffs == (-8, 1)
    assert rep.real_roots_in_arc_image == 0
    (root,) = rep.off_arc_roots
    assert root.lo <= 8 <= root.hi


def test_trivial_zero_flag_for_weight_two_part():
    assert root_report(build_f2(2, 3, 12).faber).trivial_zeros == ("elliptic/trivial",)
    assert root_report(build_f2(0, 3, 12).faber).trivial_zeros == ()


# pullback to the arc ------------------------------------------------------------------


def test_pullback_of_endpoints_and_interior():
    assert arc_root_pullback(None, -64).theta == pytest.approx(math.pi / 2)
    r = arc_root_pullback(None, Fraction(-10))
    v = hauptmodul_on_arc(r.theta)
    assert abs(float(v.mid()) + 10) < 1e-5
    assert r.width <= 1e-8


def test_pullback_brackets_an_isolated_root():
    f = build_f2(0, 5, 20)
    rep = root_report(f.faber)
    for root in rep.arc_roots:
        ar = arc_root_pullback(f.faber, root)
        lo = hauptmodul_on_arc(ar.theta_lo)
        hi = hauptmodul_on_arc(ar.theta_hi)
        # phi decreases along the arc, so phi(theta_lo) >= root >= phi(theta_hi)
        assert float(lo.upper()) >= float(root.lo) - 1e-12
        assert float(hi.lower()) <= float(root.hi) + 1e-12


def test_pullback_rejects_roots_off_the_arc():
    with pytest.raises(RootOutOfRange):
        arc_root_pullback(None, 8)
    with pytest.raises(RootOutOfRange):
        arc_root_pullback(None, RealRoot(Fraction(-70), Fraction(-69)))


def test_level3_pullback_endpoint():
    assert arc_root_pullback(None, -27, level=3).theta == pytest.approx(2 * math.pi / 3)
