import csv
import io
import json
import math

import pytest
from flint import acb, arb, ctx
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from modarc.arczeros import (
    ArcPoint,
    count_arc_zeros,
    evaluate_series,
    guaranteed_floor,
    hauptmodul_on_arc,
    level3_theta_range,
    normalized_restriction,
    predictor,
)
from modarc.errors import TailBoundUnavailable
from modarc.forms import build_f2, build_f3
from modarc.qseries import eta_quotient
from modarc.rigor.tails import tail_bound


def eta_oracle_value(k, n, theta, faber):
    """e^{ik theta/2} e^{-pi n sin theta} f(z) from modular_eta and direct q-sums."""
    with ctx.workprec(200):
        th = arb(theta)
        z = acb(-0.5) + acb(th.cos(), th.sin()) / 2
        phi = (acb.modular_eta(z) / acb.modular_eta(2 * z)) ** 24
        s4 = acb.modular_eta(2 * z) ** 16 / acb.modular_eta(z) ** 8
        ell, kprime = divmod(k, 4)
        base = s4**ell
        if kprime == 2:
            q = (2 * acb.pi() * acb(0, 1) * z).exp()
            base *= 1 + 24 * sum((oracles.sigma_odd(1, m) * q**m for m in range(1, 300)), acb(0))
        F = acb(0)
        for c in reversed(faber.coeffs):
            F = F * phi + c
        return (acb(0, k * th / 2)).exp() * (-arb.pi() * n * th.sin()).exp() * base * F


# Hauptmodul on the arc ------------------------------------------------------------


def test_hauptmodul_at_the_ends_of_the_arc():
    assert abs(float(hauptmodul_on_arc(math.pi / 2).mid()) + 64) < 1e-12
    v = hauptmodul_on_arc(math.pi / 6)
    assert abs(float(v.mid()) + 0.0331400933) < 1e-9
    assert abs(float(hauptmodul_on_arc(2 * math.pi / 3, level=3).mid()) + 27) < 1e-12


@pytest.mark.parametrize("theta", [0.3, 0.6, 1.0, 1.4])
def test_hauptmodul_matches_modular_eta(theta):
    with ctx.workprec(200):
        z = acb(-0.5) + acb(arb(theta).cos(), arb(theta).sin()) / 2
        ref = (acb.modular_eta(z) / acb.modular_eta(2 * z)) ** 24
        v = hauptmodul_on_arc(theta, prec=200)
        assert abs(float(ref.imag.mid())) < 1e-30
        assert abs(float(ref.real.mid() - v.mid())) <= 1e-25 * max(1, abs(float(v.mid())))


def test_level3_hauptmodul_matches_modular_eta():
    theta = 1.2
    with ctx.workprec(200):
        z = acb(-1 / arb(3)) + acb(arb(theta).cos(), arb(theta).sin()) / 3
        ref = (acb.modular_eta(z) / acb.modular_eta(3 * z)) ** 12
        v = hauptmodul_on_arc(theta, level=3, prec=200)
        assert abs(float(ref.real.mid() - v.mid())) < 1e-25 * abs(float(v.mid()))


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.55, max_value=1.55))
def test_hauptmodul_is_real_negative_and_decreasing(theta):
    a = hauptmodul_on_arc(theta)
    b = hauptmodul_on_arc(theta + 0.01)
    assert a < 0 and b < a


# normalized restriction --------------------------------------------------------


@pytest.mark.parametrize("k,n", [(0, 3), (4, 5), (2, 4), (-4, 6), (6, 2), (8, 3)])
@pytest.mark.parametrize("theta", [0.55, 1.0, 1.5])
def test_fricke_route_matches_eta_oracle(k, n, theta):
    f = build_f2(k, n, 20)
    ours = normalized_restriction(f, theta)
    ref = eta_oracle_value(k, n, theta, f.faber)
    scale = max(1.0, abs(float(ref.real.mid())))
    assert abs(float(ref.imag.mid())) < 1e-20 * scale
    assert abs(float(ours.mid() - ref.real.mid())) < 1e-20 * scale


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=-3, max_value=4),
    st.sampled_from([0, 2]),
    st.integers(min_value=0, max_value=6),
    st.floats(min_value=math.nextafter(math.pi / 6, 1), max_value=math.pi / 2),
)
def test_series_route_is_real_and_agrees(ell, kprime, shift, theta):
    k = 4 * ell + kprime
    n = -ell + shift
    f = build_f2(k, n, 20)
    a = normalized_restriction(f, theta, method="series")  # raises RealnessViolation if not real
    b = normalized_restriction(f, theta)
    assert a.rad() < 1e-5 * max(1.0, abs(float(a.mid())))
    assert a.overlaps(b)


def test_series_route_refuses_theta_below_pi_over_6():
    with pytest.raises(TailBoundUnavailable):
        normalized_restriction(build_f2(0, 2, 10), 0.4, method="series")
    # the float nearest pi/6 lies below it
    with pytest.raises(TailBoundUnavailable):
        normalized_restriction(build_f2(0, 2, 10), math.pi / 6, method="series")


def test_evaluate_series_at_a_point():
    z = ArcPoint(1.2).z
    phi = eta_quotient(2, 200)
    with pytest.raises(TailBoundUnavailable):
        evaluate_series(phi, z)
    v = evaluate_series(phi, z, tail_bound("phi_level2", 50, "arc"))
    direct = hauptmodul_on_arc(1.2)
    assert abs(float(v.real.mid() - direct.mid())) < 1e-12
    assert v.real.rad() < 1e-5


# predictor and floor ------------------------------------------------------------


def test_predictor_values():
    assert predictor(0, 0, 1.0) == pytest.approx(2.0)
    assert predictor(0, 1, math.pi / 2) == pytest.approx(-2.0)
    assert predictor(4, 3, 1.1) == pytest.approx(-2 * math.cos(2 * 1.1 - 3 * math.pi * math.cos(1.1)))


@pytest.mark.parametrize("k,n,floor", [(0, 8, 6), (0, 12, 10), (0, 20, 17), (4, 22, 19), (-4, 23, 19), (2, 9, 8), (0, 0, 0)])
def test_guaranteed_floor(k, n, floor):
    assert guaranteed_floor(k, n) == floor


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=-40, max_value=40), st.integers(min_value=0, max_value=400))
def test_floor_is_exact(half_k, n):
    k = 2 * half_k
    m = guaranteed_floor(k, n)
    # m <= sqrt(3)/2 n + k/6 < m + 1, i.e. 6m - k <= 3 sqrt(3) n < 6m + 6 - k, checked in integers
    lhs = 6 * m - k
    assert lhs <= 0 or lhs * lhs <= 27 * n * n
    nxt = lhs + 6
    assert nxt > 0 and nxt * nxt > 27 * n * n


# counting -------------------------------------------------------------------------


def test_count_for_f_0_8():
    prof = count_arc_zeros(build_f2(0, 8, 20))
    assert prof.sign_changes >= prof.guaranteed_floor == 6
    assert prof.sign_changes <= prof.valence_count == 8
    assert prof.max_predictor_gap < 2


def test_count_for_trivial_cases():
    assert count_arc_zeros(build_f2(0, 0, 10), grid_size=256).sign_changes == 0
    prof = count_arc_zeros(build_f2(16, -3, 10), grid_size=256)
    assert prof.sign_changes == 0 and prof.valence_count == 1


def test_samples_below_pi_over_6_are_not_counted():
    prof = count_arc_zeros(build_f2(0, 6, 20), theta_range=(0.3, math.pi / 2), grid_size=1024)
    flags = {s.flag for s in prof.samples if s.theta < math.pi / 6 - 1e-9}
    assert flags == {"uncounted"}
    inside = count_arc_zeros(build_f2(0, 6, 20), grid_size=1024)
    assert prof.sign_changes == inside.sign_changes


def test_weight_two_part_flags_the_elliptic_point():
    prof = count_arc_zeros(build_f2(2, 5, 20), grid_size=512)
    assert prof.samples[-1].flag == "elliptic/trivial"


def test_outputs():
    prof = count_arc_zeros(build_f2(0, 4, 20), grid_size=128)
    summary = json.loads(prof.to_json())
    assert summary["schemaVersion"] == 1
    assert {"signChanges", "guaranteedFloor", "valenceCount"} <= set(summary)
    rows = list(csv.reader(io.StringIO(prof.to_csv())))
    assert rows[0] == ["theta", "value", "radius", "predictor"]
    assert len(rows) == 129


def test_grid_too_small():
    with pytest.raises(ValueError):
        count_arc_zeros(build_f2(0, 20, 20), grid_size=20)


# level 3 ------------------------------------------------------------------------


def test_level3_range_from_height():
    lo, hi = level3_theta_range(0.15)
    assert math.sin(lo) / 3 == pytest.approx(0.15)
    assert hi == pytest.approx(2 * math.pi / 3)
    with pytest.raises(ValueError):
        level3_theta_range(0.4)


def test_level3_profile_metadata_and_realness():
    prof = count_arc_zeros(build_f3(0, 10, 20), grid_size=1024)
    meta = prof.metadata
    assert meta["contourHeight"] == 0.15
    assert meta["admissibleThetaRange"] == list(level3_theta_range(0.15))
    assert meta["asymptoticReference"] == pytest.approx(9.618)
    assert prof.guaranteed_floor is None
    assert prof.max_predictor_gap < 2
    assert prof.sign_changes >= 9
