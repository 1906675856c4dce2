# -*- coding: utf-8 -*-
"""测试 Weierstrass 函数计算"""

import math
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from config.presets import FIXTURE_LATTICES
from core.exceptions import InvalidInputError, PoleProximityError
from core.quartic import SolutionParams, r1_coefficients
from core.weierstrass import (
    EllipticInvariants,
    cubic_roots,
    evaluate,
    invariants_from_quartic,
    invariants_printed_reading,
    lattice_from_invariants,
    sigma_zeta,
    wp,
    wp_inverse,
)


def _lattice(name):
    fx = FIXTURE_LATTICES[name]
    return lattice_from_invariants(EllipticInvariants(fx["g2"], fx["g3"]))


@pytest.mark.parametrize("name", ["lemniscatic_unit", "lemniscatic_four"])
def test_lemniscatic_half_period(name):
    lat = _lattice(name)
    assert lat.omega == pytest.approx(FIXTURE_LATTICES[name]["omega"], rel=1e-12)


def test_cubic_roots_sum_to_zero():
    roots = cubic_roots(-0.64, -1.4784)
    assert abs(sum(roots)) < 1e-12
    for e in roots:
        assert abs(4 * e**3 + 0.64 * e + 1.4784) < 1e-10


def test_appendix_invariants():
    q1 = r1_coefficients(SolutionParams(a=-1.0, c1=-2.0, c2=0.4, c3=0.13))
    inv = invariants_from_quartic(q1)
    assert inv.g2 == pytest.approx(-0.64, abs=1e-12)
    assert inv.g3 == pytest.approx(-1.4784, abs=1e-12)
    assert inv.delta < 0

    printed = invariants_printed_reading(q1)
    assert printed.g2 == pytest.approx(3 * 1.6**2 - 4 * 8 * (-1.6), abs=1e-12)
    assert printed.g3 == pytest.approx(inv.g3)


def test_non_finite_invariants_rejected():
    with pytest.raises(InvalidInputError):
        EllipticInvariants(math.nan, 0.0)


@settings(max_examples=60, deadline=None)
@given(
    x=st.floats(min_value=0.05, max_value=3.5),
    y=st.floats(min_value=-0.8, max_value=0.8),
    name=st.sampled_from(["lemniscatic_unit", "lemniscatic_four"]),
)
def test_differential_equation(x, y, name):
    lat = _lattice(name)
    z = complex(x, y)
    nearest_real = 2 * lat.omega * round(x / (2 * lat.omega))
    if abs(z - nearest_real) < 0.05:
        return
    p, dp = wp(z, lat)
    lhs = dp * dp
    rhs = 4 * p**3 - lat.g2 * p - lat.g3
    assert abs(lhs - rhs) <= 1e-8 * (1 + abs(lhs) + abs(4 * p**3))


@pytest.mark.parametrize("name", ["lemniscatic_unit", "lemniscatic_four"])
def test_periodicity_and_evenness(name):
    lat = _lattice(name)
    z = np.array([0.3, 0.7 + 0.2j, 1.1 - 0.4j])
    p, _ = wp(z, lat)
    p_shift, _ = wp(z + 2 * lat.omega, lat)
    p_neg, _ = wp(-z, lat)
    np.testing.assert_allclose(p_shift, p, rtol=1e-10)
    np.testing.assert_allclose(p_neg, p, rtol=1e-10)


def test_laurent_behaviour_near_origin():
    lat = _lattice("lemniscatic_unit")
    z = 1e-3
    p, _ = wp(z, lat)
    assert p.real == pytest.approx(1 / z**2 + lat.g2 * z**2 / 20, rel=1e-12)


def test_half_period_value_is_e1():
    lat = _lattice("lemniscatic_four")
    p, dp = wp(lat.omega, lat)
    assert p.real == pytest.approx(lat.e1, rel=1e-10)
    assert abs(dp) < 1e-8


def test_zeta_derivative_is_minus_wp():
    lat = _lattice("lemniscatic_unit")
    z, h = 0.6 + 0.1j, 1e-5
    _, zp = sigma_zeta(z + h, lat)
    _, zm = sigma_zeta(z - h, lat)
    p, _ = wp(z, lat)
    assert (zp - zm) / (2 * h) == pytest.approx(-p, rel=1e-7)


def test_sigma_odd():
    lat = _lattice("lemniscatic_four")
    s, _ = sigma_zeta(0.4 + 0.3j, lat)
    s_neg, _ = sigma_zeta(-0.4 - 0.3j, lat)
    assert s_neg == pytest.approx(-s, rel=1e-10)


def test_pole_proximity_error():
    lat = _lattice("lemniscatic_unit")
    with pytest.raises(PoleProximityError) as exc:
        wp(2 * lat.omega + 1e-12, lat)
    assert exc.value.nearest == pytest.approx(2 * lat.omega)


@pytest.mark.parametrize("w", [2.0, 0.75, -0.3, 1.5 + 0.5j])
def test_inverse_round_trip(w):
    lat = _lattice("lemniscatic_unit")
    v = wp_inverse(w, lat)
    p, _ = wp(v, lat)
    assert abs(p - w) <= 1e-9 * (1 + abs(w))
    assert v.real >= 0


def test_inverse_appendix_lattice():
    q1 = r1_coefficients(SolutionParams(a=-1.0, c1=-2.0, c2=0.4, c3=0.13))
    lat = lattice_from_invariants(invariants_from_quartic(q1))
    target = q1.gamma / 2
    v = wp_inverse(target, lat)
    p, _ = wp(v, lat)
    assert abs(p - target) <= 1e-9


def test_degenerate_solitary_lattice():
    lat = _lattice("degenerate_sinh")
    assert lat.is_degenerate
    assert math.isinf(lat.omega)
    z = 0.37
    p, _ = wp(z, lat)
    c = 1.0
    expected = c + 3 * c / math.sinh(math.sqrt(3 * c) * z) ** 2
    assert p.real == pytest.approx(expected, rel=1e-10)


# ─── 一般不变量与近退化格点 ──────────────────────────────

# g2 = 12c², g3 = −8c³(1+ε)：二重根 c 被 ε 拆开，Δ ≈ −3456c⁶ε
NEAR_DEGENERATE = [
    (12.0, -8.00000001),
    (1.08, -0.2160000001),
    (3.0, -1.0000000001),
    (48.0, -64.00000001),
]


def _near_degenerate(c, eps):
    return EllipticInvariants(12.0 * c * c, -8.0 * c**3 * (1.0 + eps))


invariant_values = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@st.composite
def general_invariants(draw):
    g2 = draw(invariant_values)
    g3 = draw(invariant_values)
    inv = EllipticInvariants(g2, g3)
    assume(abs(inv.delta) > 1e-9 * max(1.0, abs(g2) ** 3))
    return inv


@st.composite
def near_degenerate_invariants(draw):
    c = draw(st.floats(min_value=0.2, max_value=2.0)) * draw(st.sampled_from([1.0, -1.0]))
    eps = draw(st.floats(min_value=1e-11, max_value=1e-6)) * draw(st.sampled_from([1.0, -1.0]))
    inv = _near_degenerate(c, eps)
    assume(not inv.is_degenerate())
    return inv


any_invariants = st.one_of(general_invariants(), near_degenerate_invariants())


@pytest.mark.parametrize("g2,g3", NEAR_DEGENERATE)
def test_near_degenerate_lattice_builds(g2, g3):
    lat = lattice_from_invariants(EllipticInvariants(g2, g3))
    assert lat.invariants.delta < 0
    assert not lat.is_degenerate
    p, _ = wp(lat.omega, lat)
    assert abs(p - lat.e1) <= 1e-8 * (1 + max(abs(e) for e in lat.e_roots))


@pytest.mark.parametrize("g2,g3", NEAR_DEGENERATE)
@pytest.mark.parametrize("z", [0.3 + 0.2j, 1.1, -0.7 + 0.05j])
def test_near_degenerate_zeta_quasi_period(g2, g3, z):
    lat = lattice_from_invariants(EllipticInvariants(g2, g3))
    period = 2 * lat.omega
    _, zeta = sigma_zeta(z, lat)
    _, zeta_shift = sigma_zeta(z + period, lat)
    assert abs(zeta_shift - zeta - 2 * lat.eta) <= 1e-8 * (1 + abs(2 * lat.eta))


@settings(max_examples=80, deadline=None)
@given(
    inv=any_invariants,
    u=st.floats(min_value=0.1, max_value=0.9),
    v=st.floats(min_value=0.1, max_value=0.9),
)
def test_differential_equation_general_invariants(inv, u, v):
    lat = lattice_from_invariants(inv)
    b1, b2 = lat.cell
    z = u * b1 + v * b2
    p, dp = wp(z, lat)
    lhs = dp * dp
    rhs = 4 * p**3 - lat.g2 * p - lat.g3
    scale = abs(lhs) + 4 * abs(p) ** 3 + abs(lat.g2 * p) + abs(lat.g3)
    assert abs(lhs - rhs) <= 1e-8 * scale


@settings(max_examples=60, deadline=None)
@given(inv=any_invariants, x=st.floats(min_value=0.1, max_value=0.9))
def test_wp_real_on_real_axis(inv, x):
    lat = lattice_from_invariants(inv)
    p, _ = wp(x * lat.omega, lat)
    assert abs(p.imag) <= 1e-9 * (1 + abs(p))


@settings(max_examples=60, deadline=None)
@given(
    inv=any_invariants,
    x=st.floats(min_value=0.1, max_value=0.9),
    y=st.floats(min_value=-0.3, max_value=0.3),
)
def test_zeta_and_sigma_quasi_periodicity(inv, x, y):
    lat = lattice_from_invariants(inv)
    w = lat.omega
    z = complex(x * w, y * abs(lat.cell[0]))
    shift = 2 * w
    vals = evaluate(z, lat)
    moved = evaluate(z + shift, lat)
    two_eta = 2 * lat.eta
    assert abs(moved.zeta - vals.zeta - two_eta) <= 1e-8 * (1 + abs(two_eta))
    # σ(z + 2ω) = −exp(2η(z + ω)) σ(z)
    growth = (two_eta * (z + w)).real
    assert abs((moved.log_sigma - vals.log_sigma).real - growth) <= 1e-8 * (1 + abs(growth))


@settings(max_examples=60, deadline=None)
@given(z=st.floats(min_value=0.1, max_value=3.0))
def test_degenerate_sinh_identity(z):
    lat = _lattice("degenerate_sinh")
    p, _ = wp(z, lat)
    expected = 1.0 + 3.0 / math.sinh(math.sqrt(3.0) * z) ** 2
    assert p.real == pytest.approx(expected, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(
    c=st.floats(min_value=0.3, max_value=2.0),
    eps=st.floats(min_value=1e-10, max_value=1e-9),
    sign=st.sampled_from([1.0, -1.0]),
    t=st.floats(min_value=0.1, max_value=1.5),
)
def test_near_degenerate_approaches_sinh_form(c, eps, sign, t):
    lat = lattice_from_invariants(_near_degenerate(c, sign * eps))
    z = t / math.sqrt(c)
    p, _ = wp(z, lat)
    expected = c + 3.0 * c / math.sinh(math.sqrt(3.0 * c) * z) ** 2
    assert p.real == pytest.approx(expected, rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(
    inv=any_invariants,
    u=st.floats(min_value=0.1, max_value=0.4),
    v=st.floats(min_value=0.1, max_value=0.4),
)
def test_duplication_consistency(inv, u, v):
    """℘(2w) = −2℘(w) + (℘″(w) / 2℘′(w))²，℘″ = 6℘² − g2/2"""
    lat = lattice_from_invariants(inv)
    b1, b2 = lat.cell
    w = u * b1 + v * b2
    p_half, dp_half = wp(w, lat)
    p, _ = wp(2 * w, lat)
    ddp = 6 * p_half**2 - lat.g2 / 2
    square = (ddp / (2 * dp_half)) ** 2
    doubled = -2 * p_half + square
    assert abs(p - doubled) <= 1e-10 * (1 + abs(p) + 2 * abs(p_half) + abs(square))
