# -*- coding: utf-8 -*-
"""测试 h(z)、φ(z)、f(t,z) 与 Ψ 的闭式解"""

import math
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from config.presets import APPENDIX_PARAMS
from core.exceptions import ConstraintViolationError, InvalidInputError
from core.quartic import SolutionParams
from core.solution_family import (
    SampledField,
    build_f_solution,
    build_h_solution,
    build_phi_solution,
    f_with_derivative,
    h_eval,
    h_with_derivative,
    periods,
    phi_eval,
    phi_eval_printed,
    psi_eval,
    psi_field,
    uniform_grid,
)

APPENDIX = SolutionParams(**APPENDIX_PARAMS)


@pytest.fixture(scope="module")
def appendix():
    hs = build_h_solution(APPENDIX)
    return hs, build_phi_solution(hs), build_f_solution(hs)


def test_appendix_form_and_period(appendix):
    hs, _, _ = appendix
    assert hs.form == "zero-root"
    assert 4.5 < hs.Lz < 5.1


def test_appendix_h_profile(appendix):
    hs, _, _ = appendix
    z = np.linspace(0.0, hs.Lz, 257)
    h, hz = h_with_derivative(z, hs)
    assert h[0] == pytest.approx(0.0, abs=1e-14)
    assert np.all(h >= -1e-12)
    # maximum is the positive root of R1 at half a period
    assert h[128] == pytest.approx(h.max(), rel=1e-10)
    assert 1.6 < h.max() < 1.7
    np.testing.assert_allclose(hz * hz, hs.q1.evaluate(h), atol=1e-9)


def test_h_is_periodic(appendix):
    hs, _, _ = appendix
    z = np.linspace(0.1, 1.3, 7)
    np.testing.assert_allclose(h_eval(z + hs.Lz, hs), h_eval(z, hs), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("h0", [0.3, 0.5, 1.2])
def test_general_form_initial_values(h0):
    hs = build_h_solution(APPENDIX.with_updates(h0=h0))
    assert hs.form == "general"
    h, hz = h_with_derivative(0.0, hs)
    assert h == pytest.approx(h0, rel=1e-10)
    assert hz == pytest.approx(-math.sqrt(hs.q1.evaluate(h0)), rel=1e-8)
    z = np.linspace(0.05, 2 * hs.Lz, 101)
    h, hz = h_with_derivative(z, hs)
    np.testing.assert_allclose(hz * hz, hs.q1.evaluate(h), atol=1e-8)


def test_simple_root_form(appendix):
    hs0, _, _ = appendix
    top = float(h_eval(0.5 * hs0.Lz, hs0))
    hs = build_h_solution(APPENDIX.with_updates(h0=top))
    assert hs.form == "simple-root"
    h, hz = h_with_derivative(0.0, hs)
    assert h == pytest.approx(top, rel=1e-9)
    assert abs(hz) < 1e-4
    z = np.linspace(0.0, hs.Lz, 65)
    assert np.all(h_eval(z, hs) <= top * (1 + 1e-9))


def test_h0_outside_positivity_interval():
    with pytest.raises(ConstraintViolationError):
        build_h_solution(APPENDIX.with_updates(h0=2.0))


def test_phase_starts_at_phi0():
    hs = build_h_solution(APPENDIX.with_updates(phi0=0.7))
    ps = build_phi_solution(hs)
    assert phi_eval(0.0, ps, hs) == pytest.approx(0.7, abs=1e-12)


@pytest.mark.parametrize("h0", [0.0, 0.5])
def test_phase_derivative(h0):
    hs = build_h_solution(APPENDIX.with_updates(h0=h0))
    ps = build_phi_solution(hs)
    z = np.array([0.3, 1.1, 2.9, 4.4, 7.3])
    step = 1e-5
    dphi = (phi_eval(z + step, ps, hs) - phi_eval(z - step, ps, hs)) / (2 * step)
    expected = APPENDIX.c1 - 2 * APPENDIX.a * h_eval(z, hs)
    np.testing.assert_allclose(dphi, expected, atol=1e-6)


def test_phase_continuous_over_periods(appendix):
    hs, ps, _ = appendix
    z = np.linspace(0.0, 3 * hs.Lz, 3001)
    phi = phi_eval(z, ps, hs)
    assert np.max(np.abs(np.diff(phi))) < 0.05


def test_printed_phase_differs(appendix):
    hs, ps, _ = appendix
    z = np.linspace(0.5, hs.Lz, 20)
    printed = phi_eval_printed(z, ps, hs)
    assert np.max(np.abs(printed - phi_eval(z, ps, hs))) > 1e-3


def test_printed_phase_needs_zero_h0():
    hs = build_h_solution(APPENDIX.with_updates(h0=0.5))
    ps = build_phi_solution(hs)
    with pytest.raises(InvalidInputError):
        phi_eval_printed(1.0, ps, hs)


def test_f_initial_value_and_equation(appendix):
    hs, _, fs = appendix
    z = 0.25 * hs.Lz
    sl = fs.at(z)
    assert sl.kernel is not None
    f, ft = f_with_derivative(0.0, z, fs)
    assert f == pytest.approx(APPENDIX.f0, abs=1e-12)
    assert ft == pytest.approx(-math.sqrt(sl.r2_at_f0), rel=1e-8)

    t = np.linspace(-0.3 * sl.Lt, 0.3 * sl.Lt, 41)
    f, ft = f_with_derivative(t, z, fs, strict=False)
    ok = np.isfinite(f) & (np.abs(f) < 1e3)
    res = ft[ok] ** 2 - sl.q2.evaluate(f[ok])
    assert np.max(np.abs(res) / (1 + ft[ok] ** 2)) < 1e-6


def test_f_inadmissible_slice(appendix):
    hs, _, fs = appendix
    # R2(0, z) < 0 only in a narrow window around the maximum of h
    z = 0.5 * hs.Lz
    assert fs.at(z).kernel is None
    with pytest.raises(ConstraintViolationError):
        f_with_derivative(0.0, z, fs)
    f, _ = f_with_derivative(np.array([0.0, 0.1]), z, fs, strict=False)
    assert np.all(np.isnan(f))


def test_slice_cache_is_bounded(appendix):
    """z 切片缓存按最近使用淘汰，长度不超过上限"""
    hs, _, _ = appendix
    fs = build_f_solution(hs)
    fs.cache_size = 4
    zs = [0.1 * k * hs.Lz for k in range(1, 7)]
    first = fs.at(zs[0])
    for z in zs[1:4]:
        fs.at(z)
    assert fs.at(zs[0]) is first
    for z in zs[4:]:
        fs.at(z)
    assert len(fs.cache) == 4
    assert zs[0] in fs.cache
    assert zs[1] not in fs.cache and zs[2] not in fs.cache
    assert list(fs.cache)[-1] == zs[-1]


def test_periods(appendix):
    hs, _, _ = appendix
    lz, lt = periods(hs)
    assert lz == hs.Lz and lt is None
    _, lt = periods(hs, 0.25 * hs.Lz)
    assert lt > 0


def test_psi_intensity(appendix):
    hs, ps, fs = appendix
    z = 0.25 * hs.Lz
    t = np.linspace(-0.05, 0.05, 5)
    psi, intensity = psi_eval(t, z, hs, ps, fs)
    np.testing.assert_allclose(np.abs(psi) ** 2, intensity, rtol=1e-12)
    f, _ = f_with_derivative(t, z, fs)
    np.testing.assert_allclose(intensity, f**2 + h_eval(z, hs), rtol=1e-12)


def test_psi_field_carries_phase(appendix):
    hs, ps, fs = appendix
    t = np.linspace(-0.05, 0.05, 9)
    z = np.linspace(0.2 * hs.Lz, 0.3 * hs.Lz, 5)
    psi, intensity = psi_field(t, z, hs, ps, fs, meta={"f0": 0.0})
    assert psi.is_complex and not intensity.is_complex
    np.testing.assert_allclose(psi.phase, phi_eval(z, ps, hs))
    assert intensity.meta["quantity"] == "intensity"


def test_sampled_field_validation():
    with pytest.raises(InvalidInputError):
        SampledField(np.linspace(0, 1, 4), np.linspace(0, 1, 3), np.zeros((4, 3)))
    with pytest.raises(InvalidInputError):
        SampledField(np.array([0.0, 0.1, 0.5]), np.linspace(0, 1, 2), np.zeros((2, 3)))
    field = SampledField(np.linspace(0, 1, 5), np.linspace(0, 2, 3), np.zeros((3, 5)))
    assert field.dt == pytest.approx(0.25)
    assert field.dz == pytest.approx(1.0)


def test_uniform_grid_rejects_bad_bounds():
    with pytest.raises(InvalidInputError):
        uniform_grid(1.0, 0.0, 10)
    with pytest.raises(InvalidInputError):
        uniform_grid(0.0, math.inf, 10)
