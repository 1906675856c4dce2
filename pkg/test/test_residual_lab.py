# -*- coding: utf-8 -*-
"""测试残差计算与独立校验（ODE 积分、求积周期）"""

import math
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from analyzers.residual_lab import (
    ode_oracle,
    period_quadrature,
    residual_cnlse,
    residual_f,
    residual_h,
    residual_phase,
    residual_riccati,
)
from config.presets import APPENDIX_PARAMS
from core.exceptions import InvalidInputError, ResolutionError
from core.quartic import SolutionParams
from core.solution_family import (
    SampledField,
    build_f_solution,
    build_h_solution,
    build_phi_solution,
    h_eval,
    psi_field,
)

APPENDIX = SolutionParams(**APPENDIX_PARAMS)


@pytest.fixture(scope="module")
def appendix():
    hs = build_h_solution(APPENDIX)
    return hs, build_phi_solution(hs), build_f_solution(hs)


def plane_wave(a, amplitude=0.7, k=1.0, nt=201, nz=41):
    """exp(i(kt − k²z + a·A²·z)) 是方程的精确解"""
    t = np.linspace(0.0, 2.0, nt)
    z = np.linspace(0.0, 0.2, nz)
    omega = a * amplitude**2 - k * k
    values = amplitude * np.exp(1j * (k * t[None, :] + omega * z[:, None]))
    return SampledField(t, z, values, phase=omega * z, meta={"quantity": "psi"})


def test_residual_h_small(appendix):
    hs, _, _ = appendix
    z = np.linspace(0.0, 3 * hs.Lz, 301)
    report = residual_h(hs, z)
    assert report.equation == "h"
    assert report.max_rel < 1e-8
    assert report.skipped == 0
    assert report.grid["z_points"] == 301
    assert 0.0 <= report.location[0] <= 3 * hs.Lz
    assert report.construction_error_floor > 0


def test_residual_f_small(appendix):
    hs, _, fs = appendix
    z = 0.25 * hs.Lz
    lt = fs.at(z).Lt
    report = residual_f(fs, z, np.linspace(-0.3 * lt, 0.3 * lt, 61))
    assert report.grid["z"] == z
    assert report.max_rel < 1e-6
    assert report.evaluated == 61 - report.skipped > 0


def test_residual_f_inadmissible_slice_not_evaluated(appendix):
    """R2(0, Lz/2) < 0：整行跳过，结果为 NaN 而不是 0"""
    hs, _, fs = appendix
    z = 0.5 * hs.Lz
    assert fs.at(z).r2_at_f0 < 0
    report = residual_f(fs, z, np.linspace(-5.0, 5.0, 301))
    assert report.evaluated == 0
    assert report.skipped == 301
    assert report.location is None
    assert math.isnan(report.max_rel) and math.isnan(report.max_abs)
    assert ("f.evaluated", 0) in report.as_rows()


def test_residual_phase_small(appendix):
    hs, ps, _ = appendix
    report = residual_phase(ps, hs, np.linspace(0.2, 2 * hs.Lz, 50))
    assert report.max_abs < 1e-6
    assert report.grid["step"] > 0


def test_riccati_condition_violated_on_appendix(appendix):
    # f(0, z) = f0 = 0 for every z, while √h(c1 − 3ah) does not vanish
    hs, _, fs = appendix
    t = np.linspace(-0.05, 0.05, 5)
    z = np.linspace(0.15 * hs.Lz, 0.3 * hs.Lz, 4)
    report = residual_riccati(fs, hs, APPENDIX, t, z)
    assert report.max_rel > 1e-3
    assert report.extra["ratio_to_floor"] > 1e3
    assert report.extra["skipped_rows"] == 0
    assert report.grid["f0"] == 0.0


def test_riccati_report_rows(appendix):
    hs, _, fs = appendix
    report = residual_riccati(fs, hs, APPENDIX, np.array([-0.02, 0.0, 0.02]), np.array([0.2 * hs.Lz, 0.25 * hs.Lz]))
    keys = [k for k, _ in report.as_rows()]
    assert "riccati.max_rel" in keys
    assert "riccati.ratio_to_floor" in keys


@pytest.mark.parametrize("a", [1.0, -1.0])
def test_cnlse_plane_wave_exact(a):
    report = residual_cnlse(plane_wave(a), a)
    assert report.max_rel < 1e-6
    assert set(report.parts) == {"real", "imag"}
    assert report.parts["imag"].max_rel < 1e-6


def test_cnlse_wrong_nonlinearity_detected():
    report = residual_cnlse(plane_wave(1.0), -1.0)
    assert report.max_rel > 0.1


def test_cnlse_resolution_error():
    with pytest.raises(ResolutionError):
        residual_cnlse(plane_wave(1.0, nt=11, nz=6), 1.0, tolerance=1e-14)


def test_cnlse_needs_five_points():
    field = SampledField(np.linspace(0, 1, 4), np.linspace(0, 1, 8), np.zeros((8, 4), dtype=complex))
    with pytest.raises(InvalidInputError):
        residual_cnlse(field, 1.0)


def test_cnlse_on_appendix_field(appendix):
    hs, ps, fs = appendix
    t = np.linspace(-0.05, 0.05, 21)
    z = np.linspace(0.2 * hs.Lz, 0.25 * hs.Lz, 21)
    psi, _ = psi_field(t, z, hs, ps, fs)
    report = residual_cnlse(psi, APPENDIX.a)
    # the imaginary part carries the Riccati condition, which fails here
    assert report.parts["imag"].max_rel > 1e-3


def test_ode_oracle_matches_closed_form():
    params = APPENDIX.with_updates(h0=0.5)
    hs = build_h_solution(params)
    oracle = ode_oracle(params, z_max=4 * hs.Lz, n_points=401)
    assert oracle.period == pytest.approx(hs.Lz, rel=1e-6)
    early = oracle.z < hs.Lz
    np.testing.assert_allclose(oracle.h[early], h_eval(oracle.z[early], hs), atol=1e-7)
    assert oracle.values is oracle.h


def test_ode_oracle_from_zero_root():
    hs = build_h_solution(APPENDIX)
    oracle = ode_oracle(APPENDIX, kind="phi-curve", z_max=4 * hs.Lz, n_points=201)
    assert oracle.period == pytest.approx(hs.Lz, rel=1e-6)
    assert oracle.values is oracle.phi
    assert oracle.phi[0] == APPENDIX.phi0


def test_ode_oracle_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        ode_oracle(APPENDIX, z_max=-1.0)
    with pytest.raises(InvalidInputError):
        ode_oracle(APPENDIX.with_updates(h0=2.0))


@pytest.mark.parametrize("h0", [0.0, 0.5, 1.2])
def test_period_quadrature(h0):
    params = APPENDIX.with_updates(h0=h0)
    hs = build_h_solution(params)
    assert period_quadrature(params) == pytest.approx(hs.Lz, rel=1e-8)


def test_period_quadrature_outside_interval():
    with pytest.raises(InvalidInputError):
        period_quadrature(APPENDIX.with_updates(h0=2.0))


def test_period_is_not_the_printed_value(appendix):
    hs, _, _ = appendix
    assert not math.isclose(hs.Lz, 2.85, rel_tol=0.02)
