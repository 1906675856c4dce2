# -*- coding: utf-8 -*-
"""测试四次多项式系数、实根与相图分类"""

import math
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from config.presets import APPENDIX_PARAMS, STATED_VALUES
from core.exceptions import InvalidInputError
from core.quartic import (
    QuarticCoefficients,
    SolutionParams,
    pdc_classify,
    positivity_intervals,
    r1_coefficients,
    r2_coefficients,
    real_roots,
    sign_changes,
)

APPENDIX = SolutionParams(**APPENDIX_PARAMS)


def from_roots(alpha, roots):
    c4, c3, c2, c1, c0 = alpha * np.poly(roots)
    return QuarticCoefficients(c4, c3 / 4, c2 / 6, c1 / 4, c0)


def test_appendix_r1_coefficients():
    q = r1_coefficients(APPENDIX)
    got = (q.alpha, q.beta, q.gamma, q.delta, q.epsilon)
    np.testing.assert_allclose(got, STATED_VALUES["r1_coefficients"], rtol=1e-14, atol=1e-15)


def test_appendix_sign_changes():
    # (−16, 32, −9.6, 1.04, 0)
    assert sign_changes(r1_coefficients(APPENDIX)) == 3


def test_appendix_phase_diagram():
    q = r1_coefficients(APPENDIX)
    report = pdc_classify(q)
    values = [r.value for r in report.pdc_roots]
    assert values[0] == 0.0
    assert report.positive_root_count == 1
    lo, hi = report.interval_containing(0.0)
    assert lo == 0.0
    assert 1.6 < hi < 1.7
    assert abs(q.evaluate(hi)) < 1e-10
    assert report.interval_containing(2.0) is None


def test_zero_a_rejected():
    with pytest.raises(ValidationError):
        SolutionParams(a=0.0, c1=1.0, c2=0.0, c3=0.0)


def test_negative_h0_rejected():
    with pytest.raises(ValidationError):
        SolutionParams(a=1.0, c1=1.0, c2=0.0, c3=0.0, h0=-0.1)


def test_double_root_merged():
    q = from_roots(-1.0, [1.0, 1.0, -2.0, 3.0])
    roots = real_roots(q, multiplicity_tol=1e-5)
    assert [r.multiplicity for r in roots] == [1, 2, 1]
    assert roots[1].value == pytest.approx(1.0, abs=1e-5)


def test_complex_roots_skipped():
    # (x² + 1)(x − 1)(x − 2) = x⁴ − 3x³ + 3x² − 3x + 2
    q = QuarticCoefficients(1.0, -0.75, 0.5, -0.75, 2.0)
    assert [r.value for r in real_roots(q)] == pytest.approx([1.0, 2.0])


def test_positivity_intervals_negative_leading():
    q = from_roots(-1.0, [0.0, 0.5, 1.0, 2.0])
    intervals = positivity_intervals(q, lower=0.0)
    assert len(intervals) == 2
    assert intervals[0] == pytest.approx((0.0, 0.5))
    assert intervals[1] == pytest.approx((1.0, 2.0))


def test_zero_quartic_rejected():
    with pytest.raises(InvalidInputError):
        real_roots(QuarticCoefficients(0.0, 0.0, 0.0, 0.0, 0.0))


@settings(max_examples=50, deadline=None)
@given(
    roots=st.lists(st.integers(-40, 40), min_size=4, max_size=4, unique=True).map(lambda xs: [x / 8 for x in xs]),
    alpha=st.sampled_from([-3.0, -1.0, 0.5, 2.0]),
)
def test_distinct_real_roots_recovered(roots, alpha):
    q = from_roots(alpha, roots)
    found = [r.value for r in real_roots(q)]
    assert found == pytest.approx(sorted(roots), abs=1e-6)
    for x in found:
        assert abs(q.evaluate(x)) <= 1e-8 * q.scale() * max(1.0, abs(x)) ** 4


def test_r2_readings_agree_for_unit_a():
    p = SolutionParams(a=1.0, c1=0.3, c2=0.1, c3=0.2)
    derived = r2_coefficients(p, 0.4, 0.1, "derived")
    printed = r2_coefficients(p, 0.4, 0.1, "printed")
    assert derived == printed


def test_r2_derived_gamma():
    q = r2_coefficients(APPENDIX, 0.5, -0.2)
    assert q.alpha == pytest.approx(0.5)
    assert q.beta == 0.0
    assert q.gamma == pytest.approx((-2.0 + 1.5) / 6)
    assert q.delta == pytest.approx(-0.2 / (4 * math.sqrt(0.5)))
    assert q.epsilon == pytest.approx(0.8 - 1.5 * 0.25 + 2.0 * 0.5)


def test_r2_zero_h_uses_limit():
    q = r2_coefficients(APPENDIX, 0.0, -1e-3)
    assert q.delta == pytest.approx(-math.sqrt(0.26) / 2)


def test_r2_rejects_negative_h():
    with pytest.raises(InvalidInputError):
        r2_coefficients(APPENDIX, -0.1, 0.0)
