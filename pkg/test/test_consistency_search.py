# -*- coding: utf-8 -*-
"""测试 Riccati 一致性参数搜索"""

import math
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from pydantic import ValidationError

from analyzers.consistency_search import (
    PARAM_NAMES,
    SearchConfig,
    SearchRanges,
    consistency_search,
    evaluate_candidate,
    evaluate_point,
)
from config.presets import APPENDIX_PARAMS
from core.quartic import SolutionParams

APPENDIX = SolutionParams(**APPENDIX_PARAMS)
SMALL = SearchConfig(budget=4, top_k=1, t_points=5, z_points=3, threads=2, max_local_evaluations=5)


def pinned(**changes):
    d = {**APPENDIX.model_dump(), **changes}
    return SearchRanges(**{k: (d[k], d[k]) for k in PARAM_NAMES})


def test_ranges_validation():
    box = {k: (0.0, 1.0) for k in PARAM_NAMES}
    with pytest.raises(ValidationError):
        SearchRanges(**{**box, "c1": (1.0, 0.0)})
    with pytest.raises(ValidationError):
        SearchRanges(**{**box, "h0": (-0.1, 0.2)})
    with pytest.raises(ValidationError):
        SearchRanges(**{**box, "a": (0.0, 0.0)})
    with pytest.raises(ValidationError):
        SearchRanges(**{**box, "c2": (0.0, math.inf)})


def test_ranges_around_clips_h0():
    ranges = SearchRanges.around(APPENDIX, 0.1)
    assert ranges.h0 == (0.0, 0.1)
    assert ranges.a == pytest.approx((-1.1, -0.9))
    assert ranges.bounds().shape == (6, 2)


def test_appendix_candidate_is_physical_but_inconsistent():
    c = evaluate_candidate(APPENDIX, SMALL)
    assert c.physical
    assert math.isfinite(c.objective)
    assert c.objective > 1e-3
    assert c.report.equation == "riccati"


def test_unphysical_candidate():
    c = evaluate_candidate(APPENDIX.with_updates(c3=-0.13), SMALL)
    assert not c.physical
    assert c.objective == math.inf


def test_invalid_point_rejected():
    x = np.array([0.0, -2.0, 0.4, 0.13, 0.0, 0.0])
    c = evaluate_point(x, SMALL)
    assert c.params is None
    assert c.objective == math.inf


def test_pinned_box_matches_single_evaluation():
    result = consistency_search(pinned(), SMALL)
    assert result.status == "ok"
    assert result.evaluated == 4
    assert result.physical_count == 4
    assert result.refined == []
    assert result.best.objective == pytest.approx(evaluate_candidate(APPENDIX, SMALL).objective)
    assert result.trace == [result.best.objective] * 4


def test_empty_search():
    result = consistency_search(pinned(c3=-0.13), SMALL)
    assert result.status == "empty"
    assert result.best is None
    assert all(v == math.inf for v in result.trace)


def test_search_is_deterministic():
    ranges = SearchRanges.around(APPENDIX, 0.01)
    one = consistency_search(ranges, SMALL.model_copy(update={"top_k": 0, "threads": 1}))
    four = consistency_search(ranges, SMALL.model_copy(update={"top_k": 0, "threads": 4}))
    assert one.trace == four.trace
    assert all(b <= a for a, b in zip(one.trace, one.trace[1:]))
    if one.best is not None:
        assert one.best.params == four.best.params


def test_refinement_never_worsens():
    ranges = SearchRanges.around(APPENDIX, 0.01)
    result = consistency_search(ranges, SMALL)
    if result.status == "ok":
        assert result.best.objective <= min(c.objective for c in result.refined)
        assert len(result.refined) == 1
