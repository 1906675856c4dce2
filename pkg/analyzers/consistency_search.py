"""Search parameter boxes for members of the family that satisfy the Riccati condition."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.optimize import minimize
from scipy.stats import qmc

from analyzers.physicality import check_h, slice_bounded
from analyzers.residual_lab import ResidualReport, residual_riccati
from core.exceptions import EllipNLSError
from core.quartic import CoefficientReading, SolutionParams
from core.solution_family import build_f_solution, build_h_solution

logger = logging.getLogger(__name__)

PARAM_NAMES = ("a", "c1", "c2", "c3", "h0", "f0")
Range = Tuple[float, float]


class SearchRanges(BaseModel):
    """Closed boxes per parameter; lo == hi pins a parameter."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    a: Range
    c1: Range
    c2: Range
    c3: Range
    h0: Range
    f0: Range

    @field_validator("a", "c1", "c2", "c3", "h0", "f0")
    @classmethod
    def validate_order(cls, v: Range) -> Range:
        if v[0] > v[1]:
            raise ValueError(f"range lower bound {v[0]} exceeds upper bound {v[1]}")
        return v

    @field_validator("h0")
    @classmethod
    def validate_h0(cls, v: Range) -> Range:
        if v[0] < 0:
            raise ValueError("h0 range must lie in [0, inf)")
        return v

    @model_validator(mode="after")
    def validate_a_nonzero(self):
        if self.a == (0.0, 0.0):
            raise ValueError("a range must contain non-zero values")
        return self

    @classmethod
    def around(cls, params: SolutionParams, width: float) -> "SearchRanges":
        """Box of half-width ``width`` around a parameter set (h₀ clipped at 0)."""
        d = params.model_dump()
        box = {k: (d[k] - width, d[k] + width) for k in PARAM_NAMES}
        box["h0"] = (max(0.0, d["h0"] - width), d["h0"] + width)
        return cls(**box)

    def bounds(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in PARAM_NAMES], dtype=float)


class SearchConfig(BaseModel):
    budget: int = Field(default=1024, ge=1, description="quasi-random samples")
    seed: int = 0
    top_k: int = Field(default=10, ge=0)
    t_points: int = Field(default=16, ge=4)
    z_points: int = Field(default=6, ge=2)
    require_bounded: bool = False
    threads: int = Field(default=4, ge=1)
    max_local_evaluations: int = Field(default=200, ge=1)
    reading: CoefficientReading = "derived"


@dataclass
class Candidate:
    params: Optional[SolutionParams]
    objective: float
    physical: bool
    bounded: Optional[bool] = None
    report: Optional[ResidualReport] = None


@dataclass
class SearchResult:
    status: Literal["ok", "empty"]
    best: Optional[Candidate]
    trace: List[float] = field(default_factory=list)
    evaluated: int = 0
    physical_count: int = 0
    refined: List[Candidate] = field(default_factory=list)


def evaluate_point(x: np.ndarray, cfg: SearchConfig, phi0: float = 0.0) -> Candidate:
    try:
        params = SolutionParams(**dict(zip(PARAM_NAMES, map(float, x))), phi0=phi0)
    except ValidationError:
        return Candidate(None, math.inf, False)
    return evaluate_candidate(params, cfg)


def evaluate_candidate(params: SolutionParams, cfg: SearchConfig) -> Candidate:
    """
    Normalized Riccati residual of one candidate, or inf when it is not physical.

    Gate: check_h and R₂(f₀, z) ≥ 0 on every grid row. With require_bounded
    the ẽ₁ inequality must hold too; otherwise it is only recorded.
    """
    try:
        if not check_h(params, reading=cfg.reading).satisfied:
            return Candidate(params, math.inf, False)
        hs = build_h_solution(params, reading=cfg.reading)
        fs = build_f_solution(hs)
        lz = hs.Lz if math.isfinite(hs.Lz) else hs.lat_z.min_period
        if not math.isfinite(lz):
            return Candidate(params, math.inf, False)
        z_grid = np.linspace(0.1 * lz, 0.4 * lz, cfg.z_points)
        slices = [fs.at(float(z)) for z in z_grid]
        if any(sl.kernel is None for sl in slices):
            return Candidate(params, math.inf, False)

        bounded = all(slice_bounded(sl) for sl in slices)
        if cfg.require_bounded and not bounded:
            return Candidate(params, math.inf, False, bounded=False)

        lt = min(sl.Lt for sl in slices)
        half = 0.25 * (lt if math.isfinite(lt) else 1.0)
        t_grid = np.linspace(-half, half, cfg.t_points)
        report = residual_riccati(fs, hs, params, t_grid, z_grid)
        if report.location is None:
            return Candidate(params, math.inf, True, bounded=bounded, report=report)
        return Candidate(params, report.max_rel, True, bounded=bounded, report=report)
    except (EllipNLSError, ValueError) as e:
        logger.debug("candidate %s rejected: %s", params.model_dump(), e)
        return Candidate(params, math.inf, False)


def consistency_search(ranges: SearchRanges, cfg: Optional[SearchConfig] = None) -> SearchResult:
    """
    Sobol sampling of the box, then Nelder–Mead from the best ``top_k``.

    Deterministic for a given seed: candidates are scrambled Sobol points in
    generation order and the thread pool preserves that order. ``trace`` is
    the best-so-far objective after each Sobol sample.
    """
    cfg = cfg or SearchConfig()
    bounds = ranges.bounds()
    lo, hi = bounds[:, 0], bounds[:, 1]
    free = hi > lo

    sampler = qmc.Sobol(d=len(PARAM_NAMES), scramble=True, seed=cfg.seed)
    m = max(int(math.ceil(math.log2(cfg.budget))), 0)
    unit = sampler.random_base2(m)[: cfg.budget]
    points = lo + unit * (hi - lo)
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        candidates = list(pool.map(lambda x: evaluate_point(x, cfg), points))

    trace: List[float] = []
    best = math.inf
    for c in candidates:
        best = min(best, c.objective)
        trace.append(best)
    physical = [c for c in candidates if c.physical and math.isfinite(c.objective)]
    logger.info("search: %d samples, %d physical, best %.3e", len(candidates), len(physical), best)
    if not physical:
        return SearchResult(status="empty", best=None, trace=trace, evaluated=len(candidates))

    ordered = sorted(physical, key=lambda c: c.objective)
    ranked = ordered[: cfg.top_k]
    refined: List[Candidate] = []
    if free.any():
        for start in ranked:
            refined.append(_refine(start, lo, hi, free, cfg))

    winner = min([ordered[0]] + refined, key=lambda c: c.objective)
    return SearchResult(
        status="ok",
        best=winner,
        trace=trace,
        evaluated=len(candidates),
        physical_count=len(physical),
        refined=refined,
    )


def _refine(start: Candidate, lo: np.ndarray, hi: np.ndarray, free: np.ndarray, cfg: SearchConfig) -> Candidate:
    x0 = np.array([getattr(start.params, k) for k in PARAM_NAMES], dtype=float)
    cache: Dict[bytes, Candidate] = {}

    def full(y: np.ndarray) -> np.ndarray:
        x = x0.copy()
        x[free] = np.clip(y, lo[free], hi[free])
        return x

    def objective(y: np.ndarray) -> float:
        x = full(y)
        c = evaluate_point(x, cfg, start.params.phi0)
        cache[x.tobytes()] = c
        return c.objective

    res = minimize(
        objective,
        x0[free],
        method="Nelder-Mead",
        bounds=list(zip(lo[free], hi[free])),
        options={"maxfev": cfg.max_local_evaluations, "xatol": 1e-8, "fatol": 1e-12},
    )
    best = cache.get(full(res.x).tobytes())
    if best is None or best.objective > start.objective:
        return start
    return best
