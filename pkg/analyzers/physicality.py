"""Reality and boundedness checks for h and f, behaviour classification and admissible {f₀, z} regions."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from core.exceptions import ConstraintViolationError, EllipNLSError, InvalidInputError
from core.quartic import CoefficientReading, SolutionParams, r1_coefficients, r2_coefficients
from core.solution_family import (
    ROOT_TOL,
    HSolution,
    ZSlice,
    build_h_solution,
    h_numerator,
    h_with_derivative,
)
from core.weierstrass import (
    DEFAULT_DEGENERACY_TOL,
    EllipticInvariants,
    invariants_from_quartic,
    lattice_from_invariants,
)

logger = logging.getLogger(__name__)

HCase = Literal["interior", "zero-root", "simple-root"]
Behavior = Literal["periodic", "solitary-like", "unclassified"]

NUMERATOR_SAMPLES = 512
DEFAULT_RESOLUTION = (400, 400)
DEFAULT_BOUNDARY_TOL = 1e-6
R2_FLOOR = 1e-12
NUMERATOR_TOL = 1e-10
SOLITARY_SAMPLE_PERIODS = 20.0


@dataclass
class HPhysicalityReport:
    case: HCase
    satisfied: bool
    behavior: Behavior
    details: Dict[str, Any] = field(default_factory=dict)


def classify_behavior(inv_z: EllipticInvariants, tol: float = DEFAULT_DEGENERACY_TOL) -> Behavior:
    """
    Periodic for Δ ≠ 0 or (Δ = 0, g₂ > 0, g₃ > 0); solitary-like for Δ = 0, g₂ ≥ 0, g₃ ≤ 0.
    """
    if not inv_z.is_degenerate(tol):
        return "periodic"
    if inv_z.g2 > 0 and inv_z.g3 > 0:
        return "periodic"
    if inv_z.g2 >= 0 and inv_z.g3 <= 0:
        return "solitary-like"
    return "unclassified"


# ─── check_h ──────────────────────────────────────────────


def _sample_window(hs: HSolution) -> Tuple[float, float]:
    lat = hs.lat_z
    if math.isfinite(lat.omega):
        return 0.0, lat.real_period
    span = lat.min_period if math.isfinite(lat.min_period) else 1.0
    return -SOLITARY_SAMPLE_PERIODS * span, SOLITARY_SAMPLE_PERIODS * span


def numerator_minimum(hs: HSolution, samples: int = NUMERATOR_SAMPLES) -> Tuple[float, float]:
    """
    Smallest value of the h numerator (scaled by 1/℘²) over one period.

    The sampled minimum is refined with a golden-section search on the
    bracketing neighbours.

    Returns:
        (z_min, N_min)
    """
    lo, hi = _sample_window(hs)
    z = np.linspace(lo, hi, samples, endpoint=False)
    n = np.asarray(h_numerator(z, hs), dtype=float)
    i = int(np.nanargmin(n))
    z_min, n_min = float(z[i]), float(n[i])

    left = z[i - 1] if i > 0 else z[i] - (z[1] - z[0])
    right = z[i + 1] if i + 1 < samples else z[i] + (z[1] - z[0])

    def objective(x: float) -> float:
        return float(h_numerator(x, hs))

    try:
        res = minimize_scalar(objective, bracket=(left, z_min, right), method="golden")
        if res.fun < n_min:
            z_min, n_min = float(res.x), float(res.fun)
    except ValueError as e:
        logger.debug("numerator refinement skipped near z=%.6g (no strict bracket): %s", z_min, e)
    return z_min, n_min


def check_h(
    params: SolutionParams,
    reading: CoefficientReading = "derived",
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> HPhysicalityReport:
    """
    Decide whether h is real, non-negative and bounded for these parameters.

    Exactly one case applies: ``zero-root`` for h₀ = 0, ``simple-root`` when
    R₁(h₀) = 0 with h₀ > 0, ``interior`` otherwise. Never raises; lattice or
    evaluation failures are reported as unsatisfied with an ``error`` detail.
    """
    q1 = r1_coefficients(params)
    h0 = params.h0
    r = float(q1.evaluate(h0))
    if abs(r) <= ROOT_TOL * q1.scale() * max(1.0, h0) ** 4:
        r = 0.0

    if h0 == 0.0:
        case: HCase = "zero-root"
    elif r == 0.0:
        case = "simple-root"
    else:
        case = "interior"

    inv = invariants_from_quartic(q1)
    behavior = classify_behavior(inv, degeneracy_tol)
    details: Dict[str, Any] = {
        "h0": h0,
        "R1_h0": r,
        "g2z": inv.g2,
        "g3z": inv.g3,
        "delta_z": inv.delta,
    }

    try:
        lat = lattice_from_invariants(inv, degeneracy_tol=degeneracy_tol)
        details["e1"] = lat.e1
        details["Lz"] = lat.real_period

        if case == "zero-root":
            details["gamma_half"] = q1.gamma / 2.0
            details["delta1"] = q1.delta
            satisfied = lat.e1 > q1.gamma / 2.0 and q1.delta > 0
        elif case == "simple-root":
            s = 0.5 * (q1.gamma + 2.0 * q1.beta * h0 + q1.alpha * h0 * h0)
            details["s"] = s
            satisfied = lat.e1 > s
            if satisfied:
                hs = build_h_solution(params, reading=reading, degeneracy_tol=degeneracy_tol)
                z_min, n_min = numerator_minimum(hs)
                details.update(numerator_min=n_min, numerator_argmin=z_min)
                satisfied = n_min >= -NUMERATOR_TOL
        else:
            satisfied = r > 0 and h0 > 0
            if satisfied:
                hs = build_h_solution(params, reading=reading, degeneracy_tol=degeneracy_tol)
                z_min, n_min = numerator_minimum(hs)
                details.update(numerator_min=n_min, numerator_argmin=z_min)
                satisfied = n_min >= -NUMERATOR_TOL
    except EllipNLSError as e:
        logger.warning("check_h could not evaluate case %s: %s", case, e.message)
        details["error"] = e.message
        satisfied = False

    logger.debug("check_h case=%s satisfied=%s behavior=%s", case, satisfied, behavior)
    return HPhysicalityReport(case=case, satisfied=bool(satisfied), behavior=behavior, details=details)


# ─── Admissible region ────────────────────────────────────


@dataclass
class BoundaryPoint:
    f0: float
    z: float
    constraint: str
    value: float


@dataclass
class AdmissibleRegion:
    """Masks are indexed [f₀ index, z index]."""

    f0_grid: np.ndarray
    z_grid: np.ndarray
    mask: np.ndarray
    mask_r2: np.ndarray
    mask_e1: np.ndarray
    e1_t: np.ndarray
    focusing: bool
    mask_plus: Optional[np.ndarray] = None
    mask_minus: Optional[np.ndarray] = None
    boundary: List[BoundaryPoint] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not bool(self.mask.any())

    def row_index(self, f0: float) -> int:
        return int(np.argmin(np.abs(self.f0_grid - f0)))

    def row_admissible(self, f0: float) -> bool:
        return bool(self.mask[self.row_index(f0)].all())

    def row_crossings(self, f0: float) -> int:
        """Number of admissible/inadmissible flips along z in the row nearest f₀."""
        row = self.mask[self.row_index(f0)].astype(int)
        return int(np.count_nonzero(np.diff(row)))


@dataclass
class _Column:
    """Per-z data of the f₀ inequalities."""

    z: float
    valid: bool
    q2: Any = None
    e1: float = math.nan
    alpha: float = math.nan


def _column(hs: HSolution, z: float, h: float, hz: float) -> _Column:
    if not (math.isfinite(h) and math.isfinite(hz)) or h < -1e-12:
        return _Column(z, False)
    try:
        q2 = r2_coefficients(hs.params, max(h, 0.0), hz, reading=hs.reading)
        lat_t = lattice_from_invariants(
            invariants_from_quartic(q2),
            pole_epsilon=hs.pole_epsilon,
            degeneracy_tol=hs.degeneracy_tol,
        )
    except EllipNLSError as e:
        logger.debug("region column z=%.6g dropped: %s", z, e.message)
        return _Column(z, False)
    return _Column(z, True, q2=q2, e1=lat_t.e1, alpha=q2.alpha)


def _margins(col: _Column, f0: np.ndarray) -> Dict[str, np.ndarray]:
    """Signed margins of R₂ ≥ 0 and the ẽ₁ inequalities; positive means satisfied."""
    q2 = col.q2
    r2 = np.asarray(q2.evaluate(f0), dtype=float)
    scale = q2.scale() * np.maximum(1.0, np.abs(f0)) ** 4
    r2n = r2 / scale
    s2 = 0.5 * (q2.gamma + q2.alpha * f0 * f0)
    out = {"r2": r2n}
    if col.alpha > 0:
        # defocusing: both roots of the denominator are real
        root = 0.5 * np.sqrt(np.maximum(q2.alpha * r2, 0.0))
        neg = r2n < -R2_FLOOR
        out["plus"] = np.where(neg, r2n, col.e1 - (s2 + root))
        out["minus"] = np.where(neg, r2n, col.e1 - (s2 - root))
    else:
        touching = np.abs(r2n) <= R2_FLOOR
        out["e1"] = np.where(touching, col.e1 - s2, np.inf)
    return out


def _active(margins: Dict[str, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Smallest margin and the name of the constraint that attains it."""
    names = list(margins)
    stack = np.vstack([np.atleast_1d(margins[k]) for k in names])
    idx = np.argmin(stack, axis=0)
    return stack[idx, np.arange(stack.shape[1])], np.array(names)[idx]


def _column_masks(col: _Column, f0_grid: np.ndarray) -> Dict[str, np.ndarray]:
    n = f0_grid.size
    if not col.valid:
        false = np.zeros(n, dtype=bool)
        return {"mask": false, "r2": false, "e1": false, "plus": false, "minus": false}
    m = _margins(col, f0_grid)
    r2_ok = m["r2"] >= -R2_FLOOR
    if col.alpha > 0:
        plus = r2_ok & (m["plus"] > 0)
        minus = r2_ok & (m["minus"] > 0)
        e1_ok = plus & minus
    else:
        e1_ok = m["e1"] > 0
        plus = minus = e1_ok
    return {"mask": r2_ok & e1_ok, "r2": r2_ok, "e1": e1_ok, "plus": plus, "minus": minus}


def _column_boundary(col: _Column, f0_grid: np.ndarray, mask: np.ndarray, tol: float) -> List[BoundaryPoint]:
    points: List[BoundaryPoint] = []
    if not col.valid:
        return points

    def g(x: float) -> float:
        value, _ = _active(_margins(col, np.array([x])))
        return float(value[0])

    for i in np.flatnonzero(mask[:-1] != mask[1:]):
        lo, hi = float(f0_grid[i]), float(f0_grid[i + 1])
        g_lo, g_hi = g(lo), g(hi)
        if np.sign(g_lo) != np.sign(g_hi) and math.isfinite(g_lo) and math.isfinite(g_hi):
            root = brentq(g, lo, hi, xtol=tol)
        else:
            root = 0.5 * (lo + hi)
        value, name = _active(_margins(col, np.array([root])))
        points.append(BoundaryPoint(f0=root, z=col.z, constraint=str(name[0]), value=float(value[0])))
    return points


def admissible_region(
    params: SolutionParams,
    f0_range: Tuple[float, float],
    z_range: Tuple[float, float],
    resolution: Tuple[int, int] = DEFAULT_RESOLUTION,
    boundary_tol: float = DEFAULT_BOUNDARY_TOL,
    threads: int = 4,
    reading: CoefficientReading = "derived",
    hs: Optional[HSolution] = None,
) -> AdmissibleRegion:
    """
    Scan the {f₀, z} plane for parameters where f is real and bounded.

    R₂(f₀, z) ≥ 0 is combined with the ẽ₁ inequality picked by sign(a): for
    a < 0 both signs of the ± must hold and each is recorded; for a > 0 the
    ẽ₁ condition only bites where R₂ touches zero. z columns are independent
    and scanned on a thread pool; results are assembled in grid order.

    Args:
        params: solution parameters (h must be physical)
        f0_range: (lo, hi) window of f₀
        z_range: (lo, hi) window of z
        resolution: (n_f0, n_z)
        boundary_tol: brentq tolerance on boundary points
        threads: worker count
        reading: γ₂ reading
        hs: prebuilt h-solution

    Raises:
        InvalidInputError: bad windows or resolution
        ConstraintViolationError: h is not physical
    """
    n_f0, n_z = resolution
    if n_f0 < 2 or n_z < 2:
        raise InvalidInputError("region resolution must be at least 2x2", {"resolution": list(resolution)})
    for lo, hi in (f0_range, z_range):
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise InvalidInputError("region window must satisfy lo < hi", {"lo": lo, "hi": hi})

    report = check_h(params, reading=reading)
    if not report.satisfied:
        raise ConstraintViolationError(f"h physical ({report.case})", 0.0, **report.details)

    hs = hs or build_h_solution(params, reading=reading)
    f0_grid = np.linspace(f0_range[0], f0_range[1], n_f0)
    z_grid = np.linspace(z_range[0], z_range[1], n_z)
    h, hz = h_with_derivative(z_grid, hs, strict=False)

    def scan(j: int):
        col = _column(hs, float(z_grid[j]), float(h[j]), float(hz[j]))
        masks = _column_masks(col, f0_grid)
        return col, masks, _column_boundary(col, f0_grid, masks["mask"], boundary_tol)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(scan, range(n_z)))

    def stack(key: str) -> np.ndarray:
        return np.column_stack([m[key] for _, m, _ in results])

    focusing = params.a > 0
    region = AdmissibleRegion(
        f0_grid=f0_grid,
        z_grid=z_grid,
        mask=stack("mask"),
        mask_r2=stack("r2"),
        mask_e1=stack("e1"),
        e1_t=np.array([c.e1 for c, _, _ in results]),
        focusing=focusing,
        mask_plus=None if focusing else stack("plus"),
        mask_minus=None if focusing else stack("minus"),
        boundary=[p for _, _, pts in results for p in pts],
    )
    if region.is_empty:
        logger.warning("admissible region is empty on f0=%s z=%s", f0_range, z_range)
    logger.info(
        "region %dx%d: %.1f%% admissible, %d boundary points",
        n_f0, n_z, 100.0 * region.mask.mean(), len(region.boundary),
    )
    return region


def slice_bounded(sl: ZSlice) -> bool:
    """f is real and bounded at this z: R₂(f₀, z) ≥ 0 and ẽ₁ clears the poles of the f quotient."""
    k = sl.kernel
    if k is None:
        return False
    if k.alpha > 0:
        root = 0.5 * math.sqrt(max(k.alpha * k.r, 0.0))
        return sl.lat_t.e1 > k.s + root
    return k.r > 0 or sl.lat_t.e1 > k.s
