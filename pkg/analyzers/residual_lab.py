"""Residuals of the constructed fields against their defining equations, plus independent oracles.

Every residual is reduced the same way: the raw maximum |residual| and the
maximum of the pointwise normalized residual |res| / (1 + max |term|), with
ties broken by the lowest grid index.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from core.exceptions import InvalidInputError, NumericFailureError, ResolutionError
from core.quartic import SolutionParams, pdc_classify, r1_coefficients
from core.solution_family import (
    ROOT_TOL,
    FSolution,
    HSolution,
    PhiSolution,
    SampledField,
    f_with_derivative,
    h_with_derivative,
    phi_eval,
)
from utils.finite_diff import (
    first_derivative_2,
    first_derivative_4,
    interior,
    richardson_derivative,
    second_derivative_2,
    second_derivative_4,
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
PHASE_STEP = 1e-5
RICCATI_STEP = 1e-4
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12


@dataclass
class ResidualReport:
    equation: str
    grid: Dict[str, Any]
    max_abs: float
    max_rel: float
    location: Optional[Tuple[float, ...]]
    construction_error_floor: float
    skipped: int = 0
    evaluated: int = 0
    extra: Dict[str, Any] = field(default_factory=dict)
    parts: Dict[str, "ResidualReport"] = field(default_factory=dict)

    def as_rows(self, prefix: str = "") -> list:
        """Flat (key, value) rows for the report CSV."""
        p = f"{prefix}{self.equation}."
        rows = [
            (p + "max_abs", self.max_abs),
            (p + "max_rel", self.max_rel),
            (p + "location", "" if self.location is None else " ".join(repr(float(x)) for x in self.location)),
            (p + "construction_error_floor", self.construction_error_floor),
            (p + "skipped", self.skipped),
            (p + "evaluated", self.evaluated),
        ]
        rows += [(p + k, v) for k, v in sorted(self.grid.items())]
        rows += [(p + k, v) for k, v in sorted(self.extra.items())]
        for part in self.parts.values():
            rows += part.as_rows(prefix=p)
        return rows


def _grid_spec(name: str, grid: np.ndarray) -> Dict[str, Any]:
    grid = np.asarray(grid, dtype=float)
    return {f"{name}_min": float(grid.min()), f"{name}_max": float(grid.max()), f"{name}_points": int(grid.size)}


def _reduce(
    equation: str,
    res: np.ndarray,
    terms: Sequence[np.ndarray],
    coords: Sequence[np.ndarray],
    grid: Dict[str, Any],
    floor: float,
    skip: Optional[np.ndarray] = None,
) -> ResidualReport:
    """Max-reduce a residual array; coords are broadcastable coordinate arrays."""
    res = np.abs(np.asarray(res))
    norm = 1.0 + np.max(np.stack([np.abs(np.broadcast_to(t, res.shape)) for t in terms]), axis=0)
    rel = res / norm
    bad = ~np.isfinite(rel)
    if skip is not None:
        bad |= np.broadcast_to(skip, res.shape)
    skipped = int(bad.sum())
    if skipped == res.size:
        logger.warning("residual %s: all %d cells skipped, nothing evaluated", equation, skipped)
        return ResidualReport(equation, grid, math.nan, math.nan, None, floor, skipped=skipped, evaluated=0)

    rel = np.where(bad, -np.inf, rel)
    i = int(np.argmax(rel))
    loc = tuple(float(np.broadcast_to(c, res.shape).ravel()[i]) for c in coords)
    return ResidualReport(
        equation=equation,
        grid=grid,
        max_abs=float(np.max(np.where(bad, -np.inf, res))),
        max_rel=float(rel.ravel()[i]),
        location=loc,
        construction_error_floor=floor,
        skipped=skipped,
        evaluated=res.size - skipped,
    )


def _rounding_floor(terms: Sequence[np.ndarray]) -> float:
    mags = sum(np.abs(t) for t in terms)
    finite = np.asarray(mags)[np.isfinite(mags)]
    return float(16.0 * EPS * (1.0 + finite.max())) if finite.size else 16.0 * EPS


def _period_scale(hs: HSolution) -> float:
    lat = hs.lat_z
    if math.isfinite(lat.omega):
        return lat.real_period
    return lat.min_period if math.isfinite(lat.min_period) else 1.0


# ─── h, f, φ equations ────────────────────────────────────


def residual_h(hs: HSolution, z_grid) -> ResidualReport:
    """(h_z)² − R₁(h) with h_z analytic."""
    z = np.asarray(z_grid, dtype=float)
    h, hz = h_with_derivative(z, hs, strict=False)
    q = hs.q1
    terms = [hz * hz, q.alpha * h**4, 4 * q.beta * h**3, 6 * q.gamma * h**2, 4 * q.delta * h]
    res = hz * hz - q.evaluate(h)
    report = _reduce("h", res, terms, [z], _grid_spec("z", z), _rounding_floor(terms))
    logger.debug("residual_h max_rel=%.3e", report.max_rel)
    return report


def residual_f(fs: FSolution, z: float, t_grid) -> ResidualReport:
    """(f_t)² − R₂(f, z) at one z with f_t analytic."""
    t = np.asarray(t_grid, dtype=float)
    f, ft = f_with_derivative(t, z, fs, strict=False)
    q = fs.at(z).q2
    terms = [ft * ft, q.alpha * f**4, 6 * q.gamma * f**2, 4 * q.delta * f, np.full(t.shape, q.epsilon)]
    res = ft * ft - q.evaluate(f)
    grid = {**_grid_spec("t", t), "z": float(z), "f0": fs.f0}
    report = _reduce("f", res, terms, [t, np.full(t.shape, float(z))], grid, _rounding_floor(terms))
    logger.debug("residual_f z=%.6g max_rel=%.3e skipped=%d", z, report.max_rel, report.skipped)
    return report


def residual_phase(ps: PhiSolution, hs: HSolution, z_grid, step: Optional[float] = None) -> ResidualReport:
    """φ_z + 2ah − c₁ with φ_z from Richardson-extrapolated central differences."""
    z = np.asarray(z_grid, dtype=float)
    p = hs.params
    step = step or PHASE_STEP * _period_scale(hs)
    phi_z = richardson_derivative(lambda s: phi_eval(s, ps, hs), z, step)
    h, _ = h_with_derivative(z, hs, strict=False)
    terms = [phi_z, 2.0 * p.a * h, np.full(z.shape, p.c1)]
    res = phi_z + 2.0 * p.a * h - p.c1
    floor = _rounding_floor(terms) + 1e-13 / step
    report = _reduce("phase", res, terms, [z], {**_grid_spec("z", z), "step": step}, floor)
    logger.debug("residual_phase max_abs=%.3e", report.max_abs)
    return report


# ─── Riccati condition ────────────────────────────────────


def _straddles_zero(h: np.ndarray, hz: np.ndarray) -> bool:
    """Stencil values of h cross a zero of h (where δ₂ switches branch)."""
    if not np.all(np.isfinite(h)) or h.min() <= 0.0:
        return True
    flips = np.sign(hz).min() < 0 < np.sign(hz).max()
    return bool(flips and h.min() < 0.5 * h.max())


def residual_riccati(
    fs: FSolution,
    hs: HSolution,
    params: SolutionParams,
    t_grid,
    z_grid,
    step: Optional[float] = None,
) -> ResidualReport:
    """
    f_z − √h·(c₁ − a(3h + f²)) on a (t, z) grid.

    f_z comes from Richardson-extrapolated central differences in z of the
    closed-form f, each stencil z with its own t-lattice. Cells whose
    stencil leaves the admissible set or crosses a zero of h are skipped.
    The construction floor is the largest normalized residual_f on the same
    rows.
    """
    t = np.asarray(t_grid, dtype=float)
    z = np.asarray(z_grid, dtype=float)
    step = step or RICCATI_STEP * _period_scale(hs)
    offsets = np.array([step, -step, 0.5 * step, -0.5 * step])

    def rows(zs: np.ndarray) -> np.ndarray:
        return np.vstack([f_with_derivative(t, float(zz), fs, strict=False)[0] for zz in zs])

    f_z = richardson_derivative(rows, z, step)
    f = rows(z)
    h, _ = h_with_derivative(z, hs, strict=False)

    skip_rows = np.zeros(z.size, dtype=bool)
    for i, zz in enumerate(z):
        hs_st, hz_st = h_with_derivative(zz + np.append(offsets, 0.0), hs, strict=False)
        skip_rows[i] = _straddles_zero(hs_st, hz_st)

    root = np.sqrt(np.maximum(h, 0.0))[:, None]
    a, c1 = params.a, params.c1
    res = f_z - root * (c1 - a * (3.0 * h[:, None] + f * f))
    terms = [f_z, root * c1, 3.0 * a * h[:, None] * root, a * root * f * f]

    floor_rel = 0.0
    for i, zz in enumerate(z):
        if not skip_rows[i]:
            floor_rel = max(floor_rel, residual_f(fs, float(zz), t).max_rel)
    floor_rel = max(floor_rel, EPS)

    grid = {**_grid_spec("t", t), **_grid_spec("z", z), "step": step, "f0": fs.f0}
    report = _reduce(
        "riccati", res, terms, [t[None, :], z[:, None]], grid, floor_rel, skip=skip_rows[:, None]
    )
    report.extra["ratio_to_floor"] = report.max_rel / floor_rel
    report.extra["skipped_rows"] = int(skip_rows.sum())
    logger.info(
        "residual_riccati max_rel=%.3e floor=%.3e ratio=%.3e skipped=%d",
        report.max_rel, floor_rel, report.extra["ratio_to_floor"], report.skipped,
    )
    return report


# ─── Full equation ────────────────────────────────────────


def residual_cnlse(psi: SampledField, a: float, tolerance: Optional[float] = None) -> ResidualReport:
    """
    iΨ_z + Ψ_tt + aΨ|Ψ|² on a uniform grid with fourth-order stencils.

    The residual is de-rotated by e^{−iφ(z)} when the field carries its phase;
    the real part is the equation for f, the imaginary part the Riccati
    condition.

    Raises:
        InvalidInputError: fewer than 5 points along t or z
        ResolutionError: the truncation/rounding floor exceeds ``tolerance``
    """
    if psi.values.shape[0] < 5 or psi.values.shape[1] < 5:
        raise InvalidInputError("residual_cnlse needs at least 5x5 grid points", {"shape": list(psi.values.shape)})
    values = np.asarray(psi.values, dtype=complex)
    dz, dt = psi.dz, psi.dt

    psi_z4 = interior(first_derivative_4(values, dz, axis=0), axis=1)
    psi_z2 = interior(first_derivative_2(values, dz, axis=0), axis=1)
    psi_tt4 = interior(second_derivative_4(values, dt, axis=1), axis=0)
    psi_tt2 = interior(second_derivative_2(values, dt, axis=1), axis=0)
    core = interior(interior(values, axis=0), axis=1)
    z_in = interior(psi.z_grid)
    t_in = interior(psi.t_grid)

    nonlinear = a * core * np.abs(core) ** 2
    residual = 1j * psi_z4 + psi_tt4 + nonlinear
    terms = [psi_z4, psi_tt4, nonlinear]
    norm = 1.0 + np.max(np.stack([np.abs(x) for x in terms]), axis=0)

    finite = np.isfinite(core)
    max_psi = float(np.max(np.abs(core[finite]))) if finite.any() else 0.0
    trunc = np.abs(psi_z4 - psi_z2) + np.abs(psi_tt4 - psi_tt2)
    rounding = EPS * max_psi * (1.0 / dz + 1.0 / dt**2)
    floor_pt = (trunc + rounding) / norm
    finite_floor = floor_pt[np.isfinite(floor_pt)]
    floor = float(finite_floor.max()) if finite_floor.size else 0.0
    if tolerance is not None and floor > tolerance:
        raise ResolutionError(
            "grid too coarse for the requested tolerance",
            {"floor": floor, "tolerance": tolerance, "dt": dt, "dz": dz},
        )

    if psi.phase is not None:
        rotated = residual * np.exp(-1j * interior(np.asarray(psi.phase, dtype=float)))[:, None]
    else:
        logger.warning("field carries no phase; splitting the residual without de-rotation")
        rotated = residual

    coords = [t_in[None, :], z_in[:, None]]
    grid = {**_grid_spec("t", psi.t_grid), **_grid_spec("z", psi.z_grid), "a": a}
    report = _reduce("cnlse", residual, terms, coords, grid, floor)
    report.parts["real"] = _reduce("real", rotated.real, terms, coords, {}, floor)
    report.parts["imag"] = _reduce("imag", rotated.imag, terms, coords, {}, floor)
    logger.info(
        "residual_cnlse max_rel=%.3e (real %.3e, imag %.3e) floor=%.3e",
        report.max_rel, report.parts["real"].max_rel, report.parts["imag"].max_rel, floor,
    )
    return report


# ─── Oracles ──────────────────────────────────────────────


@dataclass
class OracleCurve:
    kind: Literal["h-curve", "phi-curve"]
    z: np.ndarray
    h: np.ndarray
    hz: np.ndarray
    phi: np.ndarray
    period: float
    turning_points: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.h if self.kind == "h-curve" else self.phi


def ode_oracle(
    params: SolutionParams,
    kind: Literal["h-curve", "phi-curve"] = "h-curve",
    z_max: float = 10.0,
    n_points: int = 1024,
    rtol: float = ODE_RTOL,
) -> OracleCurve:
    """
    Integrate h_zz = R₁′(h)/2 and φ_z = c₁ − 2ah with DOP853.

    Starts from (h₀, −√R₁(h₀), φ₀), the branch the closed form takes. The
    period is twice the median spacing of turning points (h_z = 0).

    Raises:
        NumericFailureError: the integrator stopped early
    """
    if not (math.isfinite(z_max) and z_max > 0):
        raise InvalidInputError("z_max must be positive and finite", {"z_max": z_max})
    q = r1_coefficients(params)
    h0 = params.h0
    r = float(q.evaluate(h0))
    if abs(r) <= ROOT_TOL * q.scale() * max(1.0, h0) ** 4:
        r = 0.0
    if r < 0:
        raise InvalidInputError("R1(h0) < 0: no real curve through h0", {"R1_h0": r})
    constant = r == 0.0 and abs(float(q.derivative(h0))) <= ROOT_TOL * q.scale()

    def rhs(_z, y):
        return [y[1], 0.5 * float(q.derivative(y[0])), params.c1 - 2.0 * params.a * y[0]]

    def turning(_z, y):
        return y[1]

    z_eval = np.linspace(0.0, z_max, n_points)
    sol = solve_ivp(
        rhs,
        (0.0, z_max),
        [h0, -math.sqrt(r), params.phi0],
        method="DOP853",
        t_eval=z_eval,
        rtol=rtol,
        atol=ODE_ATOL,
        events=None if constant else turning,
    )
    if sol.status != 0:
        raise NumericFailureError("ODE oracle failed", {"message": sol.message, "z_max": z_max})

    turns = np.asarray(sol.t_events[0]) if sol.t_events is not None else np.array([])
    period = 2.0 * float(np.median(np.diff(turns))) if turns.size >= 2 else math.inf
    logger.debug("ode oracle: %d turning points, period %.12g", turns.size, period)
    return OracleCurve(
        kind=kind,
        z=sol.t,
        h=sol.y[0],
        hz=sol.y[1],
        phi=sol.y[2],
        period=period,
        turning_points=turns,
    )


def period_quadrature(params: SolutionParams) -> float:
    """
    Lz = 2∫ dh/√R₁(h) across the oscillation interval containing h₀.

    The inverse square-root endpoint singularities go into quad's algebraic
    weight. Returns inf when the interval is unbounded.
    """
    q = r1_coefficients(params)
    interval = pdc_classify(q).interval_containing(params.h0)
    if interval is None:
        raise InvalidInputError("h0 lies outside every interval with R1 >= 0", {"h0": params.h0})
    lo, hi = interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return math.inf
    width = hi - lo
    lo_slope = float(q.derivative(lo)) / width
    hi_slope = -float(q.derivative(hi)) / width

    def smooth(h: float) -> float:
        gap = (h - lo) * (hi - h)
        if gap <= 0.0:
            ratio = lo_slope if h - lo <= hi - h else hi_slope
        else:
            ratio = float(q.evaluate(h)) / gap
        return 1.0 / math.sqrt(ratio) if ratio > 0 else 0.0

    value, err = quad(smooth, lo, hi, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-13, epsrel=1e-12)
    logger.debug("quadrature period over [%.6g, %.6g]: %.12g (err %.1e)", lo, hi, 2 * value, err)
    return 2.0 * value
