"""Command implementations shared by the CLI, the API and the appendix reproduction.

Each command writes its artifacts through an ArtifactStore and returns a
CommandOutcome; failed checks and discrepancies against stated values turn into exit code 2.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analyzers.consistency_search import SearchConfig, SearchRanges, consistency_search
from analyzers.physicality import HPhysicalityReport, admissible_region, check_h, slice_bounded
from analyzers.residual_lab import (
    ode_oracle,
    period_quadrature,
    residual_cnlse,
    residual_f,
    residual_h,
    residual_phase,
    residual_riccati,
)
from analyzers import spectral_check
from app.config import ARTIFACT_VERSION, RunConfig, Settings, get_settings
from core.exceptions import EllipNLSError, InvalidInputError
from core.quartic import pdc_classify, r1_coefficients
from core.solution_family import (
    FSolution,
    HSolution,
    PhiSolution,
    build_f_solution,
    build_h_solution,
    build_phi_solution,
    f_field,
    h_with_derivative,
    phi_eval,
    phi_eval_printed,
    psi_field,
    t_slice,
)
from core.weierstrass import invariants_from_quartic, invariants_printed_reading, lattice_from_invariants
from storage.artifact_store import ArtifactStore
from utils.formatters import ReportFormatter

logger = logging.getLogger(__name__)

Check = Tuple[str, bool, str]


@dataclass
class CommandOutcome:
    command: str
    artifacts: List[Path] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    discrepancies: List[str] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        failed = any(not ok for _, ok, _ in self.checks)
        return 2 if failed or self.discrepancies else 0

    def check(self, name: str, ok: bool, detail: str):
        self.checks.append((name, bool(ok), detail))
        if ok:
            logger.info("check passed: %s (%s)", name, detail)
        else:
            logger.warning("check failed: %s (%s)", name, detail)


@dataclass
class SolutionContext:
    """Lazily built solution objects for one run."""

    config: RunConfig
    settings: Settings
    store: ArtifactStore

    @property
    def params(self):
        return self.config.params

    @cached_property
    def h_report(self) -> HPhysicalityReport:
        return check_h(self.params, reading=self.config.reading, degeneracy_tol=self.config.tolerances.degeneracy_tol)

    @cached_property
    def hs(self) -> HSolution:
        tol = self.config.tolerances
        return build_h_solution(
            self.params,
            reading=self.config.reading,
            pole_epsilon=tol.pole_epsilon,
            degeneracy_tol=tol.degeneracy_tol,
        )

    @cached_property
    def ps(self) -> PhiSolution:
        return build_phi_solution(self.hs)

    @cached_property
    def fs(self) -> FSolution:
        return build_f_solution(self.hs)

    @property
    def lz_scale(self) -> float:
        """Lz, or a representative length for non-periodic h."""
        lat = self.hs.lat_z
        if math.isfinite(lat.omega):
            return lat.real_period
        return lat.min_period if math.isfinite(lat.min_period) else 1.0

    def z_grid(self, points: int, periods: Optional[float] = None) -> np.ndarray:
        periods = self.config.grids.z_periods if periods is None else periods
        return np.linspace(0.0, periods * self.lz_scale, points)

    def lt_scale(self, z: float) -> float:
        lt = t_slice(self.hs, z, self.params.f0).Lt
        if math.isfinite(lt):
            return lt
        return 10.0

    def meta(self, **extra) -> Dict[str, Any]:
        return {"reading": self.config.reading, **extra}

    def report(self, outcome: CommandOutcome, title: str, sections, residuals=()) -> None:
        rows: List[Tuple[str, Any]] = []
        for heading, items in sections.items():
            rows += [(f"{heading}.{k}", v) for k, v in items]
        for r in residuals:
            rows += r.as_rows()
        rows += [(f"check.{name}", ok) for name, ok, _ in outcome.checks]
        rows += [(f"discrepancy.{i}", d) for i, d in enumerate(outcome.discrepancies, 1)]
        text = ReportFormatter.format_report(title, sections, outcome.checks, outcome.discrepancies, residuals)
        outcome.artifacts += self.store.write_report(outcome.command, rows, text, self.meta())


def _require_physical(ctx: SolutionContext):
    rep = ctx.h_report
    if not rep.satisfied:
        raise InvalidInputError(f"h is not physical for these parameters ({rep.case} case)", rep.details)


def _lattice_row(reading: str, inv) -> Dict[str, Any]:
    row = {"reading": reading, "g2": inv.g2, "g3": inv.g3, "delta": inv.delta}
    try:
        row["Lz"] = lattice_from_invariants(inv).real_period
    except EllipNLSError as e:
        logger.warning("no lattice for %s invariants: %s", reading, e.message)
        row["Lz"] = math.nan
    return row


# ─── coeffs ───────────────────────────────────────────────


def cmd_coeffs(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("coeffs")
    q1 = r1_coefficients(ctx.params)
    rows = [{"quartic": "R1", "z": math.nan, **q1.as_row()}]
    if ctx.h_report.satisfied:
        lz = ctx.lz_scale
        for z in (0.0, 0.25 * lz, 0.5 * lz):
            rows.append({"quartic": "R2", "z": z, **ctx.fs.at(z).q2.as_row()})

    columns = ["quartic", "z", "alpha", "beta", "gamma", "delta", "epsilon"]
    out.artifacts.append(ctx.store.write_table("coeffs", "coefficients.csv", pd.DataFrame(rows, columns=columns), ctx.meta()))

    inv_rows = [
        _lattice_row("derived", invariants_from_quartic(q1)),
        _lattice_row("printed", invariants_printed_reading(q1)),
    ]
    out.artifacts.append(ctx.store.write_table("coeffs", "invariants.csv", pd.DataFrame(inv_rows), ctx.meta()))
    out.data = {"r1": q1.as_row(), "invariants": inv_rows, "r2": rows[1:]}

    sections = {
        "R1": list(q1.as_row().items()),
        "invariants": [(f"{r['reading']}.{k}", r[k]) for r in inv_rows for k in ("g2", "g3", "delta", "Lz")],
    }
    ctx.report(out, "coeffs", sections)
    return out


# ─── phase-diagram (h vs R1) ──────────────────────────────


def cmd_phase_diagram(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("phase-diagram")
    q1 = r1_coefficients(ctx.params)
    pdc = pdc_classify(q1, multiplicity_tol=ctx.config.tolerances.multiplicity_tol)
    interval = pdc.interval_containing(ctx.params.h0)
    if interval is not None and math.isfinite(interval[1]):
        lo, hi = interval
    else:
        positive = [r.value for r in pdc.pdc_roots if r.value > 0]
        lo, hi = 0.0, (max(positive) if positive else 1.0)
    pad = 0.1 * (hi - lo if hi > lo else 1.0)
    h = np.linspace(max(lo - pad, 0.0), hi + pad, ctx.config.grids.curve_points)
    out.artifacts.append(
        ctx.store.write_curve("phase-diagram", "phase_diagram.csv", {"h": h, "R1": q1.evaluate(h)}, ctx.meta())
    )

    roots = pd.DataFrame(
        {"value": [r.value for r in pdc.real_roots], "multiplicity": [r.multiplicity for r in pdc.real_roots]},
        columns=["value", "multiplicity"],
    )
    out.artifacts.append(ctx.store.write_table("phase-diagram", "roots.csv", roots, ctx.meta()))
    out.data = {"pdc": pdc, "interval": interval}
    sections = {
        "phase diagram": [
            ("sign_changes", pdc.sign_changes),
            ("positive_root_count", pdc.positive_root_count),
            ("interval_containing_h0", "none" if interval is None else list(interval)),
            ("positivity_intervals", [x for iv in pdc.positivity_intervals for x in iv]),
        ],
        "roots": [(f"root{i}", [r.value, r.multiplicity]) for i, r in enumerate(pdc.real_roots)],
    }
    ctx.report(out, "phase-diagram", sections)
    return out


# ─── h-profile ────────────────────────────────────────────


def cmd_h_profile(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("h-profile")
    rep = ctx.h_report
    out.check("check_h", rep.satisfied, f"{rep.case} case, behavior {rep.behavior}")
    _require_physical(ctx)
    tol = ctx.config.tolerances
    hs = ctx.hs
    z_max = ctx.config.grids.z_periods * ctx.lz_scale
    oracle = ode_oracle(ctx.params, "h-curve", z_max=z_max, n_points=ctx.config.grids.curve_points)
    h, hz = h_with_derivative(oracle.z, hs, strict=False)
    diff = np.abs(h - oracle.h)
    rel = float(np.nanmax(diff) / max(np.nanmax(np.abs(oracle.h)), 1e-300))
    out.artifacts.append(
        ctx.store.write_curve(
            "h-profile",
            "h_profile.csv",
            {"z": oracle.z, "h": h, "hz": hz, "h_oracle": oracle.h},
            ctx.meta(Lz=hs.Lz, case=rep.case, behavior=rep.behavior),
        )
    )

    res_h = residual_h(hs, oracle.z)
    out.check("residual_h", res_h.max_rel <= tol.residual_h, f"max_rel {res_h.max_rel:.3e} <= {tol.residual_h:.1e}")
    out.check("oracle_equivalence", rel <= tol.oracle_rel, f"max rel diff {rel:.3e} <= {tol.oracle_rel:.1e}")
    quad_period = period_quadrature(ctx.params)
    if math.isfinite(hs.Lz):
        for name, value in (("oracle_period", oracle.period), ("quadrature_period", quad_period)):
            err = abs(value - hs.Lz) / hs.Lz
            out.check(name, err <= tol.period_rel, f"{value:.12g} vs 2ω {hs.Lz:.12g} (rel {err:.2e})")

    out.data = {
        "Lz": hs.Lz,
        "oracle_period": oracle.period,
        "quadrature_period": quad_period,
        "h_max": float(np.nanmax(h)),
        "h_min": float(np.nanmin(h)),
        "oracle_rel_diff": rel,
        "h_report": rep,
    }
    sections = {
        "h": [
            ("case", rep.case),
            ("behavior", rep.behavior),
            ("form", hs.form),
            ("Lz", hs.Lz),
            ("oracle_period", oracle.period),
            ("quadrature_period", quad_period),
            ("h_min", out.data["h_min"]),
            ("h_max", out.data["h_max"]),
        ],
        "check_h": sorted(rep.details.items()),
    }
    ctx.report(out, "h-profile", sections, [res_h])
    return out


# ─── region ───────────────────────────────────────────────


def cmd_region(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("region")
    _require_physical(ctx)
    g = ctx.config.grids
    z_hi = g.z_periods * ctx.lz_scale
    region = admissible_region(
        ctx.params,
        f0_range=tuple(g.f0_range),
        z_range=(0.0, z_hi),
        resolution=(g.region_f0_points, g.region_z_points),
        boundary_tol=ctx.config.tolerances.boundary_tol,
        threads=ctx.settings.threads,
        reading=ctx.config.reading,
        hs=ctx.hs,
    )
    store, meta = ctx.store, ctx.meta(focusing=region.focusing)
    out.artifacts.append(store.write_region("region", "region_r2.csv", region, region.mask_r2, meta))
    out.artifacts.append(store.write_region("region", "region_e1.csv", region, region.mask_e1, meta))
    out.artifacts.append(store.write_region("region", "region.csv", region, region.mask, meta))
    if region.mask_plus is not None:
        out.artifacts.append(store.write_region("region", "region_e1_plus.csv", region, region.mask_plus, meta))
        out.artifacts.append(store.write_region("region", "region_e1_minus.csv", region, region.mask_minus, meta))
    out.artifacts.append(store.write_boundary("region", "boundary.csv", region, meta))

    rows = []
    for f0 in ctx.config.region.f0_rows:
        i = region.row_index(f0)
        rows += [
            (f"f0={f0!r}.admissible_all_z", region.row_admissible(f0)),
            (f"f0={f0!r}.crossings", region.row_crossings(f0)),
            (f"f0={f0!r}.r2_ok_all_z", bool(region.mask_r2[i].all())),
            (f"f0={f0!r}.e1_ok_all_z", bool(region.mask_e1[i].all())),
        ]
    out.data = {"region": region, "rows": dict(rows)}
    sections = {
        "region": [
            ("admissible_fraction", float(region.mask.mean())),
            ("boundary_points", len(region.boundary)),
            ("empty", region.is_empty),
            ("sign_rule", "focusing" if region.focusing else "defocusing (both signs required)"),
        ],
        "rows": rows,
    }
    ctx.report(out, "region", sections)
    return out


# ─── surface ──────────────────────────────────────────────


def cmd_surface(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("surface")
    _require_physical(ctx)
    g = ctx.config.grids
    half = 0.5 * g.t_periods * ctx.lt_scale(0.0)
    t_grid = np.linspace(-half, half, g.surface_t_points)
    z_grid = ctx.z_grid(g.surface_z_points)
    sections: Dict[str, List[Tuple[str, Any]]] = {}
    for k, f0 in enumerate(ctx.config.surface.f0_values):
        fs = build_f_solution(ctx.hs, f0)
        psi, intensity = psi_field(t_grid, z_grid, ctx.hs, ctx.ps, fs, meta=ctx.meta(f0=f0))
        f = f_field(t_grid, z_grid, fs, meta=ctx.meta(f0=f0, quantity="f"))
        out.artifacts.append(ctx.store.write_field("surface", f"intensity_{k}.csv", intensity))
        out.artifacts.append(ctx.store.write_field("surface", f"f_{k}.csv", f))
        finite = np.isfinite(intensity.values)
        sections[f"f0={f0!r}"] = [
            ("finite_fraction", float(finite.mean())),
            ("intensity_max", float(intensity.values[finite].max()) if finite.any() else math.nan),
        ]
    ctx.report(out, "surface", sections)
    return out


# ─── period-t ─────────────────────────────────────────────


READINGS = ("derived", "printed")
# Lt(z) counts as z-independent below this relative spread
LT_CONSTANT_REL = 1e-9


def lt_curve(hs: HSolution, z_grid: np.ndarray, f0: float) -> np.ndarray:
    """Lt(z) on a grid; NaN where the t-lattice cannot be built."""
    lt = np.full(z_grid.shape, math.nan)
    for i, z in enumerate(z_grid):
        try:
            lt[i] = t_slice(hs, float(z), f0).Lt
        except EllipNLSError as e:
            logger.debug("no t-lattice at z=%.6g (%s reading): %s", z, hs.reading, e.message)
    return lt


def lt_spread(lt: np.ndarray) -> float:
    """(max − min)/max|Lt| over the finite values."""
    finite = lt[np.isfinite(lt)]
    if finite.size == 0:
        return math.nan
    return float((finite.max() - finite.min()) / max(np.abs(finite).max(), 1e-300))


def cmd_period_t(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("period-t")
    _require_physical(ctx)
    hs = ctx.hs
    z_grid = ctx.z_grid(ctx.config.grids.period_t_points)
    lt = np.array([t_slice(hs, z, ctx.params.f0).Lt for z in z_grid])
    # the readings share h(z) and differ only in the R₂ coefficients
    by_reading = {
        r: lt if r == hs.reading else lt_curve(replace(hs, reading=r), z_grid, ctx.params.f0) for r in READINGS
    }
    spread = {r: lt_spread(v) for r, v in by_reading.items()}
    columns = {"z": z_grid, "Lt": lt, **{f"Lt_{r}": v for r, v in by_reading.items()}}
    out.artifacts.append(ctx.store.write_curve("period-t", "period_t.csv", columns, ctx.meta(Lz=hs.Lz)))

    worst = 0.0
    if math.isfinite(hs.Lz):
        z_samples = np.linspace(0.05, 0.95, 7) * hs.Lz
        for z in z_samples:
            a, b = t_slice(hs, z, ctx.params.f0).Lt, t_slice(hs, z + hs.Lz, ctx.params.f0).Lt
            if math.isfinite(a) and math.isfinite(b):
                worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
        out.check("Lt_periodic_in_z", worst <= 1e-8, f"max |Lt(z+Lz) − Lt(z)|/Lt = {worst:.2e}")
    out.data = {
        "Lt": lt,
        "z": z_grid,
        "periodicity_error": worst,
        "Lt_by_reading": by_reading,
        "z_dependence": spread,
    }
    sections: Dict[str, List[Tuple[str, Any]]] = {}
    for r, values in by_reading.items():
        finite = values[np.isfinite(values)]
        sections[f"Lt ({r})"] = [
            ("Lt_min", float(finite.min()) if finite.size else math.nan),
            ("Lt_max", float(finite.max()) if finite.size else math.nan),
            ("z_dependence", spread[r]),
            ("constant_in_z", bool(spread[r] <= LT_CONSTANT_REL)),
        ]
    sections["Lt"] = [("reading", hs.reading), ("periodicity_error", worst)]
    ctx.report(out, "period-t", sections)
    return out


# ─── phase ────────────────────────────────────────────────


def cmd_phase(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("phase")
    _require_physical(ctx)
    tol = ctx.config.tolerances
    z_max = ctx.config.grids.z_periods * ctx.lz_scale
    oracle = ode_oracle(ctx.params, "phi-curve", z_max=z_max, n_points=ctx.config.grids.curve_points)
    phi = phi_eval(oracle.z, ctx.ps, ctx.hs)
    columns = {"z": oracle.z, "phi": phi, "phi_oracle": oracle.phi}
    printed_dev = None
    if ctx.params.h0 == 0.0:
        printed = phi_eval_printed(oracle.z, ctx.ps, ctx.hs)
        columns["phi_printed"] = printed
        printed_dev = float(np.max(np.abs(printed - oracle.phi)))
    out.artifacts.append(ctx.store.write_curve("phase", "phase.csv", columns, ctx.meta()))

    dev = float(np.max(np.abs(phi - oracle.phi)))
    out.check("phase_vs_quadrature", dev <= tol.residual_phase, f"max |φ − φ_oracle| = {dev:.3e}")
    res = residual_phase(ctx.ps, ctx.hs, oracle.z[:: max(1, oracle.z.size // 64)])
    out.check("residual_phase", res.max_abs <= tol.residual_phase, f"max_abs {res.max_abs:.3e}")
    out.data = {"deviation": dev, "printed_deviation": printed_dev, "branch": ctx.ps.branch_state}
    sections = {
        "phase": [
            ("mode", ctx.ps.mode),
            ("deviation_from_quadrature", dev),
            ("printed_form_deviation", "n/a" if printed_dev is None else printed_dev),
            ("branch_corrections", ctx.ps.branch_state.corrections),
            ("walk_step", ctx.ps.branch_state.walk_step),
        ]
    }
    ctx.report(out, "phase", sections, [res])
    return out


# ─── residuals ────────────────────────────────────────────


def cnlse_window(ctx: SolutionContext) -> Tuple[np.ndarray, np.ndarray]:
    """Fine (t, z) patch inside the admissible set, steps about 1e-3 of both periods."""
    g = ctx.config.grids
    lz = ctx.lz_scale
    z0 = 0.2 * lz
    lt = ctx.lt_scale(z0)
    t_grid = np.linspace(-0.125 * lt, 0.125 * lt, g.cnlse_t_points)
    z_grid = np.linspace(z0, z0 + 1e-3 * lz * (g.cnlse_z_points - 1), g.cnlse_z_points)
    return t_grid, z_grid


def _slice_admissible(ctx: SolutionContext, z: float) -> bool:
    try:
        return ctx.fs.at(z).r2_at_f0 >= 0
    except EllipNLSError:
        return False


def admissible_slices(ctx: SolutionContext, targets: Sequence[float], samples: int = 64) -> List[float]:
    """Each target z, or the nearest z of a one-period grid with R₂(f0, z) ≥ 0.

    A target is kept as is when no grid z is admissible.
    """
    grid: Optional[List[float]] = None
    chosen: List[float] = []
    for target in map(float, targets):
        z = target
        if not _slice_admissible(ctx, target):
            if grid is None:
                grid = [
                    float(s) for s in np.linspace(0.0, ctx.lz_scale, samples + 1) if _slice_admissible(ctx, float(s))
                ]
            if grid:
                z = min(grid, key=lambda s: abs(s - target))
                logger.info("residual slice moved from z=%.6g to z=%.6g (R2 < 0 there)", target, z)
        if z not in chosen:
            chosen.append(z)
    return chosen


def cmd_residuals(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("residuals")
    _require_physical(ctx)
    tol, g = ctx.config.tolerances, ctx.config.grids
    hs, ps, fs = ctx.hs, ctx.ps, ctx.fs
    lz = ctx.lz_scale
    reports = []

    r_h = residual_h(hs, ctx.z_grid(g.residual_z_points))
    out.check("residual_h", r_h.max_rel <= tol.residual_h, f"max_rel {r_h.max_rel:.3e}")
    reports.append(r_h)

    for z in admissible_slices(ctx, (0.0, 0.25 * lz, 0.5 * lz)):
        half = 0.5 * g.t_periods * ctx.lt_scale(z)
        r_f = residual_f(fs, z, np.linspace(-half, half, g.residual_t_points))
        r_f.equation = f"f@z={z:.6g}"
        name = f"residual_f z={z:.6g}"
        if not r_f.evaluated:
            out.check(name, False, f"not evaluated: all {r_f.skipped} cells skipped")
            out.discrepancies.append(f"{name} was not evaluated, R2(f0, z) < 0 on the whole slice")
        else:
            out.check(name, r_f.max_rel <= tol.residual_f, f"max_rel {r_f.max_rel:.3e}")
        reports.append(r_f)

    r_phi = residual_phase(ps, hs, ctx.z_grid(g.residual_z_points, periods=1.0))
    out.check("residual_phase", r_phi.max_abs <= tol.residual_phase, f"max_abs {r_phi.max_abs:.3e}")
    reports.append(r_phi)

    z_ric = np.linspace(0.05 * lz, 0.45 * lz, g.riccati_z_points)
    lt = ctx.lt_scale(float(z_ric[0]))
    t_ric = np.linspace(-0.25 * lt, 0.25 * lt, g.riccati_t_points)
    r_ric = residual_riccati(fs, hs, ctx.params, t_ric, z_ric)
    reports.append(r_ric)
    ratio = r_ric.extra.get("ratio_to_floor", 0.0)
    riccati_violated = ratio >= tol.riccati_ratio

    t_c, z_c = cnlse_window(ctx)
    psi, _ = psi_field(t_c, z_c, hs, ps, fs, meta=ctx.meta())
    r_cn = residual_cnlse(psi, ctx.params.a)
    reports.append(r_cn)
    real = r_cn.parts["real"]
    floor = max(r_cn.construction_error_floor, 1e-300)
    out.check(
        "cnlse_real_part_at_floor",
        real.max_rel <= tol.cnlse_real_ratio * floor,
        f"real max_rel {real.max_rel:.3e} vs floor {floor:.3e}",
    )

    out.data = {
        "reports": reports,
        "riccati_ratio": ratio,
        "riccati_violated": riccati_violated,
        "cnlse_imag_max_rel": r_cn.parts["imag"].max_rel,
    }
    sections = {
        "riccati": [
            ("ratio_to_construction_floor", ratio),
            ("violated", riccati_violated),
            ("cnlse_imag_max_rel", r_cn.parts["imag"].max_rel),
        ]
    }
    ctx.report(out, "residuals", sections, reports)
    return out


# ─── ssfm-check ───────────────────────────────────────────


def choose_seed_z(ctx: SolutionContext, samples: int = 64) -> Optional[float]:
    """First z in one period where f is real and bounded."""
    for z in np.linspace(0.0, ctx.lz_scale, samples, endpoint=False)[1:]:
        try:
            if slice_bounded(ctx.fs.at(float(z))):
                return float(z)
        except EllipNLSError:
            continue
    return None


def cmd_ssfm_check(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("ssfm-check")
    opts = ctx.config.ssfm
    selftest = spectral_check.self_test(a=1.0, dz=opts.dz, z_span=1.0, n_modes=64)
    out.check("plane_wave_exact", selftest["plane_wave_error"] <= 1e-8, f"{selftest['plane_wave_error']:.2e}")
    out.check("power_conserved", selftest["power_drift_per_z"] <= 1e-10, f"{selftest['power_drift_per_z']:.2e}")
    out.check("time_reversal", selftest["time_reversal_error"] <= 1e-7, f"{selftest['time_reversal_error']:.2e}")

    result: Dict[str, Any] = {"status": "skipped", "reason": "h not physical"}
    if ctx.h_report.satisfied:
        z0 = opts.z0 if opts.z0 is not None else choose_seed_z(ctx)
        if z0 is None:
            result = {"status": "skipped", "reason": "no z with bounded real f in one period"}
        else:
            lt = ctx.lt_scale(z0)
            cfg = spectral_check.SpectralConfig(
                window=opts.window_periods * lt,
                n_modes=opts.n_modes,
                dz=opts.dz,
                z_span=opts.z_span if opts.z_span is not None else 0.25 * ctx.lz_scale,
            )
            result = spectral_check.cross_validate(ctx.hs, ctx.ps, ctx.fs, cfg, z0=z0)
    out.data = {"selftest": selftest, "cross_validation": result}
    sections = {"self-test": list(selftest.items()), "cross-validation": sorted(result.items())}
    ctx.report(out, "ssfm-check", sections)
    return out


# ─── search ───────────────────────────────────────────────


def cmd_search(ctx: SolutionContext) -> CommandOutcome:
    out = CommandOutcome("search")
    opts = ctx.config.search
    ranges = SearchRanges.around(ctx.params, opts.width)
    if ctx.params.a * (ctx.params.a - opts.width) <= 0 or ctx.params.a * (ctx.params.a + opts.width) <= 0:
        # keep the sign of a inside the box
        lo, hi = ranges.a
        ranges = ranges.model_copy(update={"a": (lo, -1e-6) if ctx.params.a < 0 else (1e-6, hi)})
    cfg = SearchConfig(
        budget=opts.budget,
        seed=opts.seed,
        top_k=opts.top_k,
        require_bounded=opts.require_bounded,
        threads=ctx.settings.threads,
        reading=ctx.config.reading,
    )
    result = consistency_search(ranges, cfg)
    out.artifacts.append(
        ctx.store.write_curve(
            "search",
            "trace.csv",
            {"sample": np.arange(len(result.trace)), "best_so_far": np.array(result.trace)},
            ctx.meta(seed=opts.seed, budget=opts.budget, width=opts.width),
        )
    )
    best = result.best
    rows: List[Tuple[str, Any]] = [
        ("status", result.status),
        ("evaluated", result.evaluated),
        ("physical", result.physical_count),
    ]
    residuals = []
    if best is not None:
        rows += [(f"best.{k}", v) for k, v in best.params.model_dump().items()]
        rows += [("best.objective", best.objective), ("best.bounded", best.bounded)]
        if best.report is not None:
            residuals.append(best.report)
    out.data = {"result": result}
    ctx.report(out, "search", {"search": rows}, residuals)
    return out


# ─── dispatch ─────────────────────────────────────────────


def cmd_reproduce_appendix(ctx: SolutionContext) -> CommandOutcome:
    from monitors.appendix_reporter import AppendixReproducer

    return AppendixReproducer(ctx).generate_report()


COMMANDS: Dict[str, Callable[[SolutionContext], CommandOutcome]] = {
    "coeffs": cmd_coeffs,
    "phase-diagram": cmd_phase_diagram,
    "h-profile": cmd_h_profile,
    "region": cmd_region,
    "surface": cmd_surface,
    "period-t": cmd_period_t,
    "phase": cmd_phase,
    "residuals": cmd_residuals,
    "ssfm-check": cmd_ssfm_check,
    "search": cmd_search,
    "reproduce-appendix": cmd_reproduce_appendix,
}


def make_context(config: RunConfig, settings: Optional[Settings] = None) -> SolutionContext:
    settings = settings or get_settings()
    store = ArtifactStore(config.out_dir, ARTIFACT_VERSION, config.params.model_dump())
    return SolutionContext(config=config, settings=settings, store=store)


def run_command(command: str, config: RunConfig, settings: Optional[Settings] = None) -> CommandOutcome:
    """
    Run one command.

    Raises:
        InvalidInputError: unknown command
        EllipNLSError: downstream numeric failures
    """
    handler = COMMANDS.get(command)
    if handler is None:
        raise InvalidInputError(f"unknown command '{command}'", {"known": sorted(COMMANDS)})
    ctx = make_context(config, settings)
    ctx.store.manifest.record_command(command)
    outcome = handler(ctx)
    logger.info(
        "%s finished: %d artifacts, %d checks failed, %d discrepancies",
        command,
        len(outcome.artifacts),
        sum(1 for _, ok, _ in outcome.checks if not ok),
        len(outcome.discrepancies),
    )
    return outcome
