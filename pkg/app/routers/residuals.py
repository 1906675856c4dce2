"""Residual endpoints: compact summary of the residual audit for one parameter set."""

import logging

import numpy as np
from fastapi import APIRouter, Depends
from pydantic import Field

from analyzers.physicality import check_h
from analyzers.residual_lab import residual_f, residual_h, residual_phase, residual_riccati
from app.config import RunConfig
from app.dependencies import get_run_defaults
from app.routers.solution import SolutionRequest, jsonable, run_guarded
from core.solution_family import build_f_solution, build_h_solution, build_phi_solution, t_slice

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/api/residuals", tags=["residuals"])


class SummaryRequest(SolutionRequest):
    z_points: int = Field(default=32, ge=8, le=1024)
    t_points: int = Field(default=32, ge=8, le=1024)


def _summary(report) -> dict:
    return {
        "max_abs": report.max_abs,
        "max_rel": report.max_rel,
        "location": None if report.location is None else list(report.location),
        "construction_error_floor": report.construction_error_floor,
        "skipped": report.skipped,
        "evaluated": report.evaluated,
        **report.extra,
    }


@router.post("/summary")
def residual_summary(req: SummaryRequest, defaults: RunConfig = Depends(get_run_defaults)):
    """residual_h, residual_f at z=0, residual_phase and residual_riccati over one period."""

    def _compute():
        tol = defaults.tolerances
        report = check_h(req.params, reading=req.reading, degeneracy_tol=tol.degeneracy_tol)
        if not report.satisfied:
            raise ValueError(f"h is not physical for these parameters ({report.case} case)")
        hs = build_h_solution(req.params, reading=req.reading, pole_epsilon=tol.pole_epsilon)
        ps, fs = build_phi_solution(hs), build_f_solution(hs)
        lz = hs.Lz if np.isfinite(hs.Lz) else 1.0
        z_grid = np.linspace(0.0, lz, req.z_points)
        z_ric = np.linspace(0.05 * lz, 0.45 * lz, min(req.z_points, 8))

        lt = t_slice(hs, float(z_ric[0]), req.params.f0).Lt
        half = 0.25 * (lt if np.isfinite(lt) else 10.0)
        t_grid = np.linspace(-half, half, req.t_points)

        reports = {
            "h": residual_h(hs, z_grid),
            "f": residual_f(fs, 0.0, t_grid),
            "phase": residual_phase(ps, hs, z_grid),
            "riccati": residual_riccati(fs, hs, req.params, t_grid, z_ric),
        }
        ratio = reports["riccati"].extra.get("ratio_to_floor", 0.0)
        return {
            "case": report.case,
            "reports": {k: _summary(v) for k, v in reports.items()},
            "riccati_violated": ratio >= tol.riccati_ratio,
        }

    return {"status": "ok", "data": jsonable(run_guarded("residual summary", _compute))}
