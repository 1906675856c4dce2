"""Solution endpoints: coefficients, periods and the h(z) profile."""

import logging
import math
from typing import Any, Optional

import numpy as np
from fastapi import APIRouter, Depends, HTTPException
from pydantic import BaseModel, Field

from analyzers.physicality import check_h
from app.config import RunConfig
from app.dependencies import get_run_defaults
from core.exceptions import EllipNLSError
from core.quartic import CoefficientReading, SolutionParams, r1_coefficients
from core.solution_family import build_f_solution, build_h_solution, h_with_derivative, periods
from core.weierstrass import invariants_from_quartic, invariants_printed_reading

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/api/solution", tags=["solution"])


class SolutionRequest(BaseModel):
    """Parameter set plus evaluation options."""

    params: SolutionParams
    reading: CoefficientReading = Field(default="derived", description="'derived' or 'printed' γ₂ / invariants")
    z: Optional[float] = Field(default=None, description="slice position for z-dependent quantities")


class ProfileRequest(SolutionRequest):
    points: int = Field(default=256, ge=8, le=4096)
    periods: float = Field(default=1.0, gt=0, le=20)


def jsonable(value: Any) -> Any:
    """Recursively replace non-finite floats with None (JSON has no inf/nan)."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def run_guarded(what: str, fn):
    """Map ValueError / EllipNLSError to 400 and anything else to 500."""
    try:
        return fn()
    except (ValueError, EllipNLSError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error("Failed to compute %s: %s", what, e, exc_info=True)
        raise HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")


@router.post("/coeffs")
def coefficients(req: SolutionRequest):
    """R1 coefficients, invariants under both readings and R2 at z when h is physical."""

    def _compute():
        q1 = r1_coefficients(req.params)
        data = {"r1": q1.as_row(), "invariants": {}}
        for name, inv in (("derived", invariants_from_quartic(q1)), ("printed", invariants_printed_reading(q1))):
            data["invariants"][name] = {"g2": inv.g2, "g3": inv.g3, "delta": inv.delta}
        if req.z is not None:
            report = check_h(req.params, reading=req.reading)
            if report.satisfied:
                fs = build_f_solution(build_h_solution(req.params, reading=req.reading))
                data["r2"] = fs.at(req.z).q2.as_row()
            else:
                data["r2"] = None
        return data

    return {"status": "ok", "data": jsonable(run_guarded("coefficients", _compute))}


@router.post("/periods")
def solution_periods(req: SolutionRequest):
    """Lz and, when z is given, Lt(z); infinite periods come back as null."""

    def _compute():
        hs = build_h_solution(req.params, reading=req.reading)
        lz, lt = periods(hs, req.z)
        return {"Lz": lz, "Lt": lt, "z": req.z, "g2": hs.inv_z.g2, "g3": hs.inv_z.g3, "form": hs.form}

    return {"status": "ok", "data": jsonable(run_guarded("periods", _compute))}


@router.post("/h-profile")
def h_profile(req: ProfileRequest, defaults: RunConfig = Depends(get_run_defaults)):
    """h(z), h_z(z) sampled over a few periods, with the physicality verdict."""

    def _compute():
        report = check_h(req.params, reading=req.reading, degeneracy_tol=defaults.tolerances.degeneracy_tol)
        if not report.satisfied:
            raise ValueError(f"h is not physical for these parameters ({report.case} case)")
        hs = build_h_solution(
            req.params,
            reading=req.reading,
            pole_epsilon=defaults.tolerances.pole_epsilon,
            degeneracy_tol=defaults.tolerances.degeneracy_tol,
        )
        scale = hs.Lz if math.isfinite(hs.Lz) else hs.lat_z.min_period
        z = np.linspace(0.0, req.periods * (scale if math.isfinite(scale) else 1.0), req.points)
        h, hz = h_with_derivative(z, hs, strict=False)
        return {
            "case": report.case,
            "behavior": report.behavior,
            "Lz": hs.Lz,
            "z": z,
            "h": h,
            "hz": hz,
        }

    return {"status": "ok", "data": jsonable(run_guarded("h-profile", _compute))}
