"""System endpoints: health check and active settings."""

import logging

from fastapi import APIRouter

from app.config import ARTIFACT_VERSION, get_settings

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/api/system", tags=["system"])


@router.get("/health")
def health_check():
    """Health check endpoint."""
    return {"status": "ok", "service": "ellipnls", "version": ARTIFACT_VERSION}


@router.get("/settings")
def current_settings():
    """Numerical settings in effect for this process."""
    s = get_settings()
    return {
        "status": "ok",
        "data": {
            "threads": s.threads,
            "coefficient_reading": s.coefficient_reading,
            "pole_epsilon": s.pole_epsilon,
            "degeneracy_tol": s.degeneracy_tol,
            "multiplicity_tol": s.multiplicity_tol,
            "boundary_tol": s.boundary_tol,
        },
    }
