"""FastAPI application entry point."""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from app.config import ARTIFACT_VERSION, get_settings

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup / shutdown lifecycle."""
    settings = get_settings()

    # Configure logging
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
    )
    logger.info("ellipnls API started (threads=%d, reading=%s)", settings.threads, settings.coefficient_reading)

    yield

    logger.info("ellipnls API stopped")


app = FastAPI(
    title="ellipnls",
    description="Elliptic-function background solutions of the cubic NLSE: coefficients, periods and residual audits",
    version=ARTIFACT_VERSION,
    lifespan=lifespan,
)

# Register routers
from app.routers import residuals, solution, system  # noqa: E402

app.include_router(system.router)
app.include_router(solution.router)
app.include_router(residuals.router)
