"""FastAPI dependency injection."""

from functools import lru_cache

from app.config import RunConfig, get_settings, load_run_config


@lru_cache
def get_run_defaults() -> RunConfig:
    """Return cached default RunConfig (grids and tolerances for API requests)."""
    return load_run_config(settings=get_settings())
