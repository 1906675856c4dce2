"""Unified configuration: process settings (env / .env) and per-run TOML configs."""

from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic_settings import BaseSettings, TomlConfigSettingsSource

from config.presets import APPENDIX_PARAMS, FIGURE_WINDOWS, STATED_VALUES
from core.exceptions import InvalidInputError
from core.quartic import CoefficientReading, SolutionParams
from utils.data_parser import parse_overrides, set_dotted

ARTIFACT_VERSION = "1.0.0"


class Settings(BaseSettings):
    """Process settings loaded from environment variables / .env file."""

    # ─── Execution ────────────────────────────────────────────
    threads: int = Field(default=4, ge=1)
    log_level: str = "INFO"
    default_out_dir: str = "output"

    # ─── Numerics ─────────────────────────────────────────────
    pole_epsilon: float = Field(default=1e-8, gt=0)
    degeneracy_tol: float = Field(default=1e-12, gt=0)
    multiplicity_tol: float = Field(default=1e-7, gt=0)
    boundary_tol: float = Field(default=1e-6, gt=0)
    coefficient_reading: CoefficientReading = "derived"

    # ─── API ──────────────────────────────────────────────────
    api_host: str = "0.0.0.0"
    api_port: int = 8000

    model_config = {
        "env_prefix": "ELLIPNLS_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }


@lru_cache
def get_settings() -> Settings:
    """Return cached Settings instance (lives for the process lifetime)."""
    return Settings()


# ─── Run configuration ────────────────────────────────────


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Section):
    """Sampling windows (in periods) and resolutions of every figure."""

    z_periods: float = Field(default=FIGURE_WINDOWS["z_periods"], gt=0)
    t_periods: float = Field(default=FIGURE_WINDOWS["t_periods"], gt=0)
    f0_range: Tuple[float, float] = FIGURE_WINDOWS["f0_range"]
    curve_points: int = Field(default=512, ge=8)
    region_f0_points: int = Field(default=400, ge=8)
    region_z_points: int = Field(default=400, ge=8)
    surface_t_points: int = Field(default=128, ge=8)
    surface_z_points: int = Field(default=96, ge=8)
    period_t_points: int = Field(default=256, ge=8)
    residual_z_points: int = Field(default=64, ge=8)
    residual_t_points: int = Field(default=64, ge=8)
    riccati_z_points: int = Field(default=8, ge=8)
    riccati_t_points: int = Field(default=32, ge=8)
    cnlse_t_points: int = Field(default=256, ge=8)
    cnlse_z_points: int = Field(default=64, ge=8)

    @field_validator("f0_range")
    @classmethod
    def validate_window(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if v[1] <= v[0]:
            raise ValueError("f0_range must satisfy lo < hi")
        return v


class ToleranceConfig(_Section):
    pole_epsilon: float = Field(default=1e-8, gt=0)
    degeneracy_tol: float = Field(default=1e-12, gt=0)
    multiplicity_tol: float = Field(default=1e-7, gt=0)
    boundary_tol: float = Field(default=1e-6, gt=0)
    residual_h: float = Field(default=1e-8, gt=0)
    residual_f: float = Field(default=1e-6, gt=0)
    residual_phase: float = Field(default=1e-6, gt=0)
    oracle_rel: float = Field(default=1e-6, gt=0)
    period_rel: float = Field(default=1e-3, gt=0)
    stated_rel: float = Field(default=STATED_VALUES["Lz_rel_tol"], gt=0)
    riccati_ratio: float = Field(default=1e3, gt=0)
    cnlse_real_ratio: float = Field(default=1e2, gt=0)


class SurfaceOptions(_Section):
    f0_values: List[float] = [0.0, 0.8]


class RegionOptions(_Section):
    f0_rows: List[float] = [0.0, 0.8]


class SsfmOptions(_Section):
    n_modes: int = Field(default=256, ge=64)
    dz: float = Field(default=1e-4, gt=0)
    z_span: Optional[float] = Field(default=None, description="defaults to a quarter of Lz")
    window_periods: int = Field(default=1, ge=1)
    z0: Optional[float] = Field(default=None, description="seeding z; defaults to the first admissible grid z")


class SearchOptions(_Section):
    budget: int = Field(default=64, ge=1)
    seed: int = 0
    width: float = Field(default=0.05, ge=0)
    top_k: int = Field(default=3, ge=0)
    require_bounded: bool = False


class RunConfig(BaseSettings):
    """Everything one command needs; built from TOML plus ``--param`` overrides."""

    model_config = {"extra": "forbid", "env_prefix": "ELLIPNLS_RUN_"}

    params: SolutionParams = SolutionParams(**APPENDIX_PARAMS)
    grids: GridConfig = GridConfig()
    tolerances: ToleranceConfig = ToleranceConfig()
    out_dir: Path = Path("output")
    reading: CoefficientReading = "derived"
    surface: SurfaceOptions = SurfaceOptions()
    region: RegionOptions = RegionOptions()
    ssfm: SsfmOptions = SsfmOptions()
    search: SearchOptions = SearchOptions()


PARAM_KEYS = set(SolutionParams.model_fields)


def _defaults_from_settings(settings: Settings) -> Dict[str, Any]:
    return {
        "out_dir": settings.default_out_dir,
        "reading": settings.coefficient_reading,
        "tolerances": {
            "pole_epsilon": settings.pole_epsilon,
            "degeneracy_tol": settings.degeneracy_tol,
            "multiplicity_tol": settings.multiplicity_tol,
            "boundary_tol": settings.boundary_tol,
        },
    }


def _merge(base: Dict[str, Any], top: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for k, v in top.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[List[str]] = None,
    out_dir: Optional[Path] = None,
    settings: Optional[Settings] = None,
) -> RunConfig:
    """
    Build a RunConfig: settings defaults < TOML file < ``--param`` flags < ``--out``.

    Bare override keys naming a solution parameter (``a=-1``) go to
    ``[params]``; dotted keys (``grids.curve_points=200``) address sections.

    Raises:
        InvalidInputError: missing config file or malformed override
        pydantic.ValidationError: invalid values or unknown keys
    """
    settings = settings or get_settings()
    data = _defaults_from_settings(settings)
    params: Dict[str, Any] = dict(APPENDIX_PARAMS)

    if path is not None:
        if not Path(path).is_file():
            raise InvalidInputError("config file not found", {"path": str(path)})
        file_data = TomlConfigSettingsSource(RunConfig, toml_file=Path(path))()
        params.update(file_data.pop("params", {}))
        data = _merge(data, file_data)

    for key, value in parse_overrides(overrides or []).items():
        if key in PARAM_KEYS:
            params[key] = value
        else:
            set_dotted(data, key, value)

    data["params"] = params
    if out_dir is not None:
        data["out_dir"] = str(out_dir)
    return RunConfig.model_validate(data)
