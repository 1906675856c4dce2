"""Command-line entry point: ``ellipnls <command> --config <path> [--param key=value ...] --out <dir>``.

Exit codes: 0 all checks within tolerance, 2 reproduction discrepancies
found, 1 usage or numeric error (a JSON error record is printed).
"""

import json
import logging
import sys
from pathlib import Path
from typing import ClassVar, List, Optional, Sequence

from pydantic import Field, PrivateAttr, ValidationError
from pydantic_settings import BaseSettings, CliApp, CliSubCommand, SettingsError, get_subcommand

from app.commands import run_command
from app.config import Settings, get_settings, load_run_config
from core.exceptions import EllipNLSError

logger = logging.getLogger(__name__)


def setup_logging(settings: Settings):
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
    )


def _emit(record: dict):
    print(json.dumps(record, ensure_ascii=False, sort_keys=True, default=str))


def error_record(exc: Exception) -> dict:
    if isinstance(exc, EllipNLSError):
        return exc.to_record()
    if isinstance(exc, ValidationError):
        return {
            "status": "error",
            "error": "ValidationError",
            "message": f"{exc.error_count()} invalid configuration value(s)",
            "details": {"errors": exc.errors(include_url=False, include_context=False)},
        }
    return {"status": "error", "error": type(exc).__name__, "message": str(exc), "details": {}}


def run(
    command: str,
    config: Optional[Path] = None,
    params: Optional[Sequence[str]] = None,
    out: Optional[Path] = None,
    settings: Optional[Settings] = None,
) -> int:
    """Load the run config, execute one command and return its exit code."""
    settings = settings or get_settings()
    try:
        run_config = load_run_config(config, list(params or []), out, settings)
        outcome = run_command(command, run_config, settings)
    except (EllipNLSError, ValidationError) as e:
        logger.error("%s failed: %s", command, e)
        _emit(error_record(e))
        return 1
    except Exception as e:
        logger.error("%s failed unexpectedly: %s", command, e, exc_info=True)
        _emit(error_record(e))
        return 1

    _emit(
        {
            "status": "ok" if outcome.exit_code == 0 else "discrepancies",
            "command": command,
            "exit_code": outcome.exit_code,
            "artifacts": [str(p) for p in outcome.artifacts],
            "failed_checks": [name for name, ok, _ in outcome.checks if not ok],
            "discrepancies": outcome.discrepancies,
        }
    )
    return outcome.exit_code


# ─── Subcommands ──────────────────────────────────────────


class _CommandCLI(BaseSettings):
    model_config = {"env_prefix": "ELLIPNLS_CLI_", "extra": "ignore"}

    command: ClassVar[str]

    config: Optional[Path] = Field(default=None, description="TOML run configuration")
    param: List[str] = Field(default_factory=list, description="key=value override, repeatable")
    out: Optional[Path] = Field(default=None, description="output directory")

    _exit_code: int = PrivateAttr(default=0)

    @property
    def exit_code(self) -> int:
        return self._exit_code

    def cli_cmd(self) -> None:
        self._exit_code = run(self.command, self.config, self.param, self.out)


class CoeffsCLI(_CommandCLI):
    """Coefficient tables of R1, R2 and the lattice invariants under both readings."""

    command: ClassVar[str] = "coeffs"


class PhaseDiagramCLI(_CommandCLI):
    """R1(h) over the positivity interval containing h0, plus its real roots."""

    command: ClassVar[str] = "phase-diagram"


class HProfileCLI(_CommandCLI):
    """h(z) over several periods, checked against the ODE and quadrature oracles."""

    command: ClassVar[str] = "h-profile"


class RegionCLI(_CommandCLI):
    """Admissible (f0, z) masks and their boundary."""

    command: ClassVar[str] = "region"


class SurfaceCLI(_CommandCLI):
    """f(t, z) and |Psi|^2 surfaces for each configured f0."""

    command: ClassVar[str] = "surface"


class PeriodTCLI(_CommandCLI):
    """Period in t as a function of z."""

    command: ClassVar[str] = "period-t"


class PhaseCLI(_CommandCLI):
    """phi(z) against the quadrature oracle."""

    command: ClassVar[str] = "phase"


class ResidualsCLI(_CommandCLI):
    """All residual reports, including the Riccati condition and the full equation."""

    command: ClassVar[str] = "residuals"


class SsfmCheckCLI(_CommandCLI):
    """Split-step self-test and cross-validation of the analytic field."""

    command: ClassVar[str] = "ssfm-check"


class SearchCLI(_CommandCLI):
    """Search a box around the parameters for members satisfying the Riccati condition."""

    command: ClassVar[str] = "search"


class ReproduceAppendixCLI(_CommandCLI):
    """Run every figure command on the worked example and compare with the stated values."""

    command: ClassVar[str] = "reproduce-appendix"


class EllipNLSCLI(
    BaseSettings,
    cli_prog_name="ellipnls",
    cli_kebab_case=True,
    cli_exit_on_error=False,
):
    """Elliptic-function background solutions of the cubic NLSE: figure data and residual audits."""

    coeffs: CliSubCommand[CoeffsCLI]
    phase_diagram: CliSubCommand[PhaseDiagramCLI]
    h_profile: CliSubCommand[HProfileCLI]
    region: CliSubCommand[RegionCLI]
    surface: CliSubCommand[SurfaceCLI]
    period_t: CliSubCommand[PeriodTCLI]
    phase: CliSubCommand[PhaseCLI]
    residuals: CliSubCommand[ResidualsCLI]
    ssfm_check: CliSubCommand[SsfmCheckCLI]
    search: CliSubCommand[SearchCLI]
    reproduce_appendix: CliSubCommand[ReproduceAppendixCLI]

    def cli_cmd(self) -> None:
        CliApp.run_subcommand(self)


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    setup_logging(settings)
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        root = CliApp.run(EllipNLSCLI, cli_args=args)
        sub = get_subcommand(root)
    except (SettingsError, ValidationError) as e:
        logger.error("invalid command line: %s", e)
        _emit({"status": "error", "error": "UsageError", "message": str(e), "details": {"argv": args}})
        return 1
    return sub.exit_code


if __name__ == "__main__":
    sys.exit(main())
