"""CSV figure data and reports under one output directory.

Every CSV starts with ``# key=value`` lines (artifact version, command,
parameters, extra metadata) followed by a pandas-written table. Floats are
written as their shortest round-trip text, so identical runs give identical
bytes.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analyzers.physicality import AdmissibleRegion
from core.solution_family import SampledField
from storage.state_manager import RunManifest

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (list, tuple)):
        return " ".join(format_value(v) for v in value)
    return str(value)


class ArtifactStore:
    """Writes one command's artifacts and records them in the run manifest."""

    def __init__(self, out_dir: Path, version: str, params: Dict[str, Any]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.version = version
        self.params = dict(params)
        self.manifest = RunManifest(self.out_dir / "manifest.json")
        self.manifest.record_run(version, {k: format_value(v) for k, v in self.params.items()})

    def _path(self, command: str, name: str) -> Path:
        folder = self.out_dir / command
        folder.mkdir(parents=True, exist_ok=True)
        return folder / name

    def _header(self, command: str, meta: Optional[Dict[str, Any]]) -> str:
        lines = [f"# artifact_version={self.version}", f"# command={command}"]
        lines += [f"# {k}={format_value(v)}" for k, v in self.params.items()]
        lines += [f"# {k}={format_value(v)}" for k, v in (meta or {}).items()]
        return "\n".join(lines) + "\n"

    def write_table(
        self,
        command: str,
        name: str,
        frame: pd.DataFrame,
        meta: Optional[Dict[str, Any]] = None,
    ) -> Path:
        path = self._path(command, name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(self._header(command, meta))
            frame.to_csv(f, index=False, lineterminator="\n", na_rep="nan")
        self.manifest.add_artifact(command, f"{command}/{name}")
        logger.info("Wrote %s (%d rows)", path, len(frame))
        return path

    def write_curve(
        self,
        command: str,
        name: str,
        columns: Dict[str, Sequence[float]],
        meta: Optional[Dict[str, Any]] = None,
    ) -> Path:
        return self.write_table(command, name, pd.DataFrame({k: np.asarray(v) for k, v in columns.items()}), meta)

    def write_field(self, command: str, name: str, field: SampledField, meta: Optional[Dict[str, Any]] = None) -> Path:
        """Long form: t, z, re[, im]; rows ordered z-major."""
        tt, zz = np.meshgrid(field.t_grid, field.z_grid)
        columns: Dict[str, np.ndarray] = {"t": tt.ravel(), "z": zz.ravel()}
        if field.is_complex:
            columns["re"] = field.values.real.ravel()
            columns["im"] = field.values.imag.ravel()
        else:
            columns["value"] = np.asarray(field.values, dtype=float).ravel()
        return self.write_table(command, name, pd.DataFrame(columns), {**field.meta, **(meta or {})})

    def write_region(
        self,
        command: str,
        name: str,
        region: AdmissibleRegion,
        mask: np.ndarray,
        meta: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """f0, z, flag for every grid cell; rows ordered f0-major."""
        ff, zz = np.meshgrid(region.f0_grid, region.z_grid, indexing="ij")
        frame = pd.DataFrame({"f0": ff.ravel(), "z": zz.ravel(), "flag": mask.astype(int).ravel()})
        return self.write_table(command, name, frame, meta)

    def write_boundary(self, command: str, name: str, region: AdmissibleRegion, meta: Optional[Dict[str, Any]] = None) -> Path:
        frame = pd.DataFrame(
            {
                "f0": [p.f0 for p in region.boundary],
                "z": [p.z for p in region.boundary],
                "constraint": [p.constraint for p in region.boundary],
                "value": [p.value for p in region.boundary],
            },
            columns=["f0", "z", "constraint", "value"],
        )
        return self.write_table(command, name, frame, meta)

    def write_report(
        self,
        command: str,
        rows: Iterable[Tuple[str, Any]],
        text: str,
        meta: Optional[Dict[str, Any]] = None,
    ) -> List[Path]:
        """report.csv (key, value) and the human-readable report.txt."""
        frame = pd.DataFrame(
            [(k, format_value(v)) for k, v in rows], columns=["key", "value"]
        )
        csv_path = self.write_table(command, "report.csv", frame, meta)
        txt_path = self._path(command, "report.txt")
        with open(txt_path, "w", encoding="utf-8", newline="") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        self.manifest.add_artifact(command, f"{command}/report.txt")
        return [csv_path, txt_path]


def read_field(path: Path) -> Tuple[SampledField, Dict[str, str]]:
    """Load a field CSV written by ArtifactStore.write_field."""
    meta: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
    frame = pd.read_csv(path, comment="#")
    t_grid = np.unique(frame["t"].to_numpy())
    z_grid = np.unique(frame["z"].to_numpy())
    shape = (z_grid.size, t_grid.size)
    if "im" in frame:
        values = (frame["re"].to_numpy() + 1j * frame["im"].to_numpy()).reshape(shape)
    else:
        values = frame["value"].to_numpy().reshape(shape)
    return SampledField(t_grid, z_grid, values, meta=dict(meta)), meta
