"""Split-step Fourier propagation of iΨ_z + Ψ_tt + aΨ|Ψ|² = 0 on a periodic t-window."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from core.exceptions import EllipNLSError, InstabilityError, InvalidInputError
from core.solution_family import FSolution, HSolution, PhiSolution, SampledField, psi_eval

logger = logging.getLogger(__name__)

BLOWUP_GROWTH = 1e6


@dataclass(frozen=True)
class SpectralConfig:
    window: float
    n_modes: int = 256
    dz: float = 1e-4
    z_span: float = 1.0
    snapshots: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.window) and self.window > 0):
            raise InvalidInputError("window must be positive", {"window": self.window})
        n = self.n_modes
        if n < 64 or n & (n - 1):
            raise InvalidInputError("n_modes must be a power of two >= 64", {"n_modes": n})
        if not (math.isfinite(self.dz) and self.dz > 0):
            raise InvalidInputError("dz must be positive", {"dz": self.dz})
        if not (math.isfinite(self.z_span) and self.z_span >= 0):
            raise InvalidInputError("z_span must be non-negative", {"z_span": self.z_span})
        if self.snapshots < 2:
            raise InvalidInputError("at least two snapshots are stored", {"snapshots": self.snapshots})

    @property
    def t_grid(self) -> np.ndarray:
        return -0.5 * self.window + self.window * np.arange(self.n_modes) / self.n_modes

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_modes, d=self.window / self.n_modes)


def spectral_derivative(line: np.ndarray, window: float, order: int = 1) -> np.ndarray:
    """d^order/dt^order of a periodic line through the FFT."""
    line = np.asarray(line)
    k = 2.0 * np.pi * np.fft.fftfreq(line.size, d=window / line.size)
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(line))
    return out if np.iscomplexobj(line) else out.real


def conserved_quantities(line: np.ndarray, window: float, a: float) -> Tuple[float, float]:
    """Power ∫|Ψ|²dt and Hamiltonian ∫(|Ψ_t|² − (a/2)|Ψ|⁴)dt over one window."""
    line = np.asarray(line, dtype=complex)
    dt = window / line.size
    density = np.abs(line) ** 2
    psi_t = spectral_derivative(line, window)
    power = float(np.sum(density) * dt)
    hamiltonian = float(np.sum(np.abs(psi_t) ** 2 - 0.5 * a * density**2) * dt)
    return power, hamiltonian


def _strang_step(psi: np.ndarray, half_linear: np.ndarray, a: float, dz: float) -> np.ndarray:
    psi = np.fft.ifft(half_linear * np.fft.fft(psi))
    psi = psi * np.exp(1j * a * np.abs(psi) ** 2 * dz)
    return np.fft.ifft(half_linear * np.fft.fft(psi))


def propagate(initial, cfg: SpectralConfig, a: float, direction: int = 1) -> SampledField:
    """
    Strang split-step evolution over cfg.z_span.

    The linear half-steps are exact in Fourier space and the nonlinear step is
    the exact phase rotation, so the discrete power is conserved up to
    rounding. ``direction=-1`` integrates backwards in z.

    Returns:
        SampledField with ``cfg.snapshots`` equally spaced rows, z measured
        from the initial line

    Raises:
        InvalidInputError: line length differs from n_modes
        InstabilityError: max|Ψ| grew beyond 1e6 times its initial value
    """
    psi = np.asarray(initial, dtype=complex).copy()
    if psi.shape != (cfg.n_modes,):
        raise InvalidInputError(
            "initial line must have n_modes samples", {"shape": list(psi.shape), "n_modes": cfg.n_modes}
        )
    if not np.all(np.isfinite(psi)):
        raise InvalidInputError("initial line contains non-finite samples", {})

    n_steps = max(int(round(cfg.z_span / cfg.dz)), 0)
    intervals = cfg.snapshots - 1
    n_steps = int(math.ceil(n_steps / intervals) * intervals) if n_steps else 0
    dz = direction * (cfg.z_span / n_steps if n_steps else 0.0)
    save_every = n_steps // intervals if n_steps else 1

    half_linear = np.exp(-1j * cfg.wavenumbers**2 * 0.5 * dz)
    amp0 = max(float(np.max(np.abs(psi))), 1e-300)
    rows = [psi.copy()]
    for step in range(1, n_steps + 1):
        psi = _strang_step(psi, half_linear, a, dz)
        growth = float(np.max(np.abs(psi))) / amp0
        if not math.isfinite(growth) or growth > BLOWUP_GROWTH:
            raise InstabilityError(z_onset=step * dz, growth=growth)
        if step % save_every == 0:
            rows.append(psi.copy())
    while len(rows) < cfg.snapshots:
        rows.append(psi.copy())

    z_grid = direction * np.linspace(0.0, cfg.z_span, cfg.snapshots)
    if direction < 0:
        z_grid = z_grid[::-1]
        rows = rows[::-1]
    logger.debug("propagated %d steps of dz=%.3e over window %.6g", n_steps, dz, cfg.window)
    return SampledField(
        cfg.t_grid,
        z_grid,
        np.vstack(rows),
        meta={"quantity": "psi", "method": "split-step", "dz": abs(dz), "n_modes": cfg.n_modes},
    )


def analytic_line(hs: HSolution, ps: PhiSolution, fs: FSolution, z0: float, cfg: SpectralConfig) -> np.ndarray:
    """Ψ(·, z₀) sampled on the split-step grid."""
    psi, _ = psi_eval(cfg.t_grid, z0, hs, ps, fs, strict=False)
    return np.asarray(psi, dtype=complex)


def cross_validate(
    hs: HSolution,
    ps: PhiSolution,
    fs: FSolution,
    cfg: SpectralConfig,
    z0: float = 0.0,
) -> Dict[str, Any]:
    """
    Propagate the analytic line from z₀ by cfg.z_span and compare with the
    analytic field there.

    The window is fixed at z₀ while the analytic t-period changes with z, so
    the deviation includes a window-mismatch component. Failures are
    reported in the result, not raised.
    """
    a = hs.params.a
    result: Dict[str, Any] = {
        "z0": z0,
        "z_end": z0 + cfg.z_span,
        "window": cfg.window,
        "n_modes": cfg.n_modes,
        "dz": cfg.dz,
        "label": "deviation includes window mismatch",
    }
    start = analytic_line(hs, ps, fs, z0, cfg)
    if not np.all(np.isfinite(start)):
        result.update(status="skipped", reason="analytic line is not finite on the window")
        logger.warning("ssfm cross-check skipped at z0=%.6g: analytic line not finite", z0)
        return result

    p0, h0 = conserved_quantities(start, cfg.window, a)
    try:
        field = propagate(start, cfg, a)
    except EllipNLSError as e:
        result.update(status="failed", reason=e.message, **e.details)
        logger.warning("ssfm cross-check failed: %s", e.message)
        return result

    end = field.values[-1]
    target = analytic_line(hs, ps, fs, z0 + cfg.z_span, cfg)
    p1, h1 = conserved_quantities(end, cfg.window, a)
    finite = np.isfinite(target)
    deviation = float(np.max(np.abs(end[finite] - target[finite]))) if finite.any() else math.nan
    scale = float(np.max(np.abs(target[finite]))) if finite.any() else math.nan
    result.update(
        status="ok",
        max_deviation=deviation,
        relative_deviation=deviation / scale if scale else math.nan,
        power_drift=abs(p1 - p0) / max(abs(p0), 1e-300),
        hamiltonian_drift=abs(h1 - h0) / max(abs(h0), 1e-300),
    )
    logger.info(
        "ssfm cross-check z0=%.6g span=%.6g: max deviation %.3e (power drift %.1e)",
        z0, cfg.z_span, deviation, result["power_drift"],
    )
    return result


def self_test(a: float = 1.0, dz: float = 1e-4, z_span: float = 1.0, n_modes: int = 64) -> Dict[str, float]:
    """Plane-wave exactness, power conservation and time reversal."""
    cfg = SpectralConfig(window=2.0 * math.pi, n_modes=n_modes, dz=dz, z_span=z_span)
    plane = np.ones(n_modes, dtype=complex)
    out = propagate(plane, cfg, a).values[-1]
    plane_err = float(np.max(np.abs(out - np.exp(1j * a * z_span) * plane)))

    t = cfg.t_grid
    smooth = (1.0 + 0.1 * np.cos(t)) * np.exp(1j * 0.2 * np.sin(2.0 * t))
    forward = propagate(smooth, cfg, a).values[-1]
    back = propagate(forward, cfg, a, direction=-1).values[0]
    p0, _ = conserved_quantities(smooth, cfg.window, a)
    p1, _ = conserved_quantities(forward, cfg.window, a)
    return {
        "plane_wave_error": plane_err,
        "power_drift_per_z": abs(p1 - p0) / p0 / max(z_span, 1e-300),
        "time_reversal_error": float(np.max(np.abs(back - smooth))),
    }


def step_halving_ratio(initial: np.ndarray, cfg: SpectralConfig, a: float) -> float:
    """err(dz)/err(dz/2) against a dz/8 reference; ≈ 4 for a second-order scheme."""

    def run(dz: float) -> np.ndarray:
        c = SpectralConfig(cfg.window, cfg.n_modes, dz, cfg.z_span)
        return propagate(initial, c, a).values[-1]

    ref = run(cfg.dz / 8.0)
    e1 = float(np.max(np.abs(run(cfg.dz) - ref)))
    e2 = float(np.max(np.abs(run(cfg.dz / 2.0) - ref)))
    return e1 / e2 if e2 > 0 else math.inf
