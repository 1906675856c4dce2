"""Quartic right-hand sides R₁(h), R₂(f, z), their real roots and phase diagrams.

All quartics use the normalization R(x) = αx⁴ + 4βx³ + 6γx² + 4δx + ε.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

DEFAULT_MULTIPLICITY_TOL = 1e-7
ROOT_RESIDUAL_TOL = 1e-10

CoefficientReading = Literal["derived", "printed"]


class SolutionParams(BaseModel):
    """Free parameters of one family member."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    a: float = Field(..., description="nonlinearity; a>0 focusing, a<0 defocusing")
    c1: float
    c2: float
    c3: float
    h0: float = Field(default=0.0, ge=0.0, description="boundary value h(0)")
    f0: float = Field(default=0.0, description="initial value f(0, 0)")
    phi0: float = Field(default=0.0, description="phase constant φ(0)")

    @field_validator("a")
    @classmethod
    def validate_a(cls, v: float) -> float:
        if v == 0.0:
            raise ValueError("a must be non-zero")
        return v

    def with_updates(self, **changes) -> "SolutionParams":
        return SolutionParams(**{**self.model_dump(), **changes})


@dataclass(frozen=True)
class QuarticCoefficients:
    """R(x) = αx⁴ + 4βx³ + 6γx² + 4δx + ε."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float

    def expanded(self) -> np.ndarray:
        """Monomial coefficients, highest degree first."""
        return np.array(
            [self.alpha, 4.0 * self.beta, 6.0 * self.gamma, 4.0 * self.delta, self.epsilon]
        )

    def scale(self) -> float:
        return float(max(np.max(np.abs(self.expanded())), 1e-300))

    def evaluate(self, x):
        x = np.asarray(x)
        return (
            (((self.alpha * x + 4.0 * self.beta) * x + 6.0 * self.gamma) * x + 4.0 * self.delta) * x
            + self.epsilon
        )

    def derivative(self, x, order: int = 1):
        """R′, R″, R‴ or R⁗ at x."""
        x = np.asarray(x)
        al, be, ga, de = self.alpha, self.beta, self.gamma, self.delta
        if order == 1:
            return ((4.0 * al * x + 12.0 * be) * x + 12.0 * ga) * x + 4.0 * de
        if order == 2:
            return (12.0 * al * x + 24.0 * be) * x + 12.0 * ga
        if order == 3:
            return 24.0 * al * x + 24.0 * be
        if order == 4:
            return 24.0 * al + 0.0 * x
        raise InvalidInputError("derivative order must be 1..4", {"order": order})

    def as_row(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "delta": self.delta,
            "epsilon": self.epsilon,
        }


def evaluate(q: QuarticCoefficients, x):
    return q.evaluate(x)


class RealRoot(NamedTuple):
    value: float
    multiplicity: int


@dataclass
class PhaseDiagramReport:
    """Root structure of R₁ restricted to the physical quadrant x ≥ 0."""

    real_roots: List[RealRoot]
    pdc_roots: List[RealRoot]
    sign_changes: int
    positivity_intervals: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def positive_root_count(self) -> int:
        return sum(r.multiplicity for r in self.pdc_roots if r.value > 0)

    def interval_containing(self, x: float) -> Optional[Tuple[float, float]]:
        for lo, hi in self.positivity_intervals:
            if lo <= x <= hi:
                return lo, hi
        return None


# ─── Coefficient lists ────────────────────────────────────


def r1_coefficients(p: SolutionParams) -> QuarticCoefficients:
    """Coefficients of R₁(h) in (h_z)² = R₁(h)."""
    a, c1 = p.a, p.c1
    return QuarticCoefficients(
        alpha=-16.0 * a * a,
        beta=4.0 * a * c1,
        gamma=-(2.0 * c1 * c1 + 8.0 * a * p.c2) / 3.0,
        delta=2.0 * p.c3,
        epsilon=0.0,
    )


def r2_coefficients(
    p: SolutionParams,
    h: float,
    hz: float,
    reading: CoefficientReading = "derived",
) -> QuarticCoefficients:
    """
    Coefficients of R₂(f, z) in (f_t)² = R₂(f, z) at one z.

    Args:
        p: solution parameters
        h: h(z) ≥ 0
        hz: h_z(z)
        reading: ``derived`` uses γ₂ = (c₁ − 3ah)/6, ``printed`` uses (c₁ − 3h)/6

    Returns:
        QuarticCoefficients with β₂ = 0

    Raises:
        InvalidInputError: h < 0
    """
    h = float(h)
    hz = float(hz)
    if not (math.isfinite(h) and math.isfinite(hz)):
        raise InvalidInputError("h and h_z must be finite", {"h": h, "hz": hz})
    if h < 0:
        raise InvalidInputError("h must be non-negative", {"h": h})

    a, c1 = p.a, p.c1
    if h > 0:
        delta = hz / (4.0 * math.sqrt(h))
    else:
        # h_z² ≈ 4δ₁h near a simple zero of h
        sign = -1.0 if hz < 0 else 1.0
        delta = sign * math.sqrt(max(2.0 * p.c3, 0.0)) / 2.0

    gamma = (c1 - 3.0 * a * h) / 6.0 if reading == "derived" else (c1 - 3.0 * h) / 6.0
    return QuarticCoefficients(
        alpha=-a / 2.0,
        beta=0.0,
        gamma=gamma,
        delta=delta,
        epsilon=2.0 * p.c2 + 1.5 * a * h * h - c1 * h,
    )


# ─── Roots ────────────────────────────────────────────────


def _polish(q: QuarticCoefficients, r: float, iterations: int = 60) -> float:
    target = ROOT_RESIDUAL_TOL * q.scale() * 1e-3
    for _ in range(iterations):
        f = float(q.evaluate(r))
        if abs(f) <= target:
            break
        df = float(q.derivative(r))
        if df == 0:
            break
        step = f / df
        r -= step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return r


def real_roots(
    q: QuarticCoefficients,
    multiplicity_tol: float = DEFAULT_MULTIPLICITY_TOL,
) -> List[RealRoot]:
    """
    All real roots of R with multiplicities, sorted ascending.

    Companion-matrix eigenvalues (numpy.roots) are polished by Newton steps;
    roots closer than ``multiplicity_tol`` are merged into one multiple root.

    Raises:
        InvalidInputError: all coefficients vanish or are non-finite
    """
    coeffs = q.expanded()
    if not np.all(np.isfinite(coeffs)):
        raise InvalidInputError("quartic coefficients must be finite", q.as_row())
    if np.max(np.abs(coeffs)) <= 1e-300:
        raise InvalidInputError("quartic is identically zero", q.as_row())

    scale = q.scale()
    candidates = []
    for r in np.roots(coeffs):
        if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
            continue
        x = _polish(q, float(r.real))
        if abs(float(q.evaluate(x))) <= ROOT_RESIDUAL_TOL * scale * max(1.0, abs(x)) ** 4:
            candidates.append(x)
    candidates.sort()

    roots: List[RealRoot] = []
    cluster: List[float] = []
    for x in candidates:
        if cluster and abs(x - cluster[-1]) > multiplicity_tol * max(1.0, abs(x)):
            roots.append(_merge(q, cluster))
            cluster = []
        cluster.append(x)
    if cluster:
        roots.append(_merge(q, cluster))
    return roots


def _merge(q: QuarticCoefficients, cluster: List[float]) -> RealRoot:
    # exact zero stays exact (R(0) = ε = 0)
    if any(x == 0.0 for x in cluster):
        return RealRoot(0.0, len(cluster))
    best = min(cluster, key=lambda x: abs(float(q.evaluate(x))))
    return RealRoot(best, len(cluster))


def sign_changes(q: QuarticCoefficients) -> int:
    """Descartes count on the monomial coefficient sequence (zeros skipped)."""
    signs = [np.sign(c) for c in q.expanded() if c != 0.0]
    return int(sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 != s1))


def positivity_intervals(
    q: QuarticCoefficients,
    lower: float = -math.inf,
    multiplicity_tol: float = DEFAULT_MULTIPLICITY_TOL,
) -> List[Tuple[float, float]]:
    """Sorted intervals of [lower, ∞) on which R ≥ 0 (interiors strictly positive)."""
    points = [r.value for r in real_roots(q, multiplicity_tol) if r.value > lower]
    edges = [lower] + points + [math.inf]

    intervals: List[Tuple[float, float]] = []
    for lo, hi in zip(edges, edges[1:]):
        if math.isinf(lo) and math.isinf(hi):
            x_test = 0.0
        elif math.isinf(lo):
            x_test = hi - 1.0
        elif math.isinf(hi):
            x_test = lo + 1.0
        else:
            x_test = 0.5 * (lo + hi)
        if float(q.evaluate(x_test)) > 0:
            intervals.append((lo, hi))
    return intervals


def pdc_classify(
    q: QuarticCoefficients,
    multiplicity_tol: float = DEFAULT_MULTIPLICITY_TOL,
) -> PhaseDiagramReport:
    """
    Phase-diagram data of R₁ for the physical quadrant h ≥ 0.

    Returns:
        PhaseDiagramReport with the Descartes count, the roots in [0, ∞) and
        the intervals of [0, ∞) on which R₁ ≥ 0
    """
    roots = real_roots(q, multiplicity_tol)
    report = PhaseDiagramReport(
        real_roots=roots,
        pdc_roots=[r for r in roots if r.value >= 0.0],
        sign_changes=sign_changes(q),
        positivity_intervals=positivity_intervals(q, lower=0.0, multiplicity_tol=multiplicity_tol),
    )
    logger.debug(
        "pdc: roots=%s sign_changes=%d intervals=%s",
        [(round(r.value, 12), r.multiplicity) for r in roots],
        report.sign_changes,
        report.positivity_intervals,
    )
    return report
