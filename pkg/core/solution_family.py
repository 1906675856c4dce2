"""Closed-form members of the solution family: h(z), φ(z), f(t, z), Ψ(t, z).

h and f come from the Weierstrass inversion of (x′)² = R(x), x(0) = x₀:

    x = [x₀·D + 2√R(x₀)·℘′ + R′(x₀)(℘ − s) + R(x₀)R‴(x₀)/12] / D,
    D = (2℘ − 2s)² − αR(x₀),  s = R″(x₀)/24.

Close to the poles of ℘ the same quotient is evaluated in u = 1/℘,
v = ℘′/℘², so h and f stay finite where ℘ does not.
"""

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Literal, Optional, Tuple

import numpy as np

from core.exceptions import (
    BranchTrackingError,
    ConstraintViolationError,
    InvalidInputError,
    NumericFailureError,
    SingularityError,
)
from core.quartic import (
    CoefficientReading,
    QuarticCoefficients,
    SolutionParams,
    r1_coefficients,
    r2_coefficients,
)
from core.weierstrass import (
    DEFAULT_DEGENERACY_TOL,
    DEFAULT_POLE_EPSILON,
    EllipticInvariants,
    LatticeData,
    evaluate,
    invariants_from_quartic,
    lattice_from_invariants,
    wp_inverse,
    wp_reciprocal,
)
from utils.retry_helper import refine_on_failure

logger = logging.getLogger(__name__)

HForm = Literal["general", "simple-root", "zero-root"]

SINGULAR_TOL = 1e-12
ROOT_TOL = 1e-12
PHASE_IMAG_TOL = 1e-8
WALK_POINTS_PER_PERIOD = 512


# ─── Inversion kernel ─────────────────────────────────────


@dataclass(frozen=True)
class InversionData:
    """Constants of the inversion formula at the initial value x₀."""

    x0: float
    r: float
    sqrt_r: float
    dr: float
    s: float
    k: float
    alpha: float

    @classmethod
    def at(cls, q: QuarticCoefficients, x0: float, r: Optional[float] = None) -> "InversionData":
        r = float(q.evaluate(x0)) if r is None else r
        return cls(
            x0=float(x0),
            r=r,
            sqrt_r=math.sqrt(max(r, 0.0)),
            dr=float(q.derivative(x0, 1)),
            s=float(q.derivative(x0, 2)) / 24.0,
            k=r * float(q.derivative(x0, 3)) / 12.0,
            alpha=q.alpha,
        )


def _split(u: np.ndarray):
    """Mask of points evaluated in the scaled (u, v) variables (|℘| ≥ 1)."""
    return np.abs(u) <= 1.0


def _general_form(u, v, d: InversionData, g2: float, g3: float):
    x = np.empty(u.shape, dtype=complex)
    dx = np.empty(u.shape, dtype=complex)
    den = np.empty(u.shape, dtype=complex)
    den_scale = np.empty(u.shape)
    ar = d.alpha * d.r
    big = _split(u)

    uu, vv = u[big], v[big]
    b = 2.0 - 2.0 * d.s * uu
    ds = b * b - ar * uu * uu
    ns = d.x0 * ds + 2.0 * d.sqrt_r * vv + d.dr * (uu - d.s * uu * uu) + d.k * uu * uu
    dv = -2.0 + 1.5 * g2 * uu * uu + 2.0 * g3 * uu**3
    dds = (4.0 * d.s * b + 2.0 * ar * uu) * vv
    dns = d.x0 * dds + 2.0 * d.sqrt_r * dv - d.dr * (1.0 - 2.0 * d.s * uu) * vv - 2.0 * d.k * uu * vv
    x[big] = ns / ds
    dx[big] = (dns * ds - ns * dds) / (ds * ds)
    den[big] = ds
    den_scale[big] = np.abs(b) ** 2 + abs(ar) * np.abs(uu) ** 2

    small = ~big
    if small.any():
        p = 1.0 / u[small]
        dp = v[small] * p * p
        a = 2.0 * p - 2.0 * d.s
        dd = a * a - ar
        nn = d.x0 * dd + 2.0 * d.sqrt_r * dp + d.dr * (p - d.s) + d.k
        ddp = 6.0 * p * p - 0.5 * g2
        ddd = 4.0 * a * dp
        dnn = d.x0 * ddd + 2.0 * d.sqrt_r * ddp + d.dr * dp
        x[small] = nn / dd
        dx[small] = (dnn * dd - nn * ddd) / (dd * dd)
        den[small] = dd
        den_scale[small] = np.abs(a) ** 2 + abs(ar)
    return x, dx, den, den_scale


def _simple_root_form(u, v, q: QuarticCoefficients, x0: float):
    """Simplified quotient for R(x₀) = 0, written out in the quartic coefficients."""
    al, be, ga, de = q.alpha, q.beta, q.gamma, q.delta
    lin = be * x0 * x0 + 2.0 * ga * x0 + de
    const = x0 * x0 * (2.0 * al * de - 2.0 * be * ga) + x0 * (4.0 * be * de - 5.0 * ga * ga) - 2.0 * ga * de
    two_s = ga + 2.0 * be * x0 + al * x0 * x0

    x = np.empty(u.shape, dtype=complex)
    dx = np.empty(u.shape, dtype=complex)
    den = np.empty(u.shape, dtype=complex)
    den_scale = np.empty(u.shape)
    big = _split(u)

    uu, vv = u[big], v[big]
    b = 2.0 - two_s * uu
    ns = 4.0 * (x0 + lin * uu) + const * uu * uu
    ds = b * b
    dns = -vv * (4.0 * lin + 2.0 * const * uu)
    dds = 2.0 * two_s * b * vv
    x[big] = ns / ds
    dx[big] = (dns * ds - ns * dds) / (ds * ds)
    den[big] = ds
    den_scale[big] = 4.0 + (two_s * np.abs(uu)) ** 2

    small = ~big
    if small.any():
        p = 1.0 / u[small]
        dp = v[small] * p * p
        nn = 4.0 * p * (x0 * p + lin) + const
        a = 2.0 * p - two_s
        dd = a * a
        dnn = 4.0 * dp * (2.0 * x0 * p + lin)
        ddd = 4.0 * a * dp
        x[small] = nn / dd
        dx[small] = (dnn * dd - nn * ddd) / (dd * dd)
        den[small] = dd
        den_scale[small] = np.abs(p) ** 2 * 4.0 + two_s**2
    return x, dx, den, den_scale


def _zero_root_form(u, v, q: QuarticCoefficients):
    """h = δ/(℘ − γ/2) = δu/(1 − γu/2)."""
    half_g = 0.5 * q.gamma
    x = np.empty(u.shape, dtype=complex)
    dx = np.empty(u.shape, dtype=complex)
    den = np.empty(u.shape, dtype=complex)
    den_scale = np.empty(u.shape)
    big = _split(u)

    uu, vv = u[big], v[big]
    b = 1.0 - half_g * uu
    x[big] = q.delta * uu / b
    dx[big] = -q.delta * vv / (b * b)
    den[big] = b
    den_scale[big] = 1.0 + abs(half_g) * np.abs(uu)

    small = ~big
    if small.any():
        p = 1.0 / u[small]
        dp = v[small] * p * p
        a = p - half_g
        x[small] = q.delta / a
        dx[small] = -q.delta * dp / (a * a)
        den[small] = a
        den_scale[small] = np.abs(p) + abs(half_g)
    return x, dx, den, den_scale


def _check_singular(den, den_scale, strict: bool, what: str, where) -> np.ndarray:
    singular = np.abs(den) <= SINGULAR_TOL * np.maximum(den_scale, 1e-300)
    if strict and singular.any():
        i = int(np.argmax(singular))
        raise SingularityError(
            f"{what}: denominator vanishes",
            {"at": float(np.asarray(where).ravel()[i]), "denominator": complex(den[i])},
        )
    return singular


# ─── h(z) ─────────────────────────────────────────────────


@dataclass(frozen=True)
class HSolution:
    params: SolutionParams
    q1: QuarticCoefficients
    inv_z: EllipticInvariants
    lat_z: LatticeData
    r1_at_h0: float
    form: HForm
    kernel: InversionData
    reading: CoefficientReading = "derived"
    pole_epsilon: float = DEFAULT_POLE_EPSILON
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL

    @property
    def Lz(self) -> float:
        return self.lat_z.real_period


def build_h_solution(
    params: SolutionParams,
    reading: CoefficientReading = "derived",
    pole_epsilon: float = DEFAULT_POLE_EPSILON,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> HSolution:
    """
    Set up h(z) for one parameter set.

    Raises:
        ConstraintViolationError: R₁(h₀) < 0 (no real h through h₀)
    """
    q1 = r1_coefficients(params)
    inv = invariants_from_quartic(q1)
    lat = lattice_from_invariants(inv, pole_epsilon=pole_epsilon, degeneracy_tol=degeneracy_tol)

    h0 = params.h0
    r = float(q1.evaluate(h0))
    if abs(r) <= ROOT_TOL * q1.scale() * max(1.0, h0) ** 4:
        r = 0.0
    if r < 0:
        raise ConstraintViolationError("R1(h0) >= 0", r, h0=h0)

    if h0 == 0.0 and q1.delta > 0:
        form: HForm = "zero-root"
    elif r == 0.0:
        form = "simple-root"
    else:
        form = "general"

    logger.debug("h-solution form=%s h0=%.6g R1(h0)=%.6g Lz=%.12g", form, h0, r, lat.real_period)
    return HSolution(
        params=params,
        q1=q1,
        inv_z=inv,
        lat_z=lat,
        r1_at_h0=r,
        form=form,
        kernel=InversionData.at(q1, h0, r),
        reading=reading,
        pole_epsilon=pole_epsilon,
        degeneracy_tol=degeneracy_tol,
    )


def h_with_derivative(z, hs: HSolution, form: Optional[HForm] = None, strict: bool = True):
    """
    h(z) and the analytic h_z(z).

    Args:
        z: real scalar or array
        hs: h-solution
        form: force a closed form (defaults to hs.form)
        strict: raise on a vanishing denominator instead of returning nan

    Returns:
        (h, h_z), real
    """
    za = np.atleast_1d(np.asarray(z, dtype=float))
    u, v = wp_reciprocal(za, hs.lat_z)
    form = form or hs.form
    if form == "zero-root":
        x, dx, den, scale = _zero_root_form(u, v, hs.q1)
    elif form == "simple-root":
        x, dx, den, scale = _simple_root_form(u, v, hs.q1, hs.params.h0)
    else:
        x, dx, den, scale = _general_form(u, v, hs.kernel, hs.inv_z.g2, hs.inv_z.g3)
    singular = _check_singular(den, scale, strict, "h(z)", za)

    h = np.where(singular, np.nan, x.real)
    hz = np.where(singular, np.nan, dx.real)
    if np.ndim(z) == 0:
        return float(h[0]), float(hz[0])
    return h, hz


def h_eval(z, hs: HSolution, form: Optional[HForm] = None):
    """h(z); raises SingularityError where the closed form has no finite value."""
    return h_with_derivative(z, hs, form=form)[0]


def h_numerator(z, hs: HSolution, form: Optional[HForm] = None):
    """Numerator of the h quotient divided by ℘².

    Polynomial in u = 1/℘ and v = ℘′/℘², so it is finite at the poles of ℘
    and has the sign of the numerator wherever ℘ is real.
    """
    za = np.atleast_1d(np.asarray(z, dtype=float))
    u, v = wp_reciprocal(za, hs.lat_z)
    u, v = u.real, v.real
    form = form or hs.form
    q, x0 = hs.q1, hs.params.h0
    if form == "zero-root":
        num = q.delta * u
    elif form == "simple-root":
        lin = q.beta * x0 * x0 + 2.0 * q.gamma * x0 + q.delta
        const = (
            x0 * x0 * (2.0 * q.alpha * q.delta - 2.0 * q.beta * q.gamma)
            + x0 * (4.0 * q.beta * q.delta - 5.0 * q.gamma * q.gamma)
            - 2.0 * q.gamma * q.delta
        )
        num = 4.0 * (x0 + lin * u) + const * u * u
    else:
        d = hs.kernel
        b = 2.0 - 2.0 * d.s * u
        ds = b * b - d.alpha * d.r * u * u
        num = d.x0 * ds + 2.0 * d.sqrt_r * v + d.dr * (u - d.s * u * u) + d.k * u * u
    return float(num[0]) if np.ndim(z) == 0 else num


# ─── φ(z) ─────────────────────────────────────────────────


@dataclass
class BranchState:
    """Record of the last phase walk."""

    walk_step: float
    corrections: int = 0
    max_jump: float = 0.0


@dataclass
class PhiSolution:
    """Constants of the phase integral.

    ``r3``, ``r4`` are the poles of h as a function of ℘ and ``r1``, ``r2``
    their partial-fraction weights; ``v1``, ``v2`` are ℘⁻¹(r3), ℘⁻¹(r4).
    In ``single-pole`` mode (R₁(h₀) = 0) only r1, r3, v1 are used.
    """

    r1: complex
    r2: complex
    r3: complex
    r4: complex
    v1: complex
    v2: Optional[complex]
    dp_v1: complex
    dp_v2: Optional[complex]
    zeta_v1: complex
    zeta_v2: Optional[complex]
    log_coeff: complex
    const_term: float
    mode: Literal["pole-pair", "single-pole"]
    branch_state: BranchState


def _pole_data(p: complex, lat: LatticeData):
    v = wp_inverse(p, lat)
    vals = evaluate(np.array([v]), lat)
    dp, zeta = complex(vals.dp[0]), complex(vals.zeta[0])
    if abs(dp) <= SINGULAR_TOL * (1.0 + abs(p)) ** 1.5:
        raise SingularityError("℘′ vanishes at the phase pole", {"pole": p, "v": v})
    return v, dp, zeta


def _default_walk_step(lat: LatticeData) -> float:
    if math.isfinite(lat.omega):
        return lat.real_period / WALK_POINTS_PER_PERIOD
    if math.isfinite(lat.min_period):
        return lat.min_period / WALK_POINTS_PER_PERIOD
    return 1e-2


def build_phi_solution(hs: HSolution) -> PhiSolution:
    """Poles, weights and ℘⁻¹ data for the phase integral of h."""
    d = hs.kernel
    lat = hs.lat_z
    state = BranchState(walk_step=_default_walk_step(lat))
    if d.r > 0:
        root = np.sqrt(complex(d.alpha * d.r))
        p1, p2 = d.s + 0.5 * root, d.s - 0.5 * root
        w1 = (d.dr * (p1 - d.s) + d.k) / (4.0 * (p1 - p2))
        w2 = (d.dr * (p2 - d.s) + d.k) / (4.0 * (p2 - p1))
        v1, dp1, z1 = _pole_data(p1, lat)
        v2, dp2, z2 = _pole_data(p2, lat)
        ps = PhiSolution(
            r1=w1, r2=w2, r3=p1, r4=p2,
            v1=v1, v2=v2, dp_v1=dp1, dp_v2=dp2, zeta_v1=z1, zeta_v2=z2,
            log_coeff=d.sqrt_r / (2.0 * (p1 - p2)),
            const_term=hs.params.phi0,
            mode="pole-pair",
            branch_state=state,
        )
    else:
        p = complex(d.s)
        v1, dp1, z1 = _pole_data(p, lat)
        ps = PhiSolution(
            r1=complex(d.dr / 4.0), r2=0j, r3=p, r4=p,
            v1=v1, v2=None, dp_v1=dp1, dp_v2=None, zeta_v1=z1, zeta_v2=None,
            log_coeff=0j,
            const_term=hs.params.phi0,
            mode="single-pole",
            branch_state=state,
        )
    logger.debug("phi-solution mode=%s r3=%s v1=%s", ps.mode, ps.r3, ps.v1)
    return ps


def _sigma_term(v: complex, zeta_v: complex, lat: LatticeData) -> Callable:
    """z ↦ log σ(v − z) − log σ(v + z) + 2zζ(v), with value 0 at z = 0."""

    def term(z: np.ndarray) -> np.ndarray:
        vals_minus = evaluate(v - z, lat).log_sigma
        vals_plus = evaluate(v + z, lat).log_sigma
        return vals_minus - vals_plus + 2.0 * z * zeta_v

    return term


def _log_term(ps: PhiSolution, lat: LatticeData) -> Callable:
    """z ↦ log((℘ − r3)/(℘ − r4)) written in u = 1/℘."""

    def term(z: np.ndarray) -> np.ndarray:
        u, _ = wp_reciprocal(z, lat)
        return np.log((1.0 - ps.r3 * u) / (1.0 - ps.r4 * u))

    return term


def _unwrap_side(values: np.ndarray) -> Tuple[np.ndarray, int, float]:
    d = np.diff(values)
    if not np.all(np.isfinite(d)):
        raise BranchTrackingError("non-finite value on the phase walk", {})
    k = np.round(d.imag / (2.0 * math.pi))
    resid = np.abs(d.imag - 2.0 * math.pi * k)
    max_jump = float(resid.max()) if resid.size else 0.0
    if max_jump > 0.5 * math.pi:
        raise BranchTrackingError(
            "phase jump exceeds π/2 between adjacent walk points",
            {"max_jump": max_jump},
        )
    shift = np.concatenate([[0.0], np.cumsum(k)])
    return values - 2j * math.pi * shift, int(np.abs(k).sum()), max_jump


@refine_on_failure(step_arg="step", max_attempts=5)
def _walk(targets: np.ndarray, fn: Callable, state: BranchState, *, step: float) -> np.ndarray:
    """Continuous values of fn at targets, walking outward from z = 0."""
    out = np.empty(targets.shape, dtype=complex)
    corrections, max_jump = 0, 0.0
    for side in (1.0, -1.0):
        sel = targets * side >= 0 if side > 0 else targets < 0
        if not sel.any():
            continue
        reach = float(np.max(np.abs(targets[sel])))
        n = max(int(math.ceil(reach / step)), 1)
        base = np.linspace(0.0, reach, n + 1)
        grid = np.union1d(base, np.abs(targets[sel]))
        raw = fn(side * grid.astype(complex))
        raw = raw - raw[0]
        vals, c, j = _unwrap_side(raw)
        corrections += c
        max_jump = max(max_jump, j)
        idx = np.searchsorted(grid, np.abs(targets[sel]))
        out[sel] = vals[idx]
    state.walk_step = step
    state.corrections = corrections
    state.max_jump = max_jump
    return out


def _phase_integral(z: np.ndarray, ps: PhiSolution, hs: HSolution) -> np.ndarray:
    """∫₀^z h, in complex arithmetic (imaginary part ~ 0)."""
    lat = hs.lat_z
    st = ps.branch_state
    total = hs.params.h0 * z.astype(complex)
    total = total + ps.r1 / ps.dp_v1 * _walk(z, _sigma_term(ps.v1, ps.zeta_v1, lat), st, step=st.walk_step)
    if ps.mode == "pole-pair":
        total = total + ps.r2 / ps.dp_v2 * _walk(z, _sigma_term(ps.v2, ps.zeta_v2, lat), st, step=st.walk_step)
        total = total + ps.log_coeff * _walk(z, _log_term(ps, lat), st, step=st.walk_step)
    return total


def phi_eval(z, ps: PhiSolution, hs: HSolution):
    """
    φ(z) = φ₀ + c₁z − 2a∫₀^z h.

    Raises:
        BranchTrackingError: walk could not be refined enough
        NumericFailureError: the evaluated phase is not real
    """
    za = np.atleast_1d(np.asarray(z, dtype=float))
    p = hs.params
    integral = _phase_integral(za, ps, hs)
    phi = p.phi0 + p.c1 * za - 2.0 * p.a * integral
    imag = np.abs(phi.imag)
    if np.any(imag > PHASE_IMAG_TOL * (1.0 + np.abs(phi.real))):
        i = int(np.argmax(imag))
        raise NumericFailureError(
            "phase has a non-negligible imaginary part",
            {"z": float(za[i]), "imag": float(imag[i])},
        )
    return float(phi.real[0]) if np.ndim(z) == 0 else phi.real


def phi_eval_printed(z, ps: PhiSolution, hs: HSolution):
    """Phase in its printed simplified form (c₁ − 2a)z + φ₀ − 2a·I₁(z)/℘′(v₁).

    Only defined for h₀ = 0; kept for comparison against phi_eval.
    """
    if hs.params.h0 != 0.0 or ps.mode != "single-pole":
        raise InvalidInputError("printed phase form needs h0 = 0", {"h0": hs.params.h0})
    za = np.atleast_1d(np.asarray(z, dtype=float))
    p = hs.params
    st = ps.branch_state
    term = _walk(za, _sigma_term(ps.v1, ps.zeta_v1, hs.lat_z), st, step=st.walk_step)
    phi = ((p.c1 - 2.0 * p.a) * za + p.phi0 - 2.0 * p.a / ps.dp_v1 * term).real
    return float(phi[0]) if np.ndim(z) == 0 else phi


# ─── f(t, z) ──────────────────────────────────────────────


@dataclass(frozen=True)
class ZSlice:
    """Everything f needs at one z."""

    z: float
    h: float
    hz: float
    q2: QuarticCoefficients
    inv_t: EllipticInvariants
    lat_t: LatticeData
    r2_at_f0: float
    kernel: Optional[InversionData]

    @property
    def Lt(self) -> float:
        return self.lat_t.real_period


def t_slice(hs: HSolution, z: float, f0: float) -> ZSlice:
    """Build the t-lattice at one z (h and h_z analytic)."""
    z = float(z)
    h, hz = h_with_derivative(z, hs)
    if h < 0:
        if h < -1e-12 * max(1.0, abs(hs.kernel.x0)):
            raise ConstraintViolationError("h(z) >= 0", h, z=z)
        h = 0.0
    q2 = r2_coefficients(hs.params, h, hz, reading=hs.reading)
    inv_t = invariants_from_quartic(q2)
    lat_t = lattice_from_invariants(inv_t, pole_epsilon=hs.pole_epsilon, degeneracy_tol=hs.degeneracy_tol)
    r2 = float(q2.evaluate(f0))
    if -ROOT_TOL * q2.scale() * max(1.0, abs(f0)) ** 4 <= r2 < 0:
        r2 = 0.0
    kernel = InversionData.at(q2, f0, r2) if r2 >= 0 else None
    return ZSlice(z, h, hz, q2, inv_t, lat_t, r2, kernel)


# z-slices kept per FSolution, least recently used evicted first
SLICE_CACHE_SIZE = 512


@dataclass
class FSolution:
    h_solution: HSolution
    f0: float
    cache_size: int = SLICE_CACHE_SIZE
    cache: "OrderedDict[float, ZSlice]" = field(default_factory=OrderedDict, repr=False)

    def at(self, z: float) -> ZSlice:
        key = float(z)
        sl = self.cache.get(key)
        if sl is not None:
            self.cache.move_to_end(key)
            return sl
        sl = t_slice(self.h_solution, key, self.f0)
        self.cache[key] = sl
        if len(self.cache) > self.cache_size:
            self.cache.popitem(last=False)
        return sl


def build_f_solution(hs: HSolution, f0: Optional[float] = None) -> FSolution:
    return FSolution(h_solution=hs, f0=hs.params.f0 if f0 is None else float(f0))


def f_with_derivative(t, z: float, fs: FSolution, strict: bool = True):
    """
    f(t, z) and the analytic f_t(t, z) at one z.

    Raises:
        ConstraintViolationError: R₂(f₀, z) < 0
        SingularityError: vanishing denominator (strict only)
    """
    sl = fs.at(z)
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    if sl.kernel is None:
        if strict:
            raise ConstraintViolationError("R2(f0, z) >= 0", sl.r2_at_f0, z=sl.z, f0=fs.f0)
        nan = np.full(ta.shape, np.nan)
        return (float("nan"), float("nan")) if np.ndim(t) == 0 else (nan, nan.copy())

    u, v = wp_reciprocal(ta, sl.lat_t)
    x, dx, den, scale = _general_form(u, v, sl.kernel, sl.inv_t.g2, sl.inv_t.g3)
    singular = _check_singular(den, scale, strict, "f(t, z)", ta)
    f = np.where(singular, np.nan, x.real)
    ft = np.where(singular, np.nan, dx.real)
    if np.ndim(t) == 0:
        return float(f[0]), float(ft[0])
    return f, ft


def f_eval(t, z: float, fs: FSolution):
    return f_with_derivative(t, z, fs)[0]


# ─── Periods and Ψ ────────────────────────────────────────


def periods(hs: HSolution, z: Optional[float] = None) -> Tuple[float, Optional[float]]:
    """(Lz, Lt(z)); Lt is None when no z is given, inf for solitary t-lattices."""
    lz = hs.Lz
    if z is None:
        return lz, None
    return lz, t_slice(hs, z, hs.params.f0).Lt


def psi_eval(t, z: float, hs: HSolution, ps: PhiSolution, fs: FSolution, strict: bool = True):
    """Ψ = (f + i√h)e^{iφ} and |Ψ|² = f² + h at one z."""
    f, _ = f_with_derivative(t, z, fs, strict=strict)
    h = max(h_eval(float(z), hs), 0.0)
    phi = phi_eval(float(z), ps, hs)
    amp = np.asarray(f) + 1j * math.sqrt(h)
    psi = amp * np.exp(1j * phi)
    intensity = np.asarray(f) ** 2 + h
    if np.ndim(t) == 0:
        return complex(psi), float(intensity)
    return psi, intensity


# ─── Sampled fields ───────────────────────────────────────


def uniform_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 2 or not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise InvalidInputError("grid needs finite lo < hi and n >= 2", {"lo": lo, "hi": hi, "n": n})
    return np.linspace(lo, hi, n)


def _is_uniform(grid: np.ndarray) -> bool:
    if grid.size < 3:
        return True
    steps = np.diff(grid)
    return bool(np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15))


@dataclass
class SampledField:
    """Values on a rectangular grid; row i belongs to z_grid[i], column j to t_grid[j]."""

    t_grid: np.ndarray
    z_grid: np.ndarray
    values: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)
    phase: Optional[np.ndarray] = None

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.z_grid = np.asarray(self.z_grid, dtype=float)
        self.values = np.asarray(self.values)
        expected = (self.z_grid.size, self.t_grid.size)
        if self.values.shape != expected:
            raise InvalidInputError(
                "field values do not match the grid",
                {"shape": list(self.values.shape), "expected": list(expected)},
            )
        if not (_is_uniform(self.t_grid) and _is_uniform(self.z_grid)):
            raise InvalidInputError("field grids must be uniform", {})
        if self.phase is not None and np.asarray(self.phase).shape != (self.z_grid.size,):
            raise InvalidInputError("phase must have one value per z", {})

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0]) if self.t_grid.size > 1 else 0.0

    @property
    def dz(self) -> float:
        return float(self.z_grid[1] - self.z_grid[0]) if self.z_grid.size > 1 else 0.0

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)


def f_field(t_grid, z_grid, fs: FSolution, meta: Optional[Dict[str, Any]] = None) -> SampledField:
    """f over a (t, z) grid, one t-lattice per z row; inadmissible cells are nan."""
    t_grid = np.asarray(t_grid, dtype=float)
    z_grid = np.asarray(z_grid, dtype=float)
    values = np.full((z_grid.size, t_grid.size), np.nan)
    for i, z in enumerate(z_grid):
        values[i] = f_with_derivative(t_grid, z, fs, strict=False)[0]
    return SampledField(t_grid, z_grid, values, meta=dict(meta or {}))


def psi_field(
    t_grid,
    z_grid,
    hs: HSolution,
    ps: PhiSolution,
    fs: FSolution,
    meta: Optional[Dict[str, Any]] = None,
) -> Tuple[SampledField, SampledField]:
    """Ψ and |Ψ|² over a grid; the Ψ field carries φ(z) for de-rotation."""
    t_grid = np.asarray(t_grid, dtype=float)
    z_grid = np.asarray(z_grid, dtype=float)
    h = np.maximum(h_eval(z_grid, hs), 0.0)
    phi = np.asarray(phi_eval(z_grid, ps, hs), dtype=float)
    f = f_field(t_grid, z_grid, fs).values
    amp = f + 1j * np.sqrt(h)[:, None]
    psi = amp * np.exp(1j * phi)[:, None]
    intensity = f * f + h[:, None]
    meta = dict(meta or {})
    return (
        SampledField(t_grid, z_grid, psi, meta={**meta, "quantity": "psi"}, phase=phi),
        SampledField(t_grid, z_grid, intensity, meta={**meta, "quantity": "intensity"}),
    )
