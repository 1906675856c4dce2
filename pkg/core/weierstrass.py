"""Weierstrass ℘, ℘′, ζ, σ and ℘⁻¹ for real invariants (g₂, g₃).

The period basis is Gauss-reduced, arguments are folded into the reduced
cell and the nome (q-series) expansions along the shorter period are summed
there; ζ and log σ pick up their quasi-periods from the fold. Lattices with
Δ = 0 are routed to the hyperbolic/trigonometric closed forms.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.special import elliprf

from core.exceptions import (
    InternalError,
    InvalidInputError,
    NumericFailureError,
    PoleProximityError,
)

logger = logging.getLogger(__name__)

DEFAULT_POLE_EPSILON = 1e-8
DEFAULT_DEGENERACY_TOL = 1e-12

_LAURENT_TERMS = 24
# shifted Laurent series in wp_reciprocal is used within this fraction of the shortest period
_SERIES_RADIUS_FRACTION = 0.25
_NEWTON_STEPS = 12
# q-series truncation: terms until |q|^n < 10^-_NOME_DIGITS
_NOME_DIGITS = 40
_MAX_NOME_TERMS = 80
# ℘(ω) must reproduce e₁ to this fraction of the root scale
_E1_CHECK_TOL = 1e-8

ArrayLike = Union[complex, float, np.ndarray]


@dataclass(frozen=True)
class EllipticInvariants:
    """Invariants g₂, g₃ and discriminant Δ = g₂³ − 27g₃²."""

    g2: float
    g3: float
    delta: float = field(init=False)

    def __post_init__(self):
        g2, g3 = float(self.g2), float(self.g3)
        if not (math.isfinite(g2) and math.isfinite(g3)):
            raise InvalidInputError(
                "invariants must be finite", {"g2": self.g2, "g3": self.g3}
            )
        object.__setattr__(self, "g2", g2)
        object.__setattr__(self, "g3", g3)
        object.__setattr__(self, "delta", g2**3 - 27.0 * g3**2)

    def is_degenerate(self, tol: float = DEFAULT_DEGENERACY_TOL) -> bool:
        return abs(self.delta) <= tol * max(1.0, abs(self.g2) ** 3)

    def classification(self, tol: float = DEFAULT_DEGENERACY_TOL) -> str:
        """Return ``"degenerate"``, ``"positive"`` or ``"negative"``."""
        if self.is_degenerate(tol):
            return "degenerate"
        return "positive" if self.delta > 0 else "negative"


@dataclass(frozen=True)
class LatticeData:
    """Roots, half-periods and series data of one lattice.

    ``omega`` is the real half-period (``inf`` for the solitary-like
    degenerate lattices), ``eta = ζ(ω)``. ``basis`` holds two generators of
    the period lattice; an infinite entry means the lattice has no period in
    that direction. ``degenerate_root`` is the double root c when the closed
    degenerate forms are in use.

    ``cell`` is the Gauss-reduced period pair (b₁, b₂) with Im(b₂/b₁) > 0,
    ``cell_etas`` the matching (ζ(b₁/2), ζ(b₂/2)) and ``nome`` is
    q = exp(iπ·b₂/b₁); all three are unused for degenerate lattices.
    """

    invariants: EllipticInvariants
    e_roots: Tuple[complex, complex, complex]
    e1: float
    omega: float
    eta: float
    omega_prime: complex
    basis: Tuple[complex, complex]
    min_period: float
    degenerate_root: Optional[float] = None
    pole_epsilon: float = DEFAULT_POLE_EPSILON
    laurent: Tuple[float, ...] = ()
    cell: Tuple[complex, complex] = (0j, 0j)
    cell_etas: Tuple[complex, complex] = (0j, 0j)
    nome: complex = 0j

    @property
    def g2(self) -> float:
        return self.invariants.g2

    @property
    def g3(self) -> float:
        return self.invariants.g3

    @property
    def real_period(self) -> float:
        return 2.0 * self.omega

    @property
    def series_radius(self) -> float:
        return _SERIES_RADIUS_FRACTION * self.min_period

    @property
    def is_degenerate(self) -> bool:
        return self.degenerate_root is not None


class WeierstrassValues(NamedTuple):
    p: np.ndarray
    dp: np.ndarray
    zeta: np.ndarray
    log_sigma: np.ndarray


# ─── Invariants ───────────────────────────────────────────


def invariants_from_quartic(q) -> EllipticInvariants:
    """Invariants of R(x) = αx⁴ + 4βx³ + 6γx² + 4δx + ε.

    Args:
        q: QuarticCoefficients (anything exposing alpha..epsilon)

    Returns:
        EllipticInvariants with g₂ = αε − 4βδ + 3γ² and
        g₃ = αγε + 2βγδ − αδ² − γ³ − β²ε
    """
    coeffs = (q.alpha, q.beta, q.gamma, q.delta, q.epsilon)
    if not all(math.isfinite(c) for c in coeffs):
        raise InvalidInputError("quartic coefficients must be finite", {"coefficients": coeffs})
    al, be, ga, de, ep = coeffs
    g2 = al * ep - 4.0 * be * de + 3.0 * ga * ga
    g3 = al * ga * ep + 2.0 * be * ga * de - al * de * de - ga**3 - be * be * ep
    return EllipticInvariants(g2, g3)


def cubic_roots(g2: float, g3: float) -> Tuple[complex, complex, complex]:
    """Roots of 4j³ − g₂j − g₃, Newton-polished, sorted by descending real part.

    For a single real root the complex pair is returned as exact conjugates
    with e₂ + e₃ = −e₁.
    """
    raw = np.roots([4.0, 0.0, -g2, -g3]).astype(complex)
    polished = []
    for r in raw:
        for _ in range(4):
            f = 4.0 * r**3 - g2 * r - g3
            df = 12.0 * r * r - g2
            if df == 0 or f == 0:
                break
            step = f / df
            r = r - step
            if abs(step) <= 1e-17 * max(1.0, abs(r)):
                break
        polished.append(complex(r))

    real_like = [r for r in polished if abs(r.imag) <= 1e-9 * max(1.0, abs(r))]
    if len(real_like) == 3 or (g2**3 - 27.0 * g3**2) >= 0:
        values = sorted((r.real for r in polished), reverse=True)
        return complex(values[0]), complex(values[1]), complex(values[2])
    if not real_like:
        raise InternalError("cubic with real coefficients has no real root", {"g2": g2, "g3": g3})
    e1 = max(real_like, key=lambda r: r.real).real
    pair = [r for r in polished if r is not None and abs(r.imag) > 1e-9 * max(1.0, abs(r))]
    im = abs(pair[0].imag) if pair else 0.0
    re = -e1 / 2.0
    return complex(e1), complex(re, im), complex(re, -im)


# ─── Lattice setup ────────────────────────────────────────


def _laurent_coefficients(g2: float, g3: float, terms: int = _LAURENT_TERMS) -> Tuple[float, ...]:
    """c_k of ℘(z) = 1/z² + Σ_{k≥2} c_k z^{2k−2}."""
    c = [0.0] * (terms + 1)
    c[2] = g2 / 20.0
    if terms >= 3:
        c[3] = g3 / 28.0
    for k in range(4, terms + 1):
        acc = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3.0 * acc / ((2 * k + 1) * (k - 3))
    return tuple(c)


def _reduce_basis(b1: complex, b2: complex) -> Tuple[complex, complex]:
    """Gauss reduction: |b₁| ≤ |b₂|, |Re(b₂/b₁)| ≤ 1/2, Im(b₂/b₁) > 0."""
    for _ in range(200):
        if abs(b2) < abs(b1):
            b1, b2 = b2, b1
        k = round((b2 / b1).real)
        if k == 0:
            break
        b2 = b2 - k * b1
    if (b2 / b1).imag < 0:
        b2 = -b2
    return complex(b1), complex(b2)


def _coordinates(z, b1: complex, b2: complex):
    """Real (x, y) with z = x·b₁ + y·b₂."""
    x = (z * np.conj(b2)).imag / (b1 * np.conj(b2)).imag
    y = (z * np.conj(b1)).imag / (b2 * np.conj(b1)).imag
    return x, y


def _nome_terms(q: complex) -> int:
    aq = abs(q)
    if aq == 0.0:
        return 1
    return int(min(_MAX_NOME_TERMS, max(4, math.ceil(_NOME_DIGITS / -math.log10(aq)) + 2)))


def _cell_data(b1: complex, b2: complex) -> Tuple[complex, complex, complex]:
    """(η₁, η₃, q) for the reduced pair; η₁ from the Lambert series, η₃ by Legendre."""
    w1, w3 = 0.5 * b1, 0.5 * b2
    q = complex(np.exp(1j * math.pi * (b2 / b1)))
    n = np.arange(1, _nome_terms(q) + 1)
    q2n = (q * q) ** n
    lambert = complex(np.sum(n * q2n / (1.0 - q2n)))
    eta1 = math.pi**2 / (12.0 * w1) * (1.0 - 24.0 * lambert)
    eta3 = (eta1 * w3 - 0.5j * math.pi) / w1
    return complex(eta1), complex(eta3), q


def lattice_from_invariants(
    inv: EllipticInvariants,
    pole_epsilon: float = DEFAULT_POLE_EPSILON,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> LatticeData:
    """Build lattice data: roots, half-periods, quasi-period η.

    Args:
        inv: invariants
        pole_epsilon: raw ℘ calls closer than this fraction of the real
            period to a lattice point raise PoleProximityError
        degeneracy_tol: |Δ| tolerance for the closed degenerate forms

    Returns:
        LatticeData

    Raises:
        InternalError: the periods are not finite or ℘(ω) misses e₁
    """
    if inv.is_degenerate(degeneracy_tol):
        return _degenerate_lattice(inv, pole_epsilon)

    g2, g3 = inv.g2, inv.g3
    e1, e2, e3 = cubic_roots(g2, g3)
    if inv.delta > 0:
        omega = float(elliprf(0.0, (e1 - e2).real, (e1 - e3).real))
        omega_tilde = float(elliprf(0.0, (e1 - e3).real, (e2 - e3).real))
        omega_prime = 1j * omega_tilde
        basis = (complex(2.0 * omega), 2.0 * omega_prime)
    else:
        omega = float(np.real(elliprf(0.0, e1 - e2, e1 - e3)))
        # rotated curve: its real half-period is the imaginary one of this lattice
        omega_tilde = float(np.real(elliprf(0.0, e2 - e1, e3 - e1)))
        omega_prime = 1j * omega_tilde
        basis = (complex(2.0 * omega), omega + omega_prime)

    if not (math.isfinite(omega) and omega > 0 and math.isfinite(omega_tilde) and omega_tilde > 0):
        raise InternalError(
            "half-periods are not finite",
            {"g2": g2, "g3": g3, "omega": omega, "omega_tilde": omega_tilde},
        )

    cell = _reduce_basis(*basis)
    eta1, eta3, q = _cell_data(*cell)
    # 2ω = m₁b₁ + m₃b₂ with integer coordinates, so ζ(ω) = m₁η₁ + m₃η₃
    x, y = _coordinates(complex(2.0 * omega), *cell)
    eta = (round(x) * eta1 + round(y) * eta3).real

    lat = LatticeData(
        invariants=inv,
        e_roots=(e1, e2, e3),
        e1=float(e1.real),
        omega=omega,
        eta=float(eta),
        omega_prime=omega_prime,
        basis=basis,
        min_period=abs(cell[0]),
        pole_epsilon=pole_epsilon,
        laurent=_laurent_coefficients(g2, g3),
        cell=cell,
        cell_etas=(eta1, eta3),
        nome=q,
    )

    p_omega = complex(_evaluate(np.array([complex(omega)]), lat).p[0])
    root_scale = 1.0 + max(abs(e) for e in lat.e_roots)
    if abs(p_omega - lat.e1) > _E1_CHECK_TOL * root_scale:
        raise InternalError(
            "℘(ω) does not reproduce e₁",
            {"g2": g2, "g3": g3, "wp_omega": p_omega, "e1": lat.e1},
        )
    logger.debug(
        "lattice g2=%.6g g3=%.6g delta=%.6g e1=%.12g omega=%.12g eta=%.12g |q|=%.3g",
        g2, g3, inv.delta, lat.e1, omega, lat.eta, abs(q),
    )
    return lat


def _degenerate_lattice(inv: EllipticInvariants, pole_epsilon: float) -> LatticeData:
    g2, g3 = inv.g2, inv.g3
    c = 0.0 if g2 == 0 else -1.5 * g3 / g2
    inf = float("inf")
    if c > 0:
        kappa = math.sqrt(3.0 * c)
        omega, eta = inf, float("nan")
        omega_prime = 1j * math.pi / (2.0 * kappa)
        basis = (complex(inf), 2.0 * omega_prime)
        min_period = math.pi / kappa
        roots = (complex(c), complex(c), complex(-2.0 * c))
    elif c < 0:
        kappa = math.sqrt(-3.0 * c)
        omega = math.pi / (2.0 * kappa)
        eta = -c * omega
        omega_prime = complex(0.0, inf)
        basis = (complex(2.0 * omega), complex(0.0, inf))
        min_period = 2.0 * omega
        roots = (complex(-2.0 * c), complex(c), complex(c))
    else:
        omega, eta = inf, float("nan")
        omega_prime = complex(0.0, inf)
        basis = (complex(inf), complex(0.0, inf))
        min_period = inf
        roots = (0j, 0j, 0j)
    logger.debug("degenerate lattice g2=%.6g g3=%.6g double root c=%.12g", g2, g3, c)
    return LatticeData(
        invariants=inv,
        e_roots=roots,
        e1=float(roots[0].real),
        omega=omega,
        eta=eta,
        omega_prime=omega_prime,
        basis=basis,
        min_period=min_period,
        degenerate_root=c,
        pole_epsilon=pole_epsilon,
        laurent=_laurent_coefficients(g2, g3),
    )


# ─── Evaluation engine ────────────────────────────────────


def _horner(coeffs, w):
    acc = np.zeros_like(w)
    for c in reversed(coeffs):
        acc = acc * w + c
    return acc


def _nome_series(z0: np.ndarray, lat: LatticeData) -> WeierstrassValues:
    """℘, ℘′, ζ, log σ for z₀ inside the reduced cell."""
    b1 = lat.cell[0]
    w1 = 0.5 * b1
    eta1 = lat.cell_etas[0]
    q = lat.nome
    k = math.pi / b1
    n = np.arange(1, _nome_terms(q) + 1)
    q2 = q * q
    q2n = q2**n
    coef = 1.0 / (1.0 - q2n)

    nu = k * z0
    s = np.sin(nu)
    c = np.cos(nu)
    e = np.exp(2j * nu)
    # a = q²e^{2iν}, b = q²e^{−2iν}; |a|, |b| ≤ |q| inside the cell
    a = (q2 * e)[..., None]
    b = (q2 / e)[..., None]
    an = a**n
    bn = b**n
    even = (an + bn) * coef
    odd = (an - bn) * coef / 2j

    p = -eta1 / w1 + (k / s) ** 2 - (math.pi / w1) ** 2 * np.sum(n * even, axis=-1)
    dp = -2.0 * k**3 * c / s**3 + 2.0 * (math.pi / w1) ** 3 * np.sum(n * n * odd, axis=-1)
    zeta = eta1 * z0 / w1 + k * c / s + (2.0 * math.pi / w1) * np.sum(odd, axis=-1)
    shift = q2 ** (n - 1)
    log_sigma = (
        eta1 * z0 * z0 / (2.0 * w1)
        + np.log(s / k)
        + np.sum(np.log1p(-shift * a) + np.log1p(-shift * b) - 2.0 * np.log1p(-q2n), axis=-1)
    )
    return WeierstrassValues(p, dp, zeta, log_sigma)


def _evaluate(z: np.ndarray, lat: LatticeData) -> WeierstrassValues:
    """℘, ℘′, ζ, log σ on a complex array (no pole check)."""
    if lat.is_degenerate:
        return _evaluate_degenerate(z, lat)

    b1, b2 = lat.cell
    x, y = _coordinates(z, b1, b2)
    m1, m3 = np.round(x), np.round(y)
    lam = m1 * b1 + m3 * b2
    z0 = z - lam

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        p, dp, zeta, log_sigma = _nome_series(z0, lat)

    eta1, eta3 = lat.cell_etas
    eta_lam = 2.0 * (m1 * eta1 + m3 * eta3)
    zeta = zeta + eta_lam
    # σ(z₀ + λ) = (−1)^{m₁+m₃+m₁m₃} exp(η(λ)(z₀ + λ/2)) σ(z₀)
    log_sigma = log_sigma + eta_lam * (z0 + 0.5 * lam) + 1j * math.pi * (m1 + m3 + m1 * m3)
    return WeierstrassValues(p, dp, zeta, log_sigma)


def _evaluate_degenerate(z: np.ndarray, lat: LatticeData) -> WeierstrassValues:
    c = lat.degenerate_root
    with np.errstate(divide="ignore", invalid="ignore"):
        if c == 0.0:
            return WeierstrassValues(1.0 / z**2, -2.0 / z**3, 1.0 / z, np.log(z))
        k = np.sqrt(complex(3.0 * c))
        kz = k * z
        s = np.sinh(kz)
        ch = np.cosh(kz)
        p = c + k * k / (s * s)
        dp = -2.0 * k**3 * ch / s**3
        zeta = -c * z + k * ch / s
        log_sigma = np.log(s / k) - 0.5 * c * z * z
    return WeierstrassValues(p, dp, zeta, log_sigma)


def nearest_lattice_point(z: ArrayLike, lat: LatticeData) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest lattice point to each z and its distance."""
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    if not lat.is_degenerate:
        b1, b2 = lat.cell
        x0, y0 = _coordinates(za, b1, b2)
        best = np.full(za.shape, np.inf)
        nearest = np.zeros(za.shape, dtype=complex)
        for dx in (np.floor, np.ceil):
            for dy in (np.floor, np.ceil):
                cand = dx(x0) * b1 + dy(y0) * b2
                d = np.abs(za - cand)
                better = d < best
                best = np.where(better, d, best)
                nearest = np.where(better, cand, nearest)
        return nearest, best
    b1, b2 = lat.basis
    if np.isfinite(b1):
        nearest = np.round(za.real / b1.real) * b1
    elif np.isfinite(b2.imag) and np.isfinite(b2.real):
        nearest = 1j * np.round(za.imag / b2.imag) * b2.imag
    else:
        nearest = np.zeros(za.shape, dtype=complex)
    return nearest, np.abs(za - nearest)


def _pole_scale(lat: LatticeData) -> float:
    if math.isfinite(lat.omega):
        return 2.0 * lat.omega
    if math.isfinite(lat.min_period):
        return lat.min_period
    return 1.0


def _as_array(z: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("argument must be finite", {"z": arr})
    return np.atleast_1d(arr), arr.ndim == 0


def _unwrap(arr: np.ndarray, scalar: bool):
    return arr[0] if scalar else arr


# ─── Public operations ────────────────────────────────────


def evaluate(z: ArrayLike, lat: LatticeData) -> WeierstrassValues:
    """All four values ℘, ℘′, ζ, log σ; no pole check."""
    za, scalar = _as_array(z)
    vals = _evaluate(za, lat)
    return WeierstrassValues(*(_unwrap(v, scalar) for v in vals))


def wp(z: ArrayLike, lat: LatticeData):
    """
    Evaluate ℘(z) and ℘′(z).

    Args:
        z: complex scalar or array
        lat: lattice data

    Returns:
        (℘, ℘′)

    Raises:
        PoleProximityError: z closer than pole_epsilon·2ω to a lattice point
    """
    za, scalar = _as_array(z)
    nearest, dist = nearest_lattice_point(za, lat)
    too_close = dist <= lat.pole_epsilon * _pole_scale(lat)
    if too_close.any():
        i = int(np.argmax(too_close))
        raise PoleProximityError(complex(za[i]), complex(nearest[i]), float(dist[i]))
    vals = _evaluate(za, lat)
    return _unwrap(vals.p, scalar), _unwrap(vals.dp, scalar)


def sigma_zeta(z: ArrayLike, lat: LatticeData):
    """σ(z) and ζ(z); σ is entire and vanishes on the lattice."""
    za, scalar = _as_array(z)
    vals = _evaluate(za, lat)
    with np.errstate(over="ignore"):
        sigma = np.exp(vals.log_sigma)
    return _unwrap(sigma, scalar), _unwrap(vals.zeta, scalar)


def log_sigma(z: ArrayLike, lat: LatticeData):
    """log σ(z) on some branch; callers unwrap differences themselves."""
    za, scalar = _as_array(z)
    return _unwrap(_evaluate(za, lat).log_sigma, scalar)


def wp_reciprocal(z: ArrayLike, lat: LatticeData):
    """(u, v) = (1/℘, ℘′/℘²), finite at and near the lattice points.

    Near a lattice point λ the shifted Laurent series in ε = z − λ is used
    directly, so u = v = 0 exactly at λ.
    """
    za, scalar = _as_array(z)
    nearest, dist = nearest_lattice_point(za, lat)
    radius = lat.series_radius if math.isfinite(lat.series_radius) else 1.0
    near = dist <= radius
    u = np.empty(za.shape, dtype=complex)
    v = np.empty(za.shape, dtype=complex)
    if near.any():
        eps = za[near] - nearest[near]
        c = lat.laurent
        ks = range(2, len(c))
        w = eps * eps
        # ℘ε² = 1 + Σ c_k ε^{2k};  ℘′ε³ = −2 + Σ c_k(2k−2)ε^{2k}
        p_scaled = 1.0 + w * w * _horner([c[k] for k in ks], w)
        dp_scaled = -2.0 + w * w * _horner([c[k] * (2 * k - 2) for k in ks], w)
        if lat.is_degenerate and lat.degenerate_root != 0.0:
            p_scaled, dp_scaled = _degenerate_scaled(eps, lat)
        u[near] = w / p_scaled
        v[near] = dp_scaled * eps / (p_scaled * p_scaled)
    far = ~near
    if far.any():
        vals = _evaluate(za[far], lat)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u[far] = 1.0 / vals.p
            v[far] = vals.dp / (vals.p * vals.p)
    return _unwrap(u, scalar), _unwrap(v, scalar)


def _degenerate_scaled(eps: np.ndarray, lat: LatticeData):
    c = lat.degenerate_root
    k = np.sqrt(complex(3.0 * c))
    ke = k * eps
    with np.errstate(divide="ignore", invalid="ignore"):
        # k²ε²/sinh²(kε) → 1 at ε = 0
        ratio = np.where(ke == 0, 1.0 + 0j, ke / np.sinh(np.where(ke == 0, 1.0, ke)))
        p_scaled = c * eps * eps + ratio * ratio
        dp_scaled = -2.0 * ratio**3 * np.cosh(ke)
    return p_scaled, dp_scaled


def wp_inverse(w: complex, lat: LatticeData) -> complex:
    """
    Principal preimage v with ℘(v) = w.

    Starts from the Carlson integral R_F(w−e₁, w−e₂, w−e₃), polishes by
    Newton steps against ℘ and folds the result to Re v ≥ 0 inside the
    reduced cell.

    Raises:
        NumericFailureError: no preimage found to 1e−9 relative
    """
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise InvalidInputError("wp_inverse needs a finite value", {"w": w})
    tol = 1e-9 * (1.0 + abs(w))

    starts = [_inverse_seed(w, lat)]
    v, resid = _newton_inverse(starts[0], w, lat)
    if resid > tol:
        # coarse scan of the fundamental cell as a fallback
        for seed in _cell_seeds(lat):
            cand, r = _newton_inverse(seed, w, lat)
            if r < resid:
                v, resid = cand, r
            if resid <= tol:
                break
    if resid > tol or not np.isfinite(v):
        raise NumericFailureError(
            "℘⁻¹ did not converge",
            {"w": w, "residual": resid, "g2": lat.g2, "g3": lat.g3, "start": starts[0]},
        )
    return _fold(v, lat)


def _inverse_seed(w: complex, lat: LatticeData) -> complex:
    if lat.is_degenerate:
        c = lat.degenerate_root
        if c == 0.0:
            return 1.0 / np.sqrt(w)
        k = np.sqrt(complex(3.0 * c))
        return complex(np.arcsinh(k / np.sqrt(w - c)) / k)
    e1, e2, e3 = lat.e_roots
    return complex(elliprf(w - e1, w - e2, w - e3))


def _newton_inverse(v: complex, w: complex, lat: LatticeData) -> Tuple[complex, float]:
    resid = float("inf")
    for _ in range(_NEWTON_STEPS):
        if not np.isfinite(v):
            return v, float("inf")
        vals = _evaluate(np.array([v]), lat)
        p, dp = vals.p[0], vals.dp[0]
        resid = abs(p - w)
        if resid <= 1e-15 * (1.0 + abs(w)) or dp == 0:
            break
        step = (p - w) / dp
        v = v - step
        if abs(step) <= 1e-16 * max(1.0, abs(v)):
            vals = _evaluate(np.array([v]), lat)
            resid = abs(vals.p[0] - w)
            break
    else:
        vals = _evaluate(np.array([v]), lat)
        resid = abs(vals.p[0] - w)
    return complex(v), float(resid)


def _cell_seeds(lat: LatticeData):
    b1, b2 = lat.basis
    if not (np.isfinite(b1) and np.isfinite(b2)):
        scale = lat.min_period if math.isfinite(lat.min_period) else 1.0
        b1, b2 = complex(scale), 1j * scale
    for i in range(1, 8):
        for j in range(0, 8):
            yield (i / 8.0) * 0.5 * b1 + (j / 8.0) * 0.5 * b2


def _fold(v: complex, lat: LatticeData) -> complex:
    if math.isfinite(lat.omega):
        v = v - 2.0 * lat.omega * round(v.real / (2.0 * lat.omega))
    b2 = lat.basis[1]
    if np.isfinite(b2) and b2.imag != 0:
        k = round(v.imag / b2.imag)
        v = v - k * b2
        if math.isfinite(lat.omega):
            v = v - 2.0 * lat.omega * round(v.real / (2.0 * lat.omega))
    if v.real < 0 or (v.real == 0 and v.imag < 0):
        v = -v
    return complex(v)


def invariants_printed_reading(q) -> EllipticInvariants:
    """Invariants with g₂ = 3γ² − 4βγ, the literal form of the printed h-invariant.

    Only used to report the alternative reading next to the corrected one.
    """
    al, be, ga, de, ep = q.alpha, q.beta, q.gamma, q.delta, q.epsilon
    g2 = 3.0 * ga * ga - 4.0 * be * ga
    g3 = al * ga * ep + 2.0 * be * ga * de - al * de * de - ga**3 - be * be * ep
    return EllipticInvariants(g2, g3)
