"""Collective two-emitter quantities built on the slab tensors.

Decay rates are contractions of the imaginary part of the Green's tensor
with the dipole orientations, normalized so an isolated vacuum emitter has
rate 1.  The dipole-dipole shift is a principal-value integral over the
scattered (slab minus free-space) part of the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import QuadratureError
from .greens import (
    SlabGeometry,
    greens_cross,
    greens_free_space,
    greens_same_side,
    imag_free_space,
    mirror_to_region0,
)
from .greens import _imag_scalar_longitudinal, _imag_scalar_transverse
from .material import SlabMaterial
from .quadrature import QuadratureSpec

__all__ = [
    "DipoleEmitter",
    "CollectiveRates",
    "PrincipalValueSpec",
    "ShiftResult",
    "MarkovValidity",
    "decay_rates",
    "free_space_cross_rate",
    "dipole_dipole_shift",
    "markov_validity",
    "aperture_rate_ratio",
]

_MIRROR = np.diag([1.0, 1.0, -1.0])
_SELF_NORM = 1.0 / (6.0 * math.pi)  # Im G self term of an isolated emitter


@dataclass(frozen=True)
class DipoleEmitter:
    """Point dipole with unit orientation; transition frequency is 1."""

    position: tuple[float, float, float]
    orientation: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        pos = tuple(float(x) for x in self.position)
        ori = np.asarray(self.orientation, dtype=float)
        norm = np.linalg.norm(ori)
        if norm == 0.0:
            raise ValueError("dipole orientation must be nonzero")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", tuple(ori / norm))

    @property
    def position_array(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)

    @property
    def orientation_array(self) -> np.ndarray:
        return np.asarray(self.orientation, dtype=float)


@dataclass(frozen=True)
class CollectiveRates:
    """Decay-rate matrix entries and dipole-dipole shift, in units Gamma0."""

    gamma11: float
    gamma22: float
    gamma12: float
    delta_omega: float = 0.0

    def __post_init__(self):
        if self.gamma11 <= 0.0 or self.gamma22 <= 0.0:
            raise ValueError("single-emitter rates must be positive")

    def is_positive_semidefinite(self, tol: float = 1.0e-9) -> bool:
        bound = math.sqrt(self.gamma11 * self.gamma22)
        return abs(self.gamma12) <= bound * (1.0 + tol) + tol

    def with_shift(self, delta_omega: float) -> "CollectiveRates":
        return replace(self, delta_omega=float(delta_omega))


def _imag_tensor_between(geom, material, r_k, r_l, omega, quad, spectral_range):
    """Im G between two vacuum points, dispatched by region pair."""
    reg_k = geom.region_of(r_k[2])
    reg_l = geom.region_of(r_l[2])
    if 1 in (reg_k, reg_l):
        raise ValueError("emitters inside the slab are not supported")
    coincident = bool(np.all(r_k == r_l))
    if reg_k == reg_l == 0:
        g = greens_same_side(
            geom, material, r_k, r_l, omega, quad,
            imag_only=coincident, spectral_range=spectral_range,
        )
        return g.imag()
    if reg_k == reg_l == 2:
        g = greens_same_side(
            geom,
            material,
            mirror_to_region0(geom, r_k),
            mirror_to_region0(geom, r_l),
            omega,
            quad,
            imag_only=coincident,
            spectral_range=spectral_range,
        )
        return _MIRROR @ g.imag() @ _MIRROR
    g = greens_cross(
        geom, material, r_k, r_l, omega, quad, spectral_range=spectral_range
    )
    im = g.imag()
    if reg_k == 0:
        # greens_cross puts the field point in region 2; transpose back so
        # the row index belongs to r_k.
        im = im.T
    return im


def decay_rates(
    e1: DipoleEmitter,
    e2: DipoleEmitter,
    geom: SlabGeometry,
    material: SlabMaterial,
    omega: float = 1.0,
    quad: QuadratureSpec | None = None,
    spectral_range: str = "full",
) -> CollectiveRates:
    """Single-emitter and cross decay rates in units of the vacuum rate.

    Both emitters must sit in a vacuum region (0 or 2).  The normalization
    divides out the free-space self term, so an isolated vacuum emitter
    yields exactly 1.  ``spectral_range="propagating"`` keeps only the
    radiative plane-wave channel: for subwavelength slabs the full rates are
    dominated by near-field coupling to the slab surface modes, which the
    loss-sweep figure deliberately excludes.
    """
    if quad is None:
        quad = QuadratureSpec()
    r1 = e1.position_array
    r2 = e2.position_array
    d1 = e1.orientation_array
    d2 = e2.orientation_array
    norm = _SELF_NORM * omega

    g11 = d1 @ _imag_tensor_between(
        geom, material, r1, r1, omega, quad, spectral_range) @ d1
    g22 = d2 @ _imag_tensor_between(
        geom, material, r2, r2, omega, quad, spectral_range) @ d2
    g12 = d1 @ _imag_tensor_between(
        geom, material, r1, r2, omega, quad, spectral_range) @ d2
    return CollectiveRates(
        gamma11=g11 / norm, gamma22=g22 / norm, gamma12=g12 / norm
    )


def free_space_cross_rate(separation, orientation) -> float:
    """Normalized cross rate of two parallel dipoles in vacuum (closed form).

    With u = k |r|, the transverse and longitudinal profiles are

        F_t(u) = (3/2) (sin u / u + cos u / u^2 - sin u / u^3)
        F_l(u) = 3 (-cos u / u^2 + sin u / u^3)

    combined by the squared projection of the dipole axis on the separation;
    both tend to 1 as u -> 0.
    """
    sep = np.asarray(separation, dtype=float)
    ori = np.asarray(orientation, dtype=float)
    ori = ori / np.linalg.norm(ori)
    dist = float(np.linalg.norm(sep))
    if dist == 0.0:
        return 1.0
    u = dist  # k = 1
    cos2 = float((sep @ ori) / dist) ** 2
    f_t = 1.5 * float(_imag_scalar_transverse(u))
    f_l = 1.5 * float(_imag_scalar_longitudinal(u))
    return (1.0 - cos2) * f_t + cos2 * f_l


@dataclass(frozen=True)
class PrincipalValueSpec:
    """Panel layout for the principal-value frequency integral.

    The integrand is regularized over a symmetric window around resonance
    by subtracting the on-resonance value (which integrates to zero in the
    principal-value sense).  Panels are Gauss-Legendre; ``fine_band`` gets
    ``fine_spacing`` to resolve the material resonance structure.
    """

    omega_min: float = 0.02
    omega_max: float = 10.0
    window: float = 0.1
    spacing: float = 0.1
    fine_spacing: float = 0.002
    fine_band: tuple[float, float] = (0.55, 1.45)
    nodes: int = 10

    def __post_init__(self):
        if not 0.0 < self.omega_min < 1.0 - self.window:
            raise ValueError("omega_min must lie below the resonance window")
        if self.omega_max <= 1.0 + self.window:
            raise ValueError("omega_max must lie above the resonance window")
        if not 0.0 < self.window < 0.5:
            raise ValueError("window must lie in (0, 0.5)")
        if self.spacing <= 0.0 or self.fine_spacing <= 0.0:
            raise ValueError("panel spacings must be positive")
        if self.nodes < 2:
            raise ValueError("need at least 2 Gauss nodes per panel")

    def refined(self, factor: float = 0.5) -> "PrincipalValueSpec":
        return replace(
            self,
            spacing=self.spacing * factor,
            fine_spacing=self.fine_spacing * factor,
        )


class ShiftResult(NamedTuple):
    delta_omega: float
    tail_estimate: float


def _panel_edges(lo, hi, pv: PrincipalValueSpec):
    """Breakpoints over [lo, hi] honouring the fine band."""
    edges = [lo]
    fine_lo, fine_hi = pv.fine_band
    x = lo
    while x < hi - 1.0e-12:
        spacing = pv.fine_spacing if fine_lo <= x < fine_hi else pv.spacing
        x = min(x + spacing, hi)
        # Snap to the fine-band boundaries so spacing switches cleanly.
        for edge in (fine_lo, fine_hi):
            if edges[-1] < edge < x:
                x = edge
                break
        edges.append(x)
    return np.asarray(edges)


def _gauss_panels(func, lo, hi, pv: PrincipalValueSpec):
    nodes, weights = np.polynomial.legendre.leggauss(pv.nodes)
    edges = _panel_edges(lo, hi, pv)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        for x, w in zip(nodes, weights):
            total += half * w * func(mid + half * x)
    return total


def dipole_dipole_shift(
    e1: DipoleEmitter,
    e2: DipoleEmitter,
    geom: SlabGeometry,
    material: SlabMaterial,
    pv: PrincipalValueSpec | None = None,
    quad: QuadratureSpec | None = None,
    spectral_range: str = "propagating",
) -> ShiftResult:
    """Radiative dipole-dipole shift in units Gamma0.

    Integrates the scattered part of the cross spectrum (slab tensor minus
    the free-space tensor between the same points) against the resonance
    denominator; in scaled units

        shift = 3 PV INT dw w^2 Im[dg(w)] / (w - 1).

    The default integrates the radiative (propagating) channel: for nearly
    lossless lens models the evanescent spectrum off resonance consists of
    quasi-singular guided-mode contributions whose width is set by the
    residual damping, which neither converges numerically nor survives the
    lossless limit.  Returns the shift and an oscillation-based estimate of
    the truncated tail beyond ``omega_max``.
    """
    if pv is None:
        pv = PrincipalValueSpec()
    if quad is None:
        quad = QuadratureSpec(rel_tol=1.0e-7, abs_tol=1.0e-11)
    r1 = e1.position_array
    r2 = e2.position_array
    d1 = e1.orientation_array
    d2 = e2.orientation_array
    regions = {geom.region_of(r1[2]), geom.region_of(r2[2])}
    if regions != {0, 2}:
        raise ValueError("shift evaluation expects emitters on opposite sides")

    def scattered_imag(omega):
        # The engine caps k_perp in units of the local wavenumber; below
        # resonance the geometric near-field scale dominates, so widen the
        # cap accordingly.
        quad_eff = replace(quad, kperp_cap=quad.kperp_cap * max(1.0, 1.0 / omega))
        tensor = greens_cross(
            geom, material, r1, r2, omega=omega, quad=quad_eff,
            spectral_range=spectral_range,
        )
        if geom.region_of(r1[2]) == 0:
            im = tensor.imag().T
        else:
            im = tensor.imag()
        im_free = imag_free_space(r1, r2, omega)
        return float(d1 @ (im - im_free) @ d2)

    def numerator(omega):
        return 3.0 * omega**2 * scattered_imag(omega)

    f_res = numerator(1.0)

    def outer(omega):
        return numerator(omega) / (omega - 1.0)

    def windowed(omega):
        if abs(omega - 1.0) < 1.0e-9:
            h = 1.0e-6
            return (numerator(1.0 + h) - numerator(1.0 - h)) / (2.0 * h)
        return (numerator(omega) - f_res) / (omega - 1.0)

    total = 0.0
    total += _gauss_panels(outer, pv.omega_min, 1.0 - pv.window, pv)
    total += _gauss_panels(windowed, 1.0 - pv.window, 1.0 + pv.window, pv)
    total += _gauss_panels(outer, 1.0 + pv.window, pv.omega_max, pv)

    # Tail proxy: half the magnitude of the final oscillation period of the
    # integrand (period pi / separation in the vacuum phase).
    separation = abs(r1[2] - r2[2])
    period = math.pi / max(separation, 1.0)
    tail_lo = max(pv.omega_max - period, 1.0 + pv.window)
    tail = 0.5 * abs(_gauss_panels(outer, tail_lo, pv.omega_max, pv))
    return ShiftResult(delta_omega=float(total), tail_estimate=float(tail))


class MarkovValidity(NamedTuple):
    ratio: float
    valid: bool


def markov_validity(
    d: float, gamma11: float, threshold: float = 0.1
) -> MarkovValidity:
    """Photon-travel-time criterion for the memoryless description.

    ``ratio = d * gamma11 / c`` compares the propagation time across the
    emitter separation with the radiative lifetime; the dynamics is
    Markovian only for ratios well below 1 (default threshold 0.1).  Here
    ``gamma11`` is the physical rate in units of the transition frequency.
    """
    if d <= 0.0:
        raise ValueError("distance must be positive")
    if gamma11 < 0.0:
        raise ValueError("rate must be non-negative")
    ratio = d * gamma11  # c = 1
    return MarkovValidity(ratio=ratio, valid=ratio < threshold)


def aperture_rate_ratio(a: float, d: float) -> float:
    """Cross-rate suppression of a finite-radius ideal lens at the foci.

    Restricting the propagation-angle cosine to [xi_min, 1] with the
    resonance weight (1 + xi^2) gives

        ratio = (3/4) [(1 - xi_min) + (1 - xi_min^3) / 3],
        xi_min = (1/2) / sqrt(1/4 + (a/d)^2).
    """
    if d <= 0.0:
        raise ValueError("thickness must be > 0")
    if a <= 0.0:
        raise ValueError("aperture radius must be > 0")
    if math.isinf(a):
        return 1.0
    ratio = a / d
    xi_min = 0.5 / math.sqrt(0.25 + ratio * ratio)
    return 0.75 * ((1.0 - xi_min) + (1.0 - xi_min**3) / 3.0)
