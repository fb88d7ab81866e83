"""Dyadic Green's tensors for a single magneto-dielectric slab in vacuum.

Geometry: the slab occupies -d <= z <= 0; region 0 is the vacuum above
(z > 0), region 1 the slab, region 2 the vacuum below (z < -d).  The
same-side tensor is the free-space closed form plus a reflected plane-wave
integral; the cross-slab tensor is a transmitted plane-wave integral.  The
azimuthal integrals are done analytically, leaving 1D radial integrals with
Bessel kernels that the adaptive engine evaluates.

For a strictly lossless left-handed slab the interface coefficients are
singular over the whole evanescent range (the ideal-lens degeneracy), while
the evanescent contribution to the imaginary part cancels in the lossless
limit; in that case only the propagating segment is integrated.  Lossless
right-handed media (vacuum, dielectrics) integrate the full spectrum.
Materials with any loss always use the full spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import PoleError, SingularityError
from .material import SlabMaterial
from .quadrature import QuadratureSpec, sommerfeld_integrate

__all__ = [
    "SlabGeometry",
    "GreensTensor",
    "PlaneWaveMode",
    "longitudinal_wavenumber",
    "fresnel_interface",
    "slab_coefficients",
    "aperture_cutoff",
    "greens_free_space",
    "imag_free_space",
    "greens_same_side",
    "greens_cross",
    "mirror_to_region0",
]

_FRESNEL_POLE_TOL = 1.0e-12
_SLAB_POLE_TOL = 1.0e-12


@dataclass(frozen=True)
class SlabGeometry:
    """Slab of thickness d (units c/omega0) with optional finite aperture."""

    thickness: float
    aperture_radius: float = math.inf

    def __post_init__(self):
        if self.thickness <= 0.0:
            raise ValueError(f"thickness must be > 0, got {self.thickness}")
        if self.aperture_radius <= 0.0:
            raise ValueError(
                f"aperture radius must be > 0, got {self.aperture_radius}"
            )

    def region_of(self, z: float) -> int:
        if z > 0.0:
            return 0
        if z < -self.thickness:
            return 2
        return 1


@dataclass
class GreensTensor:
    """3x3 tensor value of the electric Green's function at one frequency.

    ``regions`` tags the (field, source) vacuum regions: "00", "20" or
    "free".  When ``imag_only`` is set the real part of ``value`` is not
    meaningful (self-terms at coincident points).
    """

    value: np.ndarray
    field_position: tuple[float, float, float]
    source_position: tuple[float, float, float]
    regions: str
    omega: float
    imag_only: bool = False

    def imag(self) -> np.ndarray:
        return np.imag(self.value)


def longitudinal_wavenumber(k_squared, kperp, left_handed: bool = False):
    """Longitudinal wavenumber ``sqrt(k^2 - kperp^2)`` on the physical branch.

    The branch satisfies ``Im kz >= 0``; for exactly real results the real
    part is non-negative in right-handed media and non-positive in
    left-handed ones (backward phase propagation).
    """
    k2 = np.asarray(k_squared, dtype=complex)
    kp = np.asarray(kperp, dtype=float)
    if np.any(kp < 0.0):
        raise ValueError("kperp must be >= 0")
    kz = np.sqrt(k2 - kp**2)
    kz = np.where(kz.imag < 0.0, -kz, kz)
    if left_handed:
        kz = np.where((kz.imag == 0.0) & (kz.real > 0.0), -kz, kz)
    else:
        kz = np.where((kz.imag == 0.0) & (kz.real < 0.0), -kz, kz)
    if np.ndim(k_squared) == 0 and np.ndim(kperp) == 0:
        return complex(kz)
    return kz


@dataclass(frozen=True)
class PlaneWaveMode:
    """One plane-wave mode of the slab problem (diagnostic type)."""

    kperp: float
    kz: complex
    k1z: complex
    polarization: str
    handedness: int

    @classmethod
    def build(
        cls,
        material: SlabMaterial,
        omega: float,
        kperp: float,
        polarization: str,
    ) -> "PlaneWaveMode":
        if polarization not in ("TE", "TM"):
            raise ValueError(f"polarization must be TE or TM, got {polarization}")
        eps = material.eps_at(omega)
        mu = material.mu_at(omega)
        left = eps.real < 0.0 and mu.real < 0.0
        kz = longitudinal_wavenumber(omega**2 + 0j, kperp)
        k1z = longitudinal_wavenumber(eps * mu * omega**2, kperp, left_handed=left)
        return cls(
            kperp=kperp,
            kz=kz,
            k1z=k1z,
            polarization=polarization,
            handedness=-1 if left else 1,
        )


def fresnel_interface(eps_i, mu_i, eps_j, mu_j, k_iz, k_jz):
    """Single-interface reflection coefficients for TE (R) and TM (S) modes.

    ``R_ij = (mu_j k_iz - mu_i k_jz) / (mu_j k_iz + mu_i k_jz)`` and the TM
    coefficient analogously with the permittivities.  A vanishing denominator
    signals an interface resonance and raises :class:`PoleError`.
    """
    k_iz = np.asarray(k_iz, dtype=complex)
    k_jz = np.asarray(k_jz, dtype=complex)
    scale = np.maximum(np.abs(k_iz), np.abs(k_jz)) + 1.0e-300
    den_r = mu_j * k_iz + mu_i * k_jz
    den_s = eps_j * k_iz + eps_i * k_jz
    for den in (den_r, den_s):
        bad = np.abs(den) < _FRESNEL_POLE_TOL * scale
        if np.any(bad):
            loc = np.asarray(k_iz)[bad].flat[0]
            raise PoleError("interface resonance (vanishing denominator)",
                            location=loc)
    r = (mu_j * k_iz - mu_i * k_jz) / den_r
    s = (eps_j * k_iz - eps_i * k_jz) / den_s
    if np.ndim(k_iz) == 0:
        return complex(r), complex(s)
    return r, s


def _slab_parts(geom, eps, mu, omega, kperp, kz=None):
    """Reflections and transmission amplitudes with the phase kept apart.

    Returns ``(r_te, r_tm, a_te, a_tm, k1z, kz)`` where the full slab
    transmissions are ``a * exp(i (k1z - kz) d)``.  Keeping the exponent
    unexpanded lets callers combine it with the vacuum propagation phase
    before exponentiating, which avoids overflow deep in the evanescent
    tail.
    """
    d = geom.thickness
    if kz is None:
        kz = longitudinal_wavenumber(omega**2 + 0j, kperp)
    left = eps.real < 0.0 and mu.real < 0.0
    k1z = longitudinal_wavenumber(eps * mu * omega**2, kperp, left_handed=left)
    r01, s01 = fresnel_interface(1.0, 1.0, eps, mu, kz, k1z)
    r12, s12 = fresnel_interface(eps, mu, 1.0, 1.0, k1z, kz)
    slab_phase = np.exp(2j * k1z * d)  # |.| <= 1 on the physical branch
    den_te = 1.0 + r01 * r12 * slab_phase
    den_tm = 1.0 + s01 * s12 * slab_phase
    for den in (den_te, den_tm):
        bad = np.abs(den) < _SLAB_POLE_TOL
        if np.any(bad):
            loc = np.asarray(kperp)[bad].flat[0] if np.ndim(kperp) else kperp
            raise PoleError("guided-mode pole in the slab denominator",
                            location=loc)
    r_te = (r01 + r12 * slab_phase) / den_te
    r_tm = (s01 + s12 * slab_phase) / den_tm
    # (1 + r01) equals the interface transmission prefactor 2 mu kz/(mu kz + k1z).
    a_te = (1.0 + r01) * (1.0 + r12) / den_te
    a_tm = (1.0 + s01) * (1.0 + s12) / den_tm
    return r_te, r_tm, a_te, a_tm, k1z, kz


def slab_coefficients(geom: SlabGeometry, eps, mu, omega, kperp):
    """Slab reflection and transmission functions (R_TE, R_TM, T_TE, T_TM).

    The transmissions carry the reference phase ``exp(i (k1z - kz) d)``;
    note this factor grows for evanescent modes (the lens amplification),
    so deep-evanescent arguments can overflow here even though the physical
    combination with the vacuum propagation phase stays bounded.
    """
    r_te, r_tm, a_te, a_tm, k1z, kz = _slab_parts(
        geom, complex(eps), complex(mu), omega, kperp
    )
    phase = np.exp(1j * (k1z - kz) * geom.thickness)
    return r_te, r_tm, a_te * phase, a_tm * phase


def aperture_cutoff(a: float, d: float, k: float) -> float:
    """Ray-optics transverse wavenumber cutoff of a finite-radius lens.

    Estimate valid for thick slabs; returns k for an infinite aperture.
    """
    if d <= 0.0:
        raise ValueError("thickness must be > 0")
    if a <= 0.0:
        raise ValueError("aperture radius must be > 0")
    if math.isinf(a):
        return k
    ratio = a / d
    return k * ratio / math.sqrt(0.25 + ratio * ratio)


def _imag_scalar_transverse(u):
    """Im part transverse scalar: sin(u)/u + cos(u)/u^2 - sin(u)/u^3."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1.0e-3
    us = np.where(small, 1.0, u)
    exact = np.sin(us) / us + np.cos(us) / us**2 - np.sin(us) / us**3
    series = 2.0 / 3.0 - 2.0 * u**2 / 15.0 + u**4 / 140.0
    return np.where(small, series, exact)


def _imag_scalar_longitudinal(u):
    """Im part longitudinal scalar: 2 (sin(u)/u^3 - cos(u)/u^2)."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1.0e-3
    us = np.where(small, 1.0, u)
    exact = 2.0 * (np.sin(us) / us**3 - np.cos(us) / us**2)
    series = 2.0 / 3.0 - u**2 / 15.0 + u**4 / 420.0
    return np.where(small, series, exact)


def imag_free_space(r, rp, omega: float = 1.0) -> np.ndarray:
    """Imaginary part of the homogeneous-space tensor (finite everywhere)."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    sep = r - rp
    dist = float(np.linalg.norm(sep))
    k = float(omega)
    if dist == 0.0:
        return (k / (6.0 * math.pi)) * np.eye(3)
    u = k * dist
    uhat = sep / dist
    proj = np.outer(uhat, uhat)
    g_t = float(_imag_scalar_transverse(u))
    g_l = float(_imag_scalar_longitudinal(u))
    return (k / (4.0 * math.pi)) * (g_t * (np.eye(3) - proj) + g_l * proj)


def greens_free_space(r, rp, omega: float = 1.0) -> GreensTensor:
    """Homogeneous-space dyadic Green's tensor (closed form).

    The real part diverges at coincident points; use
    :func:`imag_free_space` for self-terms.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    sep = r - rp
    dist = float(np.linalg.norm(sep))
    k = float(omega)
    if dist == 0.0:
        raise SingularityError(
            "free-space tensor is singular at coincident points; "
            "the imaginary part has a finite limit"
        )
    u = k * dist
    uhat = sep / dist
    proj = np.outer(uhat, uhat)
    prefac = np.exp(1j * u) / (4.0 * math.pi * dist)
    trans = prefac * (1.0 + 1j / u - 1.0 / u**2)
    longi = prefac * (2.0 / u**2 - 2j / u)
    value = trans * (np.eye(3) - proj) + longi * proj
    return GreensTensor(
        value=value,
        field_position=tuple(r),
        source_position=tuple(rp),
        regions="free",
        omega=k,
    )


def _assemble_tensor(components, delta_rho):
    """Rotate reduced-frame components back to the lab frame.

    ``components`` are (xx, yy, zz, xz, zx) computed with the transverse
    separation along +x; ``delta_rho`` is the lab-frame transverse offset of
    the field point from the source point.
    """
    xx, yy, zz, xz, zx = components
    g = np.array(
        [[xx, 0.0, xz], [0.0, yy, 0.0], [zx, 0.0, zz]], dtype=complex
    )
    rho = math.hypot(delta_rho[0], delta_rho[1])
    if rho == 0.0:
        return g
    c = delta_rho[0] / rho
    s = delta_rho[1] / rho
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return rot @ g @ rot.T


def _include_evanescent(
    material: SlabMaterial, omega: float, spectral_range: str
) -> bool:
    if spectral_range == "propagating":
        return False
    if spectral_range != "full":
        raise ValueError(
            f"spectral_range must be 'full' or 'propagating', got {spectral_range}"
        )
    # The strictly lossless left-handed slab has singular interface
    # coefficients over the whole evanescent range while its evanescent
    # contribution cancels in the lossless limit; integrate the propagating
    # segment only.  Any loss (or a right-handed medium) restores a regular,
    # contributing tail.
    return not (
        material.is_lossless_at(omega) and material.is_left_handed_at(omega)
    )


def greens_same_side(
    geom: SlabGeometry,
    material: SlabMaterial,
    r,
    rp,
    omega: float = 1.0,
    quad: QuadratureSpec | None = None,
    imag_only: bool = False,
    spectral_range: str = "full",
) -> GreensTensor:
    """Tensor G(r, rp) with both points in region 0 (above the slab).

    The homogeneous part is the free-space closed form; the reflected part
    is a radial integral weighted by the slab reflection functions.  For
    coincident points pass ``imag_only=True`` (the real self-part diverges).
    ``spectral_range="propagating"`` drops the evanescent tail, which keeps
    only the radiative channel (the construction behind the loss-sweep
    figure).
    """
    if quad is None:
        quad = QuadratureSpec()
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    if r[2] <= 0.0 or rp[2] <= 0.0:
        raise ValueError("both points must lie in region 0 (z > 0)")
    if r[2] > rp[2]:
        swapped = greens_same_side(
            geom, material, rp, r, omega, quad, imag_only, spectral_range
        )
        return GreensTensor(
            value=swapped.value.T,
            field_position=tuple(r),
            source_position=tuple(rp),
            regions="00",
            omega=omega,
            imag_only=imag_only,
        )

    if imag_only:
        free_value = 1j * imag_free_space(r, rp, omega)
    else:
        free_value = greens_free_space(r, rp, omega).value

    eps = material.eps_at(omega)
    mu = material.mu_at(omega)
    k = float(omega)
    delta_rho = (r[0] - rp[0], r[1] - rp[1])
    rho = math.hypot(*delta_rho)
    z_sum = r[2] + rp[2]

    def kernel(kperp, kz):
        r_te, r_tm, _, _, _, _ = _slab_parts(geom, eps, mu, omega, kperp, kz=kz)
        w = kperp * rho
        j0 = special.j0(w)
        j1 = special.j1(w)
        j2 = special.jv(2, w)
        phase = np.exp(1j * kz * z_sum)
        te = r_te * phase
        tm = r_tm * phase
        kz2 = (kz / k) ** 2
        kzkp = kz * kperp / k**2
        pi = math.pi
        xx = pi * ((j0 + j2) * te - kz2 * (j0 - j2) * tm)
        yy = pi * ((j0 - j2) * te - kz2 * (j0 + j2) * tm)
        zz = 2.0 * pi * (kperp / k) ** 2 * j0 * tm
        xz = -2j * pi * kzkp * j1 * tm
        zx = 2j * pi * kzkp * j1 * tm
        return np.stack([xx, yy, zz, xz, zx], axis=-1) * (kperp / kz)[..., None]

    integral = sommerfeld_integrate(
        kernel,
        k,
        quad,
        include_evanescent=_include_evanescent(material, omega, spectral_range),
    )
    scattered = (1j / (8.0 * math.pi**2)) * _assemble_tensor(integral, delta_rho)
    return GreensTensor(
        value=free_value + scattered,
        field_position=tuple(r),
        source_position=tuple(rp),
        regions="00",
        omega=omega,
        imag_only=imag_only,
    )


def greens_cross(
    geom: SlabGeometry,
    material: SlabMaterial,
    r,
    rp,
    omega: float = 1.0,
    quad: QuadratureSpec | None = None,
    spectral_range: str = "full",
) -> GreensTensor:
    """Cross-slab tensor between a region-0 and a region-2 point.

    Arguments may come in either order; the returned tensor always has its
    field point in region 2 and its source in region 0 (tag "20").  A finite
    aperture radius restricts the transverse wavenumbers to the ray-optics
    cutoff, which also drops the evanescent tail; so does
    ``spectral_range="propagating"``.
    """
    if quad is None:
        quad = QuadratureSpec()
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    regions = {geom.region_of(r[2]), geom.region_of(rp[2])}
    if regions != {0, 2}:
        raise ValueError(
            "cross-slab tensor needs one point in region 0 and one in region 2"
        )
    if geom.region_of(r[2]) == 0:
        src, fld = r, rp
    else:
        src, fld = rp, r

    eps = material.eps_at(omega)
    mu = material.mu_at(omega)
    k = float(omega)
    d = geom.thickness
    delta_rho = (fld[0] - src[0], fld[1] - src[1])
    rho = math.hypot(*delta_rho)
    dz = src[2] - fld[2]  # total vacuum path + slab crossing, > d

    def kernel(kperp, kz):
        _, _, a_te, a_tm, k1z, _ = _slab_parts(geom, eps, mu, omega, kperp, kz=kz)
        # Combined slab + vacuum phase; its real exponent is never positive,
        # so the lens amplification cannot overflow here.
        phase = np.exp(1j * ((k1z - kz) * d + kz * dz))
        te = a_te * phase
        tm = a_tm * phase
        w = kperp * rho
        j0 = special.j0(w)
        j1 = special.j1(w)
        j2 = special.jv(2, w)
        kz2 = (kz / k) ** 2
        kzkp = kz * kperp / k**2
        pi = math.pi
        xx = pi * ((j0 + j2) * te + kz2 * (j0 - j2) * tm)
        yy = pi * ((j0 - j2) * te + kz2 * (j0 + j2) * tm)
        zz = 2.0 * pi * (kperp / k) ** 2 * j0 * tm
        xz = 2j * pi * kzkp * j1 * tm
        zx = 2j * pi * kzkp * j1 * tm
        return np.stack([xx, yy, zz, xz, zx], axis=-1) * (kperp / kz)[..., None]

    kperp_max = None
    if math.isfinite(geom.aperture_radius):
        kperp_max = aperture_cutoff(geom.aperture_radius, d, k)
    integral = sommerfeld_integrate(
        kernel,
        k,
        quad,
        kperp_max=kperp_max,
        include_evanescent=_include_evanescent(material, omega, spectral_range),
    )
    value = (1j / (8.0 * math.pi**2)) * _assemble_tensor(integral, delta_rho)
    return GreensTensor(
        value=value,
        field_position=tuple(fld),
        source_position=tuple(src),
        regions="20",
        omega=omega,
    )


def mirror_to_region0(geom: SlabGeometry, position) -> np.ndarray:
    """Map a region-2 point to its mirror image in region 0.

    The slab is symmetric under z -> -d - z, so same-side evaluations for
    two region-2 points can be done above the slab; tensor components then
    transform with S G S where S = diag(1, 1, -1).
    """
    position = np.asarray(position, dtype=float)
    return np.array([position[0], position[1], -geom.thickness - position[2]])
