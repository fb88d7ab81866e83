"""Dispersive magneto-dielectric response models for the slab lens.

All quantities use scaled units: the emitter transition frequency omega0 is 1,
c = 1, so the vacuum wavenumber on resonance is k0 = 1 and lengths are
measured in units of c/omega0.  Response models are sums of Lorentz
oscillators, which are analytic in the upper half-plane and therefore
Kramers-Kronig consistent by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Union

import numpy as np
from scipy import optimize

from .errors import ConfigError, ConvergenceError, FitError

__all__ = [
    "LorentzModel",
    "SlabMaterial",
    "IndexPoint",
    "PositivityResult",
    "evaluate_response",
    "response_function",
    "refractive_index",
    "energy_positivity_check",
    "dispersion_slope",
    "lens_index_point",
    "fit_lens_material",
    "material_to_config",
    "material_from_config",
]

# Step used for frequency derivatives; balances truncation against roundoff
# at double precision.
DERIVATIVE_STEP = 1.0e-4

Response = Union["LorentzModel", complex, float, Callable[[float], complex]]


@dataclass(frozen=True)
class LorentzModel:
    """Sum of Lorentz oscillators on top of a constant background.

    Each term is a triple ``(strength, resonance, damping)`` with the
    oscillator strength dimensionless and the resonance/damping in units of
    the transition frequency.  The response is

        background + sum_j f_j w_j^2 / (w_j^2 - w^2 - i g_j w)

    which has a non-negative imaginary part for every positive frequency
    (passivity) and tends to the background at high frequency.
    """

    terms: tuple[tuple[float, float, float], ...] = ()
    background: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple(tuple(float(x) for x in t) for t in self.terms)
        )
        object.__setattr__(self, "background", float(self.background))
        if self.background < 1.0:
            raise ValueError(f"background must be >= 1, got {self.background}")
        for f, w_r, g in self.terms:
            if f < 0.0:
                raise ValueError(f"oscillator strength must be >= 0, got {f}")
            if w_r <= 0.0:
                raise ValueError(f"resonance frequency must be > 0, got {w_r}")
            if g < 0.0:
                raise ValueError(f"damping must be >= 0, got {g}")

    def __call__(self, omega):
        return evaluate_response(self, omega)


def evaluate_response(model: LorentzModel, omega):
    """Evaluate a Lorentz-oscillator response at frequency ``omega`` (> 0).

    Accepts a scalar or an array of frequencies and returns complex values
    with ``Im >= 0``.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("frequency must be positive")
    out = np.full(w.shape, model.background, dtype=complex)
    for f, w_r, g in model.terms:
        out += f * w_r**2 / (w_r**2 - w**2 - 1j * g * w)
    if np.ndim(omega) == 0:
        return complex(out)
    return out


def response_function(model: Response) -> Callable:
    """Normalize a response specification to a callable of frequency.

    Accepts a :class:`LorentzModel`, a complex constant (non-dispersive
    response), or any callable ``omega -> complex``.
    """
    if isinstance(model, LorentzModel):
        return model
    if isinstance(model, (int, float, complex)):
        value = complex(model)
        return lambda omega: value
    if callable(model):
        return model
    raise TypeError(f"cannot interpret {model!r} as a material response")


def refractive_index(eps, mu):
    """Refractive index ``n = sqrt(eps * mu)`` on the physical branch.

    The branch is fixed by ``Im n >= 0`` (decay of waves in a passive
    medium).  When the index is exactly real the sign of the real part
    follows the handedness: simultaneously negative Re(eps) and Re(mu)
    select the negative, left-handed root.
    """
    eps_a = np.asarray(eps, dtype=complex)
    mu_a = np.asarray(mu, dtype=complex)
    n = np.sqrt(eps_a * mu_a)
    n = np.where(n.imag < 0.0, -n, n)
    left = (n.imag == 0.0) & (eps_a.real < 0.0) & (mu_a.real < 0.0)
    n = np.where(left & (n.real > 0.0), -n, n)
    n = np.where(~left & (n.imag == 0.0) & (n.real < 0.0), -n, n)
    if np.ndim(eps) == 0 and np.ndim(mu) == 0:
        return complex(n)
    return n


@dataclass(frozen=True)
class IndexPoint:
    """Refractive index and its real dispersion slope at one frequency."""

    n: complex
    alpha: float


class PositivityResult(NamedTuple):
    passed: bool
    margin: float
    omega_at_min: float


def energy_positivity_check(
    eps_model: Response,
    mu_model: Response,
    omega_range: tuple[float, float],
    step: float = DERIVATIVE_STEP,
) -> PositivityResult:
    """Check d(w Re eps)/dw >= 0 and d(w Re mu)/dw >= 0 on a frequency grid.

    The derivatives are centered differences with spacing ``step``; the
    returned margin is the minimum of both derivatives over the grid.  The
    check is meaningful where losses are negligible.
    """
    if step > 1.0e-3:
        raise ConfigError(f"positivity grid step {step} too coarse (max 1e-3)")
    lo, hi = float(omega_range[0]), float(omega_range[1])
    if not 0.0 < lo < hi:
        raise ValueError(f"invalid frequency range ({lo}, {hi})")
    n_pts = max(int(math.ceil((hi - lo) / step)) + 1, 3)
    grid = np.linspace(lo, hi, n_pts)
    h = grid[1] - grid[0]
    margin = math.inf
    omega_at_min = lo
    for model in (eps_model, mu_model):
        resp = response_function(model)
        f_plus = np.real(np.asarray(resp(grid + h))) * (grid + h)
        f_minus = np.real(np.asarray(resp(grid - h))) * (grid - h)
        deriv = (f_plus - f_minus) / (2.0 * h)
        i_min = int(np.argmin(deriv))
        if deriv[i_min] < margin:
            margin = float(deriv[i_min])
            omega_at_min = float(grid[i_min])
    return PositivityResult(margin >= 0.0, margin, omega_at_min)


def dispersion_slope(
    eps_model: Response,
    mu_model: Response,
    omega0: float = 1.0,
    step: float = DERIVATIVE_STEP,
) -> float:
    """Slope ``Re[dn/dw]`` at ``omega0`` by centered differences.

    Evaluated at steps ``step`` and ``step / 2``; the two estimates must
    agree to 0.1% or a :class:`ConvergenceError` is raised.
    """
    eps = response_function(eps_model)
    mu = response_function(mu_model)

    def slope(h):
        n_plus = refractive_index(eps(omega0 + h), mu(omega0 + h))
        n_minus = refractive_index(eps(omega0 - h), mu(omega0 - h))
        return (n_plus.real - n_minus.real) / (2.0 * h)

    coarse = slope(step)
    fine = slope(step / 2.0)
    scale = max(abs(fine), abs(coarse))
    if scale > 0.0 and abs(fine - coarse) > 1.0e-3 * scale:
        raise ConvergenceError(
            f"dispersion slope unstable under step halving: {coarse} vs {fine}"
        )
    return fine


def lens_index_point(
    eps_model: Response, mu_model: Response, omega0: float = 1.0
) -> IndexPoint:
    """Index and dispersion slope of a material pair at ``omega0``."""
    eps = response_function(eps_model)(omega0)
    mu = response_function(mu_model)(omega0)
    n = refractive_index(eps, mu)
    alpha = dispersion_slope(eps_model, mu_model, omega0)
    return IndexPoint(n=n, alpha=alpha)


def fit_lens_material(
    n_target: complex,
    alpha_target: float,
    gamma: float | None = None,
) -> tuple[LorentzModel, LorentzModel]:
    """Construct impedance-matched models with prescribed index and slope.

    Returns identical single-resonance models for the permittivity and the
    permeability (so n(w) = eps(w) = mu(w)) with the resonance below the
    transition frequency, such that ``n(1) = n_target`` and the dispersion
    slope equals ``alpha_target``.  The two free oscillator parameters are
    found by root finding at fixed damping.

    For a strictly real target the damping defaults to a value small enough
    that the residual loss stays below the 1e-6 fit tolerance; pass
    ``gamma`` explicitly to override.
    """
    n_target = complex(n_target)
    alpha_target = float(alpha_target)
    if n_target == 1.0 and alpha_target == 0.0:
        return LorentzModel(), LorentzModel()
    if n_target.real >= 0.0:
        raise ValueError(f"target index must have Re < 0, got {n_target}")
    if n_target.imag == 0.0 and alpha_target < 1.0:
        raise ValueError(
            f"lossless target requires slope >= 1/omega0, got {alpha_target}"
        )

    # Seed from the gamma -> 0 algebra of a single resonance with
    # eps(1) = Re(n_target):  1 - w_r^2 = 2 (1 - Re n) / alpha.
    spread = 2.0 * (1.0 - n_target.real) / alpha_target
    if not 0.0 < spread < 1.0:
        raise FitError(
            "no single-resonance root: slope target too small for the index",
            residual=spread,
        )
    w_r_seed = math.sqrt(1.0 - spread)
    f_seed = (1.0 - n_target.real) * spread / w_r_seed**2

    if gamma is not None:
        gamma_val = float(gamma)
        n_gamma_iter = 1
    elif n_target.imag > 0.0:
        # Seed damping from Im eps(1) ~ gamma * alpha / 2, then refine.
        gamma_val = 2.0 * n_target.imag / alpha_target
        n_gamma_iter = 6
    else:
        # Keep the residual Im n(1) ~ gamma * alpha / 2 well below 1e-6.
        gamma_val = min(1.0e-8, 0.2e-6 / alpha_target)
        n_gamma_iter = 1

    def residuals(params, g):
        f, w_r = params
        if f <= 0.0 or not 0.0 < w_r < 1.0:
            return [1.0e3, 1.0e3]
        model = LorentzModel(terms=((f, w_r, g),))
        n0 = refractive_index(model(1.0), model(1.0))
        slope = dispersion_slope(model, model)
        return [n0.real - n_target.real, slope - alpha_target]

    params = np.array([f_seed, w_r_seed])
    for _ in range(n_gamma_iter):
        sol = optimize.root(residuals, params, args=(gamma_val,), method="hybr")
        if not sol.success:
            raise FitError(
                "lens-material fit did not converge", residual=tuple(sol.fun)
            )
        params = sol.x
        if n_gamma_iter > 1:
            model = LorentzModel(terms=((params[0], params[1], gamma_val),))
            im_n = refractive_index(model(1.0), model(1.0)).imag
            if im_n <= 0.0:
                raise FitError("lossy fit produced a non-passive index")
            gamma_val *= n_target.imag / im_n

    f_fit, w_r_fit = float(params[0]), float(params[1])
    model = LorentzModel(terms=((f_fit, w_r_fit, gamma_val),))
    n_check = refractive_index(model(1.0), model(1.0))
    slope_check = dispersion_slope(model, model)
    if gamma is not None and n_target.imag == 0.0:
        # Explicit damping against a real target: the residual loss is the
        # caller's choice, so hold only the real part to the fit tolerance.
        err_n = abs(n_check.real - n_target.real)
        tol_n = 1.0e-6
    else:
        err_n = abs(n_check - n_target)
        tol_n = 1.0e-6 if n_target.imag == 0.0 else 0.05 * abs(n_target)
    err_a = abs(slope_check - alpha_target) / abs(alpha_target)
    if err_n > tol_n or err_a > 0.01:
        raise FitError(
            "fitted model misses the target", residual=(err_n, err_a)
        )
    return model, model


@dataclass(frozen=True)
class SlabMaterial:
    """Permittivity/permeability pair describing the slab medium."""

    eps: Response
    mu: Response

    def eps_at(self, omega) -> complex:
        return complex(response_function(self.eps)(omega))

    def mu_at(self, omega) -> complex:
        return complex(response_function(self.mu)(omega))

    def index_at(self, omega) -> complex:
        return refractive_index(self.eps_at(omega), self.mu_at(omega))

    def is_lossless_at(self, omega) -> bool:
        return self.eps_at(omega).imag == 0.0 and self.mu_at(omega).imag == 0.0

    def is_left_handed_at(self, omega) -> bool:
        return self.eps_at(omega).real < 0.0 and self.mu_at(omega).real < 0.0

    @classmethod
    def vacuum(cls) -> "SlabMaterial":
        return cls(eps=1.0 + 0.0j, mu=1.0 + 0.0j)

    @classmethod
    def from_index(cls, n) -> "SlabMaterial":
        """Impedance-matched non-dispersive medium with eps = mu = n."""
        return cls(eps=complex(n), mu=complex(n))

    @classmethod
    def ideal_lens(cls) -> "SlabMaterial":
        return cls.from_index(-1.0 + 0.0j)


def _terms_to_text(model: LorentzModel) -> str:
    return "; ".join(f"{f!r},{w_r!r},{g!r}" for f, w_r, g in model.terms)


def _terms_from_text(text: str) -> tuple[tuple[float, float, float], ...]:
    text = text.strip()
    if not text:
        return ()
    terms = []
    for chunk in text.split(";"):
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 3:
            raise ValueError(f"oscillator term needs 3 numbers, got {chunk!r}")
        terms.append(tuple(float(p) for p in parts))
    return tuple(terms)


def material_to_config(material: SlabMaterial) -> dict[str, str]:
    """Serialize Lorentz-model materials to a flat key-value block."""
    block = {}
    for name, model in (("eps", material.eps), ("mu", material.mu)):
        if not isinstance(model, LorentzModel):
            raise TypeError(f"{name} response is not a LorentzModel")
        block[f"{name}_background"] = repr(model.background)
        block[f"{name}_terms"] = _terms_to_text(model)
    return block


def material_from_config(block: Mapping[str, str]) -> SlabMaterial:
    """Inverse of :func:`material_to_config`."""
    models = {}
    for name in ("eps", "mu"):
        background = float(block.get(f"{name}_background", "1.0"))
        terms = _terms_from_text(block.get(f"{name}_terms", ""))
        models[name] = LorentzModel(terms=terms, background=background)
    return SlabMaterial(eps=models["eps"], mu=models["mu"])
