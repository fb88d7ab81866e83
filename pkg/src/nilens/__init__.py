"""Collective emission of two dipoles around a negative-index slab lens.

The package computes layered-slab dyadic Green's tensors by adaptive
Sommerfeld integration, the resulting collective decay rates and
dipole-dipole shifts of an emitter pair at the lens foci, and the
closed-form population dynamics of the sub- and super-radiant states, plus
a batch CLI that reproduces the standard parameter sweeps.
"""

from .collective import (
    CollectiveRates,
    DipoleEmitter,
    MarkovValidity,
    PrincipalValueSpec,
    ShiftResult,
    aperture_rate_ratio,
    decay_rates,
    dipole_dipole_shift,
    free_space_cross_rate,
    markov_validity,
)
from .dynamics import (
    CollectiveModes,
    ProtocolResult,
    TwoAtomState,
    collective_modes,
    entanglement_protocol,
    evolve,
    steady_state,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    FitError,
    GridRangeError,
    NumericsError,
    PoleError,
    QuadratureError,
    SingularityError,
)
from .greens import (
    GreensTensor,
    PlaneWaveMode,
    SlabGeometry,
    aperture_cutoff,
    fresnel_interface,
    greens_cross,
    greens_free_space,
    greens_same_side,
    imag_free_space,
    longitudinal_wavenumber,
    mirror_to_region0,
    slab_coefficients,
)
from .material import (
    IndexPoint,
    LorentzModel,
    SlabMaterial,
    dispersion_slope,
    energy_positivity_check,
    evaluate_response,
    fit_lens_material,
    lens_index_point,
    material_from_config,
    material_to_config,
    refractive_index,
)
from .quadrature import QuadratureSpec, adaptive_integral, sommerfeld_integrate
from .spectrum import (
    DispersionSpectrum,
    ideal_lens_spectrum,
    linear_dispersion_kernel,
    material_lens_spectrum,
    spectral_width,
)

__version__ = "0.1.0"
