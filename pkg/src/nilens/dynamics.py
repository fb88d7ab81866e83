"""Two-emitter population dynamics in the symmetric/antisymmetric basis.

The population equations close on the four levels |22>, |s>, |a>, |11> and
form a linear cascade: the doubly excited state decays at twice the single
rate and feeds the symmetric and antisymmetric channels at gamma11 +/-
gamma12, which decay at the same rates into the ground state.  Everything
is solved in closed form; times are measured in units of 1/Gamma0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .collective import CollectiveRates

__all__ = [
    "TwoAtomState",
    "CollectiveModes",
    "ProtocolResult",
    "evolve",
    "steady_state",
    "entanglement_protocol",
    "collective_modes",
]

_TRACE_TOL = 1.0e-12
_SYMMETRY_TOL = 1.0e-6


@dataclass(frozen=True)
class TwoAtomState:
    """Populations of |22>, |s>, |a>, |11>; they must sum to one."""

    rho22: float
    rho_ss: float
    rho_aa: float
    rho11: float

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not -_TRACE_TOL <= value <= 1.0 + _TRACE_TOL:
                raise ValueError(f"{name} = {value} outside [0, 1]")
        total = self.rho22 + self.rho_ss + self.rho_aa + self.rho11
        if abs(total - 1.0) > _TRACE_TOL:
            raise ValueError(f"populations sum to {total}, expected 1")

    def as_dict(self) -> dict[str, float]:
        return {
            "rho22": self.rho22,
            "rho_ss": self.rho_ss,
            "rho_aa": self.rho_aa,
            "rho11": self.rho11,
        }

    def as_array(self) -> np.ndarray:
        return np.array([self.rho22, self.rho_ss, self.rho_aa, self.rho11])

    @classmethod
    def ground(cls) -> "TwoAtomState":
        return cls(0.0, 0.0, 0.0, 1.0)

    @classmethod
    def double_excited(cls) -> "TwoAtomState":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def single_excited(cls) -> "TwoAtomState":
        """|21> expressed in the symmetric/antisymmetric basis."""
        return cls(0.0, 0.5, 0.5, 0.0)


@dataclass(frozen=True)
class CollectiveModes:
    """Decay rates and level shifts of the symmetric/antisymmetric states."""

    gamma_s: float
    gamma_a: float
    shift_s: float
    shift_a: float


def _cascade_rates(rates: CollectiveRates) -> tuple[float, float, float]:
    g11 = rates.gamma11
    if abs(rates.gamma22 - g11) > _SYMMETRY_TOL * max(g11, rates.gamma22):
        raise ValueError(
            "population equations assume symmetric single-emitter rates; "
            f"got gamma11={g11}, gamma22={rates.gamma22}"
        )
    if not rates.is_positive_semidefinite():
        raise ValueError("rate matrix is not positive semidefinite")
    gs = g11 + rates.gamma12
    ga = g11 - rates.gamma12
    # PSD holds within tolerance; clamp the roundoff-negative channel rates.
    return g11, max(gs, 0.0), max(ga, 0.0)


def _phi(x: float) -> float:
    """(exp(x) - 1) / x, stable near zero."""
    if abs(x) < 1.0e-12:
        return 1.0 + 0.5 * x
    return math.expm1(x) / x


def evolve(state: TwoAtomState, rates: CollectiveRates, t: float) -> TwoAtomState:
    """Propagate the populations for a time ``t`` (units 1/Gamma0).

    Closed-form two-exponential solution of the cascade; the degenerate
    resonance between the cascade rates is handled through the stable
    ``(e^x - 1)/x`` form, and the ground state restores the trace exactly.
    """
    if t < 0.0:
        raise ValueError("time must be non-negative")
    g11, gs, ga = _cascade_rates(rates)
    decay2 = math.exp(-2.0 * g11 * t)
    rho22 = state.rho22 * decay2
    rho_ss = state.rho_ss * math.exp(-gs * t) + (
        gs * state.rho22 * t * decay2 * _phi(ga * t)
    )
    rho_aa = state.rho_aa * math.exp(-ga * t) + (
        ga * state.rho22 * t * decay2 * _phi(gs * t)
    )
    rho11 = 1.0 - rho22 - rho_ss - rho_aa
    return TwoAtomState(rho22, rho_ss, rho_aa, max(rho11, 0.0) if rho11 > -_TRACE_TOL else rho11)


def steady_state(rates: CollectiveRates, state: TwoAtomState) -> TwoAtomState:
    """Analytic ``t -> infinity`` limit of :func:`evolve`.

    With both collective channels open everything reaches the ground state.
    A closed channel (cross rate equal to +/- the single rate) freezes the
    corresponding population; the feed from the doubly excited state enters
    at the closed channel's zero rate and therefore contributes nothing.
    """
    g11, gs, ga = _cascade_rates(rates)
    rho_ss = state.rho_ss if gs == 0.0 else 0.0
    rho_aa = state.rho_aa if ga == 0.0 else 0.0
    return TwoAtomState(0.0, rho_ss, rho_aa, 1.0 - rho_ss - rho_aa)


class ProtocolResult(NamedTuple):
    success_probability: float
    fidelity: float


def entanglement_protocol(rates: CollectiveRates, t_wait: float) -> ProtocolResult:
    """Entanglement preparation by decay from |21> and photon postselection.

    The success probability is the antisymmetric population after the wait;
    the fidelity is the antisymmetric weight of the state conditioned on no
    emitted photon, for which only the non-feeding (jump-free) decay of the
    initial |s>, |a> mixture survives.  For a closed antisymmetric channel
    and long waits this tends to (1/2, 1).
    """
    if t_wait < 0.0:
        raise ValueError("wait time must be non-negative")
    evolved = evolve(TwoAtomState.single_excited(), rates, t_wait)
    _, gs, ga = _cascade_rates(rates)
    surv_aa = 0.5 * math.exp(-ga * t_wait)
    surv_ss = 0.5 * math.exp(-gs * t_wait)
    fidelity = surv_aa / (surv_aa + surv_ss)
    return ProtocolResult(
        success_probability=evolved.rho_aa, fidelity=fidelity
    )


def collective_modes(rates: CollectiveRates) -> CollectiveModes:
    """Rates and dipole-dipole level shifts of the collective eigenstates.

    The symmetric state is shifted below and the antisymmetric state above
    the single-emitter energy by the dipole-dipole shift.
    """
    g11, gs, ga = _cascade_rates(rates)
    return CollectiveModes(
        gamma_s=gs,
        gamma_a=ga,
        shift_s=-rates.delta_omega,
        shift_a=+rates.delta_omega,
    )
