"""Adaptive engine for the radial plane-wave (Sommerfeld) integrals.

The k_perp integrals behind the slab tensors have an integrable 1/k_z
singularity at the branch point k_perp = k and an exponentially decaying
(or, near an ideal lens, amplified-then-damped) evanescent tail.  The engine
splits at the branch point, substitutes k_perp = k sin(theta) on the
propagating segment so the singularity cancels analytically, and walks the
evanescent tail in geometrically growing blocks until the contribution falls
below an absolute floor.

Kernels are callables ``kernel(kperp, kz) -> array`` evaluated on node
batches; they may return a vector of components, all integrated in one
adaptive pass.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError

__all__ = ["QuadratureSpec", "adaptive_integral", "sommerfeld_integrate"]

# Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK values); the
# embedded Gauss-7 rule sits on the odd-index nodes.
_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])

_MAX_INTERVALS = 8192


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for the adaptive integration.

    ``rel_tol``/``abs_tol`` control each adaptive pass, ``evanescent_floor``
    is the absolute truncation criterion for the evanescent tail, and
    ``kperp_cap`` bounds the tail in units of the vacuum wavenumber.
    """

    rel_tol: float = 1.0e-9
    abs_tol: float = 1.0e-12
    evanescent_floor: float = 1.0e-12
    max_depth: int = 48
    kperp_cap: float = 50.0

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.evanescent_floor <= 0.0:
            raise ValueError("evanescent floor must be positive")
        if not 0 < self.max_depth <= 64:
            raise ValueError("max_depth must lie in (0, 64]")
        if self.kperp_cap <= 1.0:
            raise ValueError("kperp_cap must exceed the vacuum wavenumber")

    def halved(self) -> "QuadratureSpec":
        """Spec with all tolerances halved (self-consistency checks)."""
        return QuadratureSpec(
            rel_tol=self.rel_tol / 2.0,
            abs_tol=self.abs_tol / 2.0,
            evanescent_floor=self.evanescent_floor / 2.0,
            max_depth=self.max_depth,
            kperp_cap=self.kperp_cap,
        )


def _norm(value) -> float:
    return float(np.max(np.abs(value)))


def _gk_panel(f, a, b):
    """One Gauss-Kronrod 7-15 evaluation on [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _XGK
    fx = np.asarray(f(x))
    # Nodes run along the first axis; components (if any) along the rest.
    i_k = half * np.tensordot(_WGK, fx, axes=(0, 0))
    i_g = half * np.tensordot(_WG, fx[1::2], axes=(0, 0))
    return i_k, _norm(i_k - i_g)


def adaptive_integral(f, a, b, spec: QuadratureSpec):
    """Globally adaptive Gauss-Kronrod integration of a vector integrand.

    ``f`` receives an array of abscissas and returns an array whose first
    axis matches it; the return value keeps the remaining axes.  Worst
    intervals are bisected until the summed error estimate satisfies
    ``max(abs_tol, rel_tol * |result|)``.
    """
    a = float(a)
    b = float(b)
    if a == b:
        probe = np.asarray(f(np.array([a])))
        return np.zeros(probe.shape[1:], dtype=probe.dtype)
    min_width = abs(b - a) / 2.0**spec.max_depth
    value, err = _gk_panel(f, a, b)
    heap = [(-err, a, b, 0)]
    values = {(a, b): value}
    total_err = err
    while True:
        total = sum(values.values())
        target = max(spec.abs_tol, spec.rel_tol * _norm(total))
        if total_err <= target:
            return total
        if not heap or len(values) > _MAX_INTERVALS:
            raise QuadratureError(
                "adaptive integration stalled", achieved=total_err
            )
        neg_err, lo, hi, depth = heapq.heappop(heap)
        if hi - lo <= min_width:
            raise QuadratureError(
                "maximum subdivision depth exceeded", achieved=total_err
            )
        total_err += neg_err  # remove the parent's error
        del values[(lo, hi)]
        mid = 0.5 * (lo + hi)
        for seg in ((lo, mid), (mid, hi)):
            seg_val, seg_err = _gk_panel(f, *seg)
            values[seg] = seg_val
            total_err += seg_err
            heapq.heappush(heap, (-seg_err, seg[0], seg[1], depth + 1))


def sommerfeld_integrate(
    kernel,
    k: float,
    spec: QuadratureSpec | None = None,
    kperp_max: float | None = None,
    include_evanescent: bool = True,
):
    """Integrate ``kernel(kperp, kz) dkperp`` over the plane-wave spectrum.

    The propagating segment [0, k) is mapped to theta by
    ``kperp = k sin(theta)``; the engine supplies ``kz = k cos(theta)``
    directly so the 1/k_z singularity of the kernel cancels without
    cancellation error.  The evanescent segment uses
    ``kperp = sqrt(k^2 + t^2)`` with ``kz = i t`` and is truncated once a
    block contributes less than the absolute floor, with a hard cap at
    ``spec.kperp_cap * k``.

    ``kperp_max`` (if given, must be <= k) restricts the integration to the
    propagating range below the cutoff and disables the evanescent tail.
    """
    if spec is None:
        spec = QuadratureSpec()
    k = float(k)
    if k <= 0.0:
        raise ValueError("vacuum wavenumber must be positive")

    if kperp_max is not None:
        if not 0.0 < kperp_max <= k:
            raise ValueError("kperp_max must lie in (0, k]")
        theta_max = math.asin(min(kperp_max / k, 1.0))
        include_evanescent = False
    else:
        theta_max = 0.5 * math.pi

    def propagating(theta):
        kperp = k * np.sin(theta)
        kz = k * np.cos(theta)
        vals = np.asarray(kernel(kperp, kz + 0.0j))
        weight = (k * np.cos(theta)).reshape((-1,) + (1,) * (vals.ndim - 1))
        return vals * weight

    total = adaptive_integral(propagating, 0.0, theta_max, spec)
    if not include_evanescent:
        return total

    def evanescent(t):
        kperp = np.sqrt(k * k + t * t)
        vals = np.asarray(kernel(kperp, 1j * t))
        weight = (t / kperp).reshape((-1,) + (1,) * (vals.ndim - 1))
        return vals * weight

    t_cap = math.sqrt(spec.kperp_cap**2 - 1.0) * k
    t_lo = 0.0
    t_hi = k
    while True:
        t_end = min(t_hi, t_cap)
        block = adaptive_integral(evanescent, t_lo, t_end, spec)
        total = total + block
        # Truncate once the integrand bound at (and just beyond) the block
        # end falls below the absolute floor; probing a few points guards
        # against a Bessel zero landing exactly on the block boundary.
        probes = np.minimum(np.array([1.0, 1.25, 1.7]) * t_end, t_cap)
        bound = _norm(evanescent(probes))
        if _norm(block) < spec.evanescent_floor or bound < spec.evanescent_floor:
            return total
        if t_hi >= t_cap:
            raise QuadratureError(
                "evanescent truncation bound not reached at the k_perp cap",
                achieved=bound,
            )
        t_lo, t_hi = t_hi, 2.0 * t_hi
