"""Experiment dispatch and tabular output.

Each experiment maps a validated configuration to a rectangular numeric
table.  Sweep points are independent and may be evaluated concurrently;
rows are always assembled in grid order, so the output is identical for
any thread count.  Numerical failures abort the run (annotated with the
failing grid point) rather than emitting a partial table.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .collective import (
    DipoleEmitter,
    PrincipalValueSpec,
    aperture_rate_ratio,
    decay_rates,
    dipole_dipole_shift,
)
from .config import (
    ExperimentConfig,
    build_material,
    build_quadrature,
    render_config,
)
from .dynamics import (
    CollectiveRates,
    TwoAtomState,
    entanglement_protocol,
    evolve,
)
from .errors import NumericsError
from .greens import SlabGeometry
from .material import SlabMaterial
from .spectrum import ideal_lens_spectrum, material_lens_spectrum

__all__ = ["ResultTable", "run_experiment", "write_table"]


@dataclass(frozen=True)
class ResultTable:
    """Column-named numeric results plus a reproducibility header."""

    experiment: str
    columns: tuple[str, ...]
    rows: np.ndarray
    metadata: tuple[str, ...]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError("rows must be 2D and match the column names")
        object.__setattr__(self, "rows", rows)


def _metadata(cfg: ExperimentConfig) -> tuple[str, ...]:
    lines = [f"nilens {__version__}", f"experiment: {cfg.name}"]
    lines.extend(f"config: {line}" for line in render_config(cfg).splitlines())
    return tuple(lines)


def _map_grid(func, grid, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, grid))
    return [func(x) for x in grid]


def _annotate(exc: NumericsError, variable: str, value: float) -> NumericsError:
    note = f"while evaluating {variable} = {value!r}"
    exc.args = (f"{exc.args[0]} ({note})",) + exc.args[1:]
    return exc


def _run_fig2(cfg: ExperimentConfig, threads: int):
    geom = SlabGeometry(cfg.geometry.d, cfg.geometry.a)
    material = build_material(cfg.material)
    quad = build_quadrature(cfg)
    axis = cfg.sweep.variable  # "dx" or "dz"
    d = cfg.geometry.d
    e1 = DipoleEmitter((0.0, 0.0, d / 2.0))

    def one(delta):
        if axis == "dx":
            pos2 = (delta, 0.0, -1.5 * d)
        else:
            pos2 = (0.0, 0.0, -1.5 * d + delta)
        e2 = DipoleEmitter(pos2)
        try:
            rates = decay_rates(e1, e2, geom, material, quad=quad)
        except NumericsError as exc:
            raise _annotate(exc, axis, delta)
        return rates.gamma12 / rates.gamma11

    ratios = _map_grid(one, cfg.sweep.grid, threads)
    rows = np.column_stack([cfg.sweep.grid, ratios])
    return ("delta_" + axis[1], "gamma12_over_gamma11"), rows


def _run_loss_sweep(cfg: ExperimentConfig, threads: int):
    quad = build_quadrature(cfg)
    d_list = cfg.geometry.d_list
    channel = cfg.sweep.channel

    def one(im_n):
        material = SlabMaterial.from_index(complex(-1.0, im_n))
        row = []
        for d in d_list:
            geom = SlabGeometry(d, cfg.geometry.a)
            e1 = DipoleEmitter((0.0, 0.0, d / 2.0))
            e2 = DipoleEmitter((0.0, 0.0, -1.5 * d))
            try:
                rates = decay_rates(
                    e1, e2, geom, material, quad=quad, spectral_range=channel
                )
            except NumericsError as exc:
                raise _annotate(exc, "im_n", im_n)
            row.append(rates.gamma12 / rates.gamma11)
        return row

    ratios = _map_grid(one, cfg.sweep.grid, threads)
    rows = np.column_stack([cfg.sweep.grid, np.asarray(ratios)])
    names = ["im_n"] + [f"ratio_d{d:g}" for d in d_list]
    return tuple(names), rows


def _run_aperture_sweep(cfg: ExperimentConfig, threads: int):
    def one(a_over_d):
        return aperture_rate_ratio(a_over_d, 1.0)

    ratios = _map_grid(one, cfg.sweep.grid, threads)
    rows = np.column_stack([cfg.sweep.grid, ratios])
    return ("a_over_d", "gamma12_over_gamma11"), rows


def _run_spectrum(cfg: ExperimentConfig, threads: int):
    d = cfg.geometry.d
    det = np.asarray(cfg.sweep.grid)
    if cfg.spectrum.model == "linear":
        sp = ideal_lens_spectrum(d, cfg.spectrum.alpha, det)
    else:
        if cfg.material.mode() == "index":
            from .material import fit_lens_material

            gamma = cfg.material.gamma if cfg.material.gamma is not None else 1.0e-6
            eps, mu = fit_lens_material(-1.0, cfg.spectrum.alpha, gamma=gamma)
            material = SlabMaterial(eps=eps, mu=mu)
        else:
            material = build_material(cfg.material)
        geom = SlabGeometry(d, cfg.geometry.a)
        sp = material_lens_spectrum(geom, material, det, quad=build_quadrature(cfg))
    rows = np.column_stack([det, sp.ratio_values()])
    return ("detuning", "im_g_over_peak"), rows


def _run_rates(cfg: ExperimentConfig, threads: int):
    geom = SlabGeometry(cfg.geometry.d, cfg.geometry.a)
    material = build_material(cfg.material)
    p1, p2 = cfg.focal_positions()
    e1 = DipoleEmitter(p1, cfg.emitters.orientation)
    e2 = DipoleEmitter(p2, cfg.emitters.orientation)
    rates = decay_rates(e1, e2, geom, material, quad=build_quadrature(cfg))
    rows = np.array([
        [rates.gamma11, rates.gamma22, rates.gamma12,
         rates.gamma12 / rates.gamma11]
    ])
    return ("gamma11", "gamma22", "gamma12", "gamma12_over_gamma11"), rows


def _run_shift(cfg: ExperimentConfig, threads: int):
    geom = SlabGeometry(cfg.geometry.d, cfg.geometry.a)
    material = build_material(cfg.material)
    p1, p2 = cfg.focal_positions()
    e1 = DipoleEmitter(p1, cfg.emitters.orientation)
    e2 = DipoleEmitter(p2, cfg.emitters.orientation)
    s = cfg.shift
    pv = PrincipalValueSpec(
        omega_min=s.omega_min,
        omega_max=s.omega_max,
        window=s.window,
        spacing=s.spacing,
        fine_spacing=s.fine_spacing,
        nodes=s.nodes,
    )
    result = dipole_dipole_shift(e1, e2, geom, material, pv=pv)
    rates = decay_rates(e1, e2, geom, material, quad=build_quadrature(cfg))
    rows = np.array([
        [result.delta_omega, result.tail_estimate, rates.gamma11]
    ])
    return ("delta_omega", "tail_estimate", "gamma11"), rows


def _dynamics_rates(cfg: ExperimentConfig) -> CollectiveRates:
    dyn = cfg.dynamics
    return CollectiveRates(dyn.gamma11, dyn.gamma11, dyn.gamma12)


def _initial_state(cfg: ExperimentConfig) -> TwoAtomState:
    return {
        "21": TwoAtomState.single_excited(),
        "22": TwoAtomState.double_excited(),
        "ground": TwoAtomState.ground(),
    }[cfg.dynamics.initial]


def _run_dynamics(cfg: ExperimentConfig, threads: int):
    rates = _dynamics_rates(cfg)
    state0 = _initial_state(cfg)

    def one(t):
        s = evolve(state0, rates, t)
        return [s.rho22, s.rho_ss, s.rho_aa, s.rho11]

    data = _map_grid(one, cfg.sweep.grid, threads)
    rows = np.column_stack([cfg.sweep.grid, np.asarray(data)])
    return ("t", "rho22", "rho_ss", "rho_aa", "rho11"), rows


def _run_protocol(cfg: ExperimentConfig, threads: int):
    rates = _dynamics_rates(cfg)

    def one(t_wait):
        res = entanglement_protocol(rates, t_wait)
        return [res.success_probability, res.fidelity]

    data = _map_grid(one, cfg.sweep.grid, threads)
    rows = np.column_stack([cfg.sweep.grid, np.asarray(data)])
    return ("t_wait", "success_probability", "fidelity"), rows


_RUNNERS = {
    "fig2": _run_fig2,
    "loss_sweep": _run_loss_sweep,
    "aperture_sweep": _run_aperture_sweep,
    "spectrum": _run_spectrum,
    "rates": _run_rates,
    "shift": _run_shift,
    "dynamics": _run_dynamics,
    "protocol": _run_protocol,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Run the named experiment and return its result table."""
    columns, rows = _RUNNERS[cfg.name](cfg, max(int(threads), 1))
    return ResultTable(
        experiment=cfg.name,
        columns=columns,
        rows=rows,
        metadata=_metadata(cfg),
    )


def write_table(table: ResultTable, path) -> None:
    """Write a table as CSV with a '#'-prefixed metadata header.

    Numbers carry 12 significant digits; output bytes are deterministic
    for identical inputs.  Non-finite values are refused.
    """
    if not np.all(np.isfinite(table.rows)):
        raise ValueError("result table contains non-finite values")
    lines = [f"# {line}" for line in table.metadata]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(f"{x:.11e}" for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
