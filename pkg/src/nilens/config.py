"""Line-oriented experiment configuration: parsing, validation, rendering.

The format is ``[section]`` headers with ``key = value`` lines; ``#`` and
``;`` start comments.  Parsing is strict: unknown sections or keys, grids
that fail to increase, and malformed numbers are collected and reported
together as a :class:`ConfigError`.  ``render_config`` emits the full
effective configuration (defaults materialized) and round-trips through
``parse_config``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError
from .material import (
    LorentzModel,
    SlabMaterial,
    fit_lens_material,
    material_from_config,
    material_to_config,
)
from .quadrature import QuadratureSpec

__all__ = [
    "ExperimentConfig",
    "GeometryConfig",
    "MaterialConfig",
    "EmitterConfig",
    "SweepConfig",
    "DynamicsConfig",
    "SpectrumConfig",
    "ShiftConfig",
    "parse_config",
    "render_config",
    "build_material",
    "build_quadrature",
]

EXPERIMENTS = (
    "fig2",
    "loss_sweep",
    "aperture_sweep",
    "spectrum",
    "rates",
    "shift",
    "dynamics",
    "protocol",
)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GeometryConfig:
    d: float | None = None
    a: float = math.inf
    d_list: tuple[float, ...] | None = None


@dataclass(frozen=True)
class MaterialConfig:
    re_n: float | None = None
    im_n: float = 0.0
    fit_alpha: float | None = None
    gamma: float | None = None
    eps_background: float | None = None
    eps_terms: str | None = None
    mu_background: float | None = None
    mu_terms: str | None = None

    def mode(self) -> str:
        explicit = any(
            getattr(self, k) is not None
            for k in ("eps_background", "eps_terms", "mu_background", "mu_terms")
        )
        if explicit:
            return "explicit"
        if self.fit_alpha is not None:
            return "fit"
        return "index"


@dataclass(frozen=True)
class EmitterConfig:
    position1: tuple[float, float, float] | None = None
    position2: tuple[float, float, float] | None = None
    orientation: tuple[float, float, float] = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class SweepConfig:
    variable: str
    grid: tuple[float, ...]
    channel: str = "propagating"


@dataclass(frozen=True)
class DynamicsConfig:
    gamma11: float = 1.0
    gamma12: float = 1.0
    initial: str = "21"


@dataclass(frozen=True)
class SpectrumConfig:
    model: str = "linear"
    alpha: float = 45.0


@dataclass(frozen=True)
class ShiftConfig:
    omega_min: float = 0.02
    omega_max: float = 10.0
    window: float = 0.1
    spacing: float = 0.1
    fine_spacing: float = 0.002
    nodes: int = 10


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1.0e-9
    abs_tol: float = 1.0e-12
    evanescent_floor: float = 1.0e-12
    max_depth: int = 48
    kperp_cap: float = 50.0


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    geometry: GeometryConfig = GeometryConfig()
    material: MaterialConfig = MaterialConfig()
    emitters: EmitterConfig = EmitterConfig()
    sweep: SweepConfig | None = None
    dynamics: DynamicsConfig = DynamicsConfig()
    spectrum: SpectrumConfig = SpectrumConfig()
    shift: ShiftConfig = ShiftConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    output: str | None = None

    def focal_positions(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Emitter positions, defaulting to the symmetric focal pair."""
        d = self.geometry.d
        p1 = self.emitters.position1
        p2 = self.emitters.position2
        if p1 is None:
            p1 = (0.0, 0.0, d / 2.0)
        if p2 is None:
            p2 = (0.0, 0.0, -1.5 * d)
        return p1, p2


# Section -> parser/defaults wiring.  Values are (type tag, default) pairs;
# the validator walks raw sections against this table.
_FLOAT3 = "float3"
_SECTION_KEYS = {
    "experiment": {"name": "str"},
    "geometry": {"d": "float", "a": "float", "d_list": "floats"},
    "material": {
        "re_n": "float",
        "im_n": "float",
        "fit_alpha": "float",
        "gamma": "float",
        "eps_background": "float",
        "eps_terms": "str",
        "mu_background": "float",
        "mu_terms": "str",
    },
    "emitters": {
        "position1": _FLOAT3,
        "position2": _FLOAT3,
        "orientation": _FLOAT3,
    },
    "sweep": {"variable": "str", "grid": "grid", "channel": "str"},
    "dynamics": {"gamma11": "float", "gamma12": "float", "initial": "str"},
    "spectrum": {"model": "str", "alpha": "float"},
    "shift": {
        "omega_min": "float",
        "omega_max": "float",
        "window": "float",
        "spacing": "float",
        "fine_spacing": "float",
        "nodes": "int",
    },
    "quadrature": {
        "rel_tol": "float",
        "abs_tol": "float",
        "evanescent_floor": "float",
        "max_depth": "int",
        "kperp_cap": "float",
    },
    "output": {"path": "str"},
}

# Which sections each experiment accepts beyond the always-allowed
# experiment/quadrature/output.
_ALLOWED = {
    "fig2": {"geometry", "material", "sweep"},
    "loss_sweep": {"geometry", "sweep"},
    "aperture_sweep": {"sweep"},
    "spectrum": {"geometry", "material", "spectrum", "sweep"},
    "rates": {"geometry", "material", "emitters"},
    "shift": {"geometry", "material", "emitters", "shift"},
    "dynamics": {"dynamics", "sweep"},
    "protocol": {"dynamics", "sweep"},
}

_SWEEP_VARIABLES = {
    "fig2": ("dz", "dx"),
    "loss_sweep": ("im_n",),
    "aperture_sweep": ("a_over_d",),
    "spectrum": ("detuning",),
    "dynamics": ("t",),
    "protocol": ("t_wait",),
}

_DEFAULT_GRIDS = {
    "fig2": tuple(np.linspace(-2.0 * _TWO_PI, 2.0 * _TWO_PI, 51)),
    "loss_sweep": tuple(np.linspace(0.0, 0.05, 11)),
    "aperture_sweep": tuple(np.linspace(0.1, 5.0, 50)),
    "spectrum": tuple(np.linspace(-0.2, 0.2, 81)),
    "dynamics": tuple(np.linspace(0.0, 10.0, 101)),
    "protocol": tuple(np.linspace(0.0, 10.0, 101)),
}

_DEFAULT_D = {"fig2": 100.0, "spectrum": 1.0}
_DEFAULT_D_LIST = (100.0, 10.0, 1.0)


def _parse_number(text: str, what: str, errors: list[str]) -> float | None:
    text = text.strip()
    try:
        if text.lower() in ("inf", "infinite", "infinity"):
            return math.inf
        return float(text)
    except ValueError:
        errors.append(f"{what}: malformed number {text!r}")
        return None


def _parse_grid(text: str, what: str, errors: list[str]):
    text = text.strip()
    if text.startswith("linspace:"):
        parts = text.split(":")
        if len(parts) != 4:
            errors.append(f"{what}: linspace needs start:stop:count")
            return None
        lo = _parse_number(parts[1], what, errors)
        hi = _parse_number(parts[2], what, errors)
        try:
            count = int(parts[3])
        except ValueError:
            errors.append(f"{what}: malformed count {parts[3]!r}")
            return None
        if lo is None or hi is None:
            return None
        if count < 2:
            errors.append(f"{what}: linspace needs at least 2 points")
            return None
        return tuple(float(x) for x in np.linspace(lo, hi, count))
    values = []
    for chunk in text.split(","):
        v = _parse_number(chunk, what, errors)
        if v is None:
            return None
        values.append(v)
    return tuple(values)


def _parse_sections(text: str, errors: list[str]) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTION_KEYS:
                errors.append(f"line {lineno}: unknown section [{current}]")
                current = None
            else:
                sections.setdefault(current, {})
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value, got {line!r}")
            continue
        if current is None:
            errors.append(f"line {lineno}: key outside any known section")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SECTION_KEYS[current]:
            errors.append(f"line {lineno}: unknown key {key!r} in [{current}]")
            continue
        if key in sections[current]:
            errors.append(f"line {lineno}: duplicate key {key!r} in [{current}]")
            continue
        sections[current][key] = value
    return sections


def _typed(section: str, raw: dict[str, str], errors: list[str]) -> dict:
    out = {}
    for key, value in raw.items():
        kind = _SECTION_KEYS[section][key]
        what = f"[{section}] {key}"
        if kind == "float":
            v = _parse_number(value, what, errors)
        elif kind == "int":
            try:
                v = int(value)
            except ValueError:
                errors.append(f"{what}: malformed integer {value!r}")
                v = None
        elif kind == "floats":
            vals = [_parse_number(x, what, errors) for x in value.split(",")]
            v = None if any(x is None for x in vals) else tuple(vals)
        elif kind == _FLOAT3:
            vals = [_parse_number(x, what, errors) for x in value.split(",")]
            if len(vals) != 3:
                errors.append(f"{what}: expected 3 comma-separated numbers")
                v = None
            else:
                v = None if any(x is None for x in vals) else tuple(vals)
        elif kind == "grid":
            v = _parse_grid(value, what, errors)
        else:
            v = value
        if v is not None:
            out[key] = v
    return out


def _build_sweep(name, typed_sweep, errors) -> SweepConfig | None:
    if name not in _SWEEP_VARIABLES:
        if typed_sweep:
            errors.append(f"[sweep] not used by experiment {name!r}")
        return None
    allowed_vars = _SWEEP_VARIABLES[name]
    variable = typed_sweep.get("variable", allowed_vars[0])
    if variable not in allowed_vars:
        errors.append(
            f"[sweep] variable must be one of {allowed_vars} for {name!r}, "
            f"got {variable!r}"
        )
    grid = typed_sweep.get("grid", _DEFAULT_GRIDS[name])
    if len(grid) < 2:
        errors.append("[sweep] grid needs at least 2 points")
    elif any(b <= a for a, b in zip(grid, grid[1:])):
        errors.append("[sweep] grid must be strictly increasing")
    channel = typed_sweep.get("channel", "propagating")
    if channel not in ("propagating", "full"):
        errors.append(f"[sweep] channel must be propagating or full, got {channel!r}")
    return SweepConfig(variable=variable, grid=tuple(grid), channel=channel)


def _validate_material(name, mat: MaterialConfig, errors: list[str]) -> None:
    mode = mat.mode()
    if mode == "explicit":
        if mat.re_n is not None or mat.fit_alpha is not None:
            errors.append(
                "[material] explicit eps/mu terms cannot be combined with "
                "re_n or fit_alpha"
            )
        try:
            build_material(mat)
        except (ValueError, ConfigError) as exc:
            errors.append(f"[material] {exc}")
    elif mode == "fit":
        re_n = mat.re_n if mat.re_n is not None else -1.0
        if re_n >= 0.0:
            errors.append("[material] fit target requires re_n < 0")
        if mat.fit_alpha is not None and mat.fit_alpha <= 0.0:
            errors.append("[material] fit_alpha must be positive")
    else:
        if name in ("rates", "shift") and mat.re_n is None:
            errors.append(f"[material] re_n (or a model) required for {name!r}")
    if name == "shift" and mode == "index":
        errors.append(
            "[material] the shift experiment needs a dispersive model "
            "(fit_alpha or explicit terms)"
        )


def parse_config(text: str, name: str | None = None) -> ExperimentConfig:
    """Parse and validate configuration text.

    ``name`` (e.g. the CLI subcommand) supplies or confirms the experiment
    name.  All violations are collected; any violation raises
    :class:`ConfigError` carrying the full list.
    """
    errors: list[str] = []
    sections = _parse_sections(text, errors)
    typed = {
        sec: _typed(sec, raw, errors) for sec, raw in sections.items()
    }

    config_name = typed.get("experiment", {}).get("name")
    if name is not None and config_name is not None and name != config_name:
        errors.append(
            f"experiment name mismatch: {name!r} requested, config says "
            f"{config_name!r}"
        )
    exp_name = name or config_name
    if exp_name is None:
        errors.append("no experiment name given (section [experiment] or CLI)")
    elif exp_name not in EXPERIMENTS:
        errors.append(f"unknown experiment {exp_name!r}")
    if errors and (exp_name is None or exp_name not in EXPERIMENTS):
        raise ConfigError(errors)

    allowed = _ALLOWED[exp_name] | {"experiment", "quadrature", "output"}
    for sec in typed:
        if sec not in allowed:
            errors.append(f"section [{sec}] not used by experiment {exp_name!r}")

    geometry = GeometryConfig(**typed.get("geometry", {}))
    if geometry.d is None and exp_name in _DEFAULT_D:
        geometry = replace(geometry, d=_DEFAULT_D[exp_name])
    if exp_name == "loss_sweep" and geometry.d_list is None:
        geometry = replace(geometry, d_list=_DEFAULT_D_LIST)
    material = MaterialConfig(**typed.get("material", {}))
    if exp_name == "fig2" and material.re_n is None and material.mode() == "index":
        material = replace(material, re_n=-1.0)
    emitters_raw = typed.get("emitters", {})
    emitters = EmitterConfig(**emitters_raw)
    sweep = _build_sweep(exp_name, typed.get("sweep", {}), errors)
    dynamics = DynamicsConfig(**typed.get("dynamics", {}))
    spectrum = SpectrumConfig(**typed.get("spectrum", {}))
    shift = ShiftConfig(**typed.get("shift", {}))
    quadrature = QuadratureConfig(**typed.get("quadrature", {}))
    output = typed.get("output", {}).get("path")

    # Per-experiment requirements.
    if exp_name in ("fig2", "spectrum", "rates", "shift"):
        if geometry.d is None:
            errors.append(f"[geometry] d required for {exp_name!r}")
        elif geometry.d <= 0.0:
            errors.append(f"[geometry] d must be positive, got {geometry.d}")
    if geometry.a <= 0.0:
        errors.append(f"[geometry] a must be positive, got {geometry.a}")
    if geometry.d_list is not None and any(d <= 0.0 for d in geometry.d_list):
        errors.append("[geometry] d_list entries must be positive")
    if "material" in allowed:
        _validate_material(exp_name, material, errors)
    if exp_name == "spectrum":
        if spectrum.model not in ("linear", "material"):
            errors.append(
                f"[spectrum] model must be linear or material, got {spectrum.model!r}"
            )
        if spectrum.alpha <= 0.0:
            errors.append("[spectrum] alpha must be positive")
    if exp_name in ("dynamics", "protocol"):
        if dynamics.gamma11 <= 0.0:
            errors.append("[dynamics] gamma11 must be positive")
        if abs(dynamics.gamma12) > dynamics.gamma11 * (1.0 + 1.0e-12):
            errors.append("[dynamics] |gamma12| must not exceed gamma11")
        if dynamics.initial not in ("21", "22", "ground"):
            errors.append(
                f"[dynamics] initial must be 21, 22 or ground, got "
                f"{dynamics.initial!r}"
            )
        if sweep is not None and sweep.grid and sweep.grid[0] < 0.0:
            errors.append("[sweep] times must be non-negative")
    if exp_name in ("rates", "shift") and geometry.d is not None:
        cfg_probe = ExperimentConfig(
            name=exp_name, geometry=geometry, emitters=emitters
        )
        p1, p2 = cfg_probe.focal_positions()
        for label, pos in (("position1", p1), ("position2", p2)):
            if -geometry.d <= pos[2] <= 0.0:
                errors.append(f"[emitters] {label} lies inside the slab")
    for fname, fval in (
        ("rel_tol", quadrature.rel_tol),
        ("abs_tol", quadrature.abs_tol),
        ("evanescent_floor", quadrature.evanescent_floor),
    ):
        if fval <= 0.0:
            errors.append(f"[quadrature] {fname} must be positive")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        name=exp_name,
        geometry=geometry,
        material=material,
        emitters=emitters,
        sweep=sweep,
        dynamics=dynamics,
        spectrum=spectrum,
        shift=shift,
        quadrature=quadrature,
        output=output,
    )


def _format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    raise TypeError(f"cannot render {value!r}")


def render_config(cfg: ExperimentConfig) -> str:
    """Emit the effective configuration; inverse of :func:`parse_config`."""
    lines = ["[experiment]", f"name = {cfg.name}"]

    def emit(section: str, obj, keys=None):
        rows = []
        for f in fields(obj):
            if keys is not None and f.name not in keys:
                continue
            value = getattr(obj, f.name)
            if value is None:
                continue
            rows.append(f"{f.name} = {_format_value(value)}")
        if rows:
            lines.append(f"[{section}]")
            lines.extend(rows)

    allowed = _ALLOWED[cfg.name]
    if "geometry" in allowed:
        emit("geometry", cfg.geometry)
    if "material" in allowed:
        emit("material", cfg.material)
    if "emitters" in allowed:
        emit("emitters", cfg.emitters)
    if cfg.sweep is not None:
        emit("sweep", cfg.sweep)
    if "dynamics" in allowed:
        emit("dynamics", cfg.dynamics)
    if "spectrum" in allowed:
        emit("spectrum", cfg.spectrum)
    if "shift" in allowed:
        emit("shift", cfg.shift)
    emit("quadrature", cfg.quadrature)
    if cfg.output is not None:
        lines.append("[output]")
        lines.append(f"path = {cfg.output}")
    return "\n".join(lines) + "\n"


def build_material(mat: MaterialConfig) -> SlabMaterial:
    """Construct the slab material described by a material block."""
    mode = mat.mode()
    if mode == "explicit":
        block = {}
        for key in ("eps_background", "eps_terms", "mu_background", "mu_terms"):
            value = getattr(mat, key)
            if value is not None:
                block[key] = str(value)
        return material_from_config(block)
    if mode == "fit":
        re_n = mat.re_n if mat.re_n is not None else -1.0
        target = complex(re_n, mat.im_n)
        eps, mu = fit_lens_material(target, mat.fit_alpha, gamma=mat.gamma)
        return SlabMaterial(eps=eps, mu=mu)
    re_n = mat.re_n if mat.re_n is not None else -1.0
    return SlabMaterial.from_index(complex(re_n, mat.im_n))


def build_quadrature(cfg: ExperimentConfig) -> QuadratureSpec:
    q = cfg.quadrature
    return QuadratureSpec(
        rel_tol=q.rel_tol,
        abs_tol=q.abs_tol,
        evanescent_floor=q.evanescent_floor,
        max_depth=q.max_depth,
        kperp_cap=q.kperp_cap,
    )
