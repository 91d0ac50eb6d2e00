"""Experiment configuration: schema, presets, strict validation.

Configuration units are chosen for bench ergonomics and converted to SI
exactly once, downstream in the runner: frequencies in MHz, times in
microseconds, magnetic fields in mT, angles in degrees, gyromagnetic
ratios in MHz/mT. Unknown keys are rejected with their full path;
physical inconsistencies raise ConfigError naming the violated rule.
Precedence is defaults < config file < --set overrides < direct flags.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .errors import ConfigError

EXPERIMENTS: dict[str, str] = {
    "spectrum": "Transition frequencies of the triplet at given static fields",
    "field-odmr": "ODMR contrast map versus field magnitude and drive frequency",
    "odmr": "Frequency-swept pulsed ODMR contrast at fixed field",
    "rabi": "Driven population transfer versus pulse duration",
    "t1": "Ground-state recovery versus dark delay after optical shelving",
    "echo": "Coherence echo envelope versus total evolution time",
    "dd-scaling": "Coherence time versus number of decoupling pulses",
    "ac-sense": "Echo contrast versus echo half-time under an applied AC field",
    "nmr-correlation": "Correlation signal oscillating at the nuclear Larmor frequency",
    "deer": "Double-resonance spectrum of a dark electron spin at fixed echo time",
    "deer-rabi": "Dark-spin driven nutation read through the probe echo",
    "fit": "Fit a registered model to a previously emitted trace",
}

#: Triplet kinetics presets: lifetimes in us, steady-state populations in %.
KINETICS_PRESETS: dict[str, dict[str, list[float]]] = {
    "4K": {"lifetimes": [514.0, 21.2, 111.0], "populations": [26.3, 53.8, 19.9]},
    "295K": {"lifetimes": [73.0, 18.9, 61.0], "populations": [30.5, 41.6, 27.9]},
}

#: Decoupling-scaling presets: t2_1 and t1_rho in us.
DD_PRESETS: dict[str, dict[str, float]] = {
    "4K": {"t2_1": 22.4, "nu": 0.53, "t1_rho": 405.0},
    "295K": {"t2_1": 2.5, "nu": 1.23, "t1_rho": 3.2},
}

#: Hahn-echo coherence presets for the two host isotopologues.
COHERENCE_PRESETS: dict[str, dict[str, Any]] = {
    "protonated": {"t2": 2.5, "nu": 1.05, "eseem": None},
    "deuterated": {
        "t2": 22.4,
        "nu": 1.10,
        "eseem": {"a": 1.0, "b": 0.5, "frequency": 0.1402},
    },
}

_GRID_SPEC = {
    "start": {"type": float, "nullable": True, "default": None},
    "stop": {"type": float, "nullable": True, "default": None},
    "count": {"type": int, "nullable": True, "default": None, "min": 2},
    "spacing": {"type": str, "default": "linear", "choices": ("linear", "log")},
    "values": {"type": list, "nullable": True, "default": None, "element": float},
}

_SCHEMA: dict[str, Any] = {
    "experiment": {"type": str, "nullable": True, "default": None, "choices": tuple(EXPERIMENTS)},
    "seed": {"type": int, "default": 0, "min": 0},
    "out": {"type": str, "nullable": True, "default": None},
    "format": {"type": str, "default": "csv", "choices": ("csv", "json")},
    "gamma": {"type": float, "default": -28.0},
    "zfs": {
        "nested": {
            "d": {"type": float, "default": 1905.0},
            "e": {"type": float, "default": -475.0},
        }
    },
    "field": {
        "nested": {
            "axis": {"type": str, "default": "z", "choices": ("x", "y", "z")},
            "magnitude": {"type": float, "default": 0.0},
            "bx": {"type": float, "nullable": True, "default": None},
            "by": {"type": float, "nullable": True, "default": None},
            "bz": {"type": float, "nullable": True, "default": None},
        }
    },
    "kinetics": {
        "preset": KINETICS_PRESETS,
        "nested": {
            "preset": {"type": str, "nullable": True, "default": "4K", "choices": tuple(KINETICS_PRESETS)},
            "lifetimes": {"type": list, "nullable": True, "default": None, "element": float, "length": 3},
            "populations": {"type": list, "nullable": True, "default": None, "element": float, "length": 3},
            "pump_rate": {"type": float, "default": 100.0, "min": 0.0},
            "s1_lifetime": {"type": float, "default": 0.01, "min_exclusive": 0.0},
            "isc_yield": {"type": float, "default": 0.002, "min": 0.0, "max": 1.0},
        },
    },
    "init": {
        "nested": {
            "duration": {"type": float, "default": 15.0, "min": 0.0},
            "intensity": {"type": float, "default": 1.0, "min": 0.0},
        }
    },
    "readout": {
        "nested": {
            "duration": {"type": float, "default": 1.0, "min": 0.0},
            "intensity": {"type": float, "default": 1.0, "min": 0.0},
            "delay": {"type": float, "nullable": True, "default": None, "min": 0.0},
        }
    },
    "pulse": {
        "nested": {
            "rabi": {"type": float, "default": 5.0, "min_exclusive": 0.0},
            "t2_star": {"type": float, "nullable": True, "default": 0.195, "min_exclusive": 0.0},
            "transition": {"type": str, "default": "yz", "choices": ("xy", "xz", "yz")},
            "detuning": {"type": float, "default": 0.0},
        }
    },
    "coherence": {
        "preset": COHERENCE_PRESETS,
        "nested": {
            "preset": {
                "type": str,
                "nullable": True,
                "default": "deuterated",
                "choices": tuple(COHERENCE_PRESETS),
            },
            "t2": {"type": float, "default": 22.4, "min_exclusive": 0.0},
            "nu": {"type": float, "default": 1.10, "min_exclusive": 0.0, "max": 4.0},
            "eseem": {
                "nullable": True,
                "default": {"a": 1.0, "b": 0.5, "frequency": 0.1402},
                "nested": {
                    "a": {"type": float, "default": 1.0, "min": 0.0},
                    "b": {"type": float, "default": 0.5, "min": 0.0},
                    "frequency": {"type": float, "default": 0.1402, "min_exclusive": 0.0},
                },
            },
        },
    },
    "dd": {
        "preset": DD_PRESETS,
        "nested": {
            "preset": {"type": str, "nullable": True, "default": "4K", "choices": tuple(DD_PRESETS)},
            "t2_1": {"type": float, "default": 22.4, "min_exclusive": 0.0},
            "nu": {"type": float, "default": 0.53, "min_exclusive": 0.0, "max": 4.0},
            "t1_rho": {"type": float, "default": 405.0, "min_exclusive": 0.0},
        },
    },
    "ac": {
        "nested": {
            "amplitude": {"type": float, "default": 1.34e-3, "min": 0.0},
            "frequency": {"type": float, "default": 0.1, "min_exclusive": 0.0},
            "phase": {"type": float, "nullable": True, "default": None},
            "phase_samples": {"type": int, "default": 64, "min": 1},
            "sampling": {"type": str, "default": "grid", "choices": ("grid", "random")},
        }
    },
    "nuclear": {
        "nested": {
            "species": {
                "type": str,
                "nullable": True,
                "default": "proton",
                "choices": ("proton", "deuteron"),
            },
            "gamma": {"type": float, "nullable": True, "default": None, "min_exclusive": 0.0},
            "t1": {"type": float, "default": 2000.0, "min_exclusive": 0.0},
            "tau": {"type": float, "nullable": True, "default": None, "min_exclusive": 0.0},
            "amplitude": {"type": float, "default": 0.05, "min": 0.0},
        }
    },
    "dark": {
        "nested": {
            "g_factor": {"type": float, "default": 2.0, "min_exclusive": 0.0},
            "coupling_mean": {"type": float, "default": 0.5},
            "coupling_spread": {"type": float, "default": 0.2, "min": 0.0},
            "linewidth": {"type": float, "default": 2.0, "min_exclusive": 0.0},
            "t_fix": {"type": float, "default": 0.5, "min_exclusive": 0.0},
            "drive_rabi": {"type": float, "default": 35.4, "min": 0.0},
            "detuning": {"type": float, "default": 0.0},
        }
    },
    "odmr": {
        "nested": {
            "multilevel": {"type": bool, "default": False},
            "linewidth": {"type": float, "default": 20.0, "min_exclusive": 0.0},
        }
    },
    "grid": {"nested": _GRID_SPEC},
    "field_grid": {"nested": _GRID_SPEC},
    "fit": {
        "nested": {
            "model": {"type": str, "nullable": True, "default": None},
            "input": {"type": str, "nullable": True, "default": None},
            "x_column": {"type": (int, str), "default": 0},
            "y_column": {"type": (int, str), "default": 1},
            "initial_guess": {"type": list, "nullable": True, "default": None, "element": float},
            "max_iter": {"type": int, "default": 200, "min": 1},
        }
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated configuration, still in CLI units."""

    experiment: str
    seed: int
    out: str | None
    format: str
    sections: dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.sections[key]


def _type_name(t: Any) -> str:
    if isinstance(t, tuple):
        return " or ".join(x.__name__ for x in t)
    return t.__name__


def _coerce_scalar(value: Any, spec: dict, path: str) -> Any:
    expected = spec.get("type", float)
    if value is None:
        if spec.get("nullable", False):
            return None
        raise ConfigError(f"{path}: null is not allowed here")
    if expected is float or (isinstance(expected, tuple) and float in expected):
        if isinstance(value, bool):
            raise ConfigError(f"{path}: expected a number, got a boolean")
        if isinstance(value, (int, float)):
            value = float(value) if expected is float else value
        elif not isinstance(value, expected if isinstance(expected, tuple) else (expected,)):
            raise ConfigError(f"{path}: expected {_type_name(expected)}, got {type(value).__name__}")
    elif expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {type(value).__name__}")
    elif expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {type(value).__name__}")
    elif expected is list:
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list, got {type(value).__name__}")
        elem_type = spec.get("element")
        coerced = []
        for k, item in enumerate(value):
            if elem_type is float:
                if isinstance(item, bool) or not isinstance(item, (int, float)):
                    raise ConfigError(f"{path}[{k}]: expected a number, got {type(item).__name__}")
                coerced.append(float(item))
            else:
                coerced.append(item)
        value = coerced
        length = spec.get("length")
        if length is not None and len(value) != length:
            raise ConfigError(f"{path}: expected {length} entries, got {len(value)}")
    else:
        if not isinstance(value, expected if isinstance(expected, tuple) else (expected,)):
            raise ConfigError(f"{path}: expected {_type_name(expected)}, got {type(value).__name__}")
    choices = spec.get("choices")
    if choices is not None and value is not None and value not in choices:
        raise ConfigError(f"{path}: {value!r} is not one of {list(choices)}")
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        lo = spec.get("min")
        if lo is not None and value < lo:
            raise ConfigError(f"{path}: must be >= {lo}, got {value}")
        lo_x = spec.get("min_exclusive")
        if lo_x is not None and value <= lo_x:
            raise ConfigError(f"{path}: must be > {lo_x}, got {value}")
        hi = spec.get("max")
        if hi is not None and value > hi:
            raise ConfigError(f"{path}: must be <= {hi}, got {value}")
    return value


def _validate_nested(raw: Any, nested: dict, path: str) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(raw).__name__}")
    unknown = set(raw) - set(nested)
    if unknown:
        known = ", ".join(sorted(nested))
        raise ConfigError(
            f"{path}.{sorted(unknown)[0]}: unknown key (known keys: {known})"
        )
    out = {}
    for key, spec in nested.items():
        sub_path = f"{path}.{key}" if path else key
        if "nested" in spec:
            if key not in raw:
                default = spec.get("default", {})
                out[key] = (
                    None if default is None else _validate_nested(default, spec["nested"], sub_path)
                )
            elif raw[key] is None:
                if not spec.get("nullable", False):
                    raise ConfigError(f"{sub_path}: null is not allowed here")
                out[key] = None
            else:
                out[key] = _validate_nested(raw[key], spec["nested"], sub_path)
        else:
            out[key] = _coerce_scalar(raw.get(key, spec.get("default")), spec, sub_path)
    return out


def _expand_preset(section: Any, presets: dict, default_preset: Any, path: str) -> Any:
    """Overlay a named preset under any explicitly given keys.

    Sections that do not mention "preset" get the schema default preset;
    an explicit "preset": null opts out entirely.
    """
    if not isinstance(section, dict):
        return section
    name = section.get("preset", default_preset)
    if name is None:
        return section
    if name not in presets:
        raise ConfigError(f"{path}.preset: {name!r} is not one of {sorted(presets)}")
    merged = {k: list(v) if isinstance(v, list) else v for k, v in presets[name].items()}
    merged.update({k: v for k, v in section.items() if k != "preset"})
    merged["preset"] = name
    return merged


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply --set key=value overrides (dotted paths, JSON values)."""
    out = json.loads(json.dumps(raw))  # deep copy, JSON types only
    for assignment in assignments:
        if "=" not in assignment:
            raise ConfigError(f"--set expects key=value, got {assignment!r}")
        key, _, text = assignment.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"--set expects a nonempty key, got {assignment!r}")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = {}
                node[part] = nxt
            elif not isinstance(nxt, dict):
                raise ConfigError(f"--set {key}: {part} is not a section")
            node = nxt
        node[parts[-1]] = value
    return out


def load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return raw


def _check_physics(sections: dict) -> None:
    zfs = sections["zfs"]
    if abs(zfs["e"]) > abs(zfs["d"]):
        raise ConfigError(
            f"zfs: |E| <= |D| is required, got D={zfs['d']} MHz, E={zfs['e']} MHz"
        )
    if sections["gamma"] == 0.0:
        raise ConfigError("gamma: must be nonzero")
    kin = sections["kinetics"]
    if kin["lifetimes"] is None or kin["populations"] is None:
        raise ConfigError(
            "kinetics: lifetimes and populations are required when no preset is selected"
        )
    if kin["lifetimes"] is not None and any(t <= 0.0 for t in kin["lifetimes"]):
        raise ConfigError(f"kinetics.lifetimes: lifetimes must be > 0, got {kin['lifetimes']}")
    if kin["populations"] is not None:
        if any(p < 0.0 for p in kin["populations"]) or sum(kin["populations"]) <= 0.0:
            raise ConfigError(
                "kinetics.populations: must be nonnegative with a positive sum, "
                f"got {kin['populations']}"
            )
    eseem = sections["coherence"]["eseem"]
    if eseem is not None and eseem["b"] > eseem["a"]:
        raise ConfigError(
            f"coherence.eseem: a >= b >= 0 is required, got a={eseem['a']}, b={eseem['b']}"
        )
    grid = sections["grid"]
    if grid["values"] is None and grid["start"] is not None:
        if grid["stop"] is None or grid["count"] is None:
            raise ConfigError("grid: start, stop and count must be given together")
        if grid["spacing"] == "log" and (grid["start"] <= 0.0 or grid["stop"] <= 0.0):
            raise ConfigError("grid: log spacing needs start > 0 and stop > 0")


def parse_config(
    raw: dict,
    experiment: str | None = None,
    seed: int | None = None,
    out: str | None = None,
    fmt: str | None = None,
) -> ExperimentConfig:
    """Validate a raw configuration mapping into an ExperimentConfig.

    `experiment`, `seed`, `out` and `fmt` are direct-flag overrides that
    take precedence over the mapping.
    """
    if not isinstance(raw, dict):
        raise ConfigError(f"configuration must be a mapping, got {type(raw).__name__}")
    raw = dict(raw)
    for key, spec in _SCHEMA.items():
        if "preset" in spec:
            default_preset = spec["nested"]["preset"].get("default")
            raw[key] = _expand_preset(raw.get(key, {}), spec["preset"], default_preset, key)
    sections = _validate_nested(raw, _SCHEMA, "")
    if experiment is not None:
        sections["experiment"] = _coerce_scalar(experiment, _SCHEMA["experiment"], "experiment")
    if sections["experiment"] is None:
        raise ConfigError(
            f"experiment: required; choose one of {list(EXPERIMENTS)}"
        )
    if seed is not None:
        sections["seed"] = _coerce_scalar(seed, _SCHEMA["seed"], "seed")
    if out is not None:
        sections["out"] = out
    if fmt is not None:
        sections["format"] = _coerce_scalar(fmt, _SCHEMA["format"], "format")
    _check_physics(sections)
    if sections["experiment"] == "fit":
        fit = sections["fit"]
        if not fit["model"]:
            raise ConfigError("fit.model: required for the fit experiment")
        if not fit["input"]:
            raise ConfigError("fit.input: required for the fit experiment")
    return ExperimentConfig(
        experiment=sections.pop("experiment"),
        seed=sections.pop("seed"),
        out=sections.pop("out"),
        format=sections.pop("format"),
        sections=sections,
    )
