"""Experiment dispatch: validated configuration in, trace record out.

This is the single place where CLI units (MHz, us, mT, degrees, MHz/mT)
are converted to the SI units (Hz, s, T, radians, Hz/T) the physics
modules speak.
"""

from __future__ import annotations

import math

import numpy as np

from ._version import __version__
from .coherence import (
    DEUTERON,
    PROTON,
    AcSignal,
    CoherenceModel,
    CouplingDistribution,
    DarkSpin,
    DdScalingParams,
    EseemParams,
    NuclearSpecies,
    ac_echo_response,
    correlation_spectroscopy,
    dd_t2_scaling,
    deer_rabi,
    deer_spectrum,
    echo_envelope,
)
from .config import ExperimentConfig
from .errors import ConfigError
from .fitting import estimate_initial_guess, fit, get_model
from .photokinetics import KineticRates, ReadoutWindow, t1_relaxation_curve
from .pulse_engine import (
    QubitSystem,
    ReadoutPulse,
    simulate_field_odmr,
    simulate_pulsed_odmr,
    simulate_rabi,
)
from .spin_model import (
    TRANSITION_PAIRS,
    FieldVector,
    GyroRatio,
    ZfsParams,
    field_sweep_spectrum,
)
from .trace import Column, TraceRecord, read_trace

MHZ = 1.0e6
US = 1.0e-6
MT = 1.0e-3
MHZ_PER_MT = 1.0e9  # to Hz/T

_BRANCH_CODES = {pair: float(k + 1) for k, pair in enumerate(TRANSITION_PAIRS)}
_BRANCH_NAMES = {str(k + 1): "-".join(pair) for k, pair in enumerate(TRANSITION_PAIRS)}


def _zfs(cfg: ExperimentConfig) -> ZfsParams:
    return ZfsParams(d=cfg["zfs"]["d"] * MHZ, e=cfg["zfs"]["e"] * MHZ)


def _gamma(cfg: ExperimentConfig) -> GyroRatio:
    return GyroRatio(gamma=cfg["gamma"] * MHZ_PER_MT)


def _field(cfg: ExperimentConfig) -> FieldVector:
    section = cfg["field"]
    components = (section["bx"], section["by"], section["bz"])
    if any(c is not None for c in components):
        bx, by, bz = (0.0 if c is None else c for c in components)
        return FieldVector(bx=bx * MT, by=by * MT, bz=bz * MT)
    return FieldVector.along(section["axis"], section["magnitude"] * MT)


def _rates(cfg: ExperimentConfig) -> KineticRates:
    kin = cfg["kinetics"]
    return KineticRates.from_steady_state(
        populations=tuple(kin["populations"]),
        lifetimes=tuple(t * US for t in kin["lifetimes"]),
        pump_rate=kin["pump_rate"] * MHZ,
        s1_decay_rate=1.0 / (kin["s1_lifetime"] * US),
        isc_yield=kin["isc_yield"],
    )


def _grid(
    cfg: ExperimentConfig,
    key: str = "grid",
    start: float = 0.0,
    stop: float = 1.0,
    count: int = 101,
    spacing: str = "linear",
    values: list[float] | None = None,
) -> np.ndarray:
    """Resolve a grid section against experiment-specific defaults (CLI units)."""
    section = cfg[key]
    if section["values"] is not None:
        return np.asarray(section["values"], dtype=float)
    if section["start"] is not None:
        lo, hi, n = section["start"], section["stop"], section["count"]
        how = section["spacing"]
    elif values is not None:
        return np.asarray(values, dtype=float)
    else:
        lo, hi, n, how = start, stop, count, spacing
    if how == "log":
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _transition(cfg: ExperimentConfig) -> tuple[str, str]:
    code = cfg["pulse"]["transition"]
    return (code[0], code[1])


def _readout_window(cfg: ExperimentConfig) -> ReadoutWindow:
    section = cfg["readout"]
    return ReadoutWindow(duration=section["duration"] * US, intensity=section["intensity"])


def _readout_pulse(cfg: ExperimentConfig) -> ReadoutPulse:
    section = cfg["readout"]
    return ReadoutPulse(duration=section["duration"] * US, intensity=section["intensity"])


def _readout_delay(cfg: ExperimentConfig) -> float | None:
    delay = cfg["readout"]["delay"]
    return None if delay is None else delay * US


def _nuclear_species(cfg: ExperimentConfig) -> NuclearSpecies:
    section = cfg["nuclear"]
    if section["gamma"] is not None:
        return NuclearSpecies("custom", section["gamma"] * MHZ_PER_MT)
    if section["species"] == "deuteron":
        return DEUTERON
    return PROTON


def _dark_spin(cfg: ExperimentConfig) -> DarkSpin:
    section = cfg["dark"]
    return DarkSpin(
        g_factor=section["g_factor"],
        coupling=CouplingDistribution(
            mean=section["coupling_mean"] * MHZ, spread=section["coupling_spread"] * MHZ
        ),
        linewidth=section["linewidth"] * MHZ,
    )


def _require_field_magnitude(cfg: ExperimentConfig, kind: str) -> float:
    b = _field(cfg).magnitude
    if b <= 0.0:
        raise ConfigError(
            f"{kind} needs a nonzero static field; set field.magnitude (mT), e.g. 190"
        )
    return b


def _run_spectrum(cfg: ExperimentConfig):
    b_values = _grid(cfg, values=[0.0]) * MT
    sweep = field_sweep_spectrum(_zfs(cfg), cfg["field"]["axis"], b_values, _gamma(cfg))
    rows = []
    for n, b in enumerate(sweep.field):
        for pair in TRANSITION_PAIRS:
            rows.append([b / MT, _BRANCH_CODES[pair], sweep.branches[pair][n] / MHZ])
    columns = (Column("field", "mT"), Column("branch", "1"), Column("frequency", "MHz"))
    return columns, np.asarray(rows), {"branches": _BRANCH_NAMES}


def _run_field_odmr(cfg: ExperimentConfig):
    b_grid = _grid(cfg, key="field_grid", start=0.0, stop=120.0, count=61)
    f_grid = _grid(cfg, start=600.0, stop=3000.0, count=241)
    result = simulate_field_odmr(
        _zfs(cfg),
        _rates(cfg),
        cfg["field"]["axis"],
        b_grid * MT,
        f_grid * MHZ,
        gamma=_gamma(cfg),
        linewidth=cfg["odmr"]["linewidth"] * MHZ,
        init_duration=cfg["init"]["duration"] * US,
        readout_delay=_readout_delay(cfg),
        readout=_readout_window(cfg),
    )
    rows = []
    for i, b in enumerate(b_grid):
        for j, f in enumerate(f_grid):
            rows.append([b, f, result.contrast[i, j]])
    columns = (Column("field", "mT"), Column("frequency", "MHz"), Column("contrast", "1"))
    return columns, np.asarray(rows), {}


def _run_odmr(cfg: ExperimentConfig):
    f_grid = _grid(cfg, start=800.0, stop=2600.0, count=361)
    system = QubitSystem(zfs=_zfs(cfg), rates=_rates(cfg), field=_field(cfg), gamma=_gamma(cfg))
    contrast = simulate_pulsed_odmr(
        system,
        f_grid * MHZ,
        rabi_freq=cfg["pulse"]["rabi"] * MHZ,
        multilevel=cfg["odmr"]["multilevel"],
        init_duration=cfg["init"]["duration"] * US,
        readout_delay=_readout_delay(cfg),
        readout=_readout_pulse(cfg),
    )
    columns = (Column("frequency", "MHz"), Column("contrast", "1"))
    return columns, np.column_stack([f_grid, contrast]), {}


def _run_rabi(cfg: ExperimentConfig):
    durations = _grid(cfg, start=0.0, stop=0.6, count=301)
    t2_star = cfg["pulse"]["t2_star"]
    trace = simulate_rabi(
        rabi_freq=cfg["pulse"]["rabi"] * MHZ,
        durations=durations * US,
        t2_star=math.inf if t2_star is None else t2_star * US,
        detuning=cfg["pulse"]["detuning"] * MHZ,
    )
    columns = (Column("duration", "us"), Column("transfer", "1"))
    return columns, np.column_stack([durations, trace]), {}


def _run_t1(cfg: ExperimentConfig):
    delays = _grid(cfg, start=0.5, stop=2000.0, count=200, spacing="log")
    signal = t1_relaxation_curve(_rates(cfg), delays * US, intensity=cfg["init"]["intensity"])
    columns = (Column("delay", "us"), Column("signal", "1"), Column("triplet", "1"))
    return columns, np.column_stack([delays, signal, 1.0 - signal]), {}


def _coherence_model(cfg: ExperimentConfig) -> CoherenceModel:
    section = cfg["coherence"]
    eseem = section["eseem"]
    return CoherenceModel(
        t2=section["t2"] * US,
        nu=section["nu"],
        eseem=None
        if eseem is None
        else EseemParams(a=eseem["a"], b=eseem["b"], frequency=eseem["frequency"] * MHZ),
    )


def _run_echo(cfg: ExperimentConfig):
    times = _grid(cfg, start=0.05, stop=70.0, count=400)
    envelope = echo_envelope(_coherence_model(cfg), times * US)
    columns = (Column("time", "us"), Column("echo", "1"))
    return columns, np.column_stack([times, envelope]), {}


def _run_dd_scaling(cfg: ExperimentConfig):
    n_pulses = _grid(cfg, values=[float(2**k) for k in range(11)])
    if np.any(n_pulses < 1.0):
        raise ConfigError("dd-scaling: pulse numbers must be >= 1")
    section = cfg["dd"]
    params = DdScalingParams(
        t2_1=section["t2_1"] * US, nu=section["nu"], t1_rho=section["t1_rho"] * US
    )
    t2 = dd_t2_scaling(params, n_pulses)
    columns = (Column("n_pulses", "1"), Column("t2", "us"))
    return columns, np.column_stack([n_pulses, t2 / US]), {}


def _run_ac_sense(cfg: ExperimentConfig):
    taus = _grid(cfg, start=0.2, stop=40.0, count=400)
    section = cfg["ac"]
    phase = None if section["phase"] is None else math.radians(section["phase"])
    ac = AcSignal(
        amplitude=section["amplitude"] * MT, frequency=section["frequency"] * MHZ, phase=phase
    )
    seed = cfg.seed if section["sampling"] == "random" else None
    contrast = ac_echo_response(
        ac,
        taus * US,
        probe_gamma=abs(cfg["gamma"]) * MHZ_PER_MT,
        n_phase_samples=section["phase_samples"],
        seed=seed,
    )
    columns = (Column("tau", "us"), Column("contrast", "1"))
    return columns, np.column_stack([taus, contrast]), {}


def _run_nmr_correlation(cfg: ExperimentConfig):
    b = _require_field_magnitude(cfg, "nmr-correlation")
    species = _nuclear_species(cfg)
    section = cfg["nuclear"]
    f_n = abs(species.gamma) * b  # Hz
    tau = section["tau"] * US if section["tau"] is not None else 0.5 / f_n
    stop_us = 30.0 / f_n / US
    t_corr = _grid(cfg, start=0.0, stop=stop_us, count=1501)
    signal = correlation_spectroscopy(
        species,
        b,
        t_corr * US,
        tau=tau,
        nuclear_t1=section["t1"] * US,
        ac_amplitude=section["amplitude"] * MT,
        probe_gamma=abs(cfg["gamma"]) * MHZ_PER_MT,
        n_phase_samples=cfg["ac"]["phase_samples"],
    )
    columns = (Column("t_corr", "us"), Column("signal", "1"))
    meta = {"larmor_frequency_mhz": f_n / MHZ, "tau_us": tau / US}
    return columns, np.column_stack([t_corr, signal]), meta


def _run_deer(cfg: ExperimentConfig):
    b = _require_field_magnitude(cfg, "deer")
    dark = _dark_spin(cfg)
    center = dark.resonance(b) / MHZ
    f2 = _grid(cfg, start=center - 250.0, stop=center + 250.0, count=501)
    trace = deer_spectrum(dark, b, f2 * MHZ, t_fix=cfg["dark"]["t_fix"] * US)
    columns = (Column("frequency", "MHz"), Column("contrast", "1"))
    return columns, np.column_stack([f2, trace]), {"resonance_mhz": center}


def _run_deer_rabi(cfg: ExperimentConfig):
    dark = _dark_spin(cfg)
    durations = _grid(cfg, start=0.0, stop=0.2, count=401)
    trace = deer_rabi(
        dark,
        drive_rabi=cfg["dark"]["drive_rabi"] * MHZ,
        durations=durations * US,
        detuning=cfg["dark"]["detuning"] * MHZ,
        t_fix=cfg["dark"]["t_fix"] * US,
    )
    columns = (Column("duration", "us"), Column("contrast", "1"))
    return columns, np.column_stack([durations, trace]), {}


def _run_fit(cfg: ExperimentConfig):
    section = cfg["fit"]
    try:
        record = read_trace(section["input"])
    except OSError as exc:
        raise ConfigError(f"fit.input: cannot read {section['input']!r}: {exc}") from exc

    def pick(sel, role):
        if isinstance(sel, str):
            for k, col in enumerate(record.columns):
                if col.name == sel:
                    return k
            raise ConfigError(
                f"fit.{role}: no column named {sel!r}; have {[c.name for c in record.columns]}"
            )
        if not (0 <= sel < len(record.columns)):
            raise ConfigError(f"fit.{role}: index {sel} out of range for {len(record.columns)} columns")
        return sel

    ix = pick(section["x_column"], "x_column")
    iy = pick(section["y_column"], "y_column")
    x = record.data[:, ix]
    y = record.data[:, iy]
    model = get_model(section["model"])
    if section["initial_guess"] is not None:
        guess = np.asarray(section["initial_guess"], dtype=float)
    else:
        guess = estimate_initial_guess(model, x, y)
    result = fit(model, x, y, initial_guess=guess, max_iter=section["max_iter"])
    columns = []
    row = []
    for name, value, err in zip(result.param_names, result.params, result.std_errors):
        columns.append(Column(name, "1"))
        columns.append(Column(f"{name}_err", "1"))
        row.extend([value, err])
    columns += [Column("rss", "1"), Column("converged", "1"), Column("iterations", "1")]
    row += [result.rss, float(result.converged), float(result.iterations)]
    meta = {
        "model": result.model_name,
        "param_names": list(result.param_names),
        "x_column": record.columns[ix].header,
        "y_column": record.columns[iy].header,
        "n_points": result.n_points,
    }
    return tuple(columns), np.asarray([row]), meta


_RUNNERS = {
    "spectrum": _run_spectrum,
    "field-odmr": _run_field_odmr,
    "odmr": _run_odmr,
    "rabi": _run_rabi,
    "t1": _run_t1,
    "echo": _run_echo,
    "dd-scaling": _run_dd_scaling,
    "ac-sense": _run_ac_sense,
    "nmr-correlation": _run_nmr_correlation,
    "deer": _run_deer,
    "deer-rabi": _run_deer_rabi,
    "fit": _run_fit,
}


def run_experiment(config: ExperimentConfig) -> TraceRecord:
    """Execute the configured experiment and assemble its trace record."""
    runner = _RUNNERS[config.experiment]
    columns, data, extra = runner(config)
    metadata = {
        "version": __version__,
        "experiment": config.experiment,
        "seed": config.seed,
        "config": config.sections,
    }
    metadata.update(extra)
    return TraceRecord(columns=columns, data=np.atleast_2d(data), metadata=metadata)
