"""Hybrid classical/quantum pulse-sequence engine for the triplet qubit.

The state is classical populations for (S0, S1) plus a 3x3 density matrix
for the triplet manifold, expressed in the eigenbasis of the static
Hamiltonian and tracked in its interaction picture. Free evolution
(laser, wait, readout) propagates the five diagonal occupations through
the photokinetic rate model while off-diagonal triplet elements damp at
the mean of the connected decay rates; microwave pulses are detuned
rotating-wave rotations embedded in the addressed two-level subspace.

Rotations on different transitions of the same three-level system are
applied sequentially; this is accurate when at most one transition is
near-resonant (the spectator rotations are suppressed by Omega^2/Delta^2),
which holds for the MHz-scale drives and GHz-scale splittings this engine
is meant for. A warning is emitted when a drive amplitude is large enough
to strain the rotating-wave approximation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .coherence import CoherenceModel, echo_envelope
from .errors import (
    DegenerateReadoutError,
    InvalidParameterError,
    ProtocolViolationError,
)
from .photokinetics import (
    KineticRates,
    LevelPopulations,
    ReadoutWindow,
    _propagator,
    _propagator_with_emission,
    evolve_populations,
    readout_contrast,
)
from .spin_model import (
    TRANSITION_PAIRS,
    FieldVector,
    GyroRatio,
    SweepSpectrum,
    TripletEigensystem,
    ZfsParams,
    build_hamiltonian,
    eigensystem,
    field_sweep_spectrum,
)

_LABEL_INDEX = {"x": 0, "y": 1, "z": 2}


def _check_duration(duration: float) -> None:
    if duration < 0.0 or not math.isfinite(duration):
        raise InvalidParameterError(f"duration must be >= 0, got {duration!r}")


@dataclass(frozen=True)
class LaserPulse:
    """Illumination interval: duration in seconds, relative intensity."""

    duration: float
    intensity: float = 1.0

    def __post_init__(self) -> None:
        _check_duration(self.duration)
        if self.intensity < 0.0:
            raise InvalidParameterError(f"intensity must be >= 0, got {self.intensity!r}")


@dataclass(frozen=True)
class Wait:
    """Dark free evolution for `duration` seconds."""

    duration: float

    def __post_init__(self) -> None:
        _check_duration(self.duration)


@dataclass(frozen=True)
class ReadoutPulse:
    """Illumination window whose integrated emission is recorded."""

    duration: float = 1.0e-6
    intensity: float = 1.0

    def __post_init__(self) -> None:
        _check_duration(self.duration)
        if self.intensity < 0.0:
            raise InvalidParameterError(f"intensity must be >= 0, got {self.intensity!r}")


@dataclass(frozen=True)
class MwPulse:
    """Resonantly driven rotation on one triplet transition.

    Either `transition` names the addressed pair (with an explicit
    `detuning` from its resonance, Hz) or `frequency` gives the carrier
    in Hz and the engine works out the detuning per transition, applying
    the drive to all three pairs. `rabi_freq` is the on-resonance Rabi
    frequency in Hz, `phase` the drive phase in radians.
    """

    rabi_freq: float
    duration: float
    transition: tuple[str, str] | None = None
    phase: float = 0.0
    detuning: float = 0.0
    frequency: float | None = None

    def __post_init__(self) -> None:
        _check_duration(self.duration)
        if self.rabi_freq < 0.0 or not math.isfinite(self.rabi_freq):
            raise InvalidParameterError(f"Rabi frequency must be >= 0, got {self.rabi_freq!r}")
        if self.transition is None and self.frequency is None:
            raise InvalidParameterError("MwPulse needs a transition pair or a carrier frequency")
        if self.transition is not None:
            pair = tuple(sorted(self.transition))
            if pair not in TRANSITION_PAIRS:
                raise InvalidParameterError(
                    f"transition must be one of {TRANSITION_PAIRS}, got {self.transition!r}"
                )
        if self.frequency is not None and self.frequency <= 0.0:
            raise InvalidParameterError(f"carrier frequency must be > 0, got {self.frequency!r}")


PulseElement = LaserPulse | Wait | ReadoutPulse | MwPulse


def pi_pulse(transition: tuple[str, str], rabi_freq: float, phase: float = 0.0) -> MwPulse:
    """Resonant pi pulse: duration 1/(2*rabi_freq)."""
    if rabi_freq <= 0.0:
        raise InvalidParameterError("pi pulse needs rabi_freq > 0")
    return MwPulse(rabi_freq=rabi_freq, duration=0.5 / rabi_freq, transition=transition, phase=phase)


def half_pi_pulse(transition: tuple[str, str], rabi_freq: float, phase: float = 0.0) -> MwPulse:
    """Resonant pi/2 pulse: duration 1/(4*rabi_freq)."""
    if rabi_freq <= 0.0:
        raise InvalidParameterError("pi/2 pulse needs rabi_freq > 0")
    return MwPulse(rabi_freq=rabi_freq, duration=0.25 / rabi_freq, transition=transition, phase=phase)


@dataclass(frozen=True)
class PulseSequence:
    """An ordered pulse program ending in (at least) one readout.

    `signal_readout` indexes which readout window carries the signal
    (default: the last). `reference_readout` may name a second window for
    in-sequence normalization; when None, the reference is the identical
    sequence rerun with every microwave amplitude set to zero.
    """

    elements: tuple[PulseElement, ...]
    repetitions: int = 1
    signal_readout: int = -1
    reference_readout: int | None = None

    def __post_init__(self) -> None:
        if not self.elements:
            raise ProtocolViolationError("pulse sequence has no elements")
        if self.repetitions < 1:
            raise ProtocolViolationError(f"repetitions must be >= 1, got {self.repetitions!r}")
        n_read = sum(isinstance(e, ReadoutPulse) for e in self.elements) * self.repetitions
        if n_read == 0:
            raise ProtocolViolationError("pulse sequence must contain a readout window")
        for idx in (self.signal_readout, self.reference_readout):
            if idx is not None and not (-n_read <= idx < n_read):
                raise ProtocolViolationError(
                    f"readout index {idx} out of range for {n_read} readout window(s)"
                )


@dataclass
class HybridState:
    """Classical (S0, S1) occupations plus the triplet density matrix.

    `rho` is written in the labeled eigenbasis, rows/columns ordered
    (x, y, z); its trace is the total triplet population. `wait_clock`
    accumulates dark free-evolution time for the (non-Markovian)
    phenomenological dephasing envelope, making sequence composition
    exact.
    """

    p_s0: float
    p_s1: float
    rho: np.ndarray
    wait_clock: float = 0.0

    @classmethod
    def ground(cls) -> "HybridState":
        return cls(p_s0=1.0, p_s1=0.0, rho=np.zeros((3, 3), dtype=complex))

    @classmethod
    def from_populations(cls, pops: LevelPopulations) -> "HybridState":
        return cls(p_s0=pops.p_s0, p_s1=pops.p_s1, rho=np.diag(pops.triplet).astype(complex))

    def populations(self) -> LevelPopulations:
        d = np.real(np.diag(self.rho))
        return LevelPopulations(self.p_s0, self.p_s1, float(d[0]), float(d[1]), float(d[2]))

    def total(self) -> float:
        return self.p_s0 + self.p_s1 + float(np.real(np.trace(self.rho)))

    def validate(self) -> None:
        if self.rho.shape != (3, 3):
            raise InvalidParameterError(f"rho must be 3x3, got {self.rho.shape}")
        if float(np.max(np.abs(self.rho - self.rho.conj().T))) > 1e-10:
            raise InvalidParameterError("triplet density matrix is not Hermitian within 1e-10")
        if float(np.min(np.linalg.eigvalsh(self.rho))) < -1e-10:
            raise InvalidParameterError("triplet density matrix has a negative eigenvalue")
        if self.p_s0 < -1e-10 or self.p_s1 < -1e-10:
            raise InvalidParameterError("singlet populations must be nonnegative")
        if abs(self.total() - 1.0) > 1e-9:
            raise InvalidParameterError(f"total population must be 1 within 1e-9, got {self.total()!r}")

    def copy(self) -> "HybridState":
        return HybridState(self.p_s0, self.p_s1, self.rho.copy(), self.wait_clock)


@dataclass(frozen=True)
class QubitSystem:
    """Static description the engine runs against.

    The kinetic rates are given in the zero-field sublevel basis; at
    nonzero field they are mixed into the eigenbasis with the squared
    eigenvector overlaps (lifetimes as decay rates, branching as feeding
    fractions).
    """

    zfs: ZfsParams
    rates: KineticRates
    field: FieldVector = FieldVector()
    gamma: GyroRatio = GyroRatio()
    wait_dephasing: CoherenceModel | None = None

    @cached_property
    def eigen(self) -> TripletEigensystem:
        return eigensystem(build_hamiltonian(self.zfs, self.field, self.gamma))

    @cached_property
    def transitions(self) -> dict[tuple[str, str], float]:
        eig = self.eigen
        by_label = {lab: float(eig.energies[k]) for k, lab in enumerate(eig.labels)}
        return {(a, b): abs(by_label[a] - by_label[b]) for a, b in TRANSITION_PAIRS}

    @cached_property
    def effective_rates(self) -> KineticRates:
        """Sublevel kinetics mixed into the labeled eigenbasis."""
        eig = self.eigen
        tau0 = np.asarray(self.rates.triplet_lifetimes)
        b0 = np.asarray(self.rates.isc_branching)
        lifetimes = []
        branching = []
        for label in ("x", "y", "z"):
            w = np.abs(eig.state_of(label)) ** 2
            lifetimes.append(1.0 / float(np.sum(w / tau0)))
            branching.append(float(np.sum(w * b0)))
        total = sum(branching)
        branching = tuple(b / total for b in branching)
        return replace(
            self.rates,
            triplet_lifetimes=tuple(lifetimes),
            isc_branching=branching,
        )

    @cached_property
    def decay_rates(self) -> np.ndarray:
        """Per-label triplet decay rates 1/tau, ordered (x, y, z)."""
        return 1.0 / np.asarray(self.effective_rates.triplet_lifetimes)


def mw_unitary(
    transition: tuple[str, str],
    rabi_freq: float,
    duration: float,
    phase: float = 0.0,
    detuning: float = 0.0,
) -> np.ndarray:
    """3x3 rotation with the driven two-level block U = expm(-i*2*pi*H2*t).

    H2 = 0.5*[[-detuning, rabi*exp(-i*phase)], [rabi*exp(i*phase), detuning]]
    in Hz, acting on the (lower, upper) labels of `transition`.
    """
    i, j = sorted(_LABEL_INDEX[t] for t in transition)
    h2 = 0.5 * np.array(
        [
            [-detuning, rabi_freq * np.exp(-1j * phase)],
            [rabi_freq * np.exp(1j * phase), detuning],
        ],
        dtype=complex,
    )
    u2 = expm(-2j * np.pi * h2 * duration)
    u = np.eye(3, dtype=complex)
    u[i, i], u[i, j] = u2[0, 0], u2[0, 1]
    u[j, i], u[j, j] = u2[1, 0], u2[1, 1]
    return u


def apply_mw_rotation(
    rho: np.ndarray,
    transition: tuple[str, str],
    rabi_freq: float,
    duration: float,
    phase: float = 0.0,
    detuning: float = 0.0,
) -> np.ndarray:
    """Conjugate the triplet density matrix with a two-level rotation."""
    u = mw_unitary(transition, rabi_freq, duration, phase, detuning)
    return u @ rho @ u.conj().T


def _rwa_check(rabi_freq: float, transition_freq: float) -> None:
    if transition_freq > 0.0 and rabi_freq > 0.1 * transition_freq:
        warnings.warn(
            f"Rabi frequency {rabi_freq:.3g} Hz exceeds 10% of the "
            f"{transition_freq:.3g} Hz transition; rotating-wave treatment is strained",
            stacklevel=3,
        )


def _apply_mw(state: HybridState, pulse: MwPulse, system: QubitSystem) -> None:
    if pulse.rabi_freq == 0.0 or pulse.duration == 0.0:
        return
    if pulse.frequency is not None:
        # swept-carrier mode: every pair sees the drive at its own detuning
        for pair in TRANSITION_PAIRS:
            f0 = system.transitions[pair]
            _rwa_check(pulse.rabi_freq, f0)
            state.rho = apply_mw_rotation(
                state.rho, pair, pulse.rabi_freq, pulse.duration, pulse.phase,
                detuning=pulse.frequency - f0,
            )
        return
    pair = tuple(sorted(pulse.transition))
    _rwa_check(pulse.rabi_freq, system.transitions[pair])
    state.rho = apply_mw_rotation(
        state.rho, pair, pulse.rabi_freq, pulse.duration, pulse.phase, pulse.detuning
    )


def _wait_dephasing_factor(system: QubitSystem, clock: float, duration: float) -> float:
    if system.wait_dephasing is None:
        return 1.0
    model = CoherenceModel(t2=system.wait_dephasing.t2, nu=system.wait_dephasing.nu)
    start = float(echo_envelope(model, clock))
    stop = float(echo_envelope(model, clock + duration))
    return stop / start if start > 0.0 else 0.0


def _evolve_free(
    state: HybridState,
    system: QubitSystem,
    duration: float,
    laser_on: bool,
    intensity: float,
    collect_emission: bool,
    is_wait: bool,
) -> float:
    """Advance the state through an illumination or dark interval.

    Returns the integrated S1 occupancy over the interval (zero unless
    `collect_emission`). Populations follow the five-level rate model;
    triplet coherences damp at the pairwise mean decay rate, plus the
    phenomenological dephasing envelope during waits.
    """
    if duration == 0.0:
        return 0.0
    rates = system.effective_rates
    pops = state.populations().as_array()
    if collect_emission:
        prop = _propagator_with_emission(rates, duration, laser_on, intensity)
        out = prop @ np.append(pops, 0.0)
        new_pops, emission = out[:5], float(out[5])
    else:
        prop = _propagator(rates, duration, laser_on, intensity)
        new_pops, emission = prop @ pops, 0.0
    g = system.decay_rates
    rho = state.rho.copy()
    for a in range(3):
        for b in range(a + 1, 3):
            damp = math.exp(-0.5 * (g[a] + g[b]) * duration)
            rho[a, b] *= damp
            rho[b, a] *= damp
    if is_wait:
        factor = _wait_dephasing_factor(system, state.wait_clock, duration)
        mask = ~np.eye(3, dtype=bool)
        rho[mask] *= factor
        state.wait_clock += duration
    for a in range(3):
        rho[a, a] = new_pops[2 + a]
    state.p_s0 = float(new_pops[0])
    state.p_s1 = float(new_pops[1])
    state.rho = rho
    return emission


def apply_elements(
    elements: tuple[PulseElement, ...] | list[PulseElement],
    system: QubitSystem,
    state: HybridState | None = None,
) -> tuple[HybridState, list[float]]:
    """Run elements in order from `state` (ground by default).

    Returns the final state and the list of integrated readout emissions,
    one entry per ReadoutPulse encountered.
    """
    out = state.copy() if state is not None else HybridState.ground()
    emissions: list[float] = []
    for element in elements:
        if isinstance(element, LaserPulse):
            _evolve_free(out, system, element.duration, True, element.intensity, False, False)
        elif isinstance(element, Wait):
            _evolve_free(out, system, element.duration, False, 1.0, False, True)
        elif isinstance(element, ReadoutPulse):
            emissions.append(
                _evolve_free(out, system, element.duration, True, element.intensity, True, False)
            )
        elif isinstance(element, MwPulse):
            _apply_mw(out, element, system)
        else:
            raise ProtocolViolationError(f"unknown sequence element {element!r}")
    return out, emissions


def _mw_silenced(elements: tuple[PulseElement, ...]) -> tuple[PulseElement, ...]:
    """The same timing with every microwave amplitude set to zero."""
    return tuple(
        replace(e, rabi_freq=0.0) if isinstance(e, MwPulse) else e for e in elements
    )


@dataclass(frozen=True)
class SequenceResult:
    """Outcome of a pulse sequence run.

    `signal` is the contrast: the selected readout emission divided by
    its reference (in-sequence window or microwave-silenced rerun).
    """

    signal: float
    readouts: tuple[float, ...]
    reference_readouts: tuple[float, ...]
    final_state: HybridState


def run_sequence(
    sequence: PulseSequence,
    system: QubitSystem,
    initial_state: HybridState | None = None,
) -> SequenceResult:
    """Execute a pulse sequence and form its readout contrast."""
    elements = sequence.elements * sequence.repetitions
    final_state, emissions = apply_elements(elements, system, initial_state)
    final_state.validate()
    signal_emission = emissions[sequence.signal_readout]
    if sequence.reference_readout is not None:
        reference = emissions[sequence.reference_readout]
        reference_readouts = tuple(emissions)
    else:
        _, ref_emissions = apply_elements(_mw_silenced(elements), system, initial_state)
        reference = ref_emissions[sequence.signal_readout]
        reference_readouts = tuple(ref_emissions)
    if reference <= 0.0:
        raise DegenerateReadoutError(
            "reference emission vanished; check readout windows and pump rate"
        )
    return SequenceResult(
        signal=signal_emission / reference,
        readouts=tuple(emissions),
        reference_readouts=reference_readouts,
        final_state=final_state,
    )


# --- canned experiment protocols --------------------------------------------

#: Laser initialization time used by the canned protocols, seconds.
DEFAULT_INIT_DURATION = 15.0e-6


def default_readout_delay(system: QubitSystem) -> float:
    """Relaxation delay before readout: three Ty lifetimes."""
    return 3.0 * system.rates.triplet_lifetimes[1]


def simulate_rabi(
    rabi_freq: float,
    durations: np.ndarray,
    t2_star: float = math.inf,
    detuning: float = 0.0,
    ensemble_size: int = 201,
) -> np.ndarray:
    """Driven population transfer versus pulse duration.

    The two-level transfer probability is averaged over a Gaussian
    quasi-static detuning ensemble of width sigma = sqrt(2)/(2*pi*T2*)
    (the width whose free-induction decay is exp[-(t/T2*)^2]), and the
    oscillating part carries the matching inhomogeneous envelope
    exp[-(t/T2*)^2]. t2_star=inf gives the undamped on-resonance
    oscillation sin^2(pi*rabi*t).
    """
    if rabi_freq <= 0.0 or not math.isfinite(rabi_freq):
        raise InvalidParameterError(f"Rabi frequency must be > 0, got {rabi_freq!r}")
    durations = np.asarray(durations, dtype=float)
    if np.any(durations < 0.0):
        raise InvalidParameterError("durations must be >= 0")
    if math.isinf(t2_star):
        sigma = 0.0
        envelope = np.ones_like(durations)
    else:
        if t2_star <= 0.0:
            raise InvalidParameterError(f"T2* must be > 0, got {t2_star!r}")
        sigma = math.sqrt(2.0) / (2.0 * math.pi * t2_star)
        envelope = np.exp(-((durations / t2_star) ** 2))
    if sigma == 0.0 or ensemble_size == 1:
        deltas, weights = np.array([detuning]), np.array([1.0])
    else:
        xk, wk = np.polynomial.hermite.hermgauss(ensemble_size)
        deltas = detuning + math.sqrt(2.0) * sigma * xk
        weights = wk / math.sqrt(math.pi)
    omega_g = np.hypot(rabi_freq, deltas)
    amp = weights * (rabi_freq / omega_g) ** 2
    osc = np.cos(2.0 * np.pi * omega_g[None, :] * durations[:, None]) * envelope[:, None]
    return 0.5 * np.sum(amp[None, :] * (1.0 - osc), axis=1)


def simulate_pulsed_odmr(
    system: QubitSystem,
    f_grid: np.ndarray,
    rabi_freq: float = 5.0e6,
    multilevel: bool = False,
    prep_pair: tuple[str, str] = ("y", "z"),
    init_duration: float = DEFAULT_INIT_DURATION,
    readout_delay: float | None = None,
    readout: ReadoutPulse = ReadoutPulse(),
) -> np.ndarray:
    """Frequency-swept pulsed ODMR contrast at fixed static field.

    Protocol: laser initialization into the polarized triplet, a probe pi
    pulse swept in carrier frequency, a dark relaxation delay, and a
    short readout window, normalized by the microwave-silenced rerun.
    The multilevel variant swaps the prep pair's populations before the
    probe and swaps them back after, which converts an otherwise
    low-contrast line into a strong one while leaving off-resonant
    carriers with exactly cancelling pulses.
    """
    if rabi_freq <= 0.0:
        raise InvalidParameterError("probe needs rabi_freq > 0")
    f_grid = np.asarray(f_grid, dtype=float)
    delay = default_readout_delay(system) if readout_delay is None else readout_delay
    prep = pi_pulse(tuple(sorted(prep_pair)), rabi_freq)
    contrast = np.empty(f_grid.shape)
    reference: float | None = None
    for n, f in enumerate(f_grid):
        probe = MwPulse(rabi_freq=rabi_freq, duration=0.5 / rabi_freq, frequency=float(f))
        elements: list[PulseElement] = [LaserPulse(init_duration)]
        if multilevel:
            elements.append(prep)
        elements.append(probe)
        if multilevel:
            elements.append(prep)
        elements += [Wait(delay), readout]
        _, emissions = apply_elements(elements, system)
        if reference is None:
            _, ref_emissions = apply_elements(_mw_silenced(tuple(elements)), system)
            reference = ref_emissions[-1]
            if reference <= 0.0:
                raise DegenerateReadoutError("reference emission vanished in ODMR protocol")
        contrast[n] = emissions[-1] / reference
    return contrast


@dataclass(frozen=True)
class FieldOdmrMap:
    """Contrast map over (field, frequency) with the tracked line centers."""

    field: np.ndarray
    frequency: np.ndarray
    contrast: np.ndarray
    spectrum: SweepSpectrum


def simulate_field_odmr(
    zfs: ZfsParams,
    rates: KineticRates,
    axis: str,
    b_values: np.ndarray,
    f_grid: np.ndarray,
    gamma: GyroRatio = GyroRatio(),
    linewidth: float = 20.0e6,
    init_duration: float = DEFAULT_INIT_DURATION,
    readout_delay: float | None = None,
    readout: ReadoutWindow = ReadoutWindow(),
) -> FieldOdmrMap:
    """ODMR contrast map versus field magnitude along one molecular axis.

    Line positions come from the eigenvector-tracked transition branches.
    Line amplitudes use an incoherent swap protocol: at each field the
    sublevel kinetics are mixed into the eigenbasis, the system is
    initialized by a laser pulse, the addressed pair's populations are
    swapped (ideal pi pulse), and the readout contrast against the
    unswapped state after the relaxation delay gives the line's contrast
    amplitude. Each line is painted with a unit-peak Lorentzian of HWHM
    `linewidth`; amplitudes from the three lines add.
    """
    b_values = np.atleast_1d(np.asarray(b_values, dtype=float))
    f_grid = np.asarray(f_grid, dtype=float)
    if linewidth <= 0.0:
        raise InvalidParameterError(f"linewidth must be > 0, got {linewidth!r}")
    spectrum = field_sweep_spectrum(zfs, axis, b_values, gamma)
    contrast = np.ones((b_values.size, f_grid.size))
    for n, b in enumerate(b_values):
        system = QubitSystem(zfs=zfs, rates=rates, field=FieldVector.along(axis, b), gamma=gamma)
        eff = system.effective_rates
        delay = 3.0 * rates.triplet_lifetimes[1] if readout_delay is None else readout_delay
        init = evolve_populations(eff, LevelPopulations.ground(), init_duration, True)
        rested = evolve_populations(eff, init, delay, False)
        for pair in TRANSITION_PAIRS:
            i, j = (_LABEL_INDEX[t] for t in pair)
            arr = init.as_array().copy()
            arr[2 + i], arr[2 + j] = arr[2 + j], arr[2 + i]
            swapped = evolve_populations(eff, LevelPopulations.from_array(arr), delay, False)
            amplitude = readout_contrast(eff, swapped, rested, readout) - 1.0
            x = (f_grid - spectrum.branches[pair][n]) / linewidth
            contrast[n] += amplitude / (1.0 + x**2)
    return FieldOdmrMap(field=b_values, frequency=f_grid, contrast=contrast, spectrum=spectrum)


def hahn_echo_elements(
    transition: tuple[str, str], tau: float, rabi_freq: float
) -> list[PulseElement]:
    """pi/2 - tau - pi - tau - pi/2 echo block on one transition."""
    return [
        half_pi_pulse(transition, rabi_freq),
        Wait(tau),
        pi_pulse(transition, rabi_freq, phase=np.pi / 2.0),
        Wait(tau),
        half_pi_pulse(transition, rabi_freq),
    ]


_XY8_PHASES = (0.0, np.pi / 2.0, 0.0, np.pi / 2.0, np.pi / 2.0, 0.0, np.pi / 2.0, 0.0)


def xy8_elements(
    transition: tuple[str, str], tau: float, rabi_freq: float, blocks: int = 1
) -> list[PulseElement]:
    """XY8-N decoupling train with inter-pulse spacing tau, pi/2 bookends."""
    if blocks < 1:
        raise InvalidParameterError(f"blocks must be >= 1, got {blocks!r}")
    elements: list[PulseElement] = [half_pi_pulse(transition, rabi_freq)]
    for n in range(blocks):
        for k, phase in enumerate(_XY8_PHASES):
            first = n == 0 and k == 0
            elements.append(Wait(tau / 2.0 if first else tau))
            elements.append(pi_pulse(transition, rabi_freq, phase=phase))
        last_block = n == blocks - 1
        if last_block:
            elements.append(Wait(tau / 2.0))
    elements.append(half_pi_pulse(transition, rabi_freq))
    return elements


def simulate_shelf_and_probe(
    system: QubitSystem,
    inner: list[PulseElement] | tuple[PulseElement, ...],
    rabi_freq: float = 5.0e6,
    probe_pair: tuple[str, str] = ("x", "z"),
    shelf_pair: tuple[str, str] = ("y", "z"),
    readout_branch: str = "z",
    init_duration: float = DEFAULT_INIT_DURATION,
    readout_delay: float | None = None,
    readout: ReadoutPulse = ReadoutPulse(),
) -> SequenceResult:
    """Multi-level sequence: shelf, manipulate long-lived pair, map back.

    A preparatory pi pulse on `shelf_pair` moves population between the
    short-lived Ty and a long-lived partner; the `inner` block may then
    address only the long-lived `probe_pair` (microwave pulses on any
    other pair, or optical elements, raise ProtocolViolationError); a
    final pi pulse maps the `readout_branch` population back onto Ty for
    high-contrast readout after the relaxation delay.
    """
    probe_pair = tuple(sorted(probe_pair))
    for element in inner:
        if isinstance(element, MwPulse):
            if element.frequency is not None or tuple(sorted(element.transition)) != probe_pair:
                raise ProtocolViolationError(
                    f"inner block may only drive the {probe_pair} transition, got {element!r}"
                )
        elif isinstance(element, (LaserPulse, ReadoutPulse)):
            raise ProtocolViolationError(
                "inner block must stay in the dark (no laser or readout elements)"
            )
        elif not isinstance(element, Wait):
            raise ProtocolViolationError(f"unknown inner element {element!r}")
    if readout_branch not in ("x", "z"):
        raise InvalidParameterError(f"readout branch must be 'x' or 'z', got {readout_branch!r}")
    delay = default_readout_delay(system) if readout_delay is None else readout_delay
    elements: tuple[PulseElement, ...] = (
        LaserPulse(init_duration),
        pi_pulse(tuple(sorted(shelf_pair)), rabi_freq),
        *inner,
        pi_pulse(tuple(sorted((readout_branch, "y"))), rabi_freq),
        Wait(delay),
        readout,
    )
    return run_sequence(PulseSequence(elements=elements), system)
