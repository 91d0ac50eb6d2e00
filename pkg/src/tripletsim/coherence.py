"""Coherence envelopes, dynamical-decoupling scaling, and spin sensing.

Phenomenological decay models live here together with the quasi-static
sensing responses built on top of them: AC-field echo phase accumulation,
nuclear-Larmor correlation spectroscopy, and double-resonance detection
of a dark electron spin.

Conventions: frequencies in Hz (cycles per second, no 2*pi), times in
seconds, fields in Tesla, gyromagnetic ratios in Hz/T. Phase averages and
ensemble averages use deterministic quadrature (midpoint phase grids,
Gauss-Hermite nodes for Gaussian distributions) unless a random mode is
requested explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import InvalidParameterError
from .spin_model import GAMMA_ELECTRON_HZ_PER_T

#: Free-electron Zeeman conversion, Hz/T per unit g-factor.
FREE_ELECTRON_HZ_PER_T = 13.996245e9


def _positive(name: str, value: float) -> None:
    if not (value > 0.0) or not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class EseemParams:
    """Envelope modulation factor a - b*sin^2(pi*frequency*t/2).

    `frequency` is the modulation frequency in Hz; a >= b >= 0 keeps the
    factor nonnegative.
    """

    a: float
    b: float
    frequency: float

    def __post_init__(self) -> None:
        _positive("ESEEM modulation frequency", self.frequency)
        if not (0.0 <= self.b <= self.a) or not math.isfinite(self.a):
            raise InvalidParameterError(
                f"need a >= b >= 0 for a nonnegative envelope, got a={self.a!r}, b={self.b!r}"
            )


@dataclass(frozen=True)
class CoherenceModel:
    """Stretched-exponential coherence decay with optional modulation.

    envelope(t) = exp[-(t/t2)^nu] * (a - b*sin^2(pi*f*t/2))
    """

    t2: float
    nu: float = 1.0
    eseem: EseemParams | None = None

    def __post_init__(self) -> None:
        _positive("T2", self.t2)
        if not (0.0 < self.nu <= 4.0):
            raise InvalidParameterError(f"stretching exponent must lie in (0, 4], got {self.nu!r}")


def echo_envelope(model: CoherenceModel, t: np.ndarray | float) -> np.ndarray:
    """Evaluate the coherence envelope at times t >= 0 (seconds)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise InvalidParameterError("times must be >= 0")
    env = np.exp(-((t / model.t2) ** model.nu))
    if model.eseem is not None:
        mod = model.eseem
        env = env * (mod.a - mod.b * np.sin(np.pi * mod.frequency * t / 2.0) ** 2)
    return env


def eseem_minimum_times(model: CoherenceModel, count: int) -> np.ndarray:
    """Times where the modulation factor reaches its minima.

    The factor a - b*sin^2(pi*f*t/2) is minimal where sin^2 = 1, i.e. at
    t = (2k+1)/f for k = 0, 1, .... (The minima of the full product
    envelope sit slightly later-weighted by the decay; these are the
    analytic modulation minima.)
    """
    if model.eseem is None:
        raise InvalidParameterError("coherence model has no modulation component")
    k = np.arange(int(count))
    return (2.0 * k + 1.0) / model.eseem.frequency


@dataclass(frozen=True)
class DdScalingParams:
    """Coherence-time scaling under N-pulse dynamical decoupling.

    1/T2(N) = 1/(t2_1 * N^nu) + 1/(2*t1_rho): a power-law gain with
    exponent nu that saturates at the rotating-frame limit 2*t1_rho.
    """

    t2_1: float
    nu: float
    t1_rho: float

    def __post_init__(self) -> None:
        _positive("single-echo T2", self.t2_1)
        _positive("T1rho", self.t1_rho)
        if not (0.0 < self.nu <= 4.0):
            raise InvalidParameterError(f"scaling exponent must lie in (0, 4], got {self.nu!r}")


def dd_t2_scaling(params: DdScalingParams, n_pulses: np.ndarray | int) -> np.ndarray:
    """T2(N) in seconds for pulse numbers N >= 1."""
    n = np.asarray(n_pulses, dtype=float)
    if np.any(n < 1):
        raise InvalidParameterError("pulse number must be >= 1")
    return 1.0 / (1.0 / (params.t2_1 * n**params.nu) + 1.0 / (2.0 * params.t1_rho))


@dataclass(frozen=True)
class AcSignal:
    """Sinusoidal test field b(t) = amplitude*cos(2*pi*frequency*t + phase).

    `phase` None means the field phase is unknown shot to shot and is
    averaged over.
    """

    amplitude: float
    frequency: float
    phase: float | None = None

    def __post_init__(self) -> None:
        _positive("AC frequency", self.frequency)
        if self.amplitude < 0.0 or not math.isfinite(self.amplitude):
            raise InvalidParameterError(f"AC amplitude must be >= 0, got {self.amplitude!r}")


def ac_echo_phase(
    ac: AcSignal, tau: np.ndarray | float, phase: float, probe_gamma: float
) -> np.ndarray:
    """Phase picked up across a tau - pi - tau echo under the AC field.

    The two free-evolution halves contribute with opposite sign; for
    b(t) = A*cos(2*pi*f*t + phi) the integral closes to

        Phi = 4*(gamma*A/f) * sin^2(pi*f*tau) * sin(2*pi*f*tau + phi)

    which vanishes for any phi when the echo spans a full AC period
    (2*tau = 1/f) and is extremal at half-period matching.
    """
    tau = np.asarray(tau, dtype=float)
    theta = 2.0 * np.pi * ac.frequency * tau
    amp = 4.0 * probe_gamma * ac.amplitude / ac.frequency
    return amp * np.sin(theta / 2.0) ** 2 * np.sin(theta + phase)


def ac_echo_response(
    ac: AcSignal,
    tau_grid: np.ndarray,
    probe_gamma: float = abs(GAMMA_ELECTRON_HZ_PER_T),
    n_phase_samples: int = 64,
    seed: int | None = None,
) -> np.ndarray:
    """Echo contrast cos(Phi) versus tau, averaged over the AC phase.

    With a fixed signal phase the response is cos(Phi) directly. With
    phase None the average runs over a midpoint phase grid of
    `n_phase_samples` points (deterministic), or over Philox-drawn random
    phases when `seed` is given; both converge to the Bessel-function
    J0(4*gamma*A/f*sin^2(pi*f*tau)) profile whose collapses sit at
    2*tau = (2k+1)/f.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(tau_grid < 0.0):
        raise InvalidParameterError("tau values must be >= 0")
    if ac.phase is not None:
        return np.cos(ac_echo_phase(ac, tau_grid, ac.phase, probe_gamma))
    if n_phase_samples < 1:
        raise InvalidParameterError("need at least one phase sample")
    if seed is None:
        phases = (np.arange(n_phase_samples) + 0.5) * (2.0 * np.pi / n_phase_samples)
    else:
        rng = np.random.Generator(np.random.Philox(seed))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_phase_samples)
    phi = ac_echo_phase(ac, tau_grid[:, None], phases[None, :], probe_gamma)
    return np.cos(phi).mean(axis=1)


def ac_collapse_taus(ac: AcSignal, count: int) -> np.ndarray:
    """Echo times tau where the phase-averaged contrast collapses.

    Collapse minima satisfy 2*tau = (2k+1)/f_AC.
    """
    k = np.arange(int(count))
    return (2.0 * k + 1.0) / (2.0 * ac.frequency)


@dataclass(frozen=True)
class NuclearSpecies:
    """A nuclear species: name and gyromagnetic ratio in Hz/T."""

    name: str
    gamma: float

    def __post_init__(self) -> None:
        _positive("nuclear gamma", abs(self.gamma))


PROTON = NuclearSpecies("proton", 42.58e6)
DEUTERON = NuclearSpecies("deuteron", 6.54e6)


def nmr_frequency(species: NuclearSpecies, b: np.ndarray | float) -> np.ndarray | float:
    """Larmor frequency |gamma_n|*B in Hz."""
    b = np.asarray(b, dtype=float)
    if np.any(b < 0.0):
        raise InvalidParameterError("field magnitude must be >= 0")
    out = abs(species.gamma) * b
    return float(out) if out.ndim == 0 else out


def correlation_spectroscopy(
    species: NuclearSpecies,
    b: float,
    t_corr_grid: np.ndarray,
    tau: float,
    nuclear_t1: float,
    ac_amplitude: float = 1.0e-9,
    probe_gamma: float = abs(GAMMA_ELECTRON_HZ_PER_T),
    n_phase_samples: int = 64,
) -> np.ndarray:
    """Correlation signal of two echo blocks separated by a storage time.

    Each tau - pi - tau block picks up a phase Phi_m*sin(psi) from the
    nuclear-driven field oscillating at the Larmor frequency f_n, with
    Phi_m = 4*gamma*A/f_n*sin^2(pi*f_n*tau) and psi the (uniformly random)
    field phase at the block. During the storage interval the field phase
    advances by 2*pi*f_n*t_corr, so the phase-averaged product of the two
    sine projections

        S(t_corr) = <sin(Phi_m sin psi) * sin(Phi_m sin(psi + 2 pi f_n t_corr))>_psi

    oscillates at exactly f_n. Storage relaxation multiplies on an
    exp(-t_corr/nuclear_t1) decay, i.e. a Lorentzian spectral linewidth
    of 1/(pi*nuclear_t1) FWHM.
    """
    _positive("nuclear T1", nuclear_t1)
    _positive("echo half-time tau", tau)
    t_corr_grid = np.asarray(t_corr_grid, dtype=float)
    if np.any(t_corr_grid < 0.0):
        raise InvalidParameterError("storage times must be >= 0")
    f_n = nmr_frequency(species, b)
    if f_n <= 0.0:
        raise InvalidParameterError("correlation spectroscopy needs a nonzero field")
    phi_m = 4.0 * probe_gamma * ac_amplitude / f_n * math.sin(math.pi * f_n * tau) ** 2
    psi = (np.arange(n_phase_samples) + 0.5) * (2.0 * np.pi / n_phase_samples)
    advance = 2.0 * np.pi * f_n * t_corr_grid
    first = np.sin(phi_m * np.sin(psi))[None, :]
    second = np.sin(phi_m * np.sin(psi[None, :] + advance[:, None]))
    signal = (first * second).mean(axis=1)
    return signal * np.exp(-t_corr_grid / nuclear_t1)


@dataclass(frozen=True)
class CouplingDistribution:
    """Gaussian distribution of probe-dark dipolar couplings, in Hz."""

    mean: float
    spread: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean):
            raise InvalidParameterError(f"coupling mean must be finite, got {self.mean!r}")
        if self.spread < 0.0 or not math.isfinite(self.spread):
            raise InvalidParameterError(f"coupling spread must be >= 0, got {self.spread!r}")


@dataclass(frozen=True)
class DarkSpin:
    """An optically dark electron spin addressed by a second drive tone.

    `linewidth` is the half-width at half-maximum of its resonance in Hz,
    also used as the detuning spread when driving it coherently.
    """

    g_factor: float
    coupling: CouplingDistribution
    linewidth: float = 2.0e6

    def __post_init__(self) -> None:
        _positive("g-factor", self.g_factor)
        _positive("dark-spin linewidth", self.linewidth)

    def resonance(self, b: float) -> float:
        """Dark-spin resonance frequency g*mu_B/h*B in Hz."""
        return self.g_factor * FREE_ELECTRON_HZ_PER_T * b


def _gauss_nodes(mean: float, sigma: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and weights for a N(mean, sigma^2) average."""
    if sigma == 0.0 or n == 1:
        return np.array([mean]), np.array([1.0])
    x, w = hermgauss(n)
    return mean + math.sqrt(2.0) * sigma * x, w / math.sqrt(math.pi)


def _coupling_deficit(coupling: CouplingDistribution, t_fix: float, n_samples: int) -> float:
    """Ensemble average of (1 - cos(2*pi*d*t_fix))/2 over the couplings."""
    d, w = _gauss_nodes(coupling.mean, coupling.spread, n_samples)
    return float(np.sum(w * (1.0 - np.cos(2.0 * np.pi * d * t_fix)) / 2.0))


def deer_spectrum(
    dark: DarkSpin,
    b: float,
    f2_grid: np.ndarray,
    t_fix: float = 500.0e-9,
    coupling_samples: int = 129,
) -> np.ndarray:
    """Echo contrast versus second-tone frequency at fixed echo time.

    Flipping the dark spin mid-echo converts the dipolar coupling d into
    an unrefocused phase 2*pi*d*t_fix, averaging to a contrast deficit
    <(1 - cos(2*pi*d*t_fix))/2> over the coupling distribution. The flip
    probability follows a Lorentzian resonance profile of HWHM
    `dark.linewidth` centered at g*mu_B/h*B, so the trace is a single dip
    whose center moves linearly with field.
    """
    _positive("fixed echo time", t_fix)
    f2_grid = np.asarray(f2_grid, dtype=float)
    deficit = _coupling_deficit(dark.coupling, t_fix, coupling_samples)
    x = (f2_grid - dark.resonance(b)) / dark.linewidth
    return 1.0 - deficit / (1.0 + x**2)


def deer_rabi(
    dark: DarkSpin,
    drive_rabi: float,
    durations: np.ndarray,
    detuning: float = 0.0,
    t_fix: float = 500.0e-9,
    coupling_samples: int = 129,
    detuning_samples: int = 65,
) -> np.ndarray:
    """Echo contrast versus second-tone pulse duration (dark-spin Rabi).

    The dark spin nutates at the generalized Rabi frequency
    sqrt(drive_rabi^2 + delta^2), with delta averaged over a Gaussian
    detuning ensemble of spread `dark.linewidth` around `detuning`. The
    observed contrast is 1 - deficit * <flip probability>.
    drive_rabi = 0 leaves the trace flat at 1.
    """
    if drive_rabi < 0.0 or not math.isfinite(drive_rabi):
        raise InvalidParameterError(f"drive Rabi frequency must be >= 0, got {drive_rabi!r}")
    durations = np.asarray(durations, dtype=float)
    if np.any(durations < 0.0):
        raise InvalidParameterError("durations must be >= 0")
    if drive_rabi == 0.0:
        return np.ones_like(durations)
    deficit = _coupling_deficit(dark.coupling, t_fix, coupling_samples)
    delta, w = _gauss_nodes(detuning, dark.linewidth, detuning_samples)
    omega_g = np.hypot(drive_rabi, delta)
    weight = w * (drive_rabi / omega_g) ** 2
    flip = weight[None, :] * np.sin(np.pi * omega_g[None, :] * durations[:, None]) ** 2
    return 1.0 - deficit * flip.sum(axis=1)
