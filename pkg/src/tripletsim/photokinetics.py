"""Five-level optical pumping and triplet decay kinetics.

The level set is (S0, S1, Tx, Ty, Tz), evolving under a linear rate
equation dp/dt = M p. The generator M collects optical pumping S0 -> S1,
S1 decay split between fluorescence back to S0 and intersystem crossing
into the three triplet sublevels with fixed branching, and sublevel-
selective triplet decay back to S0. Columns of M sum to zero, which is
asserted when the matrix is built.

Rates are 1/s throughout. Populations are occupation probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateReadoutError, InvalidParameterError

#: Level ordering used by every array in this module.
LEVELS = ("s0", "s1", "tx", "ty", "tz")

_S1 = LEVELS.index("s1")

#: Default S1 decay rate, 1/s.
DEFAULT_S1_DECAY_RATE = 1.0e8
#: Default intersystem-crossing yield per S1 decay.
DEFAULT_ISC_YIELD = 2.0e-3
#: Default saturating pump rate, 1/s. With the defaults above the net
#: optical shelving time into the triplet is ~10 us.
DEFAULT_PUMP_RATE = 1.0e8


def _check_unit_interval(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or not math.isfinite(value):
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class KineticRates:
    """Rate parameters of the five-level model.

    Attributes
    ----------
    triplet_lifetimes : tuple of float
        (tau_x, tau_y, tau_z) in seconds, each > 0.
    isc_branching : tuple of float
        ISC branching fractions into (Tx, Ty, Tz); nonnegative, sum 1.
    pump_rate : float
        S0 -> S1 rate under unit illumination intensity, 1/s, >= 0.
    s1_decay_rate : float
        Total S1 decay rate, 1/s, > 0.
    isc_yield : float
        Fraction of S1 decays that cross into the triplet, in [0, 1].
    """

    triplet_lifetimes: tuple[float, float, float]
    isc_branching: tuple[float, float, float]
    pump_rate: float = DEFAULT_PUMP_RATE
    s1_decay_rate: float = DEFAULT_S1_DECAY_RATE
    isc_yield: float = DEFAULT_ISC_YIELD

    def __post_init__(self) -> None:
        if len(self.triplet_lifetimes) != 3 or len(self.isc_branching) != 3:
            raise InvalidParameterError("need exactly three triplet sublevels")
        for tau in self.triplet_lifetimes:
            if not (tau > 0.0) or not math.isfinite(tau):
                raise InvalidParameterError(f"triplet lifetime must be > 0, got {tau!r}")
        for b in self.isc_branching:
            _check_unit_interval("ISC branching fraction", b)
        total = sum(self.isc_branching)
        if abs(total - 1.0) > 1e-9:
            raise InvalidParameterError(
                f"ISC branching must sum to 1 within 1e-9, got {total!r}"
            )
        if self.pump_rate < 0.0 or not math.isfinite(self.pump_rate):
            raise InvalidParameterError(f"pump rate must be >= 0, got {self.pump_rate!r}")
        if not (self.s1_decay_rate > 0.0) or not math.isfinite(self.s1_decay_rate):
            raise InvalidParameterError(
                f"S1 decay rate must be > 0, got {self.s1_decay_rate!r}"
            )
        _check_unit_interval("ISC yield", self.isc_yield)

    @classmethod
    def from_steady_state(
        cls,
        populations: tuple[float, float, float],
        lifetimes: tuple[float, float, float],
        pump_rate: float = DEFAULT_PUMP_RATE,
        s1_decay_rate: float = DEFAULT_S1_DECAY_RATE,
        isc_yield: float = DEFAULT_ISC_YIELD,
    ) -> "KineticRates":
        """Build rates that reproduce given steady-state triplet fractions.

        `populations` are relative steady-state triplet populations under
        continuous illumination (any normalization); `lifetimes` in seconds.
        """
        branching = isc_branching_from_steady_state(populations, lifetimes)
        return cls(
            triplet_lifetimes=tuple(float(t) for t in lifetimes),
            isc_branching=branching,
            pump_rate=pump_rate,
            s1_decay_rate=s1_decay_rate,
            isc_yield=isc_yield,
        )


@dataclass(frozen=True)
class LevelPopulations:
    """Populations of (S0, S1, Tx, Ty, Tz); each in [0, 1], sum 1."""

    p_s0: float
    p_s1: float
    p_tx: float
    p_ty: float
    p_tz: float

    def __post_init__(self) -> None:
        vals = self.as_array()
        if np.any(vals < -1e-9) or np.any(vals > 1.0 + 1e-9):
            raise InvalidParameterError(f"populations must lie in [0, 1], got {vals}")
        total = float(vals.sum())
        if abs(total - 1.0) > 1e-9:
            raise InvalidParameterError(f"populations must sum to 1 within 1e-9, got {total!r}")

    @classmethod
    def ground(cls) -> "LevelPopulations":
        return cls(1.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, p: np.ndarray) -> "LevelPopulations":
        return cls(*(float(v) for v in p))

    def as_array(self) -> np.ndarray:
        return np.array([self.p_s0, self.p_s1, self.p_tx, self.p_ty, self.p_tz])

    @property
    def triplet(self) -> np.ndarray:
        """Triplet sublevel populations (Tx, Ty, Tz)."""
        return np.array([self.p_tx, self.p_ty, self.p_tz])


def isc_branching_from_steady_state(
    populations: tuple[float, float, float] | np.ndarray,
    lifetimes: tuple[float, float, float] | np.ndarray,
) -> tuple[float, float, float]:
    """Invert steady-state triplet fractions to ISC branching fractions.

    In steady state the sublevel balance is b_i * flux = p_i / tau_i, so
    b_i is proportional to p_i / tau_i. The result is normalized to sum 1
    and is independent of the overall flux.
    """
    p = np.asarray(populations, dtype=float)
    tau = np.asarray(lifetimes, dtype=float)
    if p.shape != (3,) or tau.shape != (3,):
        raise InvalidParameterError("need three populations and three lifetimes")
    if np.any(p < 0.0) or p.sum() <= 0.0:
        raise InvalidParameterError(f"populations must be nonnegative with a positive sum, got {p}")
    if np.any(tau <= 0.0):
        raise InvalidParameterError(f"lifetimes must be > 0, got {tau}")
    b = p / tau
    b = b / b.sum()
    return (float(b[0]), float(b[1]), float(b[2]))


def rate_matrix(rates: KineticRates, laser_on: bool, intensity: float = 1.0) -> np.ndarray:
    """Generator M of dp/dt = M p, with columns summing to zero."""
    if intensity < 0.0 or not math.isfinite(intensity):
        raise InvalidParameterError(f"intensity must be >= 0, got {intensity!r}")
    pump = rates.pump_rate * intensity if laser_on else 0.0
    k_s1 = rates.s1_decay_rate
    y = rates.isc_yield
    m = np.zeros((5, 5))
    # S0 -> S1 pumping
    m[0, 0] -= pump
    m[1, 0] += pump
    # S1 decay: fluorescence back to S0 plus ISC into the sublevels
    m[1, 1] -= k_s1
    m[0, 1] += (1.0 - y) * k_s1
    for i in range(3):
        m[2 + i, 1] += y * k_s1 * rates.isc_branching[i]
    # sublevel-selective triplet decay to S0
    for i, tau in enumerate(rates.triplet_lifetimes):
        m[2 + i, 2 + i] -= 1.0 / tau
        m[0, 2 + i] += 1.0 / tau
    col_sums = np.abs(m.sum(axis=0))
    scale = max(1.0, float(np.max(np.abs(m))))
    assert float(col_sums.max()) <= 1e-12 * scale, "generator columns must sum to zero"
    return m


@lru_cache(maxsize=512)
def _propagator(
    rates: KineticRates, duration: float, laser_on: bool, intensity: float
) -> np.ndarray:
    p = expm(rate_matrix(rates, laser_on, intensity) * duration)
    p.setflags(write=False)
    return p


@lru_cache(maxsize=512)
def _propagator_with_emission(
    rates: KineticRates, duration: float, laser_on: bool, intensity: float
) -> np.ndarray:
    # Augmented generator: row 5 accumulates the time integral of p_S1.
    a = np.zeros((6, 6))
    a[:5, :5] = rate_matrix(rates, laser_on, intensity)
    a[5, _S1] = 1.0
    p = expm(a * duration)
    p.setflags(write=False)
    return p


def _sanitize(p: np.ndarray) -> np.ndarray:
    """Strip float drift from a propagated population vector.

    The generator conserves total population exactly, so any deviation of
    the sum from 1 is roundoff; it is removed here, but only within a
    1e-6 guard so real errors still surface.
    """
    total = float(p.sum())
    if abs(total - 1.0) > 1e-6 or np.any(p < -1e-6):
        raise InvalidParameterError(f"propagation lost population conservation: {p}")
    return np.clip(p, 0.0, None) / max(float(np.clip(p, 0.0, None).sum()), 1e-300)


def evolve_populations(
    rates: KineticRates,
    initial: LevelPopulations,
    duration: float,
    laser_on: bool,
    intensity: float = 1.0,
) -> LevelPopulations:
    """Propagate populations for `duration` seconds via the matrix exponential."""
    if duration < 0.0:
        raise InvalidParameterError(f"duration must be >= 0, got {duration!r}")
    p = _propagator(rates, float(duration), laser_on, float(intensity))
    return LevelPopulations.from_array(_sanitize(p @ initial.as_array()))


def evolve_with_emission(
    rates: KineticRates,
    initial: LevelPopulations,
    duration: float,
    laser_on: bool,
    intensity: float = 1.0,
) -> tuple[LevelPopulations, float]:
    """Propagate populations and return the integrated S1 occupancy.

    The integral of p_S1 over the window is proportional to the collected
    fluorescence; the constant radiative rate cancels from any contrast
    ratio, so it is left out.
    """
    if duration < 0.0:
        raise InvalidParameterError(f"duration must be >= 0, got {duration!r}")
    p = _propagator_with_emission(rates, float(duration), laser_on, float(intensity))
    x = np.zeros(6)
    x[:5] = initial.as_array()
    out = p @ x
    return LevelPopulations.from_array(_sanitize(out[:5])), float(out[5])


def steady_state(rates: KineticRates, intensity: float = 1.0) -> LevelPopulations:
    """Continuous-illumination steady state of the rate equation.

    Solves M p = 0 with the normalization sum(p) = 1 by replacing one row
    of the (rank-4) generator with the normalization constraint. With the
    pump off, all population sits in S0.
    """
    if rates.pump_rate * intensity == 0.0:
        return LevelPopulations.ground()
    m = rate_matrix(rates, laser_on=True, intensity=intensity)
    a = m.copy()
    a[0, :] = 1.0
    b = np.zeros(5)
    b[0] = 1.0
    p = np.linalg.solve(a, b)
    # scaled residual of the original system; see tests for the bound
    residual = float(np.max(np.abs(m @ p)))
    scale = float(np.max(np.abs(m))) * float(np.max(np.abs(p)))
    if residual > 1e-9 * scale:
        raise InvalidParameterError("steady-state solve failed to converge")
    return LevelPopulations.from_array(p)


def dark_initial_state(rates: KineticRates, intensity: float = 1.0) -> LevelPopulations:
    """State right after switching the laser off from steady state.

    The residual S1 population decays orders of magnitude faster than any
    triplet sublevel, so it is folded into S0 for the closed-form decay
    curve below.
    """
    ss = steady_state(rates, intensity)
    return LevelPopulations(
        ss.p_s0 + ss.p_s1, 0.0, ss.p_tx, ss.p_ty, ss.p_tz
    )


def t1_relaxation_curve(
    rates: KineticRates,
    delays: np.ndarray,
    intensity: float = 1.0,
) -> np.ndarray:
    """Ground-state recovery after switching off the pump.

    Starting from the illuminated steady state, the S0 population after a
    dark delay tau is 1 - sum_i p_i * exp(-tau/tau_i) with p_i the initial
    triplet sublevel populations: a triple-exponential recovery whose
    amplitudes are the steady-state sublevel populations.
    """
    delays = np.asarray(delays, dtype=float)
    if np.any(delays < 0.0):
        raise InvalidParameterError("delays must be >= 0")
    start = dark_initial_state(rates, intensity)
    tau = np.asarray(rates.triplet_lifetimes)
    surviving = start.triplet[None, :] * np.exp(-delays[..., None] / tau[None, :])
    return 1.0 - surviving.sum(axis=-1)


@dataclass(frozen=True)
class ReadoutWindow:
    """Laser readout window: duration in seconds, relative intensity."""

    duration: float = 1.0e-6
    intensity: float = 1.0

    def __post_init__(self) -> None:
        if self.duration < 0.0 or not math.isfinite(self.duration):
            raise InvalidParameterError(f"readout duration must be >= 0, got {self.duration!r}")
        if self.intensity < 0.0 or not math.isfinite(self.intensity):
            raise InvalidParameterError(f"readout intensity must be >= 0, got {self.intensity!r}")


def readout_contrast(
    rates: KineticRates,
    pop_signal: LevelPopulations,
    pop_reference: LevelPopulations,
    window: ReadoutWindow = ReadoutWindow(),
) -> float:
    """Fluorescence contrast between two prepared population states.

    Both states are read with an identical laser window; the contrast is
    the ratio of integrated S1 occupancies, C = I_signal / I_reference.
    Identical states give exactly 1. A vanishing reference integral
    raises DegenerateReadoutError.
    """
    _, i_sig = evolve_with_emission(rates, pop_signal, window.duration, True, window.intensity)
    _, i_ref = evolve_with_emission(rates, pop_reference, window.duration, True, window.intensity)
    if i_ref <= 0.0:
        raise DegenerateReadoutError(
            "reference readout collected no emission; check window duration and pump rate"
        )
    return i_sig / i_ref


def polarization_response(
    theta: np.ndarray | float,
    theta0: float,
    amplitude: float,
    offset: float,
) -> np.ndarray | float:
    """Malus-law excitation polarization dependence.

    I(theta) = offset + amplitude * cos^2(theta - theta0), angles in radians.
    """
    return offset + amplitude * np.cos(np.asarray(theta, dtype=float) - theta0) ** 2
