"""Spin-1 zero-field-splitting Hamiltonian, eigensystem, and field-swept lines.

All energies and frequencies are plain Hz (the 2*pi and hbar factors are
absorbed into the parameters), magnetic fields are Tesla, gyromagnetic
ratios are Hz/T. The working basis is the molecular zero-field triplet
basis {Tx, Ty, Tz}, in which the spin operators are (S_a)_{bc} = -i*eps_abc
and the zero-field Hamiltonian is diagonal:

    diag(D/3 - E, D/3 + E, -2*D/3)

so the three zero-field transition frequencies are |D - E|, |D + E| and
|2*E|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

#: Electron gyromagnetic ratio in Hz/T (negative: gamma = -g*mu_B/h).
GAMMA_ELECTRON_HZ_PER_T = -28.0e9

#: Zero-field state labels, in basis order.
ZERO_FIELD_LABELS = ("x", "y", "z")

#: Canonical ordering of the three transition pairs.
TRANSITION_PAIRS = (("x", "y"), ("x", "z"), ("y", "z"))

# Spin-1 operators in the {Tx, Ty, Tz} basis: (S_a)_{bc} = -i*eps_abc.
SPIN_X = np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex)
SPIN_Y = np.array([[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]], dtype=complex)
SPIN_Z = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex)


def spin_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return copies of (Sx, Sy, Sz) in the zero-field basis."""
    return SPIN_X.copy(), SPIN_Y.copy(), SPIN_Z.copy()


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidParameterError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ZfsParams:
    """Zero-field-splitting parameters D and E, in Hz.

    The conventional principal-axis ordering |E| <= |D| is enforced.
    """

    d: float
    e: float

    def __post_init__(self) -> None:
        _require_finite("zfs parameter", self.d, self.e)
        if abs(self.e) > abs(self.d):
            raise InvalidParameterError(
                f"|E| must not exceed |D|, got D={self.d!r}, E={self.e!r}"
            )


@dataclass(frozen=True)
class FieldVector:
    """Static magnetic field in Tesla, components in the molecular frame."""

    bx: float = 0.0
    by: float = 0.0
    bz: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("field component", self.bx, self.by, self.bz)

    @classmethod
    def along(cls, axis: str, magnitude: float) -> "FieldVector":
        """Build a field of given magnitude along one molecular axis."""
        if axis not in ZERO_FIELD_LABELS:
            raise InvalidParameterError(f"axis must be one of {ZERO_FIELD_LABELS}, got {axis!r}")
        return cls(**{f"b{axis}": magnitude})

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.bx**2 + self.by**2 + self.bz**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz], dtype=float)


@dataclass(frozen=True)
class GyroRatio:
    """Gyromagnetic ratio in Hz/T. Defaults to the electron value."""

    gamma: float = GAMMA_ELECTRON_HZ_PER_T

    def __post_init__(self) -> None:
        _require_finite("gamma", self.gamma)
        if self.gamma == 0.0:
            raise InvalidParameterError("gamma must be nonzero")


@dataclass(frozen=True)
class TripletEigensystem:
    """Eigen-decomposition of a triplet Hamiltonian.

    Attributes
    ----------
    energies : ndarray, shape (3,)
        Eigenvalues in Hz, ascending.
    states : ndarray, shape (3, 3), complex
        Orthonormal eigenvectors as columns, in the zero-field basis,
        phase-fixed so the largest-magnitude component of each column is
        real positive.
    labels : tuple of str
        Zero-field character ('x', 'y', 'z') of each column, assigned by
        maximum squared overlap with the zero-field states.
    """

    energies: np.ndarray
    states: np.ndarray
    labels: tuple[str, str, str]

    def energy_of(self, label: str) -> float:
        """Eigenvalue of the state with the given zero-field character."""
        return float(self.energies[self.labels.index(label)])

    def state_of(self, label: str) -> np.ndarray:
        return self.states[:, self.labels.index(label)]


@dataclass(frozen=True)
class SweepSpectrum:
    """Transition frequencies along a field sweep, one branch per pair."""

    field: np.ndarray
    branches: dict[tuple[str, str], np.ndarray]


def build_hamiltonian(
    zfs: ZfsParams,
    field: FieldVector = FieldVector(),
    gamma: GyroRatio = GyroRatio(),
) -> np.ndarray:
    """Assemble the triplet Hamiltonian, in Hz, in the zero-field basis.

    H = D*(Sz^2 - S^2/3) + E*(Sx^2 - Sy^2) + gamma*(B . S).
    """
    h = np.diag(
        [zfs.d / 3.0 - zfs.e, zfs.d / 3.0 + zfs.e, -2.0 * zfs.d / 3.0]
    ).astype(complex)
    g = gamma.gamma
    if field.bx != 0.0:
        h += g * field.bx * SPIN_X
    if field.by != 0.0:
        h += g * field.by * SPIN_Y
    if field.bz != 0.0:
        h += g * field.bz * SPIN_Z
    return h


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-|.| component is real positive."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, k])))
        pivot = out[idx, k]
        mag = abs(pivot)
        if mag > 0.0:
            out[:, k] *= np.conj(pivot) / mag
    return out


def _assign_labels(
    overlap_sq: np.ndarray, labels: tuple[str, str, str]
) -> tuple[str, str, str]:
    """Greedy unique assignment of reference labels to columns.

    overlap_sq[i, k] is |<ref_i | vec_k>|^2. Ties break deterministically
    toward lower reference index, then lower column index.
    """
    order = sorted(
        ((i, k) for i in range(3) for k in range(3)),
        key=lambda ik: (-overlap_sq[ik[0], ik[1]], ik[0], ik[1]),
    )
    assigned: dict[int, str] = {}
    used: set[int] = set()
    for i, k in order:
        if k in assigned or i in used:
            continue
        assigned[k] = labels[i]
        used.add(i)
    return (assigned[0], assigned[1], assigned[2])


def eigensystem(h: np.ndarray) -> TripletEigensystem:
    """Diagonalize a 3x3 triplet Hamiltonian.

    The input must be Hermitian to within a scale-relative 1e-9. Energies
    come back ascending; labels track zero-field character by maximum
    squared overlap with the basis states, each label used exactly once.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (3, 3):
        raise InvalidParameterError(f"expected a 3x3 Hamiltonian, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if float(np.max(np.abs(h - h.conj().T))) > 1e-9 * scale:
        raise InvalidParameterError("Hamiltonian is not Hermitian within tolerance")
    energies, vecs = np.linalg.eigh(h)
    vecs = _fix_phases(vecs)
    overlap_sq = np.abs(vecs) ** 2  # reference states are the basis vectors
    labels = _assign_labels(overlap_sq, ZERO_FIELD_LABELS)
    return TripletEigensystem(energies=energies, states=vecs, labels=labels)


def transition_frequencies(eig: TripletEigensystem) -> dict[tuple[str, str], float]:
    """Positive transition frequencies keyed by label pair.

    Keys follow the canonical ordering ('x','y'), ('x','z'), ('y','z').
    """
    by_label = {lab: float(eig.energies[k]) for k, lab in enumerate(eig.labels)}
    return {
        (a, b): abs(by_label[a] - by_label[b]) for a, b in TRANSITION_PAIRS
    }


def field_sweep_spectrum(
    zfs: ZfsParams,
    axis: str,
    b_values: np.ndarray,
    gamma: GyroRatio = GyroRatio(),
) -> SweepSpectrum:
    """Track the three transition branches along a field sweep.

    Branch identity is carried from point to point by maximum squared
    eigenvector overlap with the previous point, so labels stay attached
    to adiabatic branches through avoided crossings. The first point is
    labeled by zero-field character.

    Parameters
    ----------
    zfs : ZfsParams
    axis : {'x', 'y', 'z'}
        Molecular axis along which the field is applied.
    b_values : array_like
        Field magnitudes in Tesla.
    gamma : GyroRatio

    Returns
    -------
    SweepSpectrum
        Fields and, for each canonical pair, the branch frequencies in Hz.
    """
    b_values = np.atleast_1d(np.asarray(b_values, dtype=float))
    branches = {pair: np.empty(b_values.shape) for pair in TRANSITION_PAIRS}
    prev_states: np.ndarray | None = None
    prev_labels: tuple[str, str, str] | None = None
    for n, b in enumerate(b_values):
        eig = eigensystem(build_hamiltonian(zfs, FieldVector.along(axis, b), gamma))
        if prev_states is None:
            labels = eig.labels
        else:
            overlap_sq = np.abs(prev_states.conj().T @ eig.states) ** 2
            labels = _assign_labels(overlap_sq, prev_labels)
        by_label = {lab: float(eig.energies[k]) for k, lab in enumerate(labels)}
        for a, c in TRANSITION_PAIRS:
            branches[(a, c)][n] = abs(by_label[a] - by_label[c])
        prev_states, prev_labels = eig.states, labels
    return SweepSpectrum(field=b_values, branches=branches)
