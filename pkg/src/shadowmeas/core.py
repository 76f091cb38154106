"""Core value types: measurement settings, recorded data, observables, subsystems.

Site indices are 1-based throughout the public API. All types are immutable
after construction (arrays are copied and marked read-only), so they can be
shared freely across threads.

Bit-order convention: site 1 is the most significant bit when a bitstring is
mapped to an integer index into a 2^N array.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    InvalidSubsystem,
    NotSupportedOnSubsystem,
    SizeMismatch,
    UnsupportedSetting,
)

UNITARITY_TOL = 1e-12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in PAULI_MATRICES.values():
    _m.setflags(write=False)


def _frozen(a, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


def _check_unitary(u: np.ndarray, label: str) -> None:
    dim = u.shape[-1]
    dev = np.abs(u.conj().swapaxes(-1, -2) @ u - np.eye(dim)).max()
    if dev > UNITARITY_TOL:
        raise ValueError(f"{label} is not unitary: max deviation {dev:.3e}")


@dataclass(frozen=True, eq=False)
class BitString:
    """A single measurement outcome s in {0,1}^N."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.size == 0:
            raise ValueError("bits must be a non-empty 1-D array")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("bits must contain only 0 and 1")
        object.__setattr__(self, "bits", _frozen(bits, np.uint8))

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitString) and np.array_equal(self.bits, other.bits)

    def as_index(self) -> int:
        """Integer index with site 1 as the most significant bit."""
        return int(self.bits @ (1 << np.arange(len(self) - 1, -1, -1)))


@dataclass(frozen=True, eq=False)
class LocalUnitarySetting:
    """One randomized-measurement setting given by a product of 2x2 unitaries."""

    unitaries: np.ndarray  # (n_qubits, 2, 2) complex

    def __post_init__(self):
        u = np.asarray(self.unitaries, dtype=complex)
        if u.ndim != 3 or u.shape[1:] != (2, 2) or u.shape[0] < 1:
            raise ValueError("unitaries must have shape (n_qubits, 2, 2)")
        _check_unitary(u, "site unitary")
        object.__setattr__(self, "unitaries", _frozen(u, complex))

    @property
    def n_qubits(self) -> int:
        return self.unitaries.shape[0]

    def site_unitaries(self) -> np.ndarray:
        return self.unitaries

    def __eq__(self, other) -> bool:
        return isinstance(other, LocalUnitarySetting) and np.array_equal(
            self.unitaries, other.unitaries
        )


@dataclass(frozen=True)
class ComputationalBasisSetting:
    """Measure directly in the computational basis (identity on every site)."""

    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")

    def site_unitaries(self) -> np.ndarray:
        eye = np.eye(2, dtype=complex)
        return np.broadcast_to(eye, (self.n_qubits, 2, 2))


@dataclass(frozen=True, eq=False)
class ShallowCircuitSetting:
    """A measurement setting realized by a shallow circuit.

    ``gates`` is an ordered list of (sites, matrix) pairs in application order;
    sites are 1-based, two-qubit gates act on nearest neighbours only.
    """

    n_qubits: int
    depth: int
    gates: tuple

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        checked = []
        for sites, matrix in self.gates:
            sites = tuple(int(s) for s in sites)
            m = np.asarray(matrix, dtype=complex)
            if len(sites) not in (1, 2):
                raise ValueError("gates act on one or two sites")
            if any(s < 1 or s > self.n_qubits for s in sites):
                raise ValueError(f"gate sites {sites} out of range")
            if len(sites) == 2 and abs(sites[0] - sites[1]) != 1:
                raise ValueError(f"two-qubit gate on non-adjacent sites {sites}")
            dim = 2 ** len(sites)
            if m.shape != (dim, dim):
                raise ValueError(f"gate on {sites} must be {dim}x{dim}")
            _check_unitary(m, f"gate on {sites}")
            checked.append((sites, _frozen(m, complex)))
        object.__setattr__(self, "gates", tuple(checked))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShallowCircuitSetting):
            return False
        if (self.n_qubits, self.depth) != (other.n_qubits, other.depth):
            return False
        if len(self.gates) != len(other.gates):
            return False
        return all(
            sa == sb and np.array_equal(ma, mb)
            for (sa, ma), (sb, mb) in zip(self.gates, other.gates)
        )


Setting = Union[LocalUnitarySetting, ComputationalBasisSetting, ShallowCircuitSetting]

#: Settings that are tensor products of single-qubit unitaries.
LOCAL_SETTINGS = (LocalUnitarySetting, ComputationalBasisSetting)


@dataclass(frozen=True, eq=False)
class MeasurementData:
    """Bitstrings recorded in a single measurement setting."""

    setting: Setting
    outcomes: np.ndarray  # (n_shots, n_qubits) of {0,1}

    def __post_init__(self):
        out = np.asarray(self.outcomes)
        if out.ndim != 2 or out.shape[0] < 1:
            raise ValueError("outcomes must be a (n_shots, n_qubits) array")
        if out.shape[1] != self.setting.n_qubits:
            raise SizeMismatch(
                f"outcome width {out.shape[1]} != setting qubits {self.setting.n_qubits}"
            )
        if not np.isin(out, (0, 1)).all():
            raise ValueError("outcomes must contain only 0 and 1")
        object.__setattr__(self, "outcomes", _frozen(out, np.uint8))

    @property
    def n_qubits(self) -> int:
        return self.setting.n_qubits

    @property
    def n_shots(self) -> int:
        return self.outcomes.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementGroup:
    """A collection of MeasurementData over independently sampled settings."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("a measurement group needs at least one entry")
        n = entries[0].n_qubits
        for e in entries:
            if e.n_qubits != n:
                raise SizeMismatch("all entries must share the same qubit count")
        object.__setattr__(self, "entries", entries)

    @property
    def n_qubits(self) -> int:
        return self.entries[0].n_qubits

    @property
    def n_settings(self) -> int:
        return len(self.entries)

    @property
    def n_shots(self) -> int:
        """Common shot count; raises if entries are ragged."""
        counts = {e.n_shots for e in self.entries}
        if len(counts) != 1:
            raise ValueError("entries have differing shot counts")
        return counts.pop()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


@dataclass(frozen=True, eq=False)
class PauliObservable:
    """A weighted sum of Pauli strings, e.g. [(0.5, "ZIIX"), (1.0, "XXII")]."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), str(s)) for c, s in self.terms)
        if not terms:
            raise ValueError("observable needs at least one term")
        n = len(terms[0][1])
        for coeff, letters in terms:
            if not np.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            if len(letters) != n or n == 0:
                raise ValueError("all Pauli strings must share a positive length")
            if any(ch not in "IXYZ" for ch in letters):
                raise ValueError(f"invalid Pauli letters in {letters!r}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_string(cls, letters: str, coefficient: float = 1.0) -> "PauliObservable":
        return cls(((coefficient, letters),))

    @property
    def n_qubits(self) -> int:
        return len(self.terms[0][1])

    def support(self) -> tuple:
        """1-based sites where at least one term is not the identity."""
        sites = sorted(
            {i + 1 for _, letters in self.terms for i, ch in enumerate(letters) if ch != "I"}
        )
        return tuple(sites)


@dataclass(frozen=True)
class Subsystem:
    """A strictly increasing list of 1-based site indices."""

    sites: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise InvalidSubsystem("subsystem must contain at least one site")
        if any(s < 1 for s in sites):
            raise InvalidSubsystem("site indices are 1-based")
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise InvalidSubsystem("sites must be strictly increasing")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def full(cls, n_qubits: int) -> "Subsystem":
        return cls(tuple(range(1, n_qubits + 1)))

    def __len__(self) -> int:
        return len(self.sites)

    def validate_within(self, n_qubits: int) -> None:
        if self.sites[-1] > n_qubits:
            raise InvalidSubsystem(
                f"site {self.sites[-1]} out of range for {n_qubits} qubits"
            )


def _as_subsystem(sub) -> Subsystem:
    return sub if isinstance(sub, Subsystem) else Subsystem(tuple(sub))


def reduce_group_to_subsystem(group: MeasurementGroup, sub) -> MeasurementGroup:
    """Restrict every setting and outcome column of a group to a subsystem.

    Only product-form (local) settings can be reduced; shot order and counts
    are unchanged.
    """
    sub = _as_subsystem(sub)
    sub.validate_within(group.n_qubits)
    cols = [s - 1 for s in sub.sites]
    entries = []
    for data in group:
        setting = data.setting
        if isinstance(setting, LocalUnitarySetting):
            reduced = LocalUnitarySetting(setting.unitaries[cols])
        elif isinstance(setting, ComputationalBasisSetting):
            reduced = ComputationalBasisSetting(len(cols))
        else:
            raise UnsupportedSetting("shallow-circuit settings cannot be reduced")
        entries.append(MeasurementData(reduced, data.outcomes[:, cols]))
    return MeasurementGroup(tuple(entries))


def reduce_observable_to_subsystem(obs: PauliObservable, sub) -> PauliObservable:
    """Reindex an observable supported on ``sub`` to subsystem-local sites."""
    sub = _as_subsystem(sub)
    sub.validate_within(obs.n_qubits)
    keep = set(sub.sites)
    terms = []
    for coeff, letters in obs.terms:
        for i, ch in enumerate(letters):
            if ch != "I" and (i + 1) not in keep:
                raise NotSupportedOnSubsystem(
                    f"term {letters!r} acts on site {i + 1} outside the subsystem"
                )
        terms.append((coeff, "".join(letters[s - 1] for s in sub.sites)))
    return PauliObservable(tuple(terms))
