"""Generation of randomized measurement settings with reproducible streams.

Basis-rotation conventions for the Pauli ensemble are fixed for interop:
X -> Hadamard, Y -> Hadamard @ S^dagger, Z -> identity. Each rotation maps the
corresponding Pauli eigenbasis onto the computational basis, so measuring the
Pauli equals rotating and reading out Z.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ComputationalBasisSetting, LocalUnitarySetting, ShallowCircuitSetting
from .errors import InvalidSize

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_S_DAG = np.array([[1, 0], [0, -1j]], dtype=complex)

BASIS_ROTATIONS = {
    "X": _HADAMARD.copy(),
    "Y": _HADAMARD @ _S_DAG,
    "Z": np.eye(2, dtype=complex),
}
for _m in BASIS_ROTATIONS.values():
    _m.setflags(write=False)

_BASIS_ORDER = ("X", "Y", "Z")

ENSEMBLES = ("haar", "pauli", "computational", "shallow")


@dataclass(frozen=True)
class RngSeed:
    """Root of a reproducible random stream.

    Identical (seed, stream_id) pairs replay bit-identical sampling output;
    ``stream(i)`` derives independent substreams so per-setting work can run
    in parallel without changing results.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        )

    def stream(self, index: int) -> np.random.Generator:
        """Independent generator for substream ``index``."""
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, int(index)))
        )


def ensure_generator(rng) -> np.random.Generator:
    """Accept a Generator, an RngSeed, or a plain integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return RngSeed(int(rng)).generator()


def haar_unitary(rng, dim: int = 2, size: int | None = None) -> np.ndarray:
    """Draw Haar-distributed unitaries via QR of a complex Ginibre matrix.

    The R-diagonal phase correction makes the distribution exactly Haar.
    Returns (dim, dim) or, when ``size`` is given, (size, dim, dim).
    """
    g = ensure_generator(rng)
    shape = (dim, dim) if size is None else (int(size), dim, dim)
    z = (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[..., None, :]


def local_unitary_setting(n_qubits: int, rng) -> LocalUnitarySetting:
    """One setting with an independent Haar U(2) rotation per site."""
    if n_qubits < 1:
        raise InvalidSize("n_qubits must be >= 1")
    return LocalUnitarySetting(haar_unitary(rng, size=n_qubits))


def pauli_basis_setting(n_qubits: int, rng) -> LocalUnitarySetting:
    """One setting with a uniformly random X/Y/Z basis rotation per site."""
    if n_qubits < 1:
        raise InvalidSize("n_qubits must be >= 1")
    g = ensure_generator(rng)
    picks = g.integers(0, 3, size=n_qubits)
    stack = np.stack([BASIS_ROTATIONS[b] for b in _BASIS_ORDER])
    return LocalUnitarySetting(stack[picks])


def shallow_setting(n_qubits: int, depth: int, rng) -> ShallowCircuitSetting:
    """Brickwork circuit of Haar-random two-qubit gates on nearest neighbours.

    Odd layers pair sites (1,2),(3,4),...; even layers pair (2,3),(4,5),....
    A single-qubit system has no neighbour pairs, so each layer degenerates to
    one Haar U(2) gate on site 1.
    """
    if n_qubits < 1:
        raise InvalidSize("n_qubits must be >= 1")
    if depth < 0:
        raise InvalidSize("depth must be >= 0")
    g = ensure_generator(rng)
    gates = []
    if n_qubits == 1:
        for _ in range(depth):
            gates.append(((1,), haar_unitary(g)))
    else:
        for layer in range(1, depth + 1):
            start = 1 if layer % 2 == 1 else 2
            for a in range(start, n_qubits, 2):
                gates.append(((a, a + 1), haar_unitary(g, dim=4)))
    return ShallowCircuitSetting(n_qubits=n_qubits, depth=depth, gates=tuple(gates))


def sample_settings(n_qubits, n_settings, ensemble, seed, depth: int = 0) -> list:
    """Sample ``n_settings`` settings, one RNG substream per setting index.

    Args:
        ensemble: one of "haar", "pauli", "computational", "shallow".
        seed: an int or RngSeed; setting ``i`` uses ``seed.stream(i)``.
        depth: circuit depth when ensemble == "shallow".
    """
    if n_settings < 1:
        raise InvalidSize("n_settings must be >= 1")
    root = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    if ensemble == "haar":
        return [local_unitary_setting(n_qubits, root.stream(i)) for i in range(n_settings)]
    if ensemble == "pauli":
        return [pauli_basis_setting(n_qubits, root.stream(i)) for i in range(n_settings)]
    if ensemble == "computational":
        if n_qubits < 1:
            raise InvalidSize("n_qubits must be >= 1")
        return [ComputationalBasisSetting(n_qubits) for _ in range(n_settings)]
    if ensemble == "shallow":
        return [shallow_setting(n_qubits, depth, root.stream(i)) for i in range(n_settings)]
    raise ValueError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")
