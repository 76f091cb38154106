"""Classical simulation of the data-acquisition stage.

Backends: dense state vectors (N <= 14), dense density matrices (N <= 10),
and matrix product states (sampled sequentially, never forming the 2^N
vector). Born sampling follows the measure-after-rotation convention: the
setting's unitary is applied to the state, then a computational-basis
readout is drawn.

Depolarizing readout noise is applied once per shot immediately before the
measurement. On pure-state backends this is a stochastic Pauli insertion
(probability 3p/4 per site, uniformly X/Y/Z); on the density-matrix backend
the channel is applied exactly, before the rotation (for product settings
the two orderings coincide because single-qubit depolarizing commutes with
single-qubit conjugation).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    PAULI_MATRICES,
    ComputationalBasisSetting,
    LocalUnitarySetting,
    MeasurementData,
    MeasurementGroup,
    PauliObservable,
    Setting,
    ShallowCircuitSetting,
    _frozen,
)
from .errors import InvalidSize, SizeMismatch, TooLarge, TooLargeForDense
from .sampling import RngSeed, ensure_generator

DENSE_STATE_MAX_QUBITS = 14
DENSE_MATRIX_MAX_QUBITS = 10
MPS_DENSE_OUTPUT_MAX_QUBITS = 24

_PAULI_STACK = np.stack(
    [PAULI_MATRICES["I"], PAULI_MATRICES["X"], PAULI_MATRICES["Y"], PAULI_MATRICES["Z"]]
)
_PAULI_STACK.setflags(write=False)


# ---------------------------------------------------------------------------
# gate application on arrays shaped (2,)*n + tail


def _apply_1q(arr, u, site):
    ax = site - 1
    out = np.tensordot(u, arr, axes=([1], [ax]))
    return np.moveaxis(out, 0, ax)


def _apply_2q(arr, u4, site):
    ax = site - 1
    g = u4.reshape(2, 2, 2, 2)
    out = np.tensordot(g, arr, axes=([2, 3], [ax, ax + 1]))
    return np.moveaxis(out, (0, 1), (ax, ax + 1))


def _rotate_vector(amplitudes: np.ndarray, setting: Setting, n: int) -> np.ndarray:
    """Apply a setting's unitary to a dense state vector."""
    if isinstance(setting, ComputationalBasisSetting):
        return np.asarray(amplitudes, dtype=complex)
    psi = np.asarray(amplitudes, dtype=complex).reshape((2,) * n)
    if isinstance(setting, LocalUnitarySetting):
        for site in range(1, n + 1):
            psi = _apply_1q(psi, setting.unitaries[site - 1], site)
    else:
        for sites, matrix in setting.gates:
            if len(sites) == 1:
                psi = _apply_1q(psi, matrix, sites[0])
            else:
                psi = _apply_2q(psi, matrix, min(sites))
    return psi.reshape(-1)


def setting_unitary(setting: Setting) -> np.ndarray:
    """Dense 2^N x 2^N unitary realizing a setting. Intended for small N."""
    n = setting.n_qubits
    d = 2**n
    if isinstance(setting, ComputationalBasisSetting):
        return np.eye(d, dtype=complex)
    if isinstance(setting, LocalUnitarySetting):
        u = np.eye(1, dtype=complex)
        for site in range(n):
            u = np.kron(u, setting.unitaries[site])
        return u
    u = np.eye(d, dtype=complex).reshape((2,) * n + (d,))
    for sites, matrix in setting.gates:
        if len(sites) == 1:
            u = _apply_1q(u, matrix, sites[0])
        else:
            u = _apply_2q(u, matrix, min(sites))
    return u.reshape(d, d)


def _expand_1q(u: np.ndarray, site: int, n: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(2 ** (site - 1)), u), np.eye(2 ** (n - site)))


def _bits_from_ints(ints: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1)
    return ((ints[:, None] >> shifts) & 1).astype(np.uint8)


def _ints_from_bits(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    weights = 1 << np.arange(n - 1, -1, -1)
    return bits.astype(np.int64) @ weights


# ---------------------------------------------------------------------------
# MPS internals


def _right_canonicalize(tensors):
    """Return right-canonical, unit-norm tensors (boundary norm divided out)."""
    ts = [np.array(t, dtype=complex) for t in tensors]
    for i in range(len(ts) - 1, 0, -1):
        dl, _, dr = ts[i].shape
        m = ts[i].reshape(dl, 2 * dr)
        q, r = np.linalg.qr(m.conj().T)
        ts[i] = q.conj().T.reshape(q.shape[1], 2, dr)
        ts[i - 1] = np.tensordot(ts[i - 1], r.conj().T, axes=([2], [0]))
    nrm = np.linalg.norm(ts[0])
    if nrm == 0:
        raise ValueError("state has zero norm")
    ts[0] = ts[0] / nrm
    return ts


def _left_canonicalize(tensors):
    ts = [np.array(t, dtype=complex) for t in tensors]
    for i in range(len(ts) - 1):
        dl, _, dr = ts[i].shape
        q, r = np.linalg.qr(ts[i].reshape(dl * 2, dr))
        ts[i] = q.reshape(dl, 2, q.shape[1])
        ts[i + 1] = np.tensordot(r, ts[i + 1], axes=([1], [0]))
    nrm = np.linalg.norm(ts[-1])
    if nrm == 0:
        raise ValueError("state has zero norm")
    ts[-1] = ts[-1] / nrm
    return ts


def _mps_contract_dense(tensors) -> np.ndarray:
    v = tensors[0][0]
    for t in tensors[1:]:
        v = np.tensordot(v, t, axes=([-1], [0]))
    return v[..., 0].reshape(-1)


def _mps_norm(tensors) -> float:
    left = np.ones((1, 1), dtype=complex)
    for t in tensors:
        left = np.einsum("ab,asx,bsy->xy", left, t.conj(), t)
    return float(np.sqrt(abs(left[0, 0])))


def _sample_mps_batch(tensors, n_shots, rng, site_mats=None, per_shot_mats=None):
    """Sequential conditional sampling, vectorized over shots.

    Tensors must be right-canonical with unit norm;``site_mats`` (N,2,2) or
    ``per_shot_mats`` (n_shots,N,2,2) rotate the physical index before readout.
    """
    n = len(tensors)
    bits = np.empty((n_shots, n), dtype=np.uint8)
    v = np.ones((n_shots, 1), dtype=complex)
    rows = np.arange(n_shots)
    for i, t in enumerate(tensors):
        w = np.tensordot(v, t, axes=([1], [0]))  # (shots, 2, dr)
        if per_shot_mats is not None:
            w = np.einsum("mps,msr->mpr", per_shot_mats[:, i], w)
        elif site_mats is not None:
            w = np.einsum("ps,msr->mpr", site_mats[i], w)
        p = (np.abs(w) ** 2).sum(axis=2)
        tot = p.sum(axis=1)
        b = (rng.random(n_shots) >= p[:, 0] / tot).astype(np.uint8)
        bits[:, i] = b
        chosen = w[rows, b, :]
        v = chosen / np.sqrt(p[rows, b])[:, None]
    return bits


# ---------------------------------------------------------------------------
# state types


@dataclass(frozen=True, eq=False)
class PureStateDense:
    """Dense state vector with site 1 as the most significant bit."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 2 or (a.size & (a.size - 1)) != 0:
            raise ValueError("amplitudes must have length 2^N with N >= 1")
        n = a.size.bit_length() - 1
        if n > DENSE_STATE_MAX_QUBITS:
            raise TooLargeForDense(
                f"dense state vectors support at most {DENSE_STATE_MAX_QUBITS} qubits"
            )
        if abs(np.linalg.norm(a) - 1.0) > 1e-10:
            raise ValueError("state vector must be normalized")
        object.__setattr__(self, "amplitudes", _frozen(a, complex))

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1


@dataclass(frozen=True, eq=False)
class DensityMatrixDense:
    """Dense density matrix: Hermitian, unit trace, PSD up to -1e-8."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        d = m.shape[0]
        if d < 2 or (d & (d - 1)) != 0:
            raise ValueError("matrix dimension must be 2^N with N >= 1")
        n = d.bit_length() - 1
        if n > DENSE_MATRIX_MAX_QUBITS:
            raise TooLargeForDense(
                f"dense density matrices support at most {DENSE_MATRIX_MAX_QUBITS} qubits"
            )
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise ValueError("matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("matrix must have unit trace")
        if np.linalg.eigvalsh(m).min() < -1e-8:
            raise ValueError("matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", _frozen(m, complex))

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1


@dataclass(frozen=True, eq=False)
class MatrixProductState:
    """Open-boundary MPS with rank-3 site tensors (left, physical=2, right)."""

    site_tensors: tuple

    def __post_init__(self):
        ts = tuple(_frozen(t, complex) for t in self.site_tensors)
        if not ts:
            raise ValueError("an MPS needs at least one site")
        for i, t in enumerate(ts):
            if t.ndim != 3 or t.shape[1] != 2:
                raise ValueError(f"site tensor {i + 1} must be (left, 2, right)")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for a, b in zip(ts, ts[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("neighbouring bond dimensions disagree")
        if _mps_norm(ts) == 0.0:
            raise ValueError("state has zero norm")
        object.__setattr__(self, "site_tensors", ts)

    @property
    def n_qubits(self) -> int:
        return len(self.site_tensors)

    @property
    def bond_dims(self) -> tuple:
        return tuple(t.shape[2] for t in self.site_tensors[:-1])

    def norm(self) -> float:
        return _mps_norm(self.site_tensors)

    def to_dense(self) -> np.ndarray:
        """Contract to a normalized 2^N vector (N <= 24)."""
        if self.n_qubits > MPS_DENSE_OUTPUT_MAX_QUBITS:
            raise TooLarge(
                f"dense contraction supports at most {MPS_DENSE_OUTPUT_MAX_QUBITS} qubits"
            )
        v = _mps_contract_dense(self.site_tensors)
        return v / np.linalg.norm(v)


QuantumState = Union[PureStateDense, DensityMatrixDense, MatrixProductState]


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Per-qubit depolarizing strengths p_i in [0, 1]."""

    depolarizing_strengths: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.depolarizing_strengths, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("strengths must be a 1-D array")
        if (p < 0).any() or (p > 1).any():
            raise ValueError("strengths must lie in [0, 1]")
        object.__setattr__(self, "depolarizing_strengths", _frozen(p, float))

    @classmethod
    def random(cls, n_qubits: int, mean: float = 0.1, sd: float = 0.02, rng=0):
        """Strengths drawn from a normal distribution, clipped to [0, 1]."""
        g = ensure_generator(rng)
        return cls(np.clip(g.normal(mean, sd, size=n_qubits), 0.0, 1.0))

    @property
    def n_qubits(self) -> int:
        return self.depolarizing_strengths.size


@dataclass(frozen=True, eq=False)
class MeasurementProbability:
    """Born distribution for one setting as a normalized 2^N vector."""

    probabilities: np.ndarray
    setting: Setting

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size != 2**self.setting.n_qubits:
            raise SizeMismatch("probability vector length must be 2^n_qubits")
        if p.min() < -1e-10:
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("probabilities must sum to one")
        object.__setattr__(self, "probabilities", _frozen(np.clip(p, 0.0, None), float))


def state_n_qubits(state: QuantumState) -> int:
    return state.n_qubits


# ---------------------------------------------------------------------------
# construction of common states


def random_mps(n_qubits: int, bond_dim: int, rng=0) -> MatrixProductState:
    """Random MPS: i.i.d. complex Gaussian entries, then left-canonicalized.

    Bond dimension at cut k is min(bond_dim, 2^k, 2^(N-k)).
    """
    if n_qubits < 1 or bond_dim < 1:
        raise InvalidSize("n_qubits and bond_dim must be >= 1")
    g = ensure_generator(rng)
    dims = [1]
    for k in range(1, n_qubits):
        dims.append(int(min(bond_dim, 2**k, 2 ** (n_qubits - k))))
    dims.append(1)
    tensors = []
    for i in range(n_qubits):
        shape = (dims[i], 2, dims[i + 1])
        tensors.append((g.standard_normal(shape) + 1j * g.standard_normal(shape)) / np.sqrt(2))
    return MatrixProductState(tuple(_left_canonicalize(tensors)))


def ghz_state(n_qubits: int) -> MatrixProductState:
    """(|0...0> + |1...1>)/sqrt(2) as an exact bond-dimension-2 MPS."""
    if n_qubits < 1:
        raise InvalidSize("n_qubits must be >= 1")
    if n_qubits == 1:
        return MatrixProductState((np.array([[[1.0], [1.0]]], dtype=complex) / np.sqrt(2),))
    first = np.zeros((1, 2, 2), dtype=complex)
    first[0, 0, 0] = first[0, 1, 1] = 1 / np.sqrt(2)
    middle = np.zeros((2, 2, 2), dtype=complex)
    middle[0, 0, 0] = middle[1, 1, 1] = 1.0
    last = np.zeros((2, 2, 1), dtype=complex)
    last[0, 0, 0] = last[1, 1, 0] = 1.0
    return MatrixProductState((first,) + (middle,) * (n_qubits - 2) + (last,))


def product_zero(n_qubits: int) -> MatrixProductState:
    """|0...0> as a bond-dimension-1 MPS."""
    if n_qubits < 1:
        raise InvalidSize("n_qubits must be >= 1")
    t = np.zeros((1, 2, 1), dtype=complex)
    t[0, 0, 0] = 1.0
    return MatrixProductState((t,) * n_qubits)


# ---------------------------------------------------------------------------
# Born probabilities and sampling


def born_probabilities(state: QuantumState, setting: Setting) -> MeasurementProbability:
    """Exact outcome distribution of a rotated computational-basis measurement."""
    n = state.n_qubits
    if setting.n_qubits != n:
        raise SizeMismatch(f"setting has {setting.n_qubits} qubits, state has {n}")
    if isinstance(state, DensityMatrixDense):
        u = setting_unitary(setting)
        p = np.einsum("sj,jk,sk->s", u, state.matrix, u.conj()).real
    else:
        if isinstance(state, MatrixProductState):
            if n > MPS_DENSE_OUTPUT_MAX_QUBITS:
                raise TooLarge("dense Born output is limited to 24 qubits")
            amps = state.to_dense()
        else:
            amps = state.amplitudes
        vec = _rotate_vector(amps, setting, n)
        p = np.abs(vec) ** 2
    return MeasurementProbability(p / p.sum(), setting)


def _sample_pauli_patterns(noise: NoiseModel, n_shots: int, rng) -> np.ndarray:
    """Per-shot Pauli insertions: 0 = none, else uniform X/Y/Z with prob 3p/4."""
    p = noise.depolarizing_strengths
    hit = rng.random((n_shots, p.size)) < 0.75 * p
    which = rng.integers(1, 4, size=(n_shots, p.size))
    return np.where(hit, which, 0)


def _sample_from_probs(p: np.ndarray, n_shots: int, n: int, rng) -> np.ndarray:
    ints = rng.choice(p.size, size=n_shots, p=p / p.sum())
    return _bits_from_ints(ints, n)


def _sample_dense_vector(amps, setting, n_shots, noise, rng, n) -> np.ndarray:
    rotated = _rotate_vector(amps, setting, n)
    if noise is None:
        return _sample_from_probs(np.abs(rotated) ** 2, n_shots, n, rng)
    patterns = _sample_pauli_patterns(noise, n_shots, rng)
    unique, inverse = np.unique(patterns, axis=0, return_inverse=True)
    bits = np.empty((n_shots, n), dtype=np.uint8)
    for k, pattern in enumerate(unique):
        members = np.flatnonzero(inverse == k)
        vec = rotated.reshape((2,) * n)
        for site, pauli in enumerate(pattern, start=1):
            if pauli:
                vec = _apply_1q(vec, _PAULI_STACK[pauli], site)
        p = (np.abs(vec) ** 2).reshape(-1)
        bits[members] = _sample_from_probs(p, members.size, n, rng)
    return bits


def _depolarize_density(rho: np.ndarray, strengths: np.ndarray, n: int) -> np.ndarray:
    out = np.array(rho)
    for site, p in enumerate(strengths, start=1):
        if p == 0:
            continue
        acc = (1 - 0.75 * p) * out
        for label in "XYZ":
            op = _expand_1q(PAULI_MATRICES[label], site, n)
            acc += (0.25 * p) * (op @ out @ op)
        out = acc
    return out


def sample_measurements(
    state: QuantumState,
    setting: Setting,
    n_shots: int,
    noise: NoiseModel | None = None,
    rng=0,
) -> MeasurementData:
    """Draw ``n_shots`` i.i.d. bitstrings from the (noisy) Born distribution."""
    if n_shots < 1:
        raise InvalidSize("n_shots must be >= 1")
    n = state.n_qubits
    if setting.n_qubits != n:
        raise SizeMismatch(f"setting has {setting.n_qubits} qubits, state has {n}")
    if noise is not None and noise.n_qubits != n:
        raise SizeMismatch(f"noise model has {noise.n_qubits} qubits, state has {n}")
    g = ensure_generator(rng)

    if isinstance(state, MatrixProductState) and not isinstance(setting, ShallowCircuitSetting):
        canon = _right_canonicalize(state.site_tensors)
        mats = None if isinstance(setting, ComputationalBasisSetting) else setting.site_unitaries()
        if noise is None or not noise.depolarizing_strengths.any():
            bits = _sample_mps_batch(canon, n_shots, g, site_mats=mats)
        else:
            patterns = _sample_pauli_patterns(noise, n_shots, g)
            paulis = _PAULI_STACK[patterns]  # (shots, n, 2, 2)
            if mats is None:
                eff = paulis
            else:
                # noise strikes after the basis rotation, right before readout
                eff = np.einsum("mnij,njk->mnik", paulis, mats)
            bits = _sample_mps_batch(canon, n_shots, g, per_shot_mats=eff)
        return MeasurementData(setting, bits)

    if isinstance(state, MatrixProductState):
        if n > DENSE_STATE_MAX_QUBITS:
            raise TooLarge("shallow settings on MPS states are simulated densely (N <= 14)")
        amps = state.to_dense()
        return MeasurementData(setting, _sample_dense_vector(amps, setting, n_shots, noise, g, n))

    if isinstance(state, PureStateDense):
        bits = _sample_dense_vector(state.amplitudes, setting, n_shots, noise, g, n)
        return MeasurementData(setting, bits)

    rho = state.matrix
    if noise is not None:
        rho = _depolarize_density(rho, noise.depolarizing_strengths, n)
    u = setting_unitary(setting)
    p = np.clip(np.einsum("sj,jk,sk->s", u, rho, u.conj()).real, 0.0, None)
    return MeasurementData(setting, _sample_from_probs(p, n_shots, n, g))


def simulate_group(
    state: QuantumState,
    settings,
    n_shots: int,
    noise: NoiseModel | None = None,
    seed=0,
    n_workers: int = 1,
) -> MeasurementGroup:
    """Simulate one MeasurementData per setting.

    Each setting uses its own RNG substream derived from (seed, index), so the
    result is identical whether settings are processed sequentially or in
    parallel (``n_workers`` > 1).
    """
    settings = list(settings)
    root = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))

    def one(i: int) -> MeasurementData:
        return sample_measurements(state, settings[i], n_shots, noise, root.stream(i))

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            entries = list(pool.map(one, range(len(settings))))
    else:
        entries = [one(i) for i in range(len(settings))]
    return MeasurementGroup(tuple(entries))


def pauli_expectation(state: QuantumState, observable: PauliObservable) -> float:
    """Exact <O> for a Pauli-sum observable on any backend."""
    n = state.n_qubits
    if observable.n_qubits != n:
        raise SizeMismatch(f"observable has {observable.n_qubits} qubits, state has {n}")
    total = 0.0
    if isinstance(state, PureStateDense):
        base = state.amplitudes
        for coeff, letters in observable.terms:
            vec = base.reshape((2,) * n)
            for site, ch in enumerate(letters, start=1):
                if ch != "I":
                    vec = _apply_1q(vec, PAULI_MATRICES[ch], site)
            total += coeff * np.vdot(base, vec.reshape(-1)).real
        return total
    if isinstance(state, DensityMatrixDense):
        for coeff, letters in observable.terms:
            op = np.eye(1, dtype=complex)
            for ch in letters:
                op = np.kron(op, PAULI_MATRICES[ch])
            total += coeff * np.einsum("ij,ji->", op, state.matrix).real
        return total
    norm_sq = state.norm() ** 2
    for coeff, letters in observable.terms:
        left = np.ones((1, 1), dtype=complex)
        for t, ch in zip(state.site_tensors, letters):
            left = np.einsum("ab,asx,st,bty->xy", left, t.conj(), PAULI_MATRICES[ch], t)
        total += coeff * left[0, 0].real / norm_sq
    return total
