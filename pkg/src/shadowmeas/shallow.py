"""Shallow shadows at desk scale.

The measurement channel of a circuit ensemble maps rho to the expected
measured snapshot E_U[sum_s <s|U rho U^dag|s> U^dag|s><s|U]. Here it is
estimated as a dense superoperator by averaging the exactly computed
per-circuit superoperator over sampled circuits, then pseudo-inverted;
measurement outcomes map to unbiased shadows via rho_hat = Minv(U^dag|s><s|U).

Channel estimation and data acquisition must use independent circuit samples
from the same (n_qubits, depth) ensemble; the channel records only those two
numbers, never its training circuits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ShallowCircuitSetting, Subsystem, _frozen
from .errors import (
    ChannelNotInvertible,
    EnsembleMismatch,
    InvalidSize,
    TooLarge,
    UnsupportedSetting,
)
from .sampling import RngSeed, shallow_setting
from .shadows import DenseShadow
from .sim import _ints_from_bits, setting_unitary

CHANNEL_MAX_QUBITS = 6


def _probe_states(dim: int, count: int = 3):
    g = np.random.default_rng(7)
    for _ in range(count):
        z = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
        rho = z @ z.conj().T
        yield rho / np.trace(rho).real


@dataclass(frozen=True, eq=False)
class DenseChannel:
    """Measurement channel as a 4^N x 4^N superoperator on vectorized operators."""

    n_qubits: int
    depth: int
    superoperator: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_qubits > CHANNEL_MAX_QUBITS:
            raise TooLarge(
                f"dense channels support 1..{CHANNEL_MAX_QUBITS} qubits"
            )
        d2 = 4**self.n_qubits
        m = np.asarray(self.superoperator, dtype=complex)
        if m.shape != (d2, d2):
            raise ValueError(f"superoperator must be {d2}x{d2}")
        d = 2**self.n_qubits
        for rho in _probe_states(d):
            out = (m @ rho.reshape(-1)).reshape(d, d)
            if abs(np.trace(out).real - 1.0) > 1e-6:
                raise ValueError("channel is not trace preserving within tolerance")
            if np.abs(out - out.conj().T).max() > 1e-6:
                raise ValueError("channel is not Hermiticity preserving within tolerance")
        object.__setattr__(self, "superoperator", _frozen(m, complex))


@dataclass(frozen=True, eq=False)
class InverseChannel:
    """Pseudo-inverse of a measurement channel with conditioning diagnostics."""

    n_qubits: int
    depth: int
    superoperator: np.ndarray
    condition_number: float
    residual: float  # max deviation of Minv @ M from the identity

    def __post_init__(self):
        object.__setattr__(
            self, "superoperator", _frozen(self.superoperator, complex)
        )


def _snapshot_rows(u: np.ndarray) -> np.ndarray:
    """Row s is vec(U^dag |s><s| U), row-major vectorization."""
    return np.einsum("si,sj->sij", u.conj(), u).reshape(u.shape[0], -1)


def _circuit_superoperator(u: np.ndarray) -> np.ndarray:
    rows = _snapshot_rows(u)
    return rows.T @ rows.conj()


def estimate_channel(n_qubits: int, depth: int, n_circuits: int, seed=0) -> DenseChannel:
    """Monte-Carlo channel estimate over ``n_circuits`` sampled brickwork circuits.

    Each circuit's superoperator is computed exactly (no sampling within a
    circuit), so the estimator is unbiased in the circuit ensemble. Depth 0 is
    a single-point ensemble and is returned exactly.
    """
    if n_qubits < 1:
        raise InvalidSize("n_qubits must be >= 1")
    if n_qubits > CHANNEL_MAX_QUBITS:
        raise TooLarge(f"dense channels support at most {CHANNEL_MAX_QUBITS} qubits")
    if depth < 0:
        raise InvalidSize("depth must be >= 0")
    if depth == 0:
        u = np.eye(2**n_qubits, dtype=complex)
        return DenseChannel(n_qubits, 0, _circuit_superoperator(u))
    if n_circuits < 1:
        raise InvalidSize("n_circuits must be >= 1")
    root = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    d2 = 4**n_qubits
    acc = np.zeros((d2, d2), dtype=complex)
    for i in range(n_circuits):
        setting = shallow_setting(n_qubits, depth, root.stream(i))
        acc += _circuit_superoperator(setting_unitary(setting))
    return DenseChannel(n_qubits, depth, acc / n_circuits)


def invert_channel(channel: DenseChannel, rcond: float = 1e-8) -> InverseChannel:
    """SVD pseudo-inverse with singular values below rcond * sigma_max truncated."""
    m = channel.superoperator
    u, s, vh = np.linalg.svd(m)
    if s[0] <= 0:
        raise ChannelNotInvertible("channel superoperator is zero")
    keep = s > rcond * s[0]
    if not keep.any():
        raise ChannelNotInvertible("no singular values survive the rcond cutoff")
    minv = (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T
    condition = float(s[0] / s[keep][-1])
    residual = float(np.abs(minv @ m - np.eye(m.shape[0])).max())
    return InverseChannel(channel.n_qubits, channel.depth, minv, condition, residual)


def shallow_shadows(group, inverse: InverseChannel) -> list:
    """One dense shadow per (setting, shot): rho_hat = Minv(U^dag |s><s| U)."""
    for data in group:
        setting = data.setting
        if not isinstance(setting, ShallowCircuitSetting):
            raise UnsupportedSetting("shallow shadows need shallow-circuit settings")
        if (setting.n_qubits, setting.depth) != (inverse.n_qubits, inverse.depth):
            raise EnsembleMismatch(
                f"group circuits are ({setting.n_qubits} qubits, depth {setting.depth}) "
                f"but the channel was learned on ({inverse.n_qubits}, depth {inverse.depth})"
            )
    n = inverse.n_qubits
    d = 2**n
    sites = Subsystem.full(n)
    out = []
    for data in group:
        rows = _snapshot_rows(setting_unitary(data.setting))
        picked = rows[_ints_from_bits(data.outcomes)]
        mats = (picked @ inverse.superoperator.T).reshape(-1, d, d)
        # exact Hermitian part: SVD pinv need not preserve Hermiticity exactly
        mats = 0.5 * (mats + mats.conj().transpose(0, 2, 1))
        out.extend(DenseShadow(m, sites) for m in mats)
    return out
