"""Property estimators acting on shadows or directly on measurement groups.

Linear estimators (expectation values) average tr(O rho_hat) over snapshots;
for factorized shadows and a Pauli string this is a product of N single-site
traces, which keeps the cost linear in system size. Polynomial functionals
(trace moments) run U-statistics over batch shadows. Purity and overlap can
bypass shadows entirely via the Hamming kernel (-2)^(-D(s,s')) on bitstring
pairs. XEB utilities compare computational-basis data against ideal
amplitudes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _ustat
from .core import (
    LOCAL_SETTINGS,
    PAULI_MATRICES,
    ComputationalBasisSetting,
    LocalUnitarySetting,
    MeasurementData,
    MeasurementGroup,
    PauliObservable,
)
from .errors import (
    NotEnoughBatches,
    NotEnoughSamples,
    NotEnoughShots,
    SettingsMismatch,
    SizeMismatch,
    TooLarge,
    UnsupportedSetting,
)
from .shadows import BatchShadowSet, DenseShadow, FactorizedShadow
from .sim import MatrixProductState, PureStateDense, _ints_from_bits


@dataclass(frozen=True)
class EstimateWithError:
    """A point estimate, its standard error when requested, and sample count."""

    value: float
    sem: float | None
    n_samples: int


def _finish(values: np.ndarray, compute_sem: bool) -> EstimateWithError:
    value = float(values.mean())
    err = None
    if compute_sem:
        if values.size < 2:
            raise NotEnoughSamples("standard error needs at least two samples")
        err = float(values.std(ddof=1) / np.sqrt(values.size))
    return EstimateWithError(value, err, int(values.size))


def _pauli_dense(letters: str) -> np.ndarray:
    op = np.eye(1, dtype=complex)
    for ch in letters:
        op = np.kron(op, PAULI_MATRICES[ch])
    return op


def expect_shadow(observable: PauliObservable, shadows, compute_sem: bool = False):
    """Mean of tr(O rho_hat) over a homogeneous list of shadows."""
    shadows = list(shadows)
    if not shadows:
        raise NotEnoughSamples("need at least one shadow")
    first = shadows[0]
    count = len(shadows)
    if isinstance(first, FactorizedShadow):
        n = first.n_qubits
        if observable.n_qubits != n:
            raise SizeMismatch(
                f"observable has {observable.n_qubits} qubits, shadows have {n}"
            )
        stack = np.stack([s.site_factors for s in shadows])
        values = np.zeros(count)
        for coeff, letters in observable.terms:
            term = np.full(count, float(coeff))
            for i, ch in enumerate(letters):
                if ch == "I":
                    continue  # factors have unit trace
                term *= np.einsum("mab,ba->m", stack[:, i], PAULI_MATRICES[ch]).real
            values += term
    elif isinstance(first, DenseShadow):
        n = first.n_qubits
        if observable.n_qubits != n:
            raise SizeMismatch(
                f"observable has {observable.n_qubits} qubits, shadows have {n}"
            )
        stack = np.stack([s.matrix for s in shadows])
        values = np.zeros(count)
        for coeff, letters in observable.terms:
            values += coeff * np.einsum("mij,ji->m", stack, _pauli_dense(letters)).real
    else:
        raise TypeError(f"unsupported shadow type {type(first).__name__}")
    return _finish(values, compute_sem)


def trace_moments(batches: BatchShadowSet, ks) -> list:
    """Unbiased tr(rho^k) estimates from batch shadows, one per requested k."""
    ks = [int(k) for k in ks]
    if any(k < 2 for k in ks):
        raise ValueError("trace moments are defined for k >= 2")
    mats = [b.matrix for b in batches]
    if len(mats) < max(ks):
        raise NotEnoughBatches(
            f"k = {max(ks)} needs at least {max(ks)} batches, got {len(mats)}"
        )
    return [
        EstimateWithError(_ustat.u_statistic(mats, k), None, len(mats)) for k in ks
    ]


def _hamming_weights(rows_a: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    distances = (rows_a[:, None, :] != rows_b[None, :, :]).sum(axis=2)
    return (-0.5) ** distances


def purity_direct(group: MeasurementGroup, compute_sem: bool = False):
    """tr(rho^2) from raw bitstrings via the Hamming kernel, no shadows.

    Per setting, ordered shot pairs l != l' are weighted by (-2)^(-D); the
    diagonal removal is the within-setting shot-bias correction.
    """
    scale = 2.0**group.n_qubits
    values = np.empty(group.n_settings)
    for r, data in enumerate(group):
        if not isinstance(data.setting, LOCAL_SETTINGS):
            raise UnsupportedSetting("direct purity requires product-form settings")
        m = data.n_shots
        if m < 2:
            raise NotEnoughShots("direct purity needs at least two shots per setting")
        w = _hamming_weights(data.outcomes, data.outcomes)
        np.fill_diagonal(w, 0.0)
        values[r] = scale * w.sum() / (m * (m - 1))
    return _finish(values, compute_sem)


def _check_common_settings(group1: MeasurementGroup, group2: MeasurementGroup):
    if group1.n_qubits != group2.n_qubits:
        raise SettingsMismatch("groups disagree on qubit count")
    if group1.n_settings != group2.n_settings:
        raise SettingsMismatch("groups disagree on the number of settings")
    for d1, d2 in zip(group1, group2):
        if not isinstance(d1.setting, LOCAL_SETTINGS):
            raise UnsupportedSetting("direct overlap requires product-form settings")
        if d1.setting != d2.setting:
            raise SettingsMismatch("groups were not measured with common settings")


def overlap_direct(group1: MeasurementGroup, group2: MeasurementGroup, compute_sem=False):
    """tr(rho1 rho2) from two groups sharing the same randomized settings."""
    _check_common_settings(group1, group2)
    scale = 2.0**group1.n_qubits
    values = np.empty(group1.n_settings)
    for r, (d1, d2) in enumerate(zip(group1, group2)):
        w = _hamming_weights(d1.outcomes, d2.outcomes)
        values[r] = scale * w.sum() / (d1.n_shots * d2.n_shots)
    return _finish(values, compute_sem)


def cross_platform_fidelity(group1, group2, compute_sem: bool = False):
    """F = tr(rho1 rho2) / max(tr rho1^2, tr rho2^2) from common measurements."""
    overlap = overlap_direct(group1, group2, compute_sem)
    p1 = purity_direct(group1, compute_sem)
    p2 = purity_direct(group2, compute_sem)
    larger = p1 if p1.value >= p2.value else p2
    if larger.value <= 0:
        raise ValueError("purity estimates are not positive; cannot normalize")
    value = overlap.value / larger.value
    err = None
    if compute_sem:
        # first-order propagation; the overlap-purity covariance is ignored
        err = float(
            np.hypot(
                overlap.sem / larger.value,
                overlap.value * larger.sem / larger.value**2,
            )
        )
    return EstimateWithError(value, err, min(group1.n_settings, group2.n_settings))


def _is_computational(setting) -> bool:
    if isinstance(setting, ComputationalBasisSetting):
        return True
    if isinstance(setting, LocalUnitarySetting):
        return bool(np.abs(setting.unitaries - np.eye(2)).max() < 1e-12)
    return False


def _bitstring_probabilities(state, bits: np.ndarray) -> np.ndarray:
    if isinstance(state, PureStateDense):
        return np.abs(state.amplitudes[_ints_from_bits(bits)]) ** 2
    cur = state.site_tensors[0][0, bits[:, 0], :]  # (rows, bond)
    for i, t in enumerate(state.site_tensors[1:], start=1):
        sel = t[:, bits[:, i], :]  # (bond, rows, bond')
        cur = np.einsum("ml,lmr->mr", cur, sel)
    amps = cur[:, 0]
    return np.abs(amps) ** 2 / state.norm() ** 2


def xeb(ideal_state, data: MeasurementData) -> float:
    """Linear cross-entropy fidelity 2^N E_exp[p(s)] - 1 against ideal amplitudes."""
    if not isinstance(ideal_state, (PureStateDense, MatrixProductState)):
        raise TypeError("XEB needs a pure state (dense vector or MPS)")
    if not _is_computational(data.setting):
        raise UnsupportedSetting("XEB data must be measured in the computational basis")
    if ideal_state.n_qubits != data.n_qubits:
        raise SizeMismatch("ideal state and data disagree on qubit count")
    p = _bitstring_probabilities(ideal_state, data.outcomes)
    return float(2.0**data.n_qubits * p.mean() - 1.0)


def self_xeb(ideal_state) -> float:
    """XEB normalization 2^N sum_s p(s)^2 - 1 (the collision probability recast).

    The bias-corrected fidelity is xeb(...) / self_xeb(...).
    """
    n = ideal_state.n_qubits
    if isinstance(ideal_state, PureStateDense):
        p = np.abs(ideal_state.amplitudes) ** 2
        return float(2.0**n * (p @ p) - 1.0)
    if isinstance(ideal_state, MatrixProductState):
        chi = max(ideal_state.bond_dims, default=1)
        if chi**4 > 2**24:
            raise TooLarge(f"self-XEB transfer contraction too large for bond dim {chi}")
        left = np.ones((1, 1, 1, 1), dtype=complex)
        for t in ideal_state.site_tensors:
            left = np.einsum(
                "abcd,asx,bsy,csz,dsw->xyzw", left, t, t.conj(), t, t.conj(), optimize=True
            )
        collision = left[0, 0, 0, 0].real / ideal_state.norm() ** 4
        return float(2.0**n * collision - 1.0)
    raise TypeError("self-XEB needs a pure state (dense vector or MPS)")
