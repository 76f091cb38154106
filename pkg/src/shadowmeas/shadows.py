"""Construction of classical shadows from measurement groups.

The single-snapshot estimator for a product setting with outcome bits s is
the tensor product over sites of 3 U_i^dag |s_i><s_i| U_i - I. With a
calibration vector G the per-site factor generalizes to

    (3/G_i) U_i^dag |s_i><s_i| U_i - (3 - G_i)/(2 G_i) I,

which inverts twirled per-qubit depolarizing readout noise and reduces
exactly to the standard factor at G_i = 1. Every factor has unit trace, so
reducing a factorized shadow to a subsystem just drops the other factors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    LOCAL_SETTINGS,
    MeasurementGroup,
    Subsystem,
    _as_subsystem,
    _frozen,
)
from .errors import (
    CalibrationOutOfRange,
    InvalidSize,
    SizeMismatch,
    TooLargeForDense,
    UnsupportedReferenceState,
    UnsupportedSetting,
)
from .sim import MatrixProductState, PureStateDense

DENSE_SHADOW_MAX_QUBITS = 12

CALIBRATION_FLOOR = 0.05
CALIBRATION_CEILING = 1.2  # 1 + 0.2 tolerance for statistical overshoot


@dataclass(frozen=True, eq=False)
class FactorizedShadow:
    """Snapshot stored as per-site 2x2 factors; memory O(N)."""

    site_factors: np.ndarray  # (n_qubits, 2, 2)
    weight: float = 1.0  # reserved for importance sampling; fixed at 1

    def __post_init__(self):
        f = np.asarray(self.site_factors, dtype=complex)
        if f.ndim != 3 or f.shape[1:] != (2, 2) or f.shape[0] < 1:
            raise ValueError("site_factors must have shape (n_qubits, 2, 2)")
        if np.abs(f - f.conj().swapaxes(1, 2)).max() > 1e-10:
            raise ValueError("factors must be Hermitian")
        traces = np.trace(f, axis1=1, axis2=2)
        if np.abs(traces - 1.0).max() > 1e-10:
            raise ValueError("factors must have unit trace")
        object.__setattr__(self, "site_factors", _frozen(f, complex))

    @property
    def n_qubits(self) -> int:
        return self.site_factors.shape[0]


@dataclass(frozen=True, eq=False)
class DenseShadow:
    """Snapshot (or batch average) stored as a full matrix on a subsystem."""

    matrix: np.ndarray
    sites: Subsystem
    weight: float = 1.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 2 ** len(self.sites)
        if m.shape != (d, d):
            raise SizeMismatch(f"matrix must be {d}x{d} for {len(self.sites)} sites")
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise ValueError("shadow matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError("shadow matrix must have unit trace")
        object.__setattr__(self, "matrix", _frozen(m, complex))

    @property
    def n_qubits(self) -> int:
        return len(self.sites)


@dataclass(frozen=True, eq=False)
class BatchShadowSet:
    """Disjoint batch averages of per-shot shadows, ready for U-statistics."""

    batches: tuple  # of DenseShadow
    batch_assignment: tuple  # setting index -> batch index

    def __post_init__(self):
        batches = tuple(self.batches)
        assignment = tuple(int(b) for b in self.batch_assignment)
        if not batches:
            raise ValueError("need at least one batch")
        used = set(assignment)
        if used != set(range(len(batches))):
            raise ValueError("assignment must cover every batch exactly")
        object.__setattr__(self, "batches", batches)
        object.__setattr__(self, "batch_assignment", assignment)

    @property
    def n_batches(self) -> int:
        return len(self.batches)

    def __len__(self) -> int:
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)


@dataclass(frozen=True, eq=False)
class CalibrationVector:
    """Per-qubit depolarization parameters G_i for robust shadow inversion."""

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim != 1 or g.size < 1:
            raise ValueError("g must be a 1-D array")
        if g.min() < CALIBRATION_FLOOR:
            raise CalibrationOutOfRange(
                f"calibration coefficient {g.min():.4f} below floor {CALIBRATION_FLOOR}"
            )
        if g.max() > CALIBRATION_CEILING:
            raise CalibrationOutOfRange(
                f"calibration coefficient {g.max():.4f} above ceiling {CALIBRATION_CEILING}"
            )
        object.__setattr__(self, "g", _frozen(g, float))

    @property
    def n_qubits(self) -> int:
        return self.g.size

    def reduce(self, sub) -> "CalibrationVector":
        sub = _as_subsystem(sub)
        sub.validate_within(self.n_qubits)
        return CalibrationVector(self.g[[s - 1 for s in sub.sites]])


def _check_local(setting):
    if not isinstance(setting, LOCAL_SETTINGS):
        raise UnsupportedSetting("shadow construction requires product-form settings")


def _site_factor_pair(setting, g_values):
    """Per-site factors for outcome 0 and 1: two (N, 2, 2) arrays."""
    us = setting.site_unitaries()
    eye = np.eye(2, dtype=complex)
    scale = (3.0 / g_values)[:, None, None]
    shift = ((3.0 - g_values) / (2.0 * g_values))[:, None, None]
    factors = []
    for s in (0, 1):
        rows = us[:, s, :]  # <s| U  per site
        proj = rows.conj()[:, :, None] * rows[:, None, :]  # U^dag |s><s| U
        factors.append(scale * proj - shift * eye)
    return factors[0], factors[1]


def _snapshot_factors(data, g_values) -> np.ndarray:
    """Factors for every shot of one setting: (n_shots, N, 2, 2)."""
    f0, f1 = _site_factor_pair(data.setting, g_values)
    pick = data.outcomes[:, :, None, None].astype(bool)
    return np.where(pick, f1[None], f0[None])


def _calibration_values(group: MeasurementGroup, calibration) -> np.ndarray:
    if calibration is None:
        return np.ones(group.n_qubits)
    if calibration.n_qubits != group.n_qubits:
        raise SizeMismatch(
            f"calibration has {calibration.n_qubits} qubits, group has {group.n_qubits}"
        )
    return np.asarray(calibration.g, dtype=float)


def factorized_shadows(group: MeasurementGroup, calibration=None) -> list:
    """One FactorizedShadow per (setting, shot), in group order.

    With ``calibration`` the robust per-site inversion is used; G = 1
    reproduces the standard estimator bit for bit.
    """
    g_values = _calibration_values(group, calibration)
    shadows = []
    for data in group:
        _check_local(data.setting)
        for factors in _snapshot_factors(data, g_values):
            shadows.append(FactorizedShadow(factors))
    return shadows


def _dense_from_factors(factors: np.ndarray) -> np.ndarray:
    """Tensor-product reduction (M, N, 2, 2) -> (M, 2^N, 2^N)."""
    out = factors[:, 0]
    dim = 2
    for i in range(1, factors.shape[1]):
        out = np.einsum("aij,akl->aikjl", out, factors[:, i]).reshape(-1, dim * 2, dim * 2)
        dim *= 2
    return out


def shadow_to_dense(shadow: FactorizedShadow) -> DenseShadow:
    """Expand a factorized shadow to its full-matrix form."""
    if shadow.n_qubits > DENSE_SHADOW_MAX_QUBITS:
        raise TooLargeForDense(
            f"dense shadows support at most {DENSE_SHADOW_MAX_QUBITS} qubits"
        )
    matrix = _dense_from_factors(shadow.site_factors[None])[0]
    return DenseShadow(matrix, Subsystem.full(shadow.n_qubits), shadow.weight)


def _batch_sizes(n_settings: int, n_batches: int) -> list:
    """Contiguous batch sizes; trailing batches absorb the remainder."""
    if n_batches < 1:
        raise InvalidSize("n_batches must be >= 1")
    if n_batches > n_settings:
        raise InvalidSize(
            f"cannot split {n_settings} settings into {n_batches} nonempty batches"
        )
    q, r = divmod(n_settings, n_batches)
    return [q] * (n_batches - r) + [q + 1] * r


def dense_shadows(group: MeasurementGroup, n_batches=None, calibration=None):
    """Dense per-shot shadows, or batch-averaged shadows when ``n_batches`` is set.

    Batches partition settings contiguously by index; each batch shadow is the
    arithmetic mean of all snapshots of its settings.
    """
    n = group.n_qubits
    if n > DENSE_SHADOW_MAX_QUBITS:
        raise TooLargeForDense(
            f"dense shadows support at most {DENSE_SHADOW_MAX_QUBITS} qubits"
        )
    g_values = _calibration_values(group, calibration)
    sites = Subsystem.full(n)
    for data in group:
        _check_local(data.setting)

    if n_batches is None:
        out = []
        for data in group:
            for m in _dense_from_factors(_snapshot_factors(data, g_values)):
                out.append(DenseShadow(m, sites))
        return out

    sizes = _batch_sizes(group.n_settings, int(n_batches))
    assignment = []
    for b, size in enumerate(sizes):
        assignment.extend([b] * size)
    dim = 2**n
    sums = np.zeros((len(sizes), dim, dim), dtype=complex)
    counts = np.zeros(len(sizes), dtype=np.int64)
    for idx, data in enumerate(group):
        b = assignment[idx]
        mats = _dense_from_factors(_snapshot_factors(data, g_values))
        sums[b] += mats.sum(axis=0)
        counts[b] += mats.shape[0]
    batches = tuple(
        DenseShadow(sums[b] / counts[b], sites) for b in range(len(sizes))
    )
    return BatchShadowSet(batches, tuple(assignment))


def _is_all_zero_reference(psi0) -> bool:
    if isinstance(psi0, PureStateDense):
        p = np.abs(psi0.amplitudes) ** 2
        return bool(abs(p[0] - 1.0) < 1e-10)
    if isinstance(psi0, MatrixProductState):
        if any(d != 1 for d in psi0.bond_dims):
            return False
        amp0 = 1.0
        for t in psi0.site_tensors:
            w = abs(t[0, 0, 0]) ** 2 + abs(t[0, 1, 0]) ** 2
            if w == 0 or abs(t[0, 0, 0]) ** 2 / w < 1 - 1e-10:
                return False
            amp0 *= abs(t[0, 0, 0])
        return True
    return False


def calibration_vector(psi0, calibration_group: MeasurementGroup) -> CalibrationVector:
    """Estimate per-qubit depolarization parameters from a |0...0> experiment.

    G_i is the standard-shadow estimate of <Z_i> over all calibration
    snapshots; on the all-zero reference its expectation equals the per-qubit
    depolarization parameter.
    """
    if not _is_all_zero_reference(psi0):
        raise UnsupportedReferenceState("calibration requires the |0...0> product state")
    if psi0.n_qubits != calibration_group.n_qubits:
        raise SizeMismatch("reference state and calibration group disagree on qubit count")
    n = calibration_group.n_qubits
    ones = np.ones(n)
    total = np.zeros(n)
    count = 0
    for data in calibration_group:
        _check_local(data.setting)
        factors = _snapshot_factors(data, ones)
        # tr(Z rho_i) = rho_i[0,0] - rho_i[1,1]
        total += (factors[:, :, 0, 0] - factors[:, :, 1, 1]).real.sum(axis=0)
        count += data.n_shots
    return CalibrationVector(total / count)


def reduce_shadow(shadow: FactorizedShadow, sub) -> FactorizedShadow:
    """Keep only the listed site factors (valid because factors have trace 1)."""
    sub = _as_subsystem(sub)
    sub.validate_within(shadow.n_qubits)
    return FactorizedShadow(
        shadow.site_factors[[s - 1 for s in sub.sites]], shadow.weight
    )
