"""Randomized measurements with classical shadows.

The workflow has three stages: sample measurement settings (``sampling``),
acquire bitstrings on a quantum device or simulate them classically (``sim``),
and post-process into shadows and property estimates (``shadows``,
``estimators``, ``stats``, ``shallow``). On-disk interchange lives in ``io``
and the command line in ``cli``.
"""

from .core import (
    BitString,
    ComputationalBasisSetting,
    LocalUnitarySetting,
    MeasurementData,
    MeasurementGroup,
    PauliObservable,
    Setting,
    ShallowCircuitSetting,
    Subsystem,
    reduce_group_to_subsystem,
    reduce_observable_to_subsystem,
)
from .errors import (
    CalibrationOutOfRange,
    ChannelNotInvertible,
    CorruptFile,
    EnsembleMismatch,
    InvalidSize,
    InvalidSubsystem,
    NotEnoughBatches,
    NotEnoughSamples,
    NotEnoughShots,
    NotSupportedOnSubsystem,
    RandomizedMeasurementError,
    SettingsMismatch,
    SizeMismatch,
    TooLarge,
    TooLargeForDense,
    UnsupportedReferenceState,
    UnsupportedSetting,
)
from .estimators import (
    EstimateWithError,
    cross_platform_fidelity,
    expect_shadow,
    overlap_direct,
    purity_direct,
    self_xeb,
    trace_moments,
    xeb,
)
from .sampling import (
    RngSeed,
    haar_unitary,
    local_unitary_setting,
    pauli_basis_setting,
    sample_settings,
    shallow_setting,
)
from .shadows import (
    BatchShadowSet,
    CalibrationVector,
    DenseShadow,
    FactorizedShadow,
    calibration_vector,
    dense_shadows,
    factorized_shadows,
    reduce_shadow,
    shadow_to_dense,
)
from .shallow import (
    DenseChannel,
    InverseChannel,
    estimate_channel,
    invert_channel,
    shallow_shadows,
)
from .sim import (
    DensityMatrixDense,
    MatrixProductState,
    MeasurementProbability,
    NoiseModel,
    PureStateDense,
    born_probabilities,
    ghz_state,
    pauli_expectation,
    product_zero,
    random_mps,
    sample_measurements,
    simulate_group,
)
from .stats import JackknifeResult, jackknife_moments, sem

__version__ = "0.1.0"

__all__ = [
    "BitString",
    "BatchShadowSet",
    "CalibrationOutOfRange",
    "CalibrationVector",
    "ChannelNotInvertible",
    "ComputationalBasisSetting",
    "CorruptFile",
    "DenseChannel",
    "DenseShadow",
    "DensityMatrixDense",
    "EnsembleMismatch",
    "EstimateWithError",
    "FactorizedShadow",
    "InvalidSize",
    "InvalidSubsystem",
    "InverseChannel",
    "JackknifeResult",
    "LocalUnitarySetting",
    "MatrixProductState",
    "MeasurementData",
    "MeasurementGroup",
    "MeasurementProbability",
    "NoiseModel",
    "NotEnoughBatches",
    "NotEnoughSamples",
    "NotEnoughShots",
    "NotSupportedOnSubsystem",
    "PauliObservable",
    "PureStateDense",
    "RandomizedMeasurementError",
    "RngSeed",
    "Setting",
    "SettingsMismatch",
    "ShallowCircuitSetting",
    "SizeMismatch",
    "Subsystem",
    "TooLarge",
    "TooLargeForDense",
    "UnsupportedReferenceState",
    "UnsupportedSetting",
    "born_probabilities",
    "calibration_vector",
    "cross_platform_fidelity",
    "dense_shadows",
    "estimate_channel",
    "expect_shadow",
    "factorized_shadows",
    "ghz_state",
    "haar_unitary",
    "invert_channel",
    "jackknife_moments",
    "local_unitary_setting",
    "overlap_direct",
    "pauli_basis_setting",
    "pauli_expectation",
    "product_zero",
    "purity_direct",
    "random_mps",
    "reduce_group_to_subsystem",
    "reduce_observable_to_subsystem",
    "reduce_shadow",
    "sample_measurements",
    "sample_settings",
    "self_xeb",
    "sem",
    "shadow_to_dense",
    "shallow_setting",
    "shallow_shadows",
    "simulate_group",
    "trace_moments",
    "xeb",
]
