"""Exception types shared across the package."""


class RandomizedMeasurementError(Exception):
    """Base class for all domain errors raised by shadowmeas."""


class InvalidSize(RandomizedMeasurementError):
    """A size argument (qubit count, depth, batch count, ...) is out of range."""


class SizeMismatch(RandomizedMeasurementError):
    """Two objects that must share a dimension do not."""


class UnsupportedSetting(RandomizedMeasurementError):
    """The operation requires a different kind of measurement setting."""


class InvalidSubsystem(RandomizedMeasurementError):
    """Subsystem sites are out of range, duplicated, or not increasing."""


class NotSupportedOnSubsystem(RandomizedMeasurementError):
    """An observable acts nontrivially outside the requested subsystem."""


class TooLargeForDense(RandomizedMeasurementError):
    """The system is too large for a dense 2^N representation."""


class TooLarge(RandomizedMeasurementError):
    """The requested computation exceeds the supported size limits."""


class CalibrationOutOfRange(RandomizedMeasurementError):
    """A calibration coefficient lies outside its admissible interval."""


class UnsupportedReferenceState(RandomizedMeasurementError):
    """Calibration supports only the all-zero product reference state."""


class NotEnoughShots(RandomizedMeasurementError):
    """The estimator needs more projective measurements per setting."""


class NotEnoughSamples(RandomizedMeasurementError):
    """A standard error requires at least two samples."""


class NotEnoughBatches(RandomizedMeasurementError):
    """Too few batches for the requested U-statistic or jackknife."""


class SettingsMismatch(RandomizedMeasurementError):
    """Two measurement groups do not share a common settings list."""


class ChannelNotInvertible(RandomizedMeasurementError):
    """The measurement channel is rank deficient beyond tolerance."""


class EnsembleMismatch(RandomizedMeasurementError):
    """Measurement circuits were not drawn from the channel's ensemble."""


class CorruptFile(RandomizedMeasurementError):
    """An on-disk manifest or payload fails validation."""
