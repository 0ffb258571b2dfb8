"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericError / TrainingError / ProtocolError -> 3.
"""


class PragcommError(Exception):
    """Base class for package errors."""


class DimensionError(PragcommError):
    """Array shapes incompatible with an operation's contract."""


class ConfigError(PragcommError):
    """Invalid configuration (bad keys, impossible sizes, bad mappings)."""


class DataError(PragcommError):
    """Malformed dataset, checkpoint, or metrics record."""


class ProtocolError(PragcommError):
    """Game or episode state machine misuse (e.g. stepping a finished episode)."""


class TrainingError(PragcommError):
    """Training pipeline misuse (e.g. sampling from an underfilled buffer)."""


class NumericError(PragcommError):
    """NaN/Inf or divergence detected in numeric state."""
