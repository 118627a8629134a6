"""Exception hierarchy for the hdwear package.

Grouped by subsystem so callers (and the CLI exit-code mapping) can catch
whole families: ``DataError`` for anything wrong with input data,
``ModelIOError`` for model-file problems.
"""


class HDWearError(Exception):
    """Base class for all hdwear errors."""


class InvalidDimensionError(HDWearError, ValueError):
    """Hypervector dimension is zero, negative, or otherwise unusable."""


class DimensionMismatchError(HDWearError, ValueError):
    """Two operands have different dimensions."""


class InvalidArgumentError(HDWearError, ValueError):
    """An argument violates an operation's precondition."""


class ZeroNormError(HDWearError, ArithmeticError):
    """Cosine similarity requested against an all-zero vector."""


class UnknownSymbolError(HDWearError, KeyError):
    """Symbol or sensor id not present in the codebook."""


class UnknownClassError(HDWearError, KeyError):
    """Label not in the model's class list."""


class ModelNotTrainedError(HDWearError, RuntimeError):
    """Operation requires a model that has seen at least one sample."""


class ConfigMismatchError(HDWearError, ValueError):
    """Model configuration incompatible with the supplied data."""


class DataError(HDWearError):
    """Base class for input-data problems."""


class SchemaError(DataError):
    """CSV header does not match the declared schema."""


class CsvParseError(DataError):
    """A CSV cell could not be parsed; message carries row/column location."""


class EmptyInputError(DataError):
    """Input file or split contains no usable rows."""


class EmptyDatasetError(DataError):
    """Evaluation or training invoked on an empty dataset."""


class UnknownSubjectError(DataError, KeyError):
    """Requested subject id does not occur in the dataset."""


class InvalidSampleError(DataError, ValueError):
    """A sample value is NaN or infinite."""


class ModelIOError(HDWearError):
    """Base class for model serialization failures."""


class BadMagicError(ModelIOError):
    """File does not start with the model magic bytes."""


class UnsupportedVersionError(ModelIOError):
    """Model file uses a format version this build cannot read."""


class TruncatedModelError(ModelIOError):
    """Model file ends before the declared payload is complete."""


class ChecksumError(ModelIOError):
    """Model file checksum does not match its payload."""
