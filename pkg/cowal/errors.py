"""
Error Hierarchy

Every failure the package raises derives from CowalError. The four
intermediate classes decide the command-line exit code.
"""


class CowalError(Exception):
    """Base exception for cowal errors"""

    exit_code = 1


class ConfigError(CowalError):
    """Invalid parameters or usage"""

    exit_code = 2


class DataError(CowalError):
    """Malformed, missing or inconsistent input data"""

    exit_code = 3


class SelectionError(CowalError):
    """A selection or clustering request cannot be satisfied"""

    exit_code = 3


class NumericError(CowalError):
    """Numeric failure (divergence, degenerate batch, bad reference)"""

    exit_code = 4


# Configuration


class BadParams(ConfigError):
    """Generator or training parameters out of range"""

    pass


class UnknownStrategyError(ConfigError):
    """Strategy name is not registered"""

    pass


# Data


class MissingFile(DataError):
    """A referenced file does not exist"""

    pass


class SchemaViolation(DataError):
    """Manifest field missing or of the wrong kind"""

    pass


class InconsistentCounts(DataError):
    """Manifest frame total does not match the embedding row count"""

    pass


class BadMagic(DataError):
    """Binary file does not start with the expected magic string"""

    pass


class TruncatedFile(DataError):
    """Binary file ends before its declared payload"""

    pass


class TrailingBytes(DataError):
    """Binary file carries bytes past its declared payload"""

    pass


class NonFiniteValue(DataError):
    """NaN or infinity in stored data"""

    pass


class ZeroNormRow(DataError):
    """Embedding row cannot be normalized"""

    pass


class NotADistribution(DataError):
    """Probability vector is negative or does not sum to one"""

    pass


class MismatchedGrids(DataError):
    """Curves do not share a step grid"""

    pass


class EmptyInput(DataError):
    """Nothing to operate on"""

    pass


class IoFailure(DataError):
    """Reading or writing a file failed"""

    pass


class ShapeMismatch(DataError):
    """Array dimensions do not agree"""

    pass


class MalformedCsv(DataError):
    """CSV file does not follow the expected layout"""

    pass


class MissingScores(DataError):
    """A strategy needs entropy scores that were not supplied"""

    pass


class NoLabeledData(DataError):
    """Proxy learner has no labeled frames"""

    pass


class EmptySet(DataError):
    """Distance to an empty set is undefined"""

    pass


class ZeroVector(DataError):
    """Cosine similarity of a zero vector is undefined"""

    pass


# Selection


class BudgetExceedsPool(SelectionError):
    """Budget is larger than the unlabeled pool"""

    pass


class KTooLarge(SelectionError):
    """More centroids requested than points available"""

    pass


class TooFewCentroids(SelectionError):
    """Fewer centroids than labeled embeddings to match"""

    pass


class TooFewPoints(SelectionError):
    """Fewer points than centroids"""

    pass


# Numeric


class NonFinite(NumericError):
    """Computation produced NaN or infinity"""

    pass


class DegenerateBatch(NumericError):
    """Contrastive batch without pairs"""

    pass


class TooFewCurvePoints(NumericError):
    """Area needs at least two curve points"""

    pass


class NonPositiveReference(NumericError):
    """Full-data reference score must be positive"""

    pass
