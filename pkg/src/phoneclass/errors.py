"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PipelineError):
    """Invalid or incomplete experiment configuration."""


class DataError(PipelineError):
    """Invalid input data (corpora, ratings, metric inputs)."""


# corpus
class ParseError(DataError):
    """Malformed input file; message names the offending line."""


class InventoryError(DataError):
    """Phone inventory violates its contract (count, duplicates, merges)."""


class AlignmentError(DataError):
    """Alignment segments are inconsistent; message names the utterance."""


class MappingError(DataError):
    """A phone symbol cannot be resolved through the inventory."""


class BalancingError(DataError):
    """Class balancing cannot be satisfied; message names the class."""


class SplitError(DataError):
    """Train/validation split preconditions violated."""


# features
class FeatureError(DataError):
    """Signal too short or otherwise unusable for feature extraction."""


class WindowError(DataError):
    """Requested window lies outside the signal."""


# models
class ContractError(PipelineError):
    """Tensor shape or width does not match the model contract."""


class BackendError(PipelineError):
    """Encoder backend unavailable or not registered."""


class PredictionError(PipelineError):
    """Logits unusable for prediction (non-finite values)."""


# training
class TrainingDivergedError(PipelineError):
    """Loss became non-finite; carries epoch and batch index."""

    def __init__(self, message: str, epoch: int, batch_index: int):
        super().__init__(message)
        self.epoch = epoch
        self.batch_index = batch_index


# evaluation
class MetricError(DataError):
    """Metric undefined on the given prediction set."""


class BootstrapError(DataError):
    """Confidence interval could not be computed."""


class GroupError(DataError):
    """Phonetic class group references unknown phones."""


class TabulationError(DataError):
    """Reports cannot be tabulated together."""


# perceptual
class RatingError(DataError):
    """Perceptual rating outside its valid range."""


class CorrelationError(DataError):
    """Correlation undefined (too few points or zero variance)."""


class FitError(DataError):
    """Least-squares fit undefined (zero predictor variance)."""


class ExportError(DataError):
    """Scatter export has no usable speakers."""
