from phoneclass.perceptual.correlation import (
    CorrelationOutcome,
    CorrelationResult,
    correlate_with_ratings,
    linear_fit,
    pearson,
    speaker_balanced_accuracy,
    speaker_micro_accuracy,
    write_scatter_csv,
)
from phoneclass.perceptual.ratings import (
    FULL_PANEL,
    ExpertRating,
    SpeakerScore,
    average_ratings,
    read_ratings_csv,
    write_ratings_csv,
)

__all__ = [
    "CorrelationOutcome",
    "CorrelationResult",
    "correlate_with_ratings",
    "linear_fit",
    "pearson",
    "speaker_balanced_accuracy",
    "speaker_micro_accuracy",
    "write_scatter_csv",
    "FULL_PANEL",
    "ExpertRating",
    "SpeakerScore",
    "average_ratings",
    "read_ratings_csv",
    "write_ratings_csv",
]
