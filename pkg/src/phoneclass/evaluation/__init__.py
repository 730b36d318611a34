from phoneclass.evaluation.bootstrap import (
    BootstrapCI,
    bootstrap_ci,
    intervals_overlap,
)
from phoneclass.evaluation.confusion import (
    ConfusionDelta,
    ConfusionMatrix,
    PhoneClassGroup,
    compare_matrices,
    confusion_matrix,
    group_submatrix,
    load_phone_groups,
    submatrix,
    write_confusion_csv,
    write_heatmap_json,
)
from phoneclass.evaluation.metrics import (
    SILENCE_LABEL,
    BalancedAccuracyResult,
    balanced_accuracy,
    micro_accuracy,
    per_phone_accuracy,
)
from phoneclass.evaluation.predictions import (
    PredictionSet,
    read_predictions_csv,
    write_predictions_csv,
)

__all__ = [
    "BootstrapCI",
    "bootstrap_ci",
    "intervals_overlap",
    "ConfusionDelta",
    "ConfusionMatrix",
    "PhoneClassGroup",
    "compare_matrices",
    "confusion_matrix",
    "group_submatrix",
    "load_phone_groups",
    "submatrix",
    "write_confusion_csv",
    "write_heatmap_json",
    "SILENCE_LABEL",
    "BalancedAccuracyResult",
    "balanced_accuracy",
    "micro_accuracy",
    "per_phone_accuracy",
    "PredictionSet",
    "read_predictions_csv",
    "write_predictions_csv",
]
