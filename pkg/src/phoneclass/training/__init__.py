from phoneclass.training.loop import (
    ArrayDataset,
    CheckpointMeta,
    EpochMetrics,
    OptimizerSpec,
    TrainingConfig,
    ValidationResult,
    build_optimizers,
    predict,
    train,
    validate,
)

__all__ = [
    "ArrayDataset",
    "CheckpointMeta",
    "EpochMetrics",
    "OptimizerSpec",
    "TrainingConfig",
    "ValidationResult",
    "build_optimizers",
    "predict",
    "train",
    "validate",
]
