"""Encoder families and the shared classifier head: window in, 32 logits out."""

from phoneclass.models.checkpoint import (
    EncoderSpec,
    build_encoder,
    build_model,
    encoder_spec_from_dict,
    encoder_spec_to_dict,
    load_checkpoint,
    save_checkpoint,
)
from phoneclass.models.cnn import CnnEncoder, CnnEncoderConfig, ConvStage, cnn_forward
from phoneclass.models.head import (
    N_CLASSES,
    ClassifierHead,
    ClassifierHeadConfig,
    PhoneClassifier,
    classifier_forward,
    predict_phone,
)
from phoneclass.models.ssl_backend import (
    SIZE_NAMES,
    SslBackendHandle,
    SslEncoder,
    ToyWaveEncoder,
    frame_count,
    register_backend,
    resolve_backend,
    ssl_forward,
)

__all__ = [
    "ClassifierHead",
    "ClassifierHeadConfig",
    "CnnEncoder",
    "CnnEncoderConfig",
    "ConvStage",
    "EncoderSpec",
    "N_CLASSES",
    "PhoneClassifier",
    "SIZE_NAMES",
    "SslBackendHandle",
    "SslEncoder",
    "ToyWaveEncoder",
    "build_encoder",
    "build_model",
    "classifier_forward",
    "cnn_forward",
    "encoder_spec_from_dict",
    "encoder_spec_to_dict",
    "frame_count",
    "load_checkpoint",
    "predict_phone",
    "register_backend",
    "resolve_backend",
    "save_checkpoint",
    "ssl_forward",
]
