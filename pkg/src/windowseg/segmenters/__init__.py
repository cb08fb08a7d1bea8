"""Window segmenters: fixed-length, rule-based, featurized, and remote."""

from ..rules import RulePunctuation, derive_labels, load_abbreviations
from .autoregressive import (
    AutoregressiveSegmenter,
    CachedConditionals,
    FeatureModelReranker,
    FeatureStepScorer,
)
from .base import (
    FixedLengthSegmenter,
    NBestList,
    ReplaySegmenter,
    SequenceScorer,
    WindowInfo,
    WindowSegmenter,
    rerank,
)
from .external import EndpointConfig, EndpointError, ExternalSegmenter
from .features import (
    Corpus,
    FeatureConfig,
    FeatureModel,
    TrainConfig,
    TrainResult,
    evaluate_loss,
    load_model,
    loss_gradient,
    save_model,
    train_feature_model,
)

__all__ = [
    "AutoregressiveSegmenter",
    "CachedConditionals",
    "Corpus",
    "EndpointConfig",
    "EndpointError",
    "ExternalSegmenter",
    "FeatureConfig",
    "FeatureModel",
    "FeatureModelReranker",
    "FeatureStepScorer",
    "FixedLengthSegmenter",
    "NBestList",
    "ReplaySegmenter",
    "RulePunctuation",
    "SequenceScorer",
    "TrainConfig",
    "TrainResult",
    "WindowInfo",
    "WindowSegmenter",
    "derive_labels",
    "evaluate_loss",
    "load_abbreviations",
    "load_model",
    "loss_gradient",
    "rerank",
    "save_model",
    "train_feature_model",
]
