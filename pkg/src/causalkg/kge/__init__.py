from .losses import loss, lp_regularizer, modulate, multiclass_nll, nll
from .model import EmbeddingModel
from .presets import load_preset
from .scoring import SCORERS, circular_correlation
from .training import Adam, TrainConfig, TrainingError, TrainResult, negative_sample, train

__all__ = [
    "Adam",
    "EmbeddingModel",
    "SCORERS",
    "TrainConfig",
    "TrainResult",
    "TrainingError",
    "circular_correlation",
    "load_preset",
    "loss",
    "lp_regularizer",
    "modulate",
    "multiclass_nll",
    "negative_sample",
    "nll",
    "train",
]
