"""Equivariant downwash learner: features, network, labels, training, curriculum."""
from .features import Features, RelativeState9, feature_map
from .labels import estimate_bias, make_label
from .network import MlpModel, ModelFormatError, predict
from .training import Dataset, TrainHyper, TrainingSample, train

__all__ = ["Features", "RelativeState9", "feature_map", "estimate_bias", "make_label",
           "MlpModel", "ModelFormatError", "predict", "Dataset", "TrainHyper",
           "TrainingSample", "train"]
