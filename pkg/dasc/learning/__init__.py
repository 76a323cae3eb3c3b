"""
Offline selection of sampling patterns:
- Training pairs, manifests and per-candidate similarity features
- Linear SVM training and ranking of candidates by weight magnitude
- Model files
"""

from .features import TrainingPair, build_pair_features, center_responses, extract_features, read_manifest
from .svm import SvmConfig, SvmModel, read_model, select_top_patterns, svm_objective, train_linear_svm, write_model

__all__ = [
    "TrainingPair",
    "build_pair_features",
    "center_responses",
    "extract_features",
    "read_manifest",
    "SvmConfig",
    "SvmModel",
    "read_model",
    "select_top_patterns",
    "svm_objective",
    "train_linear_svm",
    "write_model",
]
