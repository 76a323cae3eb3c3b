"""
Synthetic scenes with ground truth:

- shifted_stereo: textured pairs with one constant disparity and a photometric change
- translated_flow: textured pairs related by one translation
- scaled_rotated: pairs related by scaling and rotation, with fields and annotations
- blob_scene: asymmetric blob clusters for keypoint detection
- training_windows: matching and non-matching window pairs
- planted_features: feature matrices with known informative dimensions
"""

from .blobs import BlobSceneConfig, BlobSceneDataset
from .flow import TranslatedFlowConfig, TranslatedFlowDataset
from .geometric import ScaledRotatedConfig, ScaledRotatedDataset
from .stereo import Photometric, ShiftedStereoConfig, ShiftedStereoDataset
from .textures import region_labels, smooth_texture
from .training import PlantedFeaturesConfig, PlantedFeaturesDataset, TrainingWindowsConfig, TrainingWindowsDataset

__all__ = [
    "BlobSceneConfig",
    "BlobSceneDataset",
    "TranslatedFlowConfig",
    "TranslatedFlowDataset",
    "ScaledRotatedConfig",
    "ScaledRotatedDataset",
    "Photometric",
    "ShiftedStereoConfig",
    "ShiftedStereoDataset",
    "region_labels",
    "smooth_texture",
    "PlantedFeaturesConfig",
    "PlantedFeaturesDataset",
    "TrainingWindowsConfig",
    "TrainingWindowsDataset",
]
