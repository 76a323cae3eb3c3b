"""Training data for pattern learning: image windows and planted feature matrices"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..factory import ProceduralDataset, register_dataset
from ..learning.features import TrainingPair
from .textures import smooth_texture


@dataclass
class TrainingWindowsConfig:
    """
    Configuration for matching and non-matching window pairs.

    A matching pair shows one texture location twice, the second copy under a random
    affine or inverting intensity change plus noise. A non-matching pair shows two
    unrelated locations.

    - window: side of the square windows (the support size)
    - positive_ratio: probability that an item is a matching pair
    - noise: standard deviation of the additive noise
    - seed: Optional seed for reproducibility.
    - size: Number of pairs in the virtual dataset.
    """

    window: int = 31
    positive_ratio: float = 0.5
    noise: float = 0.01
    invert_probability: float = 0.3
    seed: Optional[int] = None
    size: int = 10

    def validate(self) -> None:
        """Validate configuration parameters."""
        assert self.window >= 5 and self.window % 2 == 1, "window must be odd and at least 5"
        assert 0 <= self.positive_ratio <= 1, "positive_ratio must be in [0, 1]"
        assert 0 <= self.invert_probability <= 1, "invert_probability must be in [0, 1]"
        assert self.noise >= 0, "noise must be non-negative"


class TrainingWindowsDataset(ProceduralDataset):
    def __init__(self, config: TrainingWindowsConfig):
        super().__init__(config=config, seed=config.seed, size=config.size)

    def __getitem__(self, idx: int) -> dict:
        cfg = self.config
        rng = self.rng(idx)
        w = cfg.window
        label = int(rng.random() < cfg.positive_ratio)

        window_a = smooth_texture(rng, w, w)
        if label:
            window_b = window_a.copy()
        else:
            window_b = smooth_texture(rng, w, w)

        if rng.random() < cfg.invert_probability:
            window_b = 1.0 - window_b
            change = "invert"
        else:
            gain = rng.uniform(0.4, 0.8)
            window_b = gain * window_b + rng.uniform(0.0, 1.0 - gain)
            change = "affine"
        window_b = np.clip(window_b + rng.normal(0.0, cfg.noise, size=window_b.shape), 0.0, 1.0)

        return {
            "pair": TrainingPair(window_a, window_b, label),
            "label": label,
            "metadata": {"photometric": change},
        }


@dataclass
class PlantedFeaturesConfig:
    """
    Configuration for feature matrices where only a few dimensions separate the classes.

    Informative dimensions are high for matching rows and low for non-matching rows; all
    other dimensions are uniform noise over the same range.

    - seed: Optional seed for reproducibility.
    - size: Number of feature matrices in the virtual dataset.
    """

    n_samples: int = 200
    n_features: int = 12
    informative: Tuple[int, ...] = field(default_factory=lambda: (3, 7))
    seed: Optional[int] = None
    size: int = 10

    def validate(self) -> None:
        """Validate configuration parameters."""
        assert self.n_samples >= 4, "n_samples must be at least 4"
        assert self.n_features >= 1, "n_features must be at least 1"
        assert len(self.informative) >= 1, "at least one informative dimension required"
        assert all(0 <= d < self.n_features for d in self.informative), "informative dimension out of range"


class PlantedFeaturesDataset(ProceduralDataset):
    def __init__(self, config: PlantedFeaturesConfig):
        super().__init__(config=config, seed=config.seed, size=config.size)

    def __getitem__(self, idx: int) -> dict:
        cfg = self.config
        rng = self.rng(idx)
        labels = np.zeros(cfg.n_samples, dtype=np.int64)
        labels[: cfg.n_samples // 2] = 1
        rng.shuffle(labels)

        features = rng.uniform(0.05, 1.0, size=(cfg.n_samples, cfg.n_features))
        dims = list(cfg.informative)
        high = rng.uniform(0.7, 1.0, size=(cfg.n_samples, len(dims)))
        low = rng.uniform(0.05, 0.45, size=(cfg.n_samples, len(dims)))
        features[:, dims] = np.where(labels[:, None] == 1, high, low)

        return {"features": features, "label": labels, "metadata": {"informative": tuple(dims)}}


register_dataset("training_windows", TrainingWindowsDataset, TrainingWindowsConfig)
register_dataset("planted_features", PlantedFeaturesDataset, PlantedFeaturesConfig)
