from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..factory import ProceduralDataset, register_dataset
from .textures import smooth_texture


@dataclass
class BlobSceneConfig:
    """
    Configuration for square scenes of asymmetric blob clusters on a faint texture.

    Each cluster is a large blob with one or two smaller satellites on one side, so the
    dominant direction around a cluster is well defined.

    - seed: Optional seed for reproducibility.
    - size: Number of scenes in the virtual dataset.
    """

    image_size: int = 96
    n_clusters: int = 5
    min_sigma: float = 2.0
    max_sigma: float = 4.0
    texture_amplitude: float = 0.05
    seed: Optional[int] = None
    size: int = 10

    def validate(self) -> None:
        """Validate configuration parameters."""
        assert self.image_size >= 32, "image_size must be at least 32"
        assert self.n_clusters >= 1, "n_clusters must be at least 1"
        assert 0 < self.min_sigma <= self.max_sigma, "blob sigmas must satisfy 0 < min <= max"
        assert self.texture_amplitude >= 0, "texture_amplitude must be non-negative"


def _gaussian_blob(ys: np.ndarray, xs: np.ndarray, cx: float, cy: float, sigma: float) -> np.ndarray:
    return np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sigma * sigma))


class BlobSceneDataset(ProceduralDataset):
    def __init__(self, config: BlobSceneConfig):
        super().__init__(config=config, seed=config.seed, size=config.size)

    def __getitem__(self, idx: int) -> dict:
        cfg = self.config
        n = cfg.image_size
        rng = self.rng(idx)
        ys, xs = np.indices((n, n), dtype=np.float64)
        image = cfg.texture_amplitude * smooth_texture(rng, n, n)

        margin = 3.0 * cfg.max_sigma + 2.0
        centers = []
        for _ in range(cfg.n_clusters):
            sigma = rng.uniform(cfg.min_sigma, cfg.max_sigma)
            cx, cy = rng.uniform(margin, n - 1 - margin, size=2)
            image += rng.uniform(0.6, 0.9) * _gaussian_blob(ys, xs, cx, cy, sigma)
            heading = rng.uniform(0.0, 2 * np.pi)
            for k in range(int(rng.integers(1, 3))):
                dist = (2.0 + k) * sigma
                angle = heading + 0.4 * k
                image += 0.5 * _gaussian_blob(
                    ys, xs, cx + dist * np.cos(angle), cy + dist * np.sin(angle), 0.5 * sigma
                )
            centers.append((float(cx), float(cy), float(sigma)))

        image = np.clip(image / image.max(), 0.0, 1.0)
        return {"image_a": image, "metadata": {"clusters": centers}}


register_dataset("blob_scene", BlobSceneDataset, BlobSceneConfig)
