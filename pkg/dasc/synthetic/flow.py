from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..factory import ProceduralDataset, register_dataset
from ..matching.wta import FlowField
from .textures import smooth_texture


@dataclass
class TranslatedFlowConfig:
    """
    Configuration for image pairs related by one translation, a(x, y) = b(x + u, y + v).

    - seed: Optional seed for reproducibility.
    - size: Number of pairs in the virtual dataset.
    """

    height: int = 48
    width: int = 48
    u: int = 3
    v: int = -2
    seed: Optional[int] = None
    size: int = 10

    def validate(self) -> None:
        """Validate configuration parameters."""
        assert self.height >= 8 and self.width >= 8, "images must be at least 8x8"
        assert abs(self.u) < self.width and abs(self.v) < self.height, "translation exceeds the image"


class TranslatedFlowDataset(ProceduralDataset):
    def __init__(self, config: TranslatedFlowConfig):
        super().__init__(config=config, seed=config.seed, size=config.size)

    def __getitem__(self, idx: int) -> dict:
        cfg = self.config
        pad = abs(cfg.u) + abs(cfg.v) + 1
        texture = smooth_texture(self.rng(idx), cfg.height + 2 * pad, cfg.width + 2 * pad)
        image_a = texture[pad : pad + cfg.height, pad : pad + cfg.width]
        image_b = texture[pad - cfg.v : pad - cfg.v + cfg.height, pad - cfg.u : pad - cfg.u + cfg.width]

        ys, xs = np.indices((cfg.height, cfg.width))
        inside = (xs + cfg.u >= 0) & (xs + cfg.u < cfg.width) & (ys + cfg.v >= 0) & (ys + cfg.v < cfg.height)
        flow = FlowField(FlowField.uniform(cfg.height, cfg.width, cfg.u, cfg.v).vectors, inside)
        return {
            "image_a": image_a,
            "image_b": image_b,
            "ground_truth": flow,
            "metadata": {"u": cfg.u, "v": cfg.v},
        }


register_dataset("translated_flow", TranslatedFlowDataset, TranslatedFlowConfig)
