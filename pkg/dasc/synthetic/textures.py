"""Random smooth textures used by every synthetic scene"""

from typing import Sequence

import numpy as np

from ..imaging.core import gaussian_blur


def smooth_texture(
    rng: np.random.Generator, height: int, width: int, sigmas: Sequence[float] = (1.0, 2.0, 4.0)
) -> np.ndarray:
    """Sum of blurred white-noise layers, rescaled to [0, 1]"""
    texture = np.zeros((height, width))
    for sigma in sigmas:
        noise = rng.uniform(0.0, 1.0, size=(height, width))
        layer = gaussian_blur(noise, sigma)
        texture += (layer - layer.mean()) / (layer.std() + 1e-12)
    low, high = texture.min(), texture.max()
    if high - low < 1e-12:
        return np.full((height, width), 0.5)
    return (texture - low) / (high - low)


def region_labels(rng: np.random.Generator, height: int, width: int, n_regions: int) -> np.ndarray:
    """Voronoi partition into labels 1..n_regions around random sites"""
    sites = rng.uniform((0, 0), (width, height), size=(n_regions, 2))
    ys, xs = np.indices((height, width))
    dist = (xs[None] - sites[:, 0, None, None]) ** 2 + (ys[None] - sites[:, 1, None, None]) ** 2
    return np.argmin(dist, axis=0).astype(np.int64) + 1
