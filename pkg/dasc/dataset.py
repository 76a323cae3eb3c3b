"""Base class for procedural scene generators with ground truth"""

from abc import ABC, abstractmethod
from collections.abc import Iterable, Sized
from typing import Any, Dict, Iterator, Optional

import numpy as np


class ProceduralDataset(ABC, Sized, Iterable[Dict[str, Any]]):
    """Abstract base class for procedural scene generators"""

    def __init__(self, config: Any, seed: Optional[int] = None, size: int = 10):
        """Initialize the dataset with config, optional seed and size"""
        if hasattr(config, "validate") and callable(config.validate):
            config.validate()

        self.config = config
        self.size = size
        self.seed = seed if seed is not None else int(np.random.default_rng().integers(0, 2**32))

    def __len__(self) -> int:
        """Return the virtual size of the dataset"""
        return self.size

    def __iter__(self) -> Iterator[Dict[str, Any]]:
        return (self[idx] for idx in range(self.size))

    def rng(self, idx: int) -> np.random.Generator:
        """Generator for item `idx`; items depend only on seed + idx"""
        return np.random.default_rng(self.seed + idx)

    @abstractmethod
    def __getitem__(self, idx: int) -> dict:
        """Generate a single scene

        Args:
            idx: Index of the item to generate

        Returns:
            dict containing at least:
                - metadata: dict
            and, depending on the scene, image_a / image_b / ground_truth or features / label
        """
        raise NotImplementedError
