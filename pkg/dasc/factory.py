"""Registry of synthetic scene generators.

Each scene module registers a generator and its config dataclass under a short name
(``shifted_stereo``, ``blob_scene``, ...). The ``synth`` command and the tests build
image pairs with known disparity, flow, fields or labels through `create_dataset`.
"""

from dataclasses import is_dataclass
from typing import Dict, List, Type, TypeVar

from .dataset import ProceduralDataset

ConfigT = TypeVar("ConfigT")
DatasetT = TypeVar("DatasetT", bound=ProceduralDataset)

# scene name -> (generator class, config dataclass)
DATASETS: Dict[str, tuple[Type[ProceduralDataset], Type]] = {}


def register_dataset(name: str, dataset_cls: Type[DatasetT], config_cls: Type[ConfigT]) -> None:
    """
    Make a scene generator available by name.

    Args:
        name: Scene name used by `create_dataset` and ``dasc synth``
        dataset_cls: Generator producing image pairs and their ground truth
        config_cls: Dataclass holding the scene geometry (sizes, shifts, photometric change)

    Raises:
        ValueError: If the name is taken, the generator is not a ProceduralDataset or the config is not a dataclass
    """
    if name in DATASETS:
        raise ValueError(f"scene '{name}' is already registered")

    if not issubclass(dataset_cls, ProceduralDataset):
        raise ValueError(f"{dataset_cls!r} does not derive from ProceduralDataset")

    if not is_dataclass(config_cls):
        raise ValueError(f"{config_cls!r} is not a dataclass")

    DATASETS[name] = (dataset_cls, config_cls)


def create_dataset(name: str, **kwargs) -> ProceduralDataset:
    """
    Build the named scene generator; keyword arguments become config fields.

    Items are reproducible from ``seed`` and the item index, so two generators built
    with the same arguments yield identical images and ground truth.

    Raises:
        ValueError: If the scene is not registered
        AssertionError: If the config fails validation
    """
    if name not in DATASETS:
        raise ValueError(f"unknown scene '{name}', expected one of {sorted(DATASETS)}")

    dataset_cls, config_cls = DATASETS[name]
    config = config_cls(**kwargs)
    return dataset_cls(config=config)


def dataset_names() -> List[str]:
    """Registered scene names, sorted"""
    return sorted(DATASETS)
