"""Linear SVM trained by stochastic subgradient steps, and pattern ranking by |v|"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import numpy as np
import numpy.typing as npt

from ..descriptor.patterns import SamplingPatternSet
from ..errors import DegenerateDataError, DimensionError, FormatError, ImageIOError, ParameterError

logger = logging.getLogger(__name__)


@dataclass
class SvmConfig:
    """
    Training configuration.

    - c_svm: weight of the hinge term in ||v||^2 + C * sum(hinge)
    - epochs: passes over the shuffled training set
    - seed: shuffle seed
    """

    c_svm: float = 1.0
    epochs: int = 50
    seed: int = 42

    def validate(self) -> None:
        assert self.c_svm >= 0 and math.isfinite(self.c_svm), "c_svm must be finite and >= 0"
        assert self.epochs >= 1, "epochs must be >= 1"


@dataclass(eq=False)
class SvmModel:
    weights: npt.NDArray[np.float64]
    bias: float = 0.0
    objective_history: List[float] = field(default_factory=list)

    def decision_function(self, features: npt.ArrayLike) -> np.ndarray:
        return np.asarray(features, dtype=np.float64) @ self.weights + self.bias

    def predict(self, features: npt.ArrayLike) -> np.ndarray:
        """Labels in {0, 1}"""
        return (self.decision_function(features) > 0).astype(np.int64)


def svm_objective(weights: np.ndarray, bias: float, features: np.ndarray, signs: np.ndarray, c_svm: float) -> float:
    """||v||^2 + C * sum(max(0, 1 - y (v.x + b)))"""
    margins = signs * (features @ weights + bias)
    return float(weights @ weights + c_svm * np.maximum(0.0, 1.0 - margins).sum())


def _check_training_set(features: npt.ArrayLike, labels: npt.ArrayLike):
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if x.ndim != 2:
        raise DimensionError(f"features must be a 2-D matrix, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise DimensionError(f"{y.size} labels for {x.shape[0]} feature vectors")
    if x.shape[0] < 2:
        raise DegenerateDataError("at least two training examples are required")
    if not np.all(np.isin(y, (0, 1))):
        raise ParameterError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise DegenerateDataError(f"training set holds a single class ({int(y[0])})")
    if not np.all(np.isfinite(x)):
        raise ParameterError("features must be finite")
    return x, np.where(y == 1, 1.0, -1.0)


def train_linear_svm(
    features: npt.ArrayLike, labels: npt.ArrayLike, c_svm: float = 1.0, epochs: int = 50, seed: int = 42
) -> SvmModel:
    """Minimise ||v||^2 + C * sum(hinge) with Pegasos-style steps.

    With lambda = 2 / (C n) the objective is proportional to
    lambda / 2 ||w||^2 + mean(hinge), w = (v, b) with the bias as a constant feature.
    Step t uses eta = 1 / (lambda t) and projects onto the ball of radius 1 / sqrt(lambda).
    The returned model is the best epoch-end iterate by the exact objective (the zero
    model competing too), so `objective_history` never increases.
    """
    SvmConfig(c_svm=c_svm, epochs=epochs, seed=seed).validate()
    x, y = _check_training_set(features, labels)
    n, dim = x.shape

    best_w = np.zeros(dim)
    best_b = 0.0
    best_obj = svm_objective(best_w, best_b, x, y, c_svm)
    if c_svm == 0:
        return SvmModel(best_w, best_b, [best_obj])

    augmented = np.hstack([x, np.ones((n, 1))])
    lam = 2.0 / (c_svm * n)
    radius = 1.0 / math.sqrt(lam)
    w = np.zeros(dim + 1)
    rng = np.random.default_rng(seed)
    history = []
    t = 0
    for epoch in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            violated = y[i] * (augmented[i] @ w) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += eta * y[i] * augmented[i]
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm

        obj = svm_objective(w[:-1], float(w[-1]), x, y, c_svm)
        if obj < best_obj:
            best_w, best_b, best_obj = w[:-1].copy(), float(w[-1]), obj
        history.append(best_obj)
        logger.debug("epoch %d: objective %.6g (best %.6g)", epoch + 1, obj, best_obj)

    return SvmModel(best_w, best_b, history)


def select_top_patterns(model: SvmModel, candidates: SamplingPatternSet, l_out: int = 128) -> SamplingPatternSet:
    """Candidates ranked by |v_l| descending, ties by index; the first `l_out` returned"""
    if len(model.weights) != len(candidates):
        raise DimensionError(f"model has {len(model.weights)} weights for {len(candidates)} candidates")
    if l_out < 1:
        raise ParameterError(f"l_out must be >= 1, got {l_out}")
    if l_out > len(candidates):
        raise ParameterError(f"l_out {l_out} exceeds the {len(candidates)} candidates")
    magnitude = np.abs(model.weights)
    order = np.argsort(-magnitude, kind="stable")[:l_out]
    selected = candidates.subset(order)
    selected.weights = magnitude[order]
    return selected


def format_model(model: SvmModel) -> str:
    return " ".join(repr(float(v)) for v in model.weights) + " " + repr(float(model.bias)) + "\n"


def parse_model(text: str) -> SvmModel:
    parts = text.split()
    if len(parts) < 2:
        raise FormatError("model file needs at least one weight and a bias")
    try:
        values = np.array([float(p) for p in parts])
    except ValueError as e:
        raise FormatError(f"malformed model file: {e}") from e
    return SvmModel(values[:-1], float(values[-1]))


def write_model(path: Union[str, Path], model: SvmModel) -> None:
    try:
        Path(path).write_text(format_model(model))
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e


def read_model(path: Union[str, Path]) -> SvmModel:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e
    return parse_model(text)
