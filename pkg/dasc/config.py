"""Flat run configuration shared by every command.

A `RunConfig` holds every tunable of the pipeline under one key namespace so that it can be
stored as `key = value` lines and overridden from the command line. The per-module config
objects are built from it on demand.
"""

import argparse
import logging
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Union

from .descriptor.dasc import DascParams, Interpolation
from .descriptor.lss import LssParams
from .errors import FormatError, ImageIOError
from .geometry.gi_dasc import BlurRule, GiDascConfig
from .geometry.propagation import PropagationConfig
from .geometry.superpixels import SuperpixelConfig
from .geometry.wmsd import WmsdConfig
from .imaging.eaf import FilterKind
from .learning.svm import SvmConfig

logger = logging.getLogger(__name__)

THREADS_ENV = "DASC_THREADS"


def default_threads() -> int:
    """Worker count from DASC_THREADS, 1 when unset or unusable"""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning("ignoring %s=%r: not an integer", THREADS_ENV, raw)
        return 1
    if value < 1:
        logger.warning("ignoring %s=%r: must be >= 1", THREADS_ENV, raw)
        return 1
    return value


@dataclass
class RunConfig:
    """
    Every parameter of a run, with the published defaults.

    Descriptor: sigma_c, tau_c, patch_size, support_size, dim, n_rho, n_theta, epsilon, weighting
    Detector: pyramid_*, wmsd_*
    Fields: superpixels, compactness, lambda_c, lambda_p, mu, cg_rtol
    GI-DASC: blur_rule, interpolation, group_identical
    Learning: sigma_r, c_svm, epochs
    Matching: max_disp, flow_radius, bad_pixel_threshold
    LSS baseline: lss_*
    """

    seed: int = 42
    threads: int = field(default_factory=default_threads)

    sigma_c: float = 0.5
    tau_c: float = 0.03
    patch_size: int = 5
    support_size: int = 31
    dim: int = 128
    n_rho: int = 4
    n_theta: int = 36
    epsilon: float = 0.0009
    weighting: str = FilterKind.GUIDED.value

    pyramid_levels: int = 4
    pyramid_base_sigma: float = 1.0
    pyramid_step: float = math.sqrt(2.0)
    wmsd_n_rho: int = 3
    wmsd_n_theta: int = 12
    wmsd_radius: int = 7
    wmsd_o: int = 10
    wmsd_threshold_ratio: float = 0.6
    wmsd_include_minima: bool = False

    superpixels: int = 500
    compactness: float = 10.0
    lambda_c: float = 0.1
    lambda_p: float = 30.0
    mu: float = 1.0
    cg_rtol: float = 1e-8

    blur_rule: str = BlurRule.INCREMENT.value
    interpolation: str = Interpolation.BILINEAR.value
    group_identical: bool = True

    sigma_r: float = 0.5
    c_svm: float = 1.0
    epochs: int = 50

    max_disp: int = 64
    flow_radius: int = 8
    bad_pixel_threshold: float = 1.0

    lss_n_rho: int = 3
    lss_n_theta: int = 20
    lss_patch: int = 5
    lss_window: int = 41
    lss_sigma_s: float = 1.0

    persist: bool = True

    def validate(self) -> None:
        """Validate configuration parameters."""
        assert self.threads >= 1, "threads must be >= 1"
        assert self.n_rho >= 1 and self.n_theta >= 1, "n_rho and n_theta must be >= 1"
        assert self.sigma_r > 0, "sigma_r must be > 0"
        assert self.max_disp >= 0, "max_disp must be >= 0"
        assert self.flow_radius >= 0, "flow_radius must be >= 0"
        assert self.bad_pixel_threshold >= 0, "bad_pixel_threshold must be >= 0"
        for params in (
            self.dasc_params(),
            self.wmsd_config(),
            self.superpixel_config(),
            self.propagation_config(),
            self.gi_config(),
            self.svm_config(),
            self.lss_params(),
        ):
            params.validate()

    def dasc_params(self) -> DascParams:
        return DascParams(
            sigma_c=self.sigma_c,
            tau_c=self.tau_c,
            patch_size=self.patch_size,
            support_size=self.support_size,
            dim=self.dim,
            epsilon=self.epsilon,
            weighting=FilterKind(self.weighting),
        )

    def wmsd_config(self) -> WmsdConfig:
        return WmsdConfig(
            n_rho=self.wmsd_n_rho,
            n_theta=self.wmsd_n_theta,
            radius=self.wmsd_radius,
            o=self.wmsd_o,
            n_levels=self.pyramid_levels,
            base_sigma=self.pyramid_base_sigma,
            step=self.pyramid_step,
            threshold_ratio=self.wmsd_threshold_ratio,
            include_minima=self.wmsd_include_minima,
            patch_size=self.patch_size,
            epsilon=self.epsilon,
            weighting=FilterKind(self.weighting),
        )

    def superpixel_config(self) -> SuperpixelConfig:
        return SuperpixelConfig(
            target_count=self.superpixels,
            compactness=self.compactness,
            lambda_c=self.lambda_c,
            lambda_p=self.lambda_p,
        )

    def propagation_config(self) -> PropagationConfig:
        return PropagationConfig(mu=self.mu, rtol=self.cg_rtol)

    def gi_config(self) -> GiDascConfig:
        return GiDascConfig(
            blur_rule=BlurRule(self.blur_rule),
            interpolation=Interpolation(self.interpolation),
            group_identical=self.group_identical,
        )

    def svm_config(self) -> SvmConfig:
        return SvmConfig(c_svm=self.c_svm, epochs=self.epochs, seed=self.seed)

    def lss_params(self) -> LssParams:
        return LssParams(
            n_rho=self.lss_n_rho,
            n_theta=self.lss_n_theta,
            patch=self.lss_patch,
            window=self.lss_window,
            sigma_s=self.lss_sigma_s,
        )

    def serialize(self) -> str:
        return "".join(f"{f.name} = {_format_value(getattr(self, f.name))}\n" for f in fields(self))

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        """Parse `key = value` lines; '#' starts a comment, missing keys keep their defaults"""
        types = {f.name: f.type for f in fields(cls)}
        values: Dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise FormatError(f"line {lineno}: expected 'key = value'")
            if key not in types:
                raise FormatError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise FormatError(f"line {lineno}: duplicate key {key!r}")
            values[key] = parse_value(types[key], value, key, lineno)
        return cls(**values)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ImageIOError(f"cannot read {path}: {e}") from e
        return cls.parse(text)

    def save(self, path: Union[str, Path]) -> None:
        try:
            Path(path).write_text(self.serialize())
        except OSError as e:
            raise ImageIOError(f"cannot write {path}: {e}") from e


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_value(kind: Any, text: str, key: str, lineno: int = 0) -> Any:
    """Convert `text` to a bool, int, float or string-valued field type"""
    if not (isinstance(kind, type) and issubclass(kind, (bool, int, float, str))):
        raise FormatError(f"{key} cannot be set from text")
    try:
        if kind is bool:
            return _parse_bool(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return kind(text)
    except ValueError as e:
        raise FormatError(f"line {lineno}: bad value for {key}: {text!r}") from e


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """One `--key-name` flag per RunConfig field; unset flags leave the config untouched"""
    group = parser.add_argument_group("parameters")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type is bool:
            group.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=argparse.SUPPRESS)
        elif f.type is str:
            group.add_argument(flag, dest=f.name, default=argparse.SUPPRESS, choices=_choices(f.name))
        else:
            group.add_argument(flag, dest=f.name, type=f.type, default=argparse.SUPPRESS)


def _choices(name: str):
    return {
        "weighting": [k.value for k in FilterKind],
        "blur_rule": [k.value for k in BlurRule],
        "interpolation": [k.value for k in Interpolation],
    }.get(name)


def config_from_args(args: argparse.Namespace, base: RunConfig) -> RunConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig) if hasattr(args, f.name)}
    config = replace(base, **overrides)
    config.validate()
    return config
