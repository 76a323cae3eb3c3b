"""Command-line interface.

Every subcommand accepts `--config FILE` plus one flag per configuration key. Exit codes:
0 success, 2 I/O, 3 malformed input or parameters, 4 degenerate data, 5 internal error.
"""

import argparse
import csv
import json
import logging
import sys
import time
from contextlib import contextmanager
from dataclasses import fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import RunConfig, add_config_arguments, config_from_args, parse_value
from .descriptor.dasc import Interpolation, compute_dasc
from .descriptor.dump import read_descriptors, write_descriptors
from .descriptor.lss import compute_lss
from .descriptor.oracle import compute_dasc_oracle
from .descriptor.patterns import (
    default_patterns,
    enumerate_candidate_patterns,
    generate_log_polar_grid,
    read_patterns,
    support_radius,
    write_patterns,
)
from .errors import DascError, FormatError, ImageIOError, InternalError, ParameterError
from .factory import DATASETS, create_dataset, dataset_names
from .geometry.gi_dasc import compute_gi_dasc
from .geometry.propagation import GeometricFieldMap, fit_sparse_fields, propagate, read_fields, write_fields
from .geometry.superpixels import SuperpixelMap, canonical_labels, segment_superpixels, superpixel_affinity
from .geometry.wmsd import detect_wmsd, read_keypoints, write_keypoints
from .imaging.core import to_grayscale
from .imaging.io import read_pgm16, read_raster, write_image, write_pgm16
from .learning.features import extract_features, read_manifest
from .learning.svm import select_top_patterns, train_linear_svm, write_model
from .matching.io import (
    read_disparity_pfm,
    read_disparity_pgm,
    read_flo,
    write_disparity_pfm,
    write_disparity_pgm,
    write_flo,
)
from .matching.metrics import (
    bad_pixel_rate,
    descriptor_distance,
    endpoint_error,
    flow_bad_pixel_rate,
    label_transfer_error,
    transfer_labels,
)
from .matching.wta import DisparityMap, FlowField, match_flow_wta, match_stereo_wta

logger = logging.getLogger(__name__)

METRIC_KEYS = ("bad_pixel_rate", "descriptor_distance", "endpoint_error", "label_transfer_error")


class StageTimer:
    """Wall-clock time per named stage, printed when the command ends"""

    def __init__(self):
        self.stages: Dict[str, float] = {}
        self._start = time.perf_counter()

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        logger.debug("stage %s started", name)
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - start

    def report(self, out=None) -> None:
        out = out or sys.stdout
        for name, seconds in self.stages.items():
            print(f"{name}: {seconds:.3f} s", file=out)
        print(f"total: {time.perf_counter() - self._start:.3f} s", file=out)


def _load_image(path: str):
    """(grayscale, colour or None)"""
    raster = read_raster(path)
    if raster.ndim == 3:
        return to_grayscale(raster), raster
    return raster, None


def _load_patterns(path: Optional[str], config: RunConfig):
    if path:
        return read_patterns(path)
    return default_patterns(
        config.patch_size, config.support_size, config.dim, config.n_rho, config.n_theta, seed=config.seed
    )


def _load_labels(path: str) -> SuperpixelMap:
    return SuperpixelMap(canonical_labels(read_pgm16(path)))


def _read_annotation(path: str) -> np.ndarray:
    return read_pgm16(path)


def _read_disparity(path: str) -> DisparityMap:
    if Path(path).suffix.lower() == ".pfm":
        return read_disparity_pfm(path)
    return read_disparity_pgm(path)


def _write_disparity(path: str, disparity: DisparityMap) -> None:
    if Path(path).suffix.lower() == ".pfm":
        write_disparity_pfm(path, disparity)
    else:
        write_disparity_pgm(path, disparity)


def _write_metrics(path: Optional[str], metrics: Dict[str, Optional[float]]) -> None:
    text = json.dumps(metrics, sort_keys=True, indent=2) + "\n"
    if path:
        try:
            Path(path).write_text(text)
        except OSError as e:
            raise ImageIOError(f"cannot write {path}: {e}") from e
    else:
        sys.stdout.write(text)


def cmd_compute(args: argparse.Namespace, config: RunConfig) -> int:
    timer = StageTimer()
    with timer.stage("load"):
        img, _ = _load_image(args.input)
    if args.lss:
        params = config.lss_params()
        params.validate()
        with timer.stage("descriptor"):
            field = compute_lss(img, params.n_rho, params.n_theta, params.patch, params.window, params.sigma_s)
    else:
        params = config.dasc_params()
        with timer.stage("patterns"):
            patterns = _load_patterns(args.patterns, config)
        with timer.stage("descriptor"):
            if args.oracle:
                field = compute_dasc_oracle(img, patterns, params, symmetric=args.symmetric)
            else:
                field = compute_dasc(
                    img, patterns, params, workers=config.threads, interpolation=Interpolation(config.interpolation)
                )
    with timer.stage("write"):
        write_descriptors(args.output, field)
    logger.info("wrote %dx%dx%d descriptors to %s", field.height, field.width, field.dim, args.output)
    timer.report()
    return 0


def cmd_learn(args: argparse.Namespace, config: RunConfig) -> int:
    timer = StageTimer()
    params = config.dasc_params()
    with timer.stage("load"):
        pairs = read_manifest(args.manifest)
    with timer.stage("candidates"):
        grid = generate_log_polar_grid(
            config.n_rho, config.n_theta, support_radius(config.patch_size, config.support_size)
        )
        candidates = enumerate_candidate_patterns(grid)
    with timer.stage("features"):
        features, labels = extract_features(pairs, candidates, params, config.sigma_r, workers=config.threads)
    with timer.stage("train"):
        svm = config.svm_config()
        model = train_linear_svm(features, labels, svm.c_svm, svm.epochs, svm.seed)
    with timer.stage("select"):
        selected = select_top_patterns(model, candidates, min(config.dim, len(candidates)))
    with timer.stage("write"):
        write_patterns(args.output, selected)
        model_path = args.model_out or str(Path(args.output).with_suffix(".model"))
        write_model(model_path, model)
    logger.info("selected %d of %d candidate patterns", len(selected.sources), len(candidates.sources))
    timer.report()
    return 0


def cmd_detect(args: argparse.Namespace, config: RunConfig) -> int:
    timer = StageTimer()
    with timer.stage("load"):
        img, _ = _load_image(args.input)
    with timer.stage("detect"):
        keypoints, _ = detect_wmsd(img, config.wmsd_config(), workers=config.threads)
    with timer.stage("write"):
        write_keypoints(args.output, keypoints)
    logger.info("detected %d keypoints", len(keypoints))
    timer.report()
    return 0


def cmd_segment(args: argparse.Namespace, config: RunConfig) -> int:
    timer = StageTimer()
    with timer.stage("load"):
        img, color = _load_image(args.input)
    with timer.stage("segment"):
        spmap = segment_superpixels(img, config.superpixels, config.compactness, seed=config.seed, color=color)
    with timer.stage("write"):
        write_pgm16(args.output, spmap.labels)
    logger.info("segmented into %d superpixels", spmap.count)
    timer.report()
    return 0


def _propagated_fields(keypoints, spmap: SuperpixelMap, img, color, config: RunConfig) -> GeometricFieldMap:
    sparse_fields = fit_sparse_fields(keypoints, spmap, base_sigma=config.pyramid_base_sigma)
    weights = superpixel_affinity(spmap, img, config.lambda_c, config.lambda_p, color=color)
    return propagate(sparse_fields, weights, mu=config.mu, workers=config.threads, rtol=config.cg_rtol)


def cmd_propagate(args: argparse.Namespace, config: RunConfig) -> int:
    timer = StageTimer()
    with timer.stage("load"):
        img, color = _load_image(args.input)
        spmap = _load_labels(args.labels)
        keypoints = read_keypoints(args.keypoints)
    with timer.stage("propagate"):
        fields_map = _propagated_fields(keypoints, spmap, img, color, config)
    with timer.stage("write"):
        write_fields(args.output, fields_map)
    timer.report()
    return 0


def cmd_gi_compute(args: argparse.Namespace, config: RunConfig) -> int:
    timer = StageTimer()
    with timer.stage("load"):
        img, _ = _load_image(args.input)
        spmap = _load_labels(args.labels)
        fields_map = read_fields(args.fields, spmap.count)
        patterns = _load_patterns(args.patterns, config)
    with timer.stage("descriptor"):
        field = compute_gi_dasc(
            img, spmap, fields_map, patterns, config.dasc_params(), config.gi_config(), workers=config.threads
        )
    with timer.stage("write"):
        write_descriptors(args.output, field)
    timer.report()
    return 0


def cmd_match_stereo(args: argparse.Namespace, config: RunConfig) -> int:
    left, right = read_descriptors(args.left), read_descriptors(args.right)
    disparity = match_stereo_wta(left, right, config.max_disp)
    _write_disparity(args.output, disparity)
    return 0


def cmd_match_flow(args: argparse.Namespace, config: RunConfig) -> int:
    a, b = read_descriptors(args.desc_a), read_descriptors(args.desc_b)
    write_flo(args.output, match_flow_wta(a, b, config.flow_radius))
    return 0


def flow_metrics(
    flow: FlowField,
    config: RunConfig,
    gt_flow: Optional[FlowField] = None,
    annot_a: Optional[np.ndarray] = None,
    annot_b: Optional[np.ndarray] = None,
    desc_a=None,
    desc_b=None,
) -> Dict[str, Optional[float]]:
    """All four metrics, None where an input is missing"""
    metrics: Dict[str, Optional[float]] = dict.fromkeys(METRIC_KEYS)
    if gt_flow is not None:
        metrics["endpoint_error"] = endpoint_error(flow, gt_flow)
        metrics["bad_pixel_rate"] = flow_bad_pixel_rate(flow, gt_flow, config.bad_pixel_threshold)
        if desc_a is not None and desc_b is not None:
            metrics["descriptor_distance"] = descriptor_distance(desc_a, desc_b, gt_flow)
    if annot_a is not None and annot_b is not None:
        metrics["label_transfer_error"] = label_transfer_error(transfer_labels(annot_b, flow), annot_a)
    return metrics


def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    if args.disparity:
        if not args.gt_disparity:
            raise ParameterError("--disparity needs --gt-disparity")
        metrics: Dict[str, Optional[float]] = dict.fromkeys(METRIC_KEYS)
        metrics["bad_pixel_rate"] = bad_pixel_rate(
            _read_disparity(args.disparity), _read_disparity(args.gt_disparity), config.bad_pixel_threshold
        )
    else:
        flow = read_flo(args.flow)
        metrics = flow_metrics(
            flow,
            config,
            gt_flow=read_flo(args.gt_flow) if args.gt_flow else None,
            annot_a=_read_annotation(args.annot_a) if args.annot_a else None,
            annot_b=_read_annotation(args.annot_b) if args.annot_b else None,
            desc_a=read_descriptors(args.desc_a) if args.desc_a else None,
            desc_b=read_descriptors(args.desc_b) if args.desc_b else None,
        )
    _write_metrics(args.output, metrics)
    return 0


def cmd_pipeline_gi(args: argparse.Namespace, config: RunConfig) -> int:
    """Detect, segment, propagate fields, compute GI-DASC on both images, match flow and evaluate"""
    timer = StageTimer()
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    persist = config.persist

    with timer.stage("load"):
        images = [_load_image(args.image_a), _load_image(args.image_b)]
        if images[0][0].shape != images[1][0].shape:
            raise ParameterError("pipeline images must share dimensions")
        patterns = _load_patterns(args.patterns, config)

    with timer.stage("segment"):
        spmaps = [
            segment_superpixels(img, config.superpixels, config.compactness, seed=config.seed, color=color)
            for img, color in images
        ]
    if persist:
        for tag, spmap in zip("ab", spmaps):
            write_pgm16(out / f"labels_{tag}.pgm", spmap.labels)

    if args.fields_from:
        if len(args.fields_from) > 2:
            raise ParameterError("--fields-from takes one file for both images or one per image")
        paths = args.fields_from if len(args.fields_from) == 2 else args.fields_from * 2
        field_maps = [read_fields(path, spmap.count) for path, spmap in zip(paths, spmaps)]
    else:
        with timer.stage("detect"):
            keypoints = [detect_wmsd(img, config.wmsd_config(), workers=config.threads)[0] for img, _ in images]
        if persist:
            for tag, kps in zip("ab", keypoints):
                write_keypoints(out / f"keypoints_{tag}.txt", kps)
        if not all(keypoints):
            logger.warning(
                "no keypoints in %s; using unit geometric fields",
                " and ".join(name for name, kps in zip((args.image_a, args.image_b), keypoints) if not kps),
            )
            field_maps = [GeometricFieldMap.uniform(spmap.count) for spmap in spmaps]
        else:
            with timer.stage("propagate"):
                field_maps = [
                    _propagated_fields(kps, spmap, img, color, config)
                    for kps, spmap, (img, color) in zip(keypoints, spmaps, images)
                ]
    if persist:
        for tag, fields_map in zip("ab", field_maps):
            write_fields(out / f"fields_{tag}.txt", fields_map)

    with timer.stage("descriptor"):
        descriptors = [
            compute_gi_dasc(
                img, spmap, fields_map, patterns, config.dasc_params(), config.gi_config(), workers=config.threads
            )
            for (img, _), spmap, fields_map in zip(images, spmaps, field_maps)
        ]
    if persist:
        for tag, field in zip("ab", descriptors):
            write_descriptors(out / f"descriptors_{tag}.dasc", field)

    with timer.stage("match"):
        flow = match_flow_wta(descriptors[0], descriptors[1], config.flow_radius)
    write_flo(out / "flow.flo", flow)

    with timer.stage("evaluate"):
        metrics = flow_metrics(
            flow,
            config,
            gt_flow=read_flo(args.gt_flow) if args.gt_flow else None,
            annot_a=_read_annotation(args.annot_a) if args.annot_a else None,
            annot_b=_read_annotation(args.annot_b) if args.annot_b else None,
            desc_a=descriptors[0],
            desc_b=descriptors[1],
        )
    _write_metrics(str(out / "metrics.json"), metrics)
    timer.report()
    return 0


def _scene_overrides(config_cls, assignments: Sequence[str], seed: int) -> dict:
    types = {f.name: f.type for f in fields(config_cls)}
    overrides = {"seed": seed}
    for item in assignments:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in types or key in ("seed", "size"):
            raise FormatError(f"bad scene parameter {item!r}")
        overrides[key] = parse_value(types[key], value.strip(), key)
    return overrides


def _write_scene_item(out: Path, item: dict, prefix: str = "") -> None:
    for key in ("image_a", "image_b"):
        if key in item:
            write_image(out / f"{prefix}{key}.pgm", item[key])
    truth = item.get("ground_truth")
    if isinstance(truth, DisparityMap):
        write_disparity_pfm(out / f"{prefix}disparity.pfm", truth)
    elif isinstance(truth, FlowField):
        write_flo(out / f"{prefix}flow.flo", truth)
    for key in ("annotation_a", "annotation_b"):
        if key in item:
            write_pgm16(out / f"{prefix}{key}.pgm", item[key])
    for key in ("fields_a", "fields_b"):
        if key in item:
            write_fields(out / f"{prefix}{key}.txt", GeometricFieldMap.uniform(1, *item[key]))


def cmd_synth(args: argparse.Namespace, config: RunConfig) -> int:
    _, config_cls = DATASETS[args.scene]
    overrides = _scene_overrides(config_cls, args.param or [], config.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)

    if args.scene == "training_windows":
        dataset = create_dataset(args.scene, size=args.count, **overrides)
        with open(out / "manifest.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["path_a", "path_b", "label"])
            for idx, item in enumerate(dataset):
                pair = item["pair"]
                write_image(out / f"pair{idx:04d}_a.pgm", pair.window_a)
                write_image(out / f"pair{idx:04d}_b.pgm", pair.window_b)
                writer.writerow([f"pair{idx:04d}_a.pgm", f"pair{idx:04d}_b.pgm", pair.label])
    elif args.scene == "planted_features":
        item = create_dataset(args.scene, size=1, **overrides)[0]
        table = np.column_stack([item["features"], item["label"]])
        np.savetxt(out / "features.csv", table, delimiter=",", fmt="%.17g")
    else:
        dataset = create_dataset(args.scene, size=args.count, **overrides)
        for idx, item in enumerate(dataset):
            _write_scene_item(out, item, prefix="" if args.count == 1 else f"{idx:04d}_")
    logger.info("wrote %s scene to %s", args.scene, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    add_config_arguments(common)

    parser = argparse.ArgumentParser(prog="dasc", description="Dense adaptive self-correlation descriptors")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="compute a descriptor field")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--patterns", help="sampling pattern file (default: seeded random patterns)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--oracle", action="store_true", help="brute-force per-pixel path")
    mode.add_argument("--lss", action="store_true", help="local self-similarity baseline")
    p.add_argument("--symmetric", action="store_true", help="with --oracle, use symmetric weights")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("learn", parents=[common], help="learn sampling patterns from a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True, help="pattern file")
    p.add_argument("--model-out", help="model file (default: pattern file with .model suffix)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("detect", parents=[common], help="detect keypoints")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("segment", parents=[common], help="segment into superpixels (16-bit PGM labels)")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("propagate", parents=[common], help="propagate keypoint geometry over superpixels")
    p.add_argument("input")
    p.add_argument("--labels", required=True)
    p.add_argument("--keypoints", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("gi-compute", parents=[common], help="compute geometry-invariant descriptors")
    p.add_argument("input")
    p.add_argument("--labels", required=True)
    p.add_argument("--fields", required=True)
    p.add_argument("--patterns")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gi_compute)

    p = sub.add_parser("match-stereo", parents=[common], help="winner-takes-all disparity from descriptor files")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("-o", "--output", required=True, help=".pfm or 16-bit .pgm")
    p.set_defaults(func=cmd_match_stereo)

    p = sub.add_parser("match-flow", parents=[common], help="winner-takes-all flow from descriptor files")
    p.add_argument("desc_a")
    p.add_argument("desc_b")
    p.add_argument("-o", "--output", required=True, help=".flo file")
    p.set_defaults(func=cmd_match_flow)

    p = sub.add_parser("eval", parents=[common], help="evaluate a disparity map or flow field")
    estimate = p.add_mutually_exclusive_group(required=True)
    estimate.add_argument("--disparity")
    estimate.add_argument("--flow")
    p.add_argument("--gt-disparity")
    p.add_argument("--gt-flow")
    p.add_argument("--annot-a")
    p.add_argument("--annot-b")
    p.add_argument("--desc-a")
    p.add_argument("--desc-b")
    p.add_argument("-o", "--output", help="metrics JSON (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline-gi", parents=[common], help="full geometry-invariant matching pipeline")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--patterns")
    p.add_argument("--fields-from", nargs="+", metavar="FILE", help="field file(s) replacing detection")
    p.add_argument("--gt-flow")
    p.add_argument("--annot-a")
    p.add_argument("--annot-b")
    p.set_defaults(func=cmd_pipeline_gi)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic scene")
    p.add_argument("scene", choices=dataset_names())
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--count", type=int, default=1, help="number of items (pairs for training_windows)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="scene configuration override")
    p.set_defaults(func=cmd_synth)

    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    try:
        base = RunConfig.load(args.config) if args.config else RunConfig()
        config = config_from_args(args, base)
        return args.func(args, config)
    except DascError as e:
        logger.error("%s", e)
        return e.exit_code
    except AssertionError as e:
        logger.error("invalid parameter: %s", e)
        return ParameterError.exit_code
    except OSError as e:
        logger.error("%s", e)
        return ImageIOError.exit_code
    except Exception:
        logger.exception("internal error")
        return InternalError.exit_code


if __name__ == "__main__":
    sys.exit(main())
