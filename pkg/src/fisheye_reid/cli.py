"""Command-line interface.

Four subcommands: ``simulate`` renders a synthetic scene into a dataset
directory, ``run`` evaluates a dataset under a configuration and writes
report.txt / report.json / matches.jsonl, ``match`` prints every matrix of
one frame pair for debugging, and ``evaluate`` recomputes the report from
previously written match records.

Each error class maps to its own exit code so callers can tell a bad
configuration from bad data without parsing messages.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Feature
from .dataset import read_dataset, write_dataset
from .errors import (
    ConfigurationError,
    EvaluationError,
    FeatureError,
    FusionError,
    GeometryError,
    IngestionError,
    ReidError,
)
from .evaluation import format_report
from .fusion import normalize
from .geometry import LocationMetric
from .matching import match_pair_detailed, resolve_temperature
from .pipeline import (
    MatcherKind,
    PipelineConfig,
    compute_score_matrices,
    read_config,
    read_match_records,
    report_from_records,
    run,
    write_match_records,
)
from .simulator import (
    NoiseModel,
    ambiguity_scenarios,
    render,
    separated_scene,
)

EXIT_CODES: dict[type, int] = {
    ConfigurationError: 2,
    IngestionError: 3,
    FeatureError: 4,
    GeometryError: 5,
    FusionError: 6,
    EvaluationError: 7,
}


def _parse_temperature(text: str):
    """Either a bare float or a per-feature list like DL=0.1,CH=0.1,LOC=100."""
    if "=" not in text:
        return float(text)
    out = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        try:
            out[Feature(name.strip())] = float(value)
        except ValueError as exc:
            raise ConfigurationError(f"bad temperature spec {text!r}: {exc}") from exc
    return out


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    if args.config:
        config = read_config(args.config)
    else:
        config = PipelineConfig()
    overrides: dict = {}
    if args.features:
        try:
            overrides["features"] = tuple(Feature(f.strip()) for f in args.features.split(","))
        except ValueError as exc:
            raise ConfigurationError(f"bad feature list {args.features!r}: {exc}") from exc
    if args.loc_metric:
        overrides["loc_metric"] = LocationMetric(args.loc_metric)
    if args.temperature:
        overrides["temperature"] = _parse_temperature(args.temperature)
    if args.matcher:
        overrides["matcher"] = MatcherKind(args.matcher)
    if args.renormalize:
        overrides["fusion_renormalize"] = True
    if args.eta is not None:
        overrides["eta"] = args.eta
    if args.histogram_bins is not None:
        overrides["histogram_bins"] = args.histogram_bins
    if args.ppd_height is not None:
        overrides["ppd_height_cm"] = args.ppd_height
    if args.cbd_heights:
        overrides["cbd_heights_cm"] = tuple(float(h) for h in args.cbd_heights.split(","))
    if getattr(args, "fold_file", None):
        overrides["fold_file"] = args.fold_file
    if overrides:
        config = PipelineConfig(**{**_config_kwargs(config), **overrides})
    return config


def _config_kwargs(config: PipelineConfig) -> dict:
    return {
        "features": config.features,
        "loc_metric": config.loc_metric,
        "temperature": config.temperature,
        "matcher": config.matcher,
        "fusion_renormalize": config.fusion_renormalize,
        "eta": config.eta,
        "histogram_bins": config.histogram_bins,
        "ppd_height_cm": config.ppd_height_cm,
        "cbd_heights_cm": config.cbd_heights_cm,
        "fold_file": config.fold_file,
    }


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--features", help="comma list from DL,CH,LOC")
    parser.add_argument("--loc-metric", dest="loc_metric", choices=[m.value for m in LocationMetric])
    parser.add_argument(
        "--temperature", help="softmax temperature: a number, or DL=0.1,CH=0.1,LOC=100"
    )
    parser.add_argument("--matcher", choices=[m.value for m in MatcherKind])
    parser.add_argument("--renormalize", action="store_true", help="renormalize rows after fusion")
    parser.add_argument("--eta", type=float, help="bbox-center elevation fraction (default 0.5)")
    parser.add_argument("--histogram-bins", dest="histogram_bins", type=int)
    parser.add_argument("--ppd-height", dest="ppd_height", type=float, help="assumed height in cm")
    parser.add_argument("--cbd-heights", dest="cbd_heights", help="comma list of heights in cm")


def _cmd_simulate(args: argparse.Namespace) -> int:
    noise = NoiseModel(
        bbox_sigma_px=args.bbox_noise,
        embedding_sigma=args.embedding_noise,
        hue_sample_count=args.hue_samples,
    )
    if args.scenario == "separated":
        spec = separated_scene(
            num_people=args.people,
            num_cameras=args.cameras,
            frames=args.frames,
            seed=args.seed,
            noise=noise,
        )
    else:
        scenes = ambiguity_scenarios(seed=args.seed, frames=args.frames, noise=noise)
        spec = scenes[args.scenario]
    dataset = render(spec)
    out = write_dataset(dataset, args.out)
    print(
        f"wrote {len(dataset.detections)} detections, {len(dataset.cameras)} cameras, "
        f"{len(dataset.embeddings)} embeddings, {len(dataset.histograms)} histograms to {out}"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    dataset = read_dataset(args.data)
    result = run(config, dataset)

    table = format_report({config.label: result.report})
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(table, encoding="utf-8")
    payload = {
        "config": config.to_dict(),
        "pooled": result.report.to_dict(),
        "folds": {
            str(fold): report.to_dict() for fold, report in sorted(
                result.fold_reports.items(), key=lambda kv: str(kv[0])
            )
        },
    }
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_match_records(result.records, out_dir / "matches.jsonl")
    sys.stdout.write(table)
    if result.report.degenerate:
        print("warning: no possible correct matches anywhere (QMS reported as 0)")
    return 0


def _cmd_match(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    dataset = read_dataset(args.data)
    from .core import build_sync_pairs

    pairs = build_sync_pairs(
        dataset.detections, args.query_cam, args.gallery_cam,
        known_cameras=dataset.detection_camera_ids(),
    )
    pair = next((p for p in pairs if p.frame_index == args.frame), None)
    if pair is None:
        raise IngestionError(
            f"no detections at frame {args.frame} for cameras "
            f"{args.query_cam!r}/{args.gallery_cam!r}"
        )
    mats = compute_score_matrices(pair, dataset, config)
    np.set_printoptions(precision=4, suppress=True)
    print(f"frame {pair.frame_index}: |Q|={len(pair.query_dets)} ({pair.query_cam}), "
          f"|G|={len(pair.gallery_dets)} ({pair.gallery_cam})")
    for mat in mats:
        print(f"\n{mat.feature.value} scores ({mat.polarity.value}):")
        print(mat.values)
        temp = resolve_temperature(config.temperature, mat.feature)
        print(f"{mat.feature.value} match probabilities (query rows, T={temp}):")
        print(normalize(mat, temp).values)
    result = match_pair_detailed(
        mats, temperature=config.temperature, renormalize=config.fusion_renormalize
    )
    print("\nfused (query rows):")
    print(result.fused_query_rows.values)
    print("fused (gallery rows):")
    print(result.fused_gallery_rows.values)
    print(f"\nchosen orientation: {result.matching.orientation.value}")
    print(f"log probability: {result.matching.log_probability:.6f}")
    for q_idx, g_idx in result.matching.pairs:
        q, g = pair.query_dets[q_idx], pair.gallery_dets[g_idx]
        prob = result.pair_probability(q_idx, g_idx)
        print(
            f"  query {q_idx} ({q.identity}) -> gallery {g_idx} ({g.identity}) "
            f"p={prob:.6f}"
        )
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    records = read_match_records(args.matches)
    fold_reports, pooled = report_from_records(records)
    table = format_report({args.label: pooled})
    sys.stdout.write(table)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.txt").write_text(table, encoding="utf-8")
        payload = {
            "pooled": pooled.to_dict(),
            "folds": {
                str(fold): report.to_dict() for fold, report in sorted(
                    fold_reports.items(), key=lambda kv: str(kv[0])
                )
            },
        }
        (out_dir / "report.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisheye-reid",
        description="Cross-camera person re-identification for overhead fisheye rigs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="render a synthetic scene into a dataset directory")
    sim.add_argument(
        "--scenario",
        default="separated",
        choices=["separated", "location", "appearance", "combined"],
    )
    sim.add_argument("--out", required=True, help="output dataset directory")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--frames", type=int, default=20)
    sim.add_argument("--people", type=int, default=5, help="(separated scenario only)")
    sim.add_argument("--cameras", type=int, default=3, help="(separated scenario only)")
    sim.add_argument("--bbox-noise", dest="bbox_noise", type=float, default=0.0)
    sim.add_argument("--embedding-noise", dest="embedding_noise", type=float, default=0.0)
    sim.add_argument("--hue-samples", dest="hue_samples", type=int, default=0)
    sim.set_defaults(func=_cmd_simulate)

    runp = sub.add_parser("run", help="evaluate a dataset and write reports")
    runp.add_argument("--data", required=True, help="dataset directory")
    runp.add_argument("--out", required=True, help="output directory")
    runp.add_argument("--fold-file", dest="fold_file", help="JSON identity -> fold index")
    _add_config_flags(runp)
    runp.set_defaults(func=_cmd_run)

    matchp = sub.add_parser("match", help="print matrices and matching of one frame pair")
    matchp.add_argument("--data", required=True)
    matchp.add_argument("--frame", type=int, required=True)
    matchp.add_argument("--query-cam", dest="query_cam", required=True)
    matchp.add_argument("--gallery-cam", dest="gallery_cam", required=True)
    _add_config_flags(matchp)
    matchp.set_defaults(func=_cmd_match)

    evalp = sub.add_parser("evaluate", help="recompute metrics from match records")
    evalp.add_argument("--matches", required=True, help="matches.jsonl from a run")
    evalp.add_argument("--out", help="optional output directory for the recomputed report")
    evalp.add_argument("--label", default="recomputed", help="row label for the table")
    evalp.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ReidError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_CODES.get(type(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
