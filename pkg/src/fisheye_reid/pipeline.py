"""End-to-end orchestration: configuration, stage wiring, run records.

A run walks every camera pair (sorted ids, each unordered pair once) and
every synchronized frame, computes the enabled feature score matrices,
normalizes and fuses them, matches both orientations, keeps the more
probable matching, and accumulates QMS / mAP counts per camera pair. With
a fold specification, each fold is evaluated on frames restricted to its
identities and the pooled report combines the raw counts.

Every evaluated frame also yields a match record (JSON line) carrying the
chosen pairs, their fused probabilities, and each query's rank of its true
match, so the report is exactly recomputable from the records alone.

Runs are deterministic for fixed inputs and configuration: nothing here
draws randomness, and all iteration orders are fixed.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from .appearance import (
    cosine_similarity_matrix,
    extract_hue_histogram,
    hue_dissimilarity_matrix,
)
from .core import (
    Detection,
    Feature,
    ScoreMatrix,
    SyncFramePair,
    build_sync_pairs,
    check_unique_identities,
)
from .dataset import Dataset, PathLike
from .errors import ConfigurationError, IngestionError
from .evaluation import (
    EvalReport,
    FoldSpec,
    frame_match_counts,
    merge_reports,
    restrict_pair_to_fold,
    true_match_rank,
)
from .fusion import DEFAULT_TEMPERATURE
from .geometry import (
    CBD_DEFAULT_HEIGHTS_CM,
    DEFAULT_CENTER_ELEVATION_FRACTION,
    LocationMetric,
    PPD_DEFAULT_HEIGHT_CM,
    location_dissimilarity,
    validate_heights,
)
from .matching import (
    Matcher,
    MatchPairResult,
    TemperatureSpec,
    greedy_match,
    hungarian_match,
    match_pair_detailed,
)


class MatcherKind(str, Enum):
    GREEDY = "greedy"
    HUNGARIAN = "hungarian"


_MATCHERS: dict[MatcherKind, Matcher] = {
    MatcherKind.GREEDY: greedy_match,
    MatcherKind.HUNGARIAN: hungarian_match,
}

# Features are always stacked in this order so runs are reproducible
# regardless of how the configuration lists them.
FEATURE_ORDER = (Feature.DL, Feature.CH, Feature.LOC)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs besides the dataset.

    ``temperature`` is either one shared softmax temperature or a
    per-feature mapping (features not listed fall back to the default).
    """

    features: tuple[Feature, ...] = FEATURE_ORDER
    loc_metric: LocationMetric = LocationMetric.PPD
    temperature: TemperatureSpec = DEFAULT_TEMPERATURE
    matcher: MatcherKind = MatcherKind.GREEDY
    fusion_renormalize: bool = False
    eta: float = DEFAULT_CENTER_ELEVATION_FRACTION
    histogram_bins: int = 256
    ppd_height_cm: float = PPD_DEFAULT_HEIGHT_CM
    cbd_heights_cm: tuple[float, ...] = CBD_DEFAULT_HEIGHTS_CM
    fold_file: Optional[str] = None

    def __post_init__(self) -> None:
        # coerce enum-valued fields so plain strings work everywhere
        try:
            features = tuple(Feature(f) for f in self.features)
            object.__setattr__(self, "loc_metric", LocationMetric(self.loc_metric))
            object.__setattr__(self, "matcher", MatcherKind(self.matcher))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        if not features:
            raise ConfigurationError("at least one feature must be enabled")
        if len(set(features)) != len(features):
            raise ConfigurationError(f"duplicate features in {features}")
        ordered = tuple(f for f in FEATURE_ORDER if f in features)
        object.__setattr__(self, "features", ordered)
        if not 0 < self.eta <= 1:
            raise ConfigurationError(f"eta must be in (0, 1], got {self.eta}")
        if self.histogram_bins < 2:
            raise ConfigurationError(f"histogram_bins must be >= 2, got {self.histogram_bins}")
        if self.ppd_height_cm <= 0:
            raise ConfigurationError(f"ppd_height_cm must be > 0, got {self.ppd_height_cm}")
        object.__setattr__(self, "cbd_heights_cm", validate_heights(self.cbd_heights_cm))
        if isinstance(self.temperature, Mapping):
            temp = {Feature(k): float(v) for k, v in self.temperature.items()}
            for value in temp.values():
                if value <= 0:
                    raise ConfigurationError(f"temperatures must be > 0, got {value}")
            object.__setattr__(self, "temperature", temp)
        elif float(self.temperature) <= 0:
            raise ConfigurationError(f"temperature must be > 0, got {self.temperature}")

    @property
    def label(self) -> str:
        """Feature-combination label used as the report row name."""
        parts = []
        for feat in self.features:
            if feat is Feature.LOC:
                parts.append(f"LOC/{self.loc_metric.value}")
            else:
                parts.append(feat.value)
        return "+".join(parts)

    def to_dict(self) -> dict:
        temp: Union[float, dict]
        if isinstance(self.temperature, Mapping):
            temp = {k.value: float(v) for k, v in self.temperature.items()}
        else:
            temp = float(self.temperature)
        return {
            "features": [f.value for f in self.features],
            "loc_metric": self.loc_metric.value,
            "temperature": temp,
            "matcher": self.matcher.value,
            "fusion_renormalize": self.fusion_renormalize,
            "eta": self.eta,
            "histogram_bins": self.histogram_bins,
            "ppd_height_cm": self.ppd_height_cm,
            "cbd_heights_cm": list(self.cbd_heights_cm),
            "fold_file": self.fold_file,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "PipelineConfig":
        known = {
            "features",
            "loc_metric",
            "temperature",
            "matcher",
            "fusion_renormalize",
            "eta",
            "histogram_bins",
            "ppd_height_cm",
            "cbd_heights_cm",
            "fold_file",
        }
        unknown = set(payload) - known
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        kwargs: dict = {}
        try:
            if "features" in payload:
                kwargs["features"] = tuple(Feature(f) for f in payload["features"])
            if "loc_metric" in payload:
                kwargs["loc_metric"] = LocationMetric(payload["loc_metric"])
            if "matcher" in payload:
                kwargs["matcher"] = MatcherKind(payload["matcher"])
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        for key in (
            "temperature",
            "fusion_renormalize",
            "eta",
            "histogram_bins",
            "ppd_height_cm",
            "fold_file",
        ):
            if key in payload:
                kwargs[key] = payload[key]
        if "cbd_heights_cm" in payload:
            kwargs["cbd_heights_cm"] = tuple(payload["cbd_heights_cm"])
        return cls(**kwargs)


def read_config(path: PathLike) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: not valid JSON: {exc}") from exc
    return PipelineConfig.from_dict(payload)


def write_config(config: PipelineConfig, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_folds(path: PathLike) -> FoldSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigurationError(f"{path}: fold file must map identity -> fold index")
    return FoldSpec({str(k): int(v) for k, v in payload.items()})


def write_folds(folds: FoldSpec, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dict(sorted(folds.fold_assignments.items())), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------
# Feature matrices for one frame pair
# ---------------------------------------------------------------------

def detection_ref(det: Detection, index: int) -> str:
    """Stable reference for one detection: camera:frame:position."""
    return f"{det.camera_id}:{det.frame_index}:{index}"


def _embedding_for(det: Detection, ref: str, dataset: Dataset) -> np.ndarray:
    if det.embedding_key is None:
        raise IngestionError(f"detection {ref} has no embedding key but DL is enabled")
    try:
        return dataset.embeddings[det.embedding_key]
    except KeyError:
        raise IngestionError(
            f"detection {ref}: embedding key {det.embedding_key!r} not in the store"
        ) from None


def _histogram_for(det: Detection, ref: str, dataset: Dataset, bins: int) -> np.ndarray:
    if det.crop_ref is None:
        raise IngestionError(f"detection {ref} has no crop reference but CH is enabled")
    hist = dataset.histograms.get(det.crop_ref)
    if hist is not None:
        return hist.bins
    path = Path(det.crop_ref)
    if path.exists():
        from PIL import Image

        with Image.open(path) as img:
            crop = np.asarray(img.convert("RGB"))
        return extract_hue_histogram(crop, bins).bins
    raise IngestionError(
        f"detection {ref}: crop reference {det.crop_ref!r} is neither a histogram key "
        "nor an existing image file"
    )


def compute_score_matrices(
    pair: SyncFramePair, dataset: Dataset, config: PipelineConfig
) -> list[ScoreMatrix]:
    """The enabled feature score matrices for one frame pair, in the
    fixed DL, CH, LOC order."""
    mats: list[ScoreMatrix] = []
    for feat in config.features:
        if feat is Feature.DL:
            q = [
                _embedding_for(d, detection_ref(d, i), dataset)
                for i, d in enumerate(pair.query_dets)
            ]
            g = [
                _embedding_for(d, detection_ref(d, i), dataset)
                for i, d in enumerate(pair.gallery_dets)
            ]
            mats.append(cosine_similarity_matrix(q, g))
        elif feat is Feature.CH:
            q = [
                _histogram_for(d, detection_ref(d, i), dataset, config.histogram_bins)
                for i, d in enumerate(pair.query_dets)
            ]
            g = [
                _histogram_for(d, detection_ref(d, i), dataset, config.histogram_bins)
                for i, d in enumerate(pair.gallery_dets)
            ]
            mats.append(hue_dissimilarity_matrix(q, g))
        else:
            mats.append(
                location_dissimilarity(
                    pair,
                    dataset.cameras,
                    config.loc_metric,
                    config.ppd_height_cm,
                    config.cbd_heights_cm,
                    config.eta,
                )
            )
    return mats


def validate_dataset_for_config(dataset: Dataset, config: PipelineConfig) -> None:
    """Fail fast, naming the first offending record.

    Checks that identities are unique per frame and camera, that every
    detection carries and resolves the references the enabled features
    need, and that calibration exists for every camera when location is
    enabled.
    """
    check_unique_identities(dataset.detections)
    if Feature.LOC in config.features:
        for cam_id in dataset.detection_camera_ids():
            if cam_id not in dataset.cameras:
                raise ConfigurationError(
                    f"location feature enabled but camera {cam_id!r} has no calibration"
                )
    for index, det in enumerate(dataset.detections):
        ref = detection_ref(det, index)
        if Feature.DL in config.features:
            _embedding_for(det, ref, dataset)
        if Feature.CH in config.features:
            if det.crop_ref is None or (
                det.crop_ref not in dataset.histograms and not Path(det.crop_ref).exists()
            ):
                raise IngestionError(
                    f"detection {ref} lacks appearance data for CH "
                    f"(crop_ref={det.crop_ref!r})"
                )


# ---------------------------------------------------------------------
# Match records
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class QueryRecord:
    """Evaluation detail for one query detection in one frame."""

    ref: str
    identity: Optional[str]
    predicted_ref: Optional[str]
    predicted_identity: Optional[str]
    probability: Optional[float]
    correct: bool
    true_match_rank: Optional[int]

    def to_dict(self) -> dict:
        return {
            "ref": self.ref,
            "identity": self.identity,
            "predicted_ref": self.predicted_ref,
            "predicted_identity": self.predicted_identity,
            "probability": self.probability,
            "correct": self.correct,
            "true_match_rank": self.true_match_rank,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "QueryRecord":
        return cls(
            ref=payload["ref"],
            identity=payload.get("identity"),
            predicted_ref=payload.get("predicted_ref"),
            predicted_identity=payload.get("predicted_identity"),
            probability=payload.get("probability"),
            correct=bool(payload["correct"]),
            true_match_rank=payload.get("true_match_rank"),
        )


@dataclass(frozen=True)
class FrameRecord:
    """One evaluated frame pair: the matching and its scoring inputs."""

    frame_index: int
    query_cam: str
    gallery_cam: str
    fold: Optional[int]
    orientation: str
    log_probability: float
    correct: int
    possible: int
    queries: tuple[QueryRecord, ...]

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_index,
            "query_cam": self.query_cam,
            "gallery_cam": self.gallery_cam,
            "fold": self.fold,
            "orientation": self.orientation,
            "log_probability": self.log_probability,
            "correct": self.correct,
            "possible": self.possible,
            "queries": [q.to_dict() for q in self.queries],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FrameRecord":
        return cls(
            frame_index=int(payload["frame"]),
            query_cam=payload["query_cam"],
            gallery_cam=payload["gallery_cam"],
            fold=payload.get("fold"),
            orientation=payload["orientation"],
            log_probability=float(payload["log_probability"]),
            correct=int(payload["correct"]),
            possible=int(payload["possible"]),
            queries=tuple(QueryRecord.from_dict(q) for q in payload["queries"]),
        )


def write_match_records(records: list[FrameRecord], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def read_match_records(path: PathLike) -> list[FrameRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(FrameRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise IngestionError(f"{path} line {line_no}: invalid match record: {exc}") from exc
    return records


def report_from_records(records: list[FrameRecord]) -> tuple[dict[Optional[int], EvalReport], EvalReport]:
    """Recompute per-fold and pooled reports from match records alone."""
    fold_reports: dict[Optional[int], EvalReport] = {}
    for record in records:
        report = fold_reports.setdefault(record.fold, EvalReport())
        ap_values = [
            1.0 / q.true_match_rank for q in record.queries if q.true_match_rank is not None
        ]
        report.pair((record.query_cam, record.gallery_cam)).add_frame(
            record.correct, record.possible, ap_values
        )
    pooled = merge_reports(fold_reports.values())
    return fold_reports, pooled


# ---------------------------------------------------------------------
# The run itself
# ---------------------------------------------------------------------

@dataclass
class RunResult:
    """Pooled report, per-fold reports, and per-frame match records."""

    config: PipelineConfig
    report: EvalReport
    fold_reports: dict[Optional[int], EvalReport] = field(default_factory=dict)
    records: list[FrameRecord] = field(default_factory=list)


def _evaluate_frame(
    pair: SyncFramePair,
    result: MatchPairResult,
    fold: Optional[int],
) -> FrameRecord:
    correct, possible = frame_match_counts(pair, result.matching)
    predicted = result.matching.as_dict()
    gallery_identities = [d.identity for d in pair.gallery_dets]

    queries = []
    for i, qdet in enumerate(pair.query_dets):
        g_idx = predicted.get(i)
        gdet = pair.gallery_dets[g_idx] if g_idx is not None else None
        rank: Optional[int] = None
        if qdet.identity is not None and qdet.identity in gallery_identities:
            rank = true_match_rank(
                result.query_scores(i), gallery_identities.index(qdet.identity)
            )
        queries.append(
            QueryRecord(
                ref=detection_ref(qdet, i),
                identity=qdet.identity,
                predicted_ref=detection_ref(gdet, g_idx) if gdet is not None else None,
                predicted_identity=gdet.identity if gdet is not None else None,
                probability=result.pair_probability(i, g_idx) if g_idx is not None else None,
                correct=gdet is not None and qdet.identity == gdet.identity,
                true_match_rank=rank,
            )
        )
    return FrameRecord(
        frame_index=pair.frame_index,
        query_cam=pair.query_cam,
        gallery_cam=pair.gallery_cam,
        fold=fold,
        orientation=result.matching.orientation.value,
        log_probability=result.matching.log_probability,
        correct=correct,
        possible=possible,
        queries=tuple(queries),
    )


def run(
    config: PipelineConfig,
    dataset: Dataset,
    folds: Optional[FoldSpec] = None,
) -> RunResult:
    """Evaluate a dataset under one configuration.

    Camera pairs are every unordered pair of camera ids appearing in the
    detections, the lexicographically smaller id acting as query. When a
    fold specification is given (directly or via ``config.fold_file``),
    every frame is evaluated once per fold, restricted to that fold's
    identities; otherwise everything is one unrestricted pass.
    """
    validate_dataset_for_config(dataset, config)
    if folds is None and config.fold_file is not None:
        folds = read_folds(config.fold_file)
    matcher = _MATCHERS[config.matcher]

    camera_ids = dataset.detection_camera_ids()
    fold_indices: tuple[Optional[int], ...]
    fold_indices = folds.fold_indices if folds is not None else (None,)

    fold_reports: dict[Optional[int], EvalReport] = {f: EvalReport() for f in fold_indices}
    records: list[FrameRecord] = []

    for cam_a, cam_b in itertools.combinations(camera_ids, 2):
        pairs = build_sync_pairs(dataset.detections, cam_a, cam_b)
        for pair in pairs:
            for fold in fold_indices:
                frame = pair if folds is None else restrict_pair_to_fold(pair, folds, fold)
                if not frame.query_dets and not frame.gallery_dets:
                    continue
                mats = compute_score_matrices(frame, dataset, config)
                result = match_pair_detailed(
                    mats,
                    temperature=config.temperature,
                    renormalize=config.fusion_renormalize,
                    matcher=matcher,
                )
                record = _evaluate_frame(frame, result, fold)
                ap_values = [
                    1.0 / q.true_match_rank
                    for q in record.queries
                    if q.true_match_rank is not None
                ]
                fold_reports[fold].pair((cam_a, cam_b)).add_frame(
                    record.correct, record.possible, ap_values
                )
                records.append(record)

    pooled = merge_reports(fold_reports.values())
    return RunResult(config=config, report=pooled, fold_reports=fold_reports, records=records)


def evaluate_folds(dataset: Dataset, folds: FoldSpec, config: PipelineConfig) -> RunResult:
    """Two-fold protocol: per-fold reports plus the pooled report."""
    return run(config, dataset, folds=folds)
