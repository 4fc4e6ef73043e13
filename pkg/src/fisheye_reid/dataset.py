"""Dataset container and on-disk formats.

A dataset directory holds four files, all plain text:

``detections.jsonl``
    One JSON object per line, one line per detection. Fields: ``frame``
    (int, time index), ``camera`` (str), ``cx``/``cy``/``w``/``h`` (bbox
    center and size, pixels), ``identity`` (str or null), ``embedding_key``
    (str or null, resolves into the embedding store), ``crop_ref`` (str or
    null, a histogram-store key or an image path).

``cameras.json``
    ``{"cameras": [...]}`` with one object per calibrated camera:
    ``camera_id``, ``position`` ([x, y] cm), ``mounting_height`` (cm),
    ``focal`` (px/rad), ``principal_point`` ([u, v] px), ``yaw`` (rad),
    ``image_size`` ([width, height] px).

``embeddings.tsv``
    Header line ``dim<TAB>D``; then one record per key:
    ``key<TAB>v1<TAB>...<TAB>vD``.

``histograms.tsv``
    Header line ``bins<TAB>B``; then one record per key:
    ``key<TAB>pixel_count<TAB>b1<TAB>...<TAB>bB``.

Floats are serialized with ``repr`` (shortest round-trip form), so a
write/read cycle reproduces the in-memory values bit-exactly.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .appearance import HueHistogram, validate_embedding
from .core import BoundingBox, Detection, check_unique_identities
from .errors import IngestionError
from .geometry import FisheyeCamera

PathLike = Union[str, Path]

DETECTIONS_FILE = "detections.jsonl"
CAMERAS_FILE = "cameras.json"
EMBEDDINGS_FILE = "embeddings.tsv"
HISTOGRAMS_FILE = "histograms.tsv"


@dataclass
class Dataset:
    """Everything one evaluation run consumes."""

    detections: list[Detection] = field(default_factory=list)
    cameras: dict[str, FisheyeCamera] = field(default_factory=dict)
    embeddings: dict[str, np.ndarray] = field(default_factory=dict)
    histograms: dict[str, HueHistogram] = field(default_factory=dict)

    def detection_camera_ids(self) -> list[str]:
        seen: list[str] = []
        for det in self.detections:
            if det.camera_id not in seen:
                seen.append(det.camera_id)
        return sorted(seen)

    def identities(self) -> set[str]:
        return {d.identity for d in self.detections if d.identity is not None}


# ---------------------------------------------------------------------
# Detections
# ---------------------------------------------------------------------

def _detection_to_record(det: Detection) -> dict:
    return {
        "frame": det.frame_index,
        "camera": det.camera_id,
        "cx": float(det.bbox.cx),
        "cy": float(det.bbox.cy),
        "w": float(det.bbox.w),
        "h": float(det.bbox.h),
        "identity": det.identity,
        "embedding_key": det.embedding_key,
        "crop_ref": det.crop_ref,
    }


def _detection_from_record(record: dict, line_no: int) -> Detection:
    try:
        bbox = BoundingBox(
            cx=float(record["cx"]),
            cy=float(record["cy"]),
            w=float(record["w"]),
            h=float(record["h"]),
        )
        return Detection(
            camera_id=str(record["camera"]),
            frame_index=int(record["frame"]),
            bbox=bbox,
            identity=record.get("identity"),
            crop_ref=record.get("crop_ref"),
            embedding_key=record.get("embedding_key"),
        )
    except (KeyError, TypeError, ValueError, IngestionError) as exc:
        raise IngestionError(f"line {line_no}: invalid detection record: {exc}") from exc


def write_detections(detections: list[Detection], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for det in detections:
            fh.write(json.dumps(_detection_to_record(det), sort_keys=True) + "\n")


def ingest_annotations(path: PathLike) -> list[Detection]:
    """Read and validate a line-delimited detections file.

    Malformed lines raise :class:`IngestionError` naming the line number;
    duplicate (frame, camera, identity) triples are rejected. An empty
    file yields an empty list with a warning.
    """
    detections: list[Detection] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"line {line_no}: not valid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise IngestionError(f"line {line_no}: expected a JSON object")
            detections.append(_detection_from_record(record, line_no))
    check_unique_identities(detections)
    if not detections:
        warnings.warn(f"detections file {path} is empty", stacklevel=2)
    return detections


def clamp_detections(
    detections: list[Detection], cameras: Mapping[str, FisheyeCamera]
) -> list[Detection]:
    """Clamp bbox centers into the owning camera's image bounds.

    Detections of uncalibrated cameras pass through unchanged. Centers
    beyond the visible hemisphere (off-axis angle >= 90 deg) cannot occur
    for valid overhead geometry and are rejected.
    """
    out = []
    for index, det in enumerate(detections):
        cam = cameras.get(det.camera_id)
        if cam is None:
            out.append(det)
            continue
        width, height = cam.image_size
        cx = min(max(det.bbox.cx, 0.0), width - 1.0)
        cy = min(max(det.bbox.cy, 0.0), height - 1.0)
        radius = math.hypot(cx - cam.principal_point[0], cy - cam.principal_point[1])
        if radius >= cam.focal * math.pi / 2.0:
            raise IngestionError(
                f"detection {det.camera_id}:{det.frame_index}:{index}: bbox center "
                f"({det.bbox.cx}, {det.bbox.cy}) back-projects outside the visible "
                f"hemisphere of camera {det.camera_id!r}"
            )
        if cx != det.bbox.cx or cy != det.bbox.cy:
            det = replace(det, bbox=BoundingBox(cx, cy, det.bbox.w, det.bbox.h))
        out.append(det)
    return out


# ---------------------------------------------------------------------
# Cameras
# ---------------------------------------------------------------------

def camera_to_record(cam: FisheyeCamera) -> dict:
    return {
        "camera_id": cam.camera_id,
        "position": [float(cam.position[0]), float(cam.position[1])],
        "mounting_height": float(cam.mounting_height),
        "focal": float(cam.focal),
        "principal_point": [float(cam.principal_point[0]), float(cam.principal_point[1])],
        "yaw": float(cam.yaw),
        "image_size": [int(cam.image_size[0]), int(cam.image_size[1])],
    }


def camera_from_record(record: dict) -> FisheyeCamera:
    try:
        return FisheyeCamera(
            camera_id=str(record["camera_id"]),
            position=(float(record["position"][0]), float(record["position"][1])),
            mounting_height=float(record["mounting_height"]),
            focal=float(record["focal"]),
            principal_point=(
                float(record["principal_point"][0]),
                float(record["principal_point"][1]),
            ),
            yaw=float(record["yaw"]),
            image_size=(int(record["image_size"][0]), int(record["image_size"][1])),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise IngestionError(f"invalid camera record {record!r}: {exc}") from exc


def write_cameras(cameras: Mapping[str, FisheyeCamera], path: PathLike) -> None:
    payload = {"cameras": [camera_to_record(cameras[k]) for k in sorted(cameras)]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_cameras(path: PathLike) -> dict[str, FisheyeCamera]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise IngestionError(f"{path}: not valid JSON: {exc}") from exc
    cameras = {}
    for record in payload.get("cameras", []):
        cam = camera_from_record(record)
        if cam.camera_id in cameras:
            raise IngestionError(f"duplicate camera id {cam.camera_id!r} in {path}")
        cameras[cam.camera_id] = cam
    return cameras


# ---------------------------------------------------------------------
# Embedding / histogram stores
# ---------------------------------------------------------------------

def write_embeddings(embeddings: Mapping[str, np.ndarray], path: PathLike) -> None:
    dims = {np.asarray(v).shape[0] for v in embeddings.values()}
    if len(dims) > 1:
        raise IngestionError(f"embedding store mixes dimensions: {sorted(dims)}")
    dim = dims.pop() if dims else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim\t{dim}\n")
        for key in sorted(embeddings):
            values = "\t".join(repr(float(v)) for v in np.asarray(embeddings[key]))
            fh.write(f"{key}\t{values}\n")


def read_embeddings(path: PathLike) -> dict[str, np.ndarray]:
    """Read an embedding store.

    Vectors are validated (finite, non-zero, consistent dimension) but
    stored verbatim; L2-normalization happens inside the cosine
    computation, so the round trip is bit-exact.
    """
    out: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split("\t")
        if len(header) != 2 or header[0] != "dim":
            raise IngestionError(f"{path}: expected header 'dim<TAB>D', got {header!r}")
        dim = int(header[1])
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            key, values = parts[0], parts[1:]
            if len(values) != dim:
                raise IngestionError(
                    f"{path} line {line_no}: expected {dim} values for key {key!r}, "
                    f"got {len(values)}"
                )
            if key in out:
                raise IngestionError(f"{path} line {line_no}: duplicate key {key!r}")
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise IngestionError(f"{path} line {line_no}: {exc}") from exc
            out[key] = validate_embedding(vec)
    return out


def write_histograms(histograms: Mapping[str, HueHistogram], path: PathLike) -> None:
    bin_counts = {h.num_bins for h in histograms.values()}
    if len(bin_counts) > 1:
        raise IngestionError(f"histogram store mixes bin counts: {sorted(bin_counts)}")
    bins = bin_counts.pop() if bin_counts else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"bins\t{bins}\n")
        for key in sorted(histograms):
            hist = histograms[key]
            values = "\t".join(repr(float(v)) for v in hist.bins)
            fh.write(f"{key}\t{hist.pixel_count}\t{values}\n")


def read_histograms(path: PathLike) -> dict[str, HueHistogram]:
    out: dict[str, HueHistogram] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split("\t")
        if len(header) != 2 or header[0] != "bins":
            raise IngestionError(f"{path}: expected header 'bins<TAB>B', got {header!r}")
        bins = int(header[1])
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != bins + 2:
                raise IngestionError(
                    f"{path} line {line_no}: expected key, pixel_count and {bins} bins"
                )
            key = parts[0]
            if key in out:
                raise IngestionError(f"{path} line {line_no}: duplicate key {key!r}")
            try:
                out[key] = HueHistogram(
                    np.array([float(v) for v in parts[2:]]), pixel_count=int(parts[1])
                )
            except ValueError as exc:
                raise IngestionError(f"{path} line {line_no}: {exc}") from exc
    return out


# ---------------------------------------------------------------------
# Whole-directory round trip
# ---------------------------------------------------------------------

def write_dataset(dataset: Dataset, directory: PathLike) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_detections(dataset.detections, directory / DETECTIONS_FILE)
    write_cameras(dataset.cameras, directory / CAMERAS_FILE)
    write_embeddings(dataset.embeddings, directory / EMBEDDINGS_FILE)
    write_histograms(dataset.histograms, directory / HISTOGRAMS_FILE)
    return directory


def read_dataset(directory: PathLike) -> Dataset:
    """Read a dataset directory; optional files may be absent.

    Detection centers are clamped into the owning camera's image bounds
    (a no-op on data this package wrote).
    """
    directory = Path(directory)
    det_path = directory / DETECTIONS_FILE
    if not det_path.exists():
        raise IngestionError(f"no {DETECTIONS_FILE} in {directory}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        detections = ingest_annotations(det_path)
    cam_path = directory / CAMERAS_FILE
    cameras = read_cameras(cam_path) if cam_path.exists() else {}
    emb_path = directory / EMBEDDINGS_FILE
    embeddings = read_embeddings(emb_path) if emb_path.exists() else {}
    hist_path = directory / HISTOGRAMS_FILE
    histograms = read_histograms(hist_path) if hist_path.exists() else {}
    return Dataset(
        detections=clamp_detections(detections, cameras),
        cameras=cameras,
        embeddings=embeddings,
        histograms=histograms,
    )
