"""Domain types shared by every stage.

Detections, synchronized frame pairs, and pairwise score matrices. All
types are immutable after construction and safe to share across workers;
a synchronized frame pair is the independent unit of work for the whole
pipeline.

Identities are opaque non-empty strings compared by exact token equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, IngestionError

# Ground-truth identity label: opaque non-empty token, exact equality.
Identity = str


class Polarity(Enum):
    """Whether larger score values mean more alike or less alike."""

    SIMILARITY = "similarity"
    DISSIMILARITY = "dissimilarity"


class Feature(str, Enum):
    """The three pairwise-score families the pipeline can fuse.

    DL  - deep-learning embedding cosine similarity
    CH  - color (hue) histogram divergence
    LOC - cross-view location distance
    """

    DL = "DL"
    CH = "CH"
    LOC = "LOC"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned person box in pixel coordinates (center + size)."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0 and self.h > 0):
            raise IngestionError(
                f"bounding box must have positive size, got w={self.w}, h={self.h}"
            )

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)


@dataclass(frozen=True)
class Detection:
    """One person observation in one camera frame.

    ``identity`` is ground truth and present only in annotated data.
    ``crop_ref`` points at pixel data (image path) or a precomputed-histogram
    key; ``embedding_key`` resolves into an embedding store. A detection
    used by the appearance stage must carry the reference the requested
    feature needs.
    """

    camera_id: str
    frame_index: int
    bbox: BoundingBox
    identity: Optional[Identity] = None
    crop_ref: Optional[str] = None
    embedding_key: Optional[str] = None

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise IngestionError(f"frame_index must be >= 0, got {self.frame_index}")
        if not self.camera_id:
            raise IngestionError("camera_id must be a non-empty string")
        if self.identity is not None and not self.identity:
            raise IngestionError("identity label must be non-empty when present")


@dataclass(frozen=True)
class SyncFramePair:
    """The detections of two cameras at one time index.

    One side is designated query, the other gallery; either side may be
    empty. Detection order within a side is ingestion order and matrices
    index detections by position.
    """

    frame_index: int
    query_cam: str
    gallery_cam: str
    query_dets: tuple[Detection, ...]
    gallery_dets: tuple[Detection, ...]

    def __post_init__(self) -> None:
        if self.query_cam == self.gallery_cam:
            raise ConfigurationError(
                f"query and gallery cameras must differ, both are {self.query_cam!r}"
            )
        for det in self.query_dets + self.gallery_dets:
            if det.frame_index != self.frame_index:
                raise IngestionError(
                    f"detection at frame {det.frame_index} grouped into pair "
                    f"for frame {self.frame_index}"
                )

    def swapped(self) -> "SyncFramePair":
        """The same frame with query and gallery roles exchanged."""
        return SyncFramePair(
            frame_index=self.frame_index,
            query_cam=self.gallery_cam,
            gallery_cam=self.query_cam,
            query_dets=self.gallery_dets,
            gallery_dets=self.query_dets,
        )

    def query_identities(self) -> set[Identity]:
        return {d.identity for d in self.query_dets if d.identity is not None}

    def gallery_identities(self) -> set[Identity]:
        return {d.identity for d in self.gallery_dets if d.identity is not None}


def _readonly(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ScoreMatrix:
    """|Q| x |G| pairwise scores for one feature, tagged with polarity.

    Entry (i, j) scores query detection i against gallery detection j.
    All values are finite; divergence and distance features are >= 0.
    """

    values: np.ndarray
    polarity: Polarity
    feature: Feature

    def __post_init__(self) -> None:
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.ndim != 2:
            raise ValueError(f"score matrix must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("score matrix contains non-finite values")
        if (
            self.polarity is Polarity.DISSIMILARITY
            and self.feature in (Feature.CH, Feature.LOC)
            and values.size
            and values.min() < 0
        ):
            raise ValueError(
                f"{self.feature.value} dissimilarities must be >= 0, "
                f"got min {values.min()}"
            )
        object.__setattr__(self, "values", _readonly(values))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    def transposed(self) -> "ScoreMatrix":
        """The same scores with query/gallery roles exchanged."""
        return ScoreMatrix(self.values.T, self.polarity, self.feature)


def empty_score_matrix(rows: int, cols: int, polarity: Polarity, feature: Feature) -> ScoreMatrix:
    return ScoreMatrix(np.zeros((rows, cols)), polarity, feature)


def build_sync_pairs(
    detections: Iterable[Detection],
    cam_a: str,
    cam_b: str,
    known_cameras: Optional[Sequence[str]] = None,
) -> list[SyncFramePair]:
    """Group detections of two cameras into synchronized frame pairs.

    Emits one pair per frame index at which at least one of the two
    cameras has a detection, with ``cam_a`` as query and ``cam_b`` as
    gallery. Detections of other cameras are ignored. Detection order
    within a side is the input order. When ``known_cameras`` is given,
    both camera ids must be in it.
    """
    if cam_a == cam_b:
        raise ConfigurationError(f"camera pair must use two distinct cameras, got {cam_a!r} twice")
    if known_cameras is not None:
        for cam in (cam_a, cam_b):
            if cam not in known_cameras:
                raise ConfigurationError(
                    f"unknown camera id {cam!r}; known cameras: {sorted(known_cameras)}"
                )

    by_frame: dict[int, tuple[list[Detection], list[Detection]]] = {}
    for det in detections:
        if det.camera_id == cam_a:
            by_frame.setdefault(det.frame_index, ([], []))[0].append(det)
        elif det.camera_id == cam_b:
            by_frame.setdefault(det.frame_index, ([], []))[1].append(det)

    pairs = []
    for frame_index in sorted(by_frame):
        q_dets, g_dets = by_frame[frame_index]
        pairs.append(
            SyncFramePair(
                frame_index=frame_index,
                query_cam=cam_a,
                gallery_cam=cam_b,
                query_dets=tuple(q_dets),
                gallery_dets=tuple(g_dets),
            )
        )
    return pairs


def check_unique_identities(detections: Iterable[Detection]) -> None:
    """Reject duplicate (frame, camera, identity) triples.

    Valid annotated data carries each identity at most once per frame per
    camera; duplicates would make the evaluation denominator ambiguous.
    """
    seen: set[tuple[int, str, Identity]] = set()
    for det in detections:
        if det.identity is None:
            continue
        key = (det.frame_index, det.camera_id, det.identity)
        if key in seen:
            raise IngestionError(
                f"duplicate identity {det.identity!r} in frame {det.frame_index}, "
                f"camera {det.camera_id!r}"
            )
        seen.add(key)
