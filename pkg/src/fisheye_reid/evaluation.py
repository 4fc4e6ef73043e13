"""Scoring of predicted matchings against ground truth.

Two metrics. The query matching score (QMS) is the number of correctly
matched query detections divided by the number of possible correct
matches, where a frame contributes |Q intersect G| possibilities (the
identities visible on both sides at that instant). Cumulative QMS over
camera pairs divides total correct by total possible, not the mean of
per-pair ratios.

Mean average precision is adapted to the one-correct-match-at-most
setting: queries whose identity is absent from the gallery are excluded,
and with exactly one relevant element the average precision of a query
reduces to the reciprocal rank of its correct gallery candidate under
descending fused match probability (ties broken by gallery index).

The two-fold protocol splits identities half and half; each fold is
evaluated with every frame restricted to that fold's identities, and the
pooled report combines correct/possible counts across folds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import Identity, SyncFramePair
from .errors import EvaluationError
from .matching import Matching

PairKey = tuple[str, str]


def _require_identities(pair: SyncFramePair) -> None:
    for det in pair.query_dets + pair.gallery_dets:
        if det.identity is None:
            raise EvaluationError(
                f"detection in frame {pair.frame_index}, camera {det.camera_id!r} "
                "has no ground-truth identity; cannot evaluate"
            )


def frame_match_counts(pair: SyncFramePair, matching: Matching) -> tuple[int, int]:
    """(correct, possible) for one frame.

    ``possible`` is the size of the intersection of the identity sets on
    the two sides; ``correct`` counts predicted pairs whose identities
    agree. correct <= possible always: identities are unique per side, so
    each shared identity can be correctly matched at most once.
    """
    _require_identities(pair)
    possible = len(pair.query_identities() & pair.gallery_identities())
    correct = 0
    for q_idx, g_idx in matching.pairs:
        if pair.query_dets[q_idx].identity == pair.gallery_dets[g_idx].identity:
            correct += 1
    return correct, possible


def qms(predictions: Sequence[Matching], frames: Sequence[SyncFramePair]) -> float:
    """Query matching score over a set of frames.

    The degenerate 0/0 case (no identity ever visible on both sides)
    reports 0.0 rather than raising, so batch runs never abort on empty
    fold/frame combinations.
    """
    if len(predictions) != len(frames):
        raise EvaluationError(
            f"got {len(predictions)} predictions for {len(frames)} frames"
        )
    correct = possible = 0
    for matching, pair in zip(predictions, frames):
        c, p = frame_match_counts(pair, matching)
        correct += c
        possible += p
    return correct / possible if possible else 0.0


# ---------------------------------------------------------------------
# Mean average precision
# ---------------------------------------------------------------------

def true_match_rank(scores: np.ndarray, correct_index: int) -> int:
    """Rank of the correct gallery element under descending score.

    Rank 1 is best. Ties are broken by gallery index: an equal-scoring
    candidate with a lower index ranks ahead of the correct one.
    """
    scores = np.asarray(scores, dtype=float)
    if not 0 <= correct_index < scores.shape[0]:
        raise EvaluationError(
            f"correct index {correct_index} outside gallery of size {scores.shape[0]}"
        )
    s = scores[correct_index]
    ahead = int(np.sum(scores > s)) + int(np.sum(scores[:correct_index] == s))
    return ahead + 1


def mean_average_precision(
    ranked_scores: Iterable[tuple[np.ndarray, Optional[int]]]
) -> float:
    """Mean over matched queries of 1 / rank of the correct candidate.

    Each entry is (gallery score vector, index of the correct gallery
    element). Entries with index None are queries without a gallery match
    and are excluded. No matched queries at all reports 0.0.
    """
    total = 0.0
    count = 0
    for scores, correct_index in ranked_scores:
        if correct_index is None:
            continue
        total += 1.0 / true_match_rank(scores, correct_index)
        count += 1
    return total / count if count else 0.0


# ---------------------------------------------------------------------
# Aggregated reports
# ---------------------------------------------------------------------

@dataclass
class PairMetrics:
    """Running counts for one camera pair."""

    correct: int = 0
    possible: int = 0
    ap_total: float = 0.0
    ap_count: int = 0

    @property
    def qms(self) -> float:
        return self.correct / self.possible if self.possible else 0.0

    @property
    def mean_ap(self) -> float:
        return self.ap_total / self.ap_count if self.ap_count else 0.0

    def add_frame(self, correct: int, possible: int, ap_values: Sequence[float]) -> None:
        if correct > possible:
            raise EvaluationError(f"correct ({correct}) exceeds possible ({possible})")
        self.correct += correct
        self.possible += possible
        self.ap_total += float(sum(ap_values))
        self.ap_count += len(ap_values)

    def merge(self, other: "PairMetrics") -> None:
        self.correct += other.correct
        self.possible += other.possible
        self.ap_total += other.ap_total
        self.ap_count += other.ap_count


@dataclass
class EvalReport:
    """Per-camera-pair and cumulative QMS / mAP.

    Cumulative values pool raw counts over pairs (total correct over total
    possible; all AP values averaged together), never the mean of per-pair
    ratios.
    """

    per_pair: dict[PairKey, PairMetrics] = field(default_factory=dict)

    def pair(self, key: PairKey) -> PairMetrics:
        return self.per_pair.setdefault(key, PairMetrics())

    @property
    def total_correct(self) -> int:
        return sum(m.correct for m in self.per_pair.values())

    @property
    def total_possible(self) -> int:
        return sum(m.possible for m in self.per_pair.values())

    @property
    def cumulative_qms(self) -> float:
        possible = self.total_possible
        return self.total_correct / possible if possible else 0.0

    @property
    def cumulative_map(self) -> float:
        count = sum(m.ap_count for m in self.per_pair.values())
        total = sum(m.ap_total for m in self.per_pair.values())
        return total / count if count else 0.0

    @property
    def degenerate(self) -> bool:
        """True when no possible match existed anywhere (QMS was 0/0)."""
        return self.total_possible == 0

    def merged_with(self, other: "EvalReport") -> "EvalReport":
        out = EvalReport()
        for report in (self, other):
            for key, metrics in report.per_pair.items():
                out.pair(key).merge(metrics)
        return out

    def to_dict(self) -> dict:
        return {
            "per_pair": {
                f"{a}+{b}": {
                    "qms": m.qms,
                    "map": m.mean_ap,
                    "correct": m.correct,
                    "possible": m.possible,
                    "ap_total": m.ap_total,
                    "ap_count": m.ap_count,
                }
                for (a, b), m in sorted(self.per_pair.items())
            },
            "cumulative": {
                "qms": self.cumulative_qms,
                "map": self.cumulative_map,
                "correct": self.total_correct,
                "possible": self.total_possible,
            },
            "degenerate": self.degenerate,
        }


def merge_reports(reports: Iterable[EvalReport]) -> EvalReport:
    out = EvalReport()
    for report in reports:
        out = out.merged_with(report)
    return out


# ---------------------------------------------------------------------
# Fold protocol
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class FoldSpec:
    """Assignment of every evaluated identity to one fold."""

    fold_assignments: Mapping[Identity, int]

    def __post_init__(self) -> None:
        for identity, fold in self.fold_assignments.items():
            if not identity:
                raise EvaluationError("empty identity label in fold assignment")
            if fold not in (0, 1):
                raise EvaluationError(
                    f"fold index must be 0 or 1, got {fold} for identity {identity!r}"
                )

    @property
    def fold_indices(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.fold_assignments.values())))

    def identities_in_fold(self, fold: int) -> set[Identity]:
        return {ident for ident, f in self.fold_assignments.items() if f == fold}


def make_identity_folds(identities: Iterable[Identity], seed: int = 0) -> FoldSpec:
    """Split identities into two folds, half and half (seeded shuffle)."""
    ordered = sorted(set(identities))
    rng = np.random.default_rng(seed)
    rng.shuffle(ordered)
    half = (len(ordered) + 1) // 2
    return FoldSpec({ident: (0 if i < half else 1) for i, ident in enumerate(ordered)})


def restrict_pair_to_fold(pair: SyncFramePair, folds: FoldSpec, fold: int) -> SyncFramePair:
    """Keep only detections whose identity belongs to the given fold.

    Every detection must carry an identity present in the fold map.
    """
    def keep(dets):
        kept = []
        for det in dets:
            if det.identity is None or det.identity not in folds.fold_assignments:
                raise EvaluationError(
                    f"identity {det.identity!r} (frame {pair.frame_index}, camera "
                    f"{det.camera_id!r}) missing from the fold assignment"
                )
            if folds.fold_assignments[det.identity] == fold:
                kept.append(det)
        return tuple(kept)

    return SyncFramePair(
        frame_index=pair.frame_index,
        query_cam=pair.query_cam,
        gallery_cam=pair.gallery_cam,
        query_dets=keep(pair.query_dets),
        gallery_dets=keep(pair.gallery_dets),
    )


# ---------------------------------------------------------------------
# Report formatting
# ---------------------------------------------------------------------

def _pair_label(key: PairKey) -> str:
    return f"{key[0]}+{key[1]}"


def format_report(
    rows: Mapping[str, EvalReport], pair_order: Optional[Sequence[PairKey]] = None
) -> str:
    """Tab-separated report table: one row per feature combination,
    QMS and mAP percentages (2 decimals) per camera pair plus cumulative.
    """
    if not rows:
        return "features\tQMS[%] Cum.\tmAP[%] Cum.\n"
    if pair_order is None:
        keys: list[PairKey] = []
        for report in rows.values():
            for key in report.per_pair:
                if key not in keys:
                    keys.append(key)
        pair_order = sorted(keys)
    header = (
        ["features"]
        + [f"QMS[%] {_pair_label(k)}" for k in pair_order]
        + ["QMS[%] Cum."]
        + [f"mAP[%] {_pair_label(k)}" for k in pair_order]
        + ["mAP[%] Cum."]
    )
    lines = ["\t".join(header)]
    for label, report in rows.items():
        cells = [label]
        for key in pair_order:
            metrics = report.per_pair.get(key, PairMetrics())
            cells.append(f"{100.0 * metrics.qms:.2f}")
        cells.append(f"{100.0 * report.cumulative_qms:.2f}")
        for key in pair_order:
            metrics = report.per_pair.get(key, PairMetrics())
            cells.append(f"{100.0 * metrics.mean_ap:.2f}")
        cells.append(f"{100.0 * report.cumulative_map:.2f}")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
