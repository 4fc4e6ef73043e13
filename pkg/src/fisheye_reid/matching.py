"""Identity matching over a fused match-probability matrix.

The default matcher is greedy sequential: repeatedly take the globally
largest remaining probability, fix that query-gallery pair, and delete its
row and column until one side is exhausted. The probability of the whole
matching is the product of the selected entries, accumulated in log space.

Because row-wise normalization is not symmetric in the two camera roles,
a frame pair is matched twice: once with the raw score matrices normalized
as-is (query rows) and once with them transposed first (gallery rows).
The matching with the higher probability wins; ties keep the query-rows
orientation.

An optimal-assignment matcher (Hungarian) is included as a reference and
diagnostic; greedy is the default since it is far cheaper and loses little
in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Feature, ScoreMatrix
from .fusion import (
    DEFAULT_TEMPERATURE,
    MatchProbabilityMatrix,
    Orientation,
    fuse,
    normalize,
)

TemperatureSpec = Union[float, Mapping[Feature, float]]

# Stand-in cost for log(0) in the assignment solver: large enough that a
# zero-probability pair is chosen only when no positive alternative
# completes the assignment.
_ZERO_LOG_COST = 1e30


def resolve_temperature(temperature: TemperatureSpec, feature: Feature) -> float:
    """Per-feature temperature lookup; a bare float applies to all features."""
    if isinstance(temperature, Mapping):
        return float(temperature.get(feature, DEFAULT_TEMPERATURE))
    return float(temperature)


@dataclass(frozen=True)
class Matching:
    """A partial injective map from query indices to gallery indices.

    ``pairs`` are (query index, gallery index), each index appearing at
    most once. ``log_probability`` is the sum of log match-probabilities
    over the pairs (0.0 for an empty matching). ``orientation`` records
    which side was row-normalized when the matching was chosen.
    """

    pairs: tuple[tuple[int, int], ...]
    log_probability: float
    orientation: Orientation = Orientation.QUERY_ROWS

    def __post_init__(self) -> None:
        q_used = [q for q, _ in self.pairs]
        g_used = [g for _, g in self.pairs]
        if len(set(q_used)) != len(q_used) or len(set(g_used)) != len(g_used):
            raise ValueError(f"matching is not injective: {self.pairs}")

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    @property
    def probability(self) -> float:
        return math.exp(self.log_probability) if self.pairs else 1.0


def _log(p: float) -> float:
    return math.log(p) if p > 0 else float("-inf")


def greedy_match(
    matrix: MatchProbabilityMatrix, allow_zero_pairs: bool = False
) -> Matching:
    """Greedy sequential matching.

    Deterministic: ties on the maximum go to the lowest row, then the
    lowest column. Zero-probability entries are never selected while any
    positive entry remains; once only zeros remain the matching stops
    (pairing through probability zero would make the whole matching
    impossible). Set ``allow_zero_pairs`` to keep pairing until a side is
    exhausted regardless.
    """
    work = matrix.values.astype(float, copy=True)
    n_rows, n_cols = work.shape
    pairs: list[tuple[int, int]] = []
    log_prob = 0.0
    for _ in range(min(n_rows, n_cols)):
        flat = np.argmax(work)  # row-major scan: lowest row, then column
        i, j = divmod(int(flat), n_cols)
        best = work[i, j]
        if best == -np.inf:
            break
        if best <= 0.0 and not allow_zero_pairs:
            break
        pairs.append((i, j))
        log_prob += _log(float(matrix.values[i, j]))
        work[i, :] = -np.inf
        work[:, j] = -np.inf
    return Matching(tuple(sorted(pairs)), log_prob, matrix.orientation)


def hungarian_match(matrix: MatchProbabilityMatrix) -> Matching:
    """Optimal assignment: maximize the sum of log match-probabilities.

    Solves the rectangular assignment problem over min(|Q|, |G|) pairs.
    Zero-probability entries get an effectively infinite cost, so they
    appear in the result only when every full-size assignment is forced
    through them (the log probability is then -inf).
    """
    values = matrix.values
    if values.size == 0:
        return Matching((), 0.0, matrix.orientation)
    with np.errstate(divide="ignore"):
        cost = -np.log(values)
    cost[np.isinf(cost)] = _ZERO_LOG_COST
    rows, cols = linear_sum_assignment(cost)
    pairs = tuple(sorted((int(i), int(j)) for i, j in zip(rows, cols)))
    log_prob = sum(_log(float(values[i, j])) for i, j in pairs)
    return Matching(pairs, log_prob, matrix.orientation)


Matcher = Callable[[MatchProbabilityMatrix], Matching]


@dataclass(frozen=True)
class MatchPairResult:
    """Both orientations of one frame-pair matching.

    ``matching`` is the winner, with pairs expressed as (query, gallery)
    regardless of the winning orientation. The fused matrices are kept for
    diagnostics and for ranking gallery candidates per query.
    """

    matching: Matching
    fused_query_rows: MatchProbabilityMatrix
    fused_gallery_rows: MatchProbabilityMatrix
    query_rows_matching: Matching
    gallery_rows_matching: Matching

    def query_scores(self, query_index: int) -> np.ndarray:
        """The chosen orientation's match probabilities of one query
        against every gallery candidate."""
        if self.matching.orientation is Orientation.QUERY_ROWS:
            return self.fused_query_rows.values[query_index, :]
        return self.fused_gallery_rows.values[:, query_index]

    def pair_probability(self, query_index: int, gallery_index: int) -> float:
        """The chosen orientation's fused probability of one pairing."""
        if self.matching.orientation is Orientation.QUERY_ROWS:
            return float(self.fused_query_rows.values[query_index, gallery_index])
        return float(self.fused_gallery_rows.values[gallery_index, query_index])


def match_pair_detailed(
    scores_by_feature: Sequence[ScoreMatrix],
    temperature: TemperatureSpec = DEFAULT_TEMPERATURE,
    renormalize: bool = False,
    matcher: Matcher = greedy_match,
) -> MatchPairResult:
    """Normalize, fuse and match one frame pair in both orientations.

    The raw score matrices are row-normalized and fused as given (query
    rows) and again after transposition (gallery rows); the matcher runs
    on both fused matrices and the matching with the higher log
    probability is kept, ties going to query rows.
    """
    if not scores_by_feature:
        raise ValueError("need at least one score matrix")
    shape = scores_by_feature[0].shape
    for mat in scores_by_feature[1:]:
        if mat.shape != shape:
            raise ValueError(f"score matrices disagree on shape: {mat.shape} vs {shape}")

    fused_q = fuse(
        [
            normalize(m, resolve_temperature(temperature, m.feature), Orientation.QUERY_ROWS)
            for m in scores_by_feature
        ],
        renormalize=renormalize,
    )
    fused_g = fuse(
        [
            normalize(
                m.transposed(), resolve_temperature(temperature, m.feature), Orientation.GALLERY_ROWS
            )
            for m in scores_by_feature
        ],
        renormalize=renormalize,
    )
    match_q = matcher(fused_q)
    match_g = matcher(fused_g)

    if match_g.log_probability > match_q.log_probability:
        winner = Matching(
            tuple(sorted((q, g) for g, q in match_g.pairs)),
            match_g.log_probability,
            Orientation.GALLERY_ROWS,
        )
    else:
        winner = match_q
    return MatchPairResult(
        matching=winner,
        fused_query_rows=fused_q,
        fused_gallery_rows=fused_g,
        query_rows_matching=match_q,
        gallery_rows_matching=match_g,
    )


def match_pair(
    scores_by_feature: Sequence[ScoreMatrix],
    temperature: TemperatureSpec = DEFAULT_TEMPERATURE,
    renormalize: bool = False,
    matcher: Matcher = greedy_match,
) -> Matching:
    """The winning matching for one frame pair (see
    :func:`match_pair_detailed`), pairs as (query index, gallery index)."""
    return match_pair_detailed(scores_by_feature, temperature, renormalize, matcher).matching
