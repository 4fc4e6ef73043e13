"""Score normalization and naive-Bayes feature fusion.

Each feature's score matrix is converted to a row-stochastic
match-probability matrix with a temperature softmax: the exponent carries
a positive sign for similarity scores and a negative sign for
dissimilarity scores, divided by the temperature. Rows then hold the
conditional probabilities of each gallery element matching the row's
query.

Multiple features are fused with the Hadamard (element-wise) product of
their probability matrices, treating the features as conditionally
independent. The product is deliberately NOT renormalized: the matcher
compares entries across rows, and renormalizing would change which entry
is globally largest. Row renormalization is available behind a flag for
experimentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core import Polarity, ScoreMatrix
from .errors import FusionError

# The softmax temperature used throughout unless configured per feature.
DEFAULT_TEMPERATURE = 10.0


class Orientation(Enum):
    """Which side of the frame pair the matrix rows represent."""

    QUERY_ROWS = "query_rows"
    GALLERY_ROWS = "gallery_rows"


@dataclass(frozen=True)
class MatchProbabilityMatrix:
    """Match probabilities in [0, 1], one row per element of the
    normalized side.

    Single-feature matrices produced by :func:`normalize` are
    row-stochastic; fused matrices are products of row-stochastic matrices
    and generally are not.
    """

    values: np.ndarray
    orientation: Orientation

    def __post_init__(self) -> None:
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(values)):
            raise FusionError("match probabilities must be finite")
        if values.size and (values.min() < 0 or values.max() > 1 + 1e-12):
            raise FusionError(
                f"match probabilities must lie in [0, 1], got "
                f"[{values.min()}, {values.max()}]"
            )
        values = np.clip(values, 0.0, 1.0)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]


def check_temperature(temperature: float) -> float:
    if not (temperature > 0 and np.isfinite(temperature)):
        raise FusionError(f"temperature must be a positive finite number, got {temperature}")
    return float(temperature)


def normalize(
    scores: ScoreMatrix,
    temperature: float = DEFAULT_TEMPERATURE,
    orientation: Orientation = Orientation.QUERY_ROWS,
) -> MatchProbabilityMatrix:
    """Row-wise temperature softmax of a score matrix.

    Row i, column j becomes exp(sign * s_ij / T) / sum_k exp(sign * s_ik / T)
    with sign +1 for similarity and -1 for dissimilarity polarity, computed
    with per-row max subtraction for numerical stability. A zero-column
    matrix passes through empty.
    """
    temp = check_temperature(temperature)
    if scores.cols == 0 or scores.rows == 0:
        return MatchProbabilityMatrix(np.zeros(scores.shape), orientation)
    sign = 1.0 if scores.polarity is Polarity.SIMILARITY else -1.0
    z = sign * scores.values / temp
    z = z - z.max(axis=1, keepdims=True)
    expz = np.exp(z)
    return MatchProbabilityMatrix(expz / expz.sum(axis=1, keepdims=True), orientation)


def uniform_probabilities(
    rows: int, cols: int, orientation: Orientation = Orientation.QUERY_ROWS
) -> MatchProbabilityMatrix:
    """The uninformative matrix: every gallery element equally likely.

    Fusing with it rescales every row by a constant and therefore never
    changes any matching decision; it is what a disabled feature
    contributes.
    """
    if cols == 0 or rows == 0:
        return MatchProbabilityMatrix(np.zeros((rows, cols)), orientation)
    return MatchProbabilityMatrix(np.full((rows, cols), 1.0 / cols), orientation)


def fuse(
    mats: Sequence[MatchProbabilityMatrix], renormalize: bool = False
) -> MatchProbabilityMatrix:
    """Hadamard product of per-feature match-probability matrices.

    All inputs must share shape and orientation. With ``renormalize`` the
    rows of the product are rescaled to sum 1 again (off by default; see
    the module docstring).
    """
    if not mats:
        raise FusionError("fuse requires at least one probability matrix")
    first = mats[0]
    for mat in mats[1:]:
        if mat.shape != first.shape:
            raise FusionError(f"shape mismatch in fusion: {mat.shape} vs {first.shape}")
        if mat.orientation is not first.orientation:
            raise FusionError(
                f"orientation mismatch in fusion: {mat.orientation} vs {first.orientation}"
            )
    product = first.values.copy()
    for mat in mats[1:]:
        product *= mat.values
    if renormalize and product.size:
        sums = product.sum(axis=1, keepdims=True)
        product = np.divide(product, sums, out=np.zeros_like(product), where=sums > 0)
    return MatchProbabilityMatrix(product, first.orientation)
