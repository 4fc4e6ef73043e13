"""Appearance-based pairwise scoring.

Two independent appearance cues, each yielding a |Q| x |G| score matrix
for a synchronized frame pair:

* cosine similarity between neural embedding vectors ingested from an
  external store (the embedding network itself is out of scope here), and
* Jensen-Shannon divergence between 1-D hue histograms extracted from the
  person crops.

Hue is used instead of a full RGB histogram so that illumination (V) and
lighting-dependent color saturation (S) changes do not move the feature.
All divergences use the natural-log convention, so the JS upper bound is
ln 2; the softmax temperature downstream absorbs the scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import Feature, Polarity, ScoreMatrix
from .errors import FeatureError, IngestionError

LN2 = float(np.log(2.0))


# ---------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------

def validate_embedding(vector: np.ndarray) -> np.ndarray:
    """Check an ingested embedding: finite, 1-D, not the zero vector."""
    vec = np.asarray(vector, dtype=float)
    if vec.ndim != 1 or vec.size == 0:
        raise IngestionError(f"embedding must be a non-empty 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise IngestionError("embedding contains non-finite values")
    if not np.any(vec):
        raise IngestionError("zero embedding vector rejected (cosine undefined)")
    return vec


def normalize_embedding(vector: np.ndarray) -> np.ndarray:
    """L2-normalize so cosine reduces to a dot product.

    Pre-scales by the max magnitude so the sum of squares can neither
    underflow (subnormal entries) nor overflow (entries beyond 1e154).
    """
    vec = validate_embedding(vector)
    scaled = vec / np.max(np.abs(vec))
    return scaled / np.linalg.norm(scaled)


def cosine_similarity_matrix(
    query_embs: Sequence[np.ndarray], gallery_embs: Sequence[np.ndarray]
) -> ScoreMatrix:
    """Pairwise cosine similarity, query rows x gallery columns.

    Values lie in [-1, 1] and are symmetric under query/gallery swap
    (the swapped matrix is the exact transpose). Raises
    :class:`FeatureError` if vector dimensions disagree.
    """
    q = [normalize_embedding(v) for v in query_embs]
    g = [normalize_embedding(v) for v in gallery_embs]
    dims = {v.shape[0] for v in q} | {v.shape[0] for v in g}
    if len(dims) > 1:
        raise FeatureError(f"embedding dimension mismatch: {sorted(dims)}")
    if not q or not g:
        values = np.zeros((len(q), len(g)))
    else:
        values = np.clip(np.stack(q) @ np.stack(g).T, -1.0, 1.0)
    return ScoreMatrix(values, Polarity.SIMILARITY, Feature.DL)


# ---------------------------------------------------------------------
# Hue histograms
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class HueHistogram:
    """Probability distribution over discretized hue, plus the number of
    pixels that contributed to it."""

    bins: np.ndarray
    pixel_count: int

    def __post_init__(self) -> None:
        bins = np.asarray(self.bins, dtype=float)
        if bins.ndim != 1 or bins.size < 2:
            raise FeatureError(f"histogram must be a 1-D vector of >= 2 bins, got shape {bins.shape}")
        if bins.min() < 0 or abs(bins.sum() - 1.0) > 1e-9:
            raise FeatureError(
                f"histogram must be a probability vector (min={bins.min()}, sum={bins.sum()})"
            )
        if self.pixel_count < 1:
            raise FeatureError(f"pixel_count must be >= 1, got {self.pixel_count}")
        bins = bins.copy()
        bins.flags.writeable = False
        object.__setattr__(self, "bins", bins)

    @property
    def num_bins(self) -> int:
        return self.bins.shape[0]


def rgb_to_hue_degrees(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Continuous hue in [0, 360) per pixel, plus a chromatic-pixel mask.

    ``rgb`` is (..., 3), either uint8 in [0, 255] or float in [0, 1].
    Pixels with zero saturation (max channel == min channel) have no
    defined hue; they are reported with hue 0 and mask False.
    """
    arr = np.asarray(rgb, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 3:
        raise FeatureError(f"RGB array must have a trailing axis of 3, got shape {arr.shape}")
    if np.issubdtype(np.asarray(rgb).dtype, np.integer):
        arr = arr / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    cmax = np.maximum(np.maximum(r, g), b)
    cmin = np.minimum(np.minimum(r, g), b)
    chroma = cmax - cmin
    chromatic = chroma > 0

    safe = np.where(chromatic, chroma, 1.0)
    hue = np.zeros_like(cmax)
    is_r = chromatic & (cmax == r)
    is_g = chromatic & ~is_r & (cmax == g)
    is_b = chromatic & ~is_r & ~is_g
    hue = np.where(is_r, np.mod((g - b) / safe, 6.0), hue)
    hue = np.where(is_g, (b - r) / safe + 2.0, hue)
    hue = np.where(is_b, (r - g) / safe + 4.0, hue)
    return np.mod(hue * 60.0, 360.0), chromatic


def extract_hue_histogram(crop: np.ndarray, bins: int = 256) -> HueHistogram:
    """Hue histogram of an RGB crop at native resolution.

    Hue in [0, 360) is discretized into ``bins`` equal bins (pixel bin =
    floor(hue / 360 * bins), clamped to bins - 1) and normalized to sum 1.
    Saturation-zero pixels carry no chromatic information and are skipped;
    if every pixel is skipped the histogram falls back to uniform.
    """
    if bins < 2:
        raise FeatureError(f"need at least 2 bins, got {bins}")
    arr = np.asarray(crop)
    if arr.size == 0:
        raise FeatureError("empty crop")
    hue, chromatic = rgb_to_hue_degrees(arr)
    hue = hue[chromatic]
    if hue.size == 0:
        total = int(np.prod(arr.shape[:-1]))
        return HueHistogram(np.full(bins, 1.0 / bins), pixel_count=total)
    idx = np.minimum((hue / 360.0 * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(float)
    return HueHistogram(counts / counts.sum(), pixel_count=int(hue.size))


# ---------------------------------------------------------------------
# Jensen-Shannon divergence
# ---------------------------------------------------------------------

HistogramLike = Union[HueHistogram, np.ndarray, Sequence[float]]


def _as_distribution(hist: HistogramLike) -> np.ndarray:
    if isinstance(hist, HueHistogram):
        return hist.bins
    return np.asarray(hist, dtype=float)


def _kl(a: np.ndarray, b: np.ndarray) -> float:
    # Terms with a_i = 0 contribute 0. b_i = (a_i + x)/2 > 0 wherever
    # a_i > 0, except when a_i is so subnormal that the midpoint
    # underflows to 0; that term's true contribution is < 1e-300, so it
    # is dropped too.
    mask = (a > 0) & (b > 0)
    return float(np.sum(a[mask] * np.log(a[mask] / b[mask])))


def js_divergence(q: HistogramLike, g: HistogramLike) -> float:
    """Jensen-Shannon divergence between two hue distributions.

    JS(q, g) = KL(q, m)/2 + KL(g, m)/2 with m = (q + g)/2. Symmetric,
    always finite (even with zero-valued bins, which is why it is used
    here instead of plain KL), and bounded by ln 2, attained exactly for
    disjoint supports.
    """
    qa, ga = _as_distribution(q), _as_distribution(g)
    if qa.shape != ga.shape:
        raise FeatureError(f"histogram bin-count mismatch: {qa.shape} vs {ga.shape}")
    mid = 0.5 * (qa + ga)
    value = 0.5 * _kl(qa, mid) + 0.5 * _kl(ga, mid)
    # Guard against float round-off just outside the theoretical range.
    return float(min(max(value, 0.0), LN2))


def hue_dissimilarity_matrix(
    query_hists: Sequence[HistogramLike], gallery_hists: Sequence[HistogramLike]
) -> ScoreMatrix:
    """Pairwise JS divergences, query rows x gallery columns.

    Larger values denote larger dissimilarity; the matrix equals the
    transpose of the one obtained under query/gallery swap.
    """
    values = np.zeros((len(query_hists), len(gallery_hists)))
    q_dists = [_as_distribution(h) for h in query_hists]
    g_dists = [_as_distribution(h) for h in gallery_hists]
    for i, qa in enumerate(q_dists):
        for j, ga in enumerate(g_dists):
            values[i, j] = js_divergence(qa, ga)
    return ScoreMatrix(values, Polarity.DISSIMILARITY, Feature.CH)
