"""Cross-camera person re-identification for time-synchronized overhead
fisheye cameras with overlapping fields of view.

The pipeline fuses appearance cues (embedding cosine similarity, hue
histogram divergence) with cross-view location distances into match
probabilities, matches identities greedily per synchronized frame pair,
and scores predictions with QMS and a rank-based mAP.
"""

from .core import (
    BoundingBox,
    Detection,
    Feature,
    Identity,
    Polarity,
    ScoreMatrix,
    SyncFramePair,
    build_sync_pairs,
)
from .appearance import (
    HueHistogram,
    cosine_similarity_matrix,
    extract_hue_histogram,
    hue_dissimilarity_matrix,
    js_divergence,
)
from .geometry import (
    CBD_DEFAULT_HEIGHTS_CM,
    FisheyeCamera,
    LocationMetric,
    PPD_DEFAULT_HEIGHT_CM,
    cbd_matrix,
    location_dissimilarity,
    pixel_to_world,
    ppd_matrix,
    symmetrize_location,
    world_to_pixel,
)
from .fusion import (
    DEFAULT_TEMPERATURE,
    MatchProbabilityMatrix,
    Orientation,
    fuse,
    normalize,
    uniform_probabilities,
)
from .matching import (
    Matching,
    greedy_match,
    hungarian_match,
    match_pair,
    match_pair_detailed,
)
from .evaluation import (
    EvalReport,
    FoldSpec,
    format_report,
    make_identity_folds,
    mean_average_precision,
    qms,
    true_match_rank,
)
from .dataset import Dataset, ingest_annotations, read_dataset, write_dataset
from .simulator import (
    NoiseModel,
    SceneSpec,
    SyntheticPerson,
    SIMULATOR_TEMPERATURES,
    ambiguity_scenarios,
    render,
    separated_scene,
)
from .pipeline import (
    MatcherKind,
    PipelineConfig,
    RunResult,
    evaluate_folds,
    run,
)
from .errors import (
    ConfigurationError,
    EvaluationError,
    FeatureError,
    FusionError,
    GeometryError,
    IngestionError,
    ReidError,
)

__version__ = "0.1.0"
