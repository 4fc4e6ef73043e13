"""Exception hierarchy shared by all pipeline stages.

Every error raised by this package derives from :class:`ReidError`, so
callers can catch one base class. The CLI maps each subclass to a distinct
exit code (see ``cli.EXIT_CODES``).
"""


class ReidError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ReidError):
    """Invalid configuration: unknown camera ids, missing calibration,
    bad temperatures/heights, malformed config files."""


class IngestionError(ReidError):
    """Invalid input data: malformed records, duplicate identities,
    zero embedding vectors, unresolvable references."""


class FeatureError(ReidError):
    """Appearance-feature failure: dimension/bin-count mismatch,
    empty crops."""


class GeometryError(ReidError):
    """Geometric impossibility: elevation at or above the camera,
    back-projection outside the visible hemisphere."""


class FusionError(ReidError):
    """Score fusion failure: shape or orientation mismatch, empty input."""


class EvaluationError(ReidError):
    """Evaluation failure: missing ground-truth identity, identity
    absent from the fold assignment."""
