"""Location-based pairwise dissimilarity for overhead fisheye cameras.

Cameras are ceiling-mounted looking straight down and modeled with the
standard first-order equidistant fisheye projection: image radius from the
principal point is focal * theta, where theta is the angle off the optical
axis. A single yaw parameter rotates the camera about the vertical axis.
World coordinates are centimeters on the floor plane, z up.

Two cross-view distances are provided. The point-to-point distance (PPD)
back-projects both bounding-box centers to the floor plane at one assumed
person height and takes their Euclidean distance; it is cheap and
unit-interpretable. The count-based distance (CBD) sweeps a set of assumed
heights, maps the query center into the gallery image at each, votes for
the nearest gallery candidate, and reports K - votes; it degrades
gracefully when the true height is unknown. Both distances are made
symmetric by computing them with camera roles swapped, transposing, and
adding.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .core import Detection, Feature, Polarity, ScoreMatrix, SyncFramePair
from .errors import ConfigurationError, GeometryError

# Assumed average person height for the single-height metric, cm.
PPD_DEFAULT_HEIGHT_CM = 168.0
# Height sweep for the count-based metric: 21 values, 128..208 cm step 4.
CBD_DEFAULT_HEIGHTS_CM: tuple[float, ...] = tuple(float(h) for h in range(128, 209, 4))
# The bounding-box center sits mid-body by default.
DEFAULT_CENTER_ELEVATION_FRACTION = 0.5


class LocationMetric(str, Enum):
    PPD = "PPD"
    CBD = "CBD"


def validate_heights(heights: Sequence[float]) -> tuple[float, ...]:
    """Height sets must be strictly increasing and positive."""
    values = tuple(float(h) for h in heights)
    if not values:
        raise ConfigurationError("height set must be non-empty")
    if any(h <= 0 for h in values):
        raise ConfigurationError(f"heights must be positive, got {values}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError(f"heights must be strictly increasing, got {values}")
    return values


@dataclass(frozen=True)
class FisheyeCamera:
    """Calibrated overhead fisheye camera.

    position: floor-plane (x, y) directly under the camera, cm.
    mounting_height: lens height above the floor, cm.
    focal: pixels per radian of off-axis angle (equidistant model).
    principal_point: image (u, v) of the optical axis, pixels.
    yaw: rotation about the vertical axis, radians.
    image_size: (width, height) in pixels.
    """

    camera_id: str
    position: tuple[float, float]
    mounting_height: float
    focal: float
    principal_point: tuple[float, float]
    yaw: float
    image_size: tuple[int, int]

    def __post_init__(self) -> None:
        if self.mounting_height <= 0:
            raise ConfigurationError(
                f"camera {self.camera_id!r}: mounting_height must be > 0, got {self.mounting_height}"
            )
        if self.focal <= 0:
            raise ConfigurationError(
                f"camera {self.camera_id!r}: focal must be > 0, got {self.focal}"
            )
        u0, v0 = self.principal_point
        width, height = self.image_size
        if not (0 <= u0 < width and 0 <= v0 < height):
            raise ConfigurationError(
                f"camera {self.camera_id!r}: principal point {self.principal_point} "
                f"outside image of size {self.image_size}"
            )

    def contains_pixel(self, px: np.ndarray) -> np.ndarray:
        """True where pixel coordinates fall inside the image rectangle."""
        px = np.asarray(px, dtype=float)
        width, height = self.image_size
        u, v = px[..., 0], px[..., 1]
        return (u >= 0) & (u < width) & (v >= 0) & (v < height)


def _check_elevation(cam: FisheyeCamera, elevation: float) -> float:
    if not (0 <= elevation < cam.mounting_height):
        raise GeometryError(
            f"elevation {elevation} cm outside [0, mounting height "
            f"{cam.mounting_height} cm) of camera {cam.camera_id!r}"
        )
    return cam.mounting_height - elevation


def world_to_pixel(cam: FisheyeCamera, world_xy: np.ndarray, elevation: float) -> np.ndarray:
    """Project world points on the plane z = elevation into the image.

    Accepts (..., 2) arrays (or a single 2-tuple) and returns matching
    (..., 2) pixel coordinates. Total for every world point when
    0 <= elevation < mounting height: points below the camera always project
    inside the hemisphere (possibly outside the image rectangle).
    """
    depth = _check_elevation(cam, elevation)
    xy = np.asarray(world_xy, dtype=float)
    dx = xy[..., 0] - cam.position[0]
    dy = xy[..., 1] - cam.position[1]
    rho = np.hypot(dx, dy)
    theta = np.arctan2(rho, depth)
    radius = cam.focal * theta
    azimuth = np.arctan2(dy, dx) - cam.yaw
    u = cam.principal_point[0] + radius * np.cos(azimuth)
    v = cam.principal_point[1] + radius * np.sin(azimuth)
    return np.stack([u, v], axis=-1)


def pixel_to_world(cam: FisheyeCamera, pixel_uv: np.ndarray, elevation: float) -> np.ndarray:
    """Back-project pixels onto the horizontal plane z = elevation.

    Inverse of :func:`world_to_pixel` at the same elevation. The principal
    point maps exactly to the camera's floor position (theta = 0 is not a
    singularity). Pixels whose ray leaves the downward hemisphere
    (theta >= pi/2) cannot intersect the plane and raise
    :class:`GeometryError`; they cannot occur for valid overhead geometry.
    """
    depth = _check_elevation(cam, elevation)
    uv = np.asarray(pixel_uv, dtype=float)
    du = uv[..., 0] - cam.principal_point[0]
    dv = uv[..., 1] - cam.principal_point[1]
    radius = np.hypot(du, dv)
    theta = radius / cam.focal
    if np.any(theta >= np.pi / 2):
        raise GeometryError(
            f"pixel back-projects at theta >= 90 deg in camera {cam.camera_id!r}; "
            "ray does not intersect the floor plane"
        )
    rho = depth * np.tan(theta)
    azimuth = np.arctan2(dv, du) + cam.yaw
    x = cam.position[0] + rho * np.cos(azimuth)
    y = cam.position[1] + rho * np.sin(azimuth)
    return np.stack([x, y], axis=-1)


# ---------------------------------------------------------------------
# Pairwise location distances
# ---------------------------------------------------------------------

def _resolve_camera(cameras: Mapping[str, FisheyeCamera], camera_id: str) -> FisheyeCamera:
    try:
        return cameras[camera_id]
    except KeyError:
        raise ConfigurationError(
            f"no calibration for camera {camera_id!r}; calibrated: {sorted(cameras)}"
        ) from None


def _bbox_centers(dets: Sequence[Detection]) -> np.ndarray:
    if not dets:
        return np.zeros((0, 2))
    return np.array([[d.bbox.cx, d.bbox.cy] for d in dets], dtype=float)


def ppd_matrix(
    pair: SyncFramePair,
    cameras: Mapping[str, FisheyeCamera],
    height_cm: float = PPD_DEFAULT_HEIGHT_CM,
    eta: float = DEFAULT_CENTER_ELEVATION_FRACTION,
) -> ScoreMatrix:
    """Point-to-point distance matrix for one frame pair.

    Entry (i, j) is the floor-plane distance in cm between the world
    points of query center i and gallery center j, both back-projected at
    elevation eta * height_cm.
    """
    q_cam = _resolve_camera(cameras, pair.query_cam)
    g_cam = _resolve_camera(cameras, pair.gallery_cam)
    elevation = eta * height_cm
    q_world = pixel_to_world(q_cam, _bbox_centers(pair.query_dets), elevation)
    g_world = pixel_to_world(g_cam, _bbox_centers(pair.gallery_dets), elevation)
    diff = q_world[:, None, :] - g_world[None, :, :]
    values = np.hypot(diff[..., 0], diff[..., 1])
    return ScoreMatrix(values, Polarity.DISSIMILARITY, Feature.LOC)


def cbd_matrix(
    pair: SyncFramePair,
    cameras: Mapping[str, FisheyeCamera],
    heights_cm: Sequence[float] = CBD_DEFAULT_HEIGHTS_CM,
    eta: float = DEFAULT_CENTER_ELEVATION_FRACTION,
) -> ScoreMatrix:
    """Count-based distance matrix for one frame pair.

    For every height h in the sweep, each query center is mapped into the
    gallery image at elevation eta * h and votes for the nearest gallery
    center in gallery-image pixels (ties: lowest gallery index). Entry
    (i, j) is K - votes_ij with K the sweep size, so each row's votes sum
    to K and entries lie in [0, K]. An empty gallery yields a zero-column
    matrix.
    """
    heights = validate_heights(heights_cm)
    q_cam = _resolve_camera(cameras, pair.query_cam)
    g_cam = _resolve_camera(cameras, pair.gallery_cam)
    n_q, n_g = len(pair.query_dets), len(pair.gallery_dets)
    if n_g == 0 or n_q == 0:
        return ScoreMatrix(np.zeros((n_q, n_g)), Polarity.DISSIMILARITY, Feature.LOC)

    q_centers = _bbox_centers(pair.query_dets)
    g_centers = _bbox_centers(pair.gallery_dets)
    votes = np.zeros((n_q, n_g), dtype=int)
    for height in heights:
        elevation = eta * height
        mapped = world_to_pixel(g_cam, pixel_to_world(q_cam, q_centers, elevation), elevation)
        diff = mapped[:, None, :] - g_centers[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        nearest = np.argmin(dist, axis=1)  # first occurrence wins ties
        votes[np.arange(n_q), nearest] += 1
    values = float(len(heights)) - votes
    return ScoreMatrix(values, Polarity.DISSIMILARITY, Feature.LOC)


def symmetrize_location(d_qg: ScoreMatrix, d_gq: ScoreMatrix) -> ScoreMatrix:
    """Combine the two directed distance matrices: d_qg + transpose(d_gq).

    The directed distances are not symmetric in general; the swapped
    camera roles produce the exact transpose of this result.
    """
    if d_qg.shape != (d_gq.cols, d_gq.rows):
        raise ValueError(
            f"shape mismatch: forward {d_qg.shape} vs swapped {d_gq.shape}"
        )
    return ScoreMatrix(d_qg.values + d_gq.values.T, Polarity.DISSIMILARITY, Feature.LOC)


def location_dissimilarity(
    pair: SyncFramePair,
    cameras: Mapping[str, FisheyeCamera],
    metric: LocationMetric = LocationMetric.PPD,
    ppd_height_cm: float = PPD_DEFAULT_HEIGHT_CM,
    cbd_heights_cm: Sequence[float] = CBD_DEFAULT_HEIGHTS_CM,
    eta: float = DEFAULT_CENTER_ELEVATION_FRACTION,
) -> ScoreMatrix:
    """The symmetrized location score matrix for one frame pair."""
    if metric is LocationMetric.PPD:
        forward = ppd_matrix(pair, cameras, ppd_height_cm, eta)
        backward = ppd_matrix(pair.swapped(), cameras, ppd_height_cm, eta)
    else:
        forward = cbd_matrix(pair, cameras, cbd_heights_cm, eta)
        backward = cbd_matrix(pair.swapped(), cameras, cbd_heights_cm, eta)
    return symmetrize_location(forward, backward)
