"""Synthetic multi-camera scene generator.

Places people in a room, renders their detections into each calibrated
overhead camera through the same projection model the pipeline uses, and
synthesizes appearance features: embeddings as noisy copies of a per-person
prototype, hue histograms as (optionally sampled) von Mises profiles on the
hue circle. Ground-truth identities are attached to every detection, so a
rendered dataset is an oracle: with zero noise and separated people, every
feature on its own must match perfectly.

Rendering is deterministic: the same spec (including its seed) produces a
bit-identical dataset. No pixel imagery is rendered; crops are represented
directly by their hue histograms, which is what the pipeline consumes.

Three ambiguity scenes mirror the situations that motivate fusing
appearance with location: people nearly co-located but dressed differently
(location ambiguity), look-alikes far apart (appearance ambiguity), and a
scene with both at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .appearance import HueHistogram
from .core import BoundingBox, Detection, Feature, Identity
from .dataset import Dataset
from .errors import ConfigurationError
from .geometry import FisheyeCamera, world_to_pixel

DEFAULT_EMBEDDING_DIM = 8


@dataclass(frozen=True)
class NoiseModel:
    """Perturbations applied during rendering.

    ``hue_sample_count`` = 0 means the exact discretized hue profile is
    used (no sampling noise); otherwise that many hue samples are drawn
    and binned.
    """

    bbox_sigma_px: float = 0.0
    embedding_sigma: float = 0.0
    hue_sample_count: int = 0


@dataclass(frozen=True)
class SyntheticPerson:
    """One simulated person.

    ``trajectory`` gives the floor position (cm) at every frame. The hue
    profile is a von Mises bump on the hue circle: ``hue_angle_deg`` is its
    mode, ``hue_concentration`` its sharpness (0 = uniform).
    """

    identity: Identity
    trajectory: tuple[tuple[float, float], ...]
    height_cm: float
    hue_angle_deg: float
    hue_concentration: float
    embedding_prototype: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.height_cm <= 0:
            raise ConfigurationError(f"person {self.identity!r}: height must be > 0")
        if not self.trajectory:
            raise ConfigurationError(f"person {self.identity!r}: empty trajectory")
        if not any(self.embedding_prototype):
            raise ConfigurationError(f"person {self.identity!r}: zero embedding prototype")


@dataclass(frozen=True)
class SceneSpec:
    """A complete synthetic scene: room, cameras, people, noise, seed."""

    room: tuple[float, float]
    cameras: tuple[FisheyeCamera, ...]
    people: tuple[SyntheticPerson, ...]
    frames: int
    noise: NoiseModel = NoiseModel()
    seed: int = 0
    histogram_bins: int = 256

    def __post_init__(self) -> None:
        if self.frames <= 0:
            raise ConfigurationError(f"frames must be > 0, got {self.frames}")
        if len({c.camera_id for c in self.cameras}) != len(self.cameras):
            raise ConfigurationError("duplicate camera ids in scene")
        if len({p.identity for p in self.people}) != len(self.people):
            raise ConfigurationError("duplicate person identities in scene")
        width, length = self.room
        for person in self.people:
            if len(person.trajectory) < self.frames:
                raise ConfigurationError(
                    f"person {person.identity!r}: trajectory has "
                    f"{len(person.trajectory)} points for {self.frames} frames"
                )
            for x, y in person.trajectory[: self.frames]:
                if not (0 <= x <= width and 0 <= y <= length):
                    raise ConfigurationError(
                        f"person {person.identity!r} leaves the room at ({x}, {y})"
                    )


def hue_profile_histogram(
    hue_angle_deg: float, concentration: float, bins: int
) -> np.ndarray:
    """Exact discretization of a von Mises hue profile over ``bins`` bins."""
    if concentration <= 0:
        return np.full(bins, 1.0 / bins)
    centers = (np.arange(bins) + 0.5) * (2.0 * np.pi / bins)
    mu = math.radians(hue_angle_deg % 360.0)
    weights = np.exp(concentration * (np.cos(centers - mu) - 1.0))
    return weights / weights.sum()


def _sampled_hue_histogram(
    rng: np.random.Generator,
    hue_angle_deg: float,
    concentration: float,
    count: int,
    bins: int,
) -> np.ndarray:
    if concentration <= 0:
        samples = rng.uniform(0.0, 2.0 * np.pi, size=count)
    else:
        mu = math.radians(hue_angle_deg % 360.0)
        samples = np.mod(rng.vonmises(mu, concentration, size=count), 2.0 * np.pi)
    idx = np.minimum((samples / (2.0 * np.pi) * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(float)
    return counts / counts.sum()


def render(spec: SceneSpec) -> Dataset:
    """Render a scene into a pipeline-ready dataset.

    Per frame and camera, each person whose projected body center lands
    inside the image yields one detection; a person outside the image is
    simply absent from that camera (full-body occlusion, the no-correct-
    match path). The bbox center is the projected mid-body point plus
    Gaussian pixel noise, clamped to the image; the bbox size follows an
    apparent-size heuristic (focal * height / slant range) and carries no
    information used by any score.
    """
    rng = np.random.default_rng(spec.seed)
    noise = spec.noise
    detections: list[Detection] = []
    embeddings: dict[str, np.ndarray] = {}
    histograms: dict[str, HueHistogram] = {}

    profile_cache = {
        person.identity: hue_profile_histogram(
            person.hue_angle_deg, person.hue_concentration, spec.histogram_bins
        )
        for person in spec.people
    }

    for frame in range(spec.frames):
        for cam in spec.cameras:
            for person in spec.people:
                x, y = person.trajectory[frame]
                elevation = 0.5 * person.height_cm
                if elevation >= cam.mounting_height:
                    continue
                px = world_to_pixel(cam, np.array([x, y]), elevation)
                if not bool(cam.contains_pixel(px)):
                    continue

                if noise.bbox_sigma_px > 0:
                    px = px + rng.normal(0.0, noise.bbox_sigma_px, size=2)
                    # a real box center stays within the visible hemisphere
                    offset = px - np.asarray(cam.principal_point)
                    radius = float(np.hypot(offset[0], offset[1]))
                    max_radius = cam.focal * (math.pi / 2.0) * 0.999
                    if radius > max_radius:
                        px = np.asarray(cam.principal_point) + offset * (max_radius / radius)
                width, height = cam.image_size
                cx = float(min(max(px[0], 0.0), width - 1.0))
                cy = float(min(max(px[1], 0.0), height - 1.0))

                rho = math.hypot(x - cam.position[0], y - cam.position[1])
                slant = math.hypot(rho, cam.mounting_height - elevation)
                box_h = max(2.0, cam.focal * person.height_cm / slant)
                box_w = max(2.0, 0.5 * box_h)

                key = f"{cam.camera_id}:{frame}:{person.identity}"
                proto = np.asarray(person.embedding_prototype, dtype=float)
                if noise.embedding_sigma > 0:
                    vec = proto + rng.normal(0.0, noise.embedding_sigma, size=proto.shape)
                else:
                    vec = proto.copy()
                norm = np.linalg.norm(vec)
                if norm == 0:
                    vec = proto.copy()
                    norm = np.linalg.norm(vec)
                embeddings[key] = vec / norm

                if noise.hue_sample_count > 0:
                    bins = _sampled_hue_histogram(
                        rng,
                        person.hue_angle_deg,
                        person.hue_concentration,
                        noise.hue_sample_count,
                        spec.histogram_bins,
                    )
                    count = noise.hue_sample_count
                else:
                    bins = profile_cache[person.identity]
                    count = 1
                histograms[key] = HueHistogram(bins, pixel_count=count)

                detections.append(
                    Detection(
                        camera_id=cam.camera_id,
                        frame_index=frame,
                        bbox=BoundingBox(cx, cy, box_w, box_h),
                        identity=person.identity,
                        crop_ref=key,
                        embedding_key=key,
                    )
                )

    return Dataset(
        detections=detections,
        cameras={c.camera_id: c for c in spec.cameras},
        embeddings=embeddings,
        histograms=histograms,
    )


# ---------------------------------------------------------------------
# Scene builders
# ---------------------------------------------------------------------

def _basis_prototype(index: int, dim: int = DEFAULT_EMBEDDING_DIM) -> tuple[float, ...]:
    if index >= dim:
        raise ConfigurationError(f"need embedding dim > {index}, got {dim}")
    vec = [0.0] * dim
    vec[index] = 1.0
    return tuple(vec)


def _circular_walk(
    anchor: tuple[float, float], radius: float, frames: int, phase: float = 0.0
) -> tuple[tuple[float, float], ...]:
    steps = np.arange(frames) * (2.0 * np.pi / max(frames, 1)) + phase
    return tuple(
        (anchor[0] + radius * math.cos(t), anchor[1] + radius * math.sin(t)) for t in steps
    )


def standard_room_cameras(
    room: tuple[float, float] = (800.0, 800.0), count: int = 3
) -> tuple[FisheyeCamera, ...]:
    """Up to three overhead cameras covering a room, with distinct heights
    and yaws so cross-view geometry is exercised."""
    width, length = room
    placements = [
        ((0.25 * width, 0.25 * length), 300.0, 0.0),
        ((0.75 * width, 0.25 * length), 320.0, 0.3),
        ((0.50 * width, 0.75 * length), 340.0, -0.2),
    ]
    if not 1 <= count <= len(placements):
        raise ConfigurationError(f"count must be 1..{len(placements)}, got {count}")
    cams = []
    for i in range(count):
        position, mount, yaw = placements[i]
        cams.append(
            FisheyeCamera(
                camera_id=f"cam{i + 1}",
                position=position,
                mounting_height=mount,
                focal=400.0,
                principal_point=(640.0, 640.0),
                yaw=yaw,
                image_size=(1280, 1280),
            )
        )
    return tuple(cams)


def separated_scene(
    num_people: int = 5,
    num_cameras: int = 3,
    frames: int = 100,
    seed: int = 0,
    noise: NoiseModel = NoiseModel(),
    hue_concentration: float = 60.0,
) -> SceneSpec:
    """Well-separated people with distinct colors and embeddings.

    Anchors sit on a grid at least ~250 cm apart and every person walks a
    small circle around theirs, so people stay far apart at all times and
    each feature alone suffices to match them. The zero-noise version of
    this scene is the end-to-end oracle.
    """
    if not 1 <= num_people <= 6:
        raise ConfigurationError(f"num_people must be 1..6, got {num_people}")
    room = (800.0, 800.0)
    anchors = [
        (150.0, 150.0),
        (650.0, 150.0),
        (400.0, 400.0),
        (150.0, 650.0),
        (650.0, 650.0),
        (400.0, 120.0),
    ]
    heights = [160.0, 168.0, 176.0, 164.0, 172.0, 168.0]
    people = []
    for i in range(num_people):
        people.append(
            SyntheticPerson(
                identity=f"p{i + 1}",
                trajectory=_circular_walk(anchors[i], 15.0, frames, phase=i * 0.9),
                height_cm=heights[i],
                hue_angle_deg=(360.0 * i) / num_people,
                hue_concentration=hue_concentration,
                embedding_prototype=_basis_prototype(i),
            )
        )
    return SceneSpec(
        room=room,
        cameras=standard_room_cameras(room, num_cameras),
        people=tuple(people),
        frames=frames,
        noise=noise,
        seed=seed,
    )


DEFAULT_AMBIGUITY_NOISE = NoiseModel(
    bbox_sigma_px=15.0, embedding_sigma=0.05, hue_sample_count=400
)


def _two_camera_rig(room: tuple[float, float]) -> tuple[FisheyeCamera, ...]:
    width, length = room

    def make(i: int, pos: tuple[float, float], yaw: float) -> FisheyeCamera:
        return FisheyeCamera(
            camera_id=f"cam{i}",
            position=pos,
            mounting_height=300.0,
            focal=400.0,
            principal_point=(512.0, 512.0),
            yaw=yaw,
            image_size=(1024, 1024),
        )

    return (make(1, (0.25 * width, 0.5 * length), 0.0), make(2, (0.75 * width, 0.5 * length), 0.2))


def ambiguity_scenarios(
    seed: int = 0,
    frames: int = 10,
    noise: NoiseModel = DEFAULT_AMBIGUITY_NOISE,
) -> dict[str, SceneSpec]:
    """The three scenes that motivate fusing appearance with location.

    ``location``: two people walking 25 cm apart, distinctly dressed -
    pixel noise makes location matching unreliable, appearance is decisive.
    ``appearance``: two look-alikes (same hue profile, same embedding
    prototype) more than 3 m apart - appearance is a coin flip, location is
    decisive. ``combined``: both situations in one room.
    """
    room = (600.0, 600.0)
    cams = _two_camera_rig(room)

    def close_pair(base: tuple[float, float], gap: float, hue_a: float, hue_b: float, proto_a: int, proto_b: int):
        walk_a = _circular_walk(base, 20.0, frames)
        walk_b = tuple((x + gap, y) for x, y in walk_a)
        return (
            SyntheticPerson("near_a", walk_a, 168.0, hue_a, 60.0, _basis_prototype(proto_a)),
            SyntheticPerson("near_b", walk_b, 168.0, hue_b, 60.0, _basis_prototype(proto_b)),
        )

    def twins(pos_a: tuple[float, float], pos_b: tuple[float, float], hue: float, proto: int):
        return (
            SyntheticPerson(
                "twin_a", _circular_walk(pos_a, 10.0, frames), 168.0, hue, 60.0, _basis_prototype(proto)
            ),
            SyntheticPerson(
                "twin_b", _circular_walk(pos_b, 10.0, frames, phase=1.3), 168.0, hue, 60.0, _basis_prototype(proto)
            ),
        )

    location_scene = SceneSpec(
        room=room,
        cameras=cams,
        people=close_pair((288.0, 300.0), 25.0, 0.0, 150.0, 0, 1),
        frames=frames,
        noise=noise,
        seed=seed,
    )
    appearance_scene = SceneSpec(
        room=room,
        cameras=cams,
        people=twins((170.0, 170.0), (430.0, 430.0), 30.0, 0),
        frames=frames,
        noise=noise,
        seed=seed,
    )
    combined_scene = SceneSpec(
        room=room,
        cameras=cams,
        people=close_pair((250.0, 300.0), 25.0, 0.0, 150.0, 0, 1)
        + twins((150.0, 150.0), (450.0, 450.0), 260.0, 2),
        frames=frames,
        noise=noise,
        seed=seed,
    )
    return {
        "location": location_scene,
        "appearance": appearance_scene,
        "combined": combined_scene,
    }


# Per-feature softmax temperatures matched to the simulator's score
# scales: cosine gaps are O(1), hue divergences O(ln 2), symmetrized
# location distances O(100 cm). One shared temperature cannot let a
# strongly confident appearance cue override a location error of tens of
# centimeters, so the ambiguity scenes are evaluated with these.
SIMULATOR_TEMPERATURES: dict[Feature, float] = {
    Feature.DL: 0.1,
    Feature.CH: 0.1,
    Feature.LOC: 100.0,
}
