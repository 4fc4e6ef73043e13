import numpy as np
import pytest

from fisheye_reid.core import BoundingBox, Detection
from fisheye_reid.geometry import FisheyeCamera


def make_detection(camera_id, frame_index, identity=None, cx=100.0, cy=100.0, **kwargs):
    return Detection(
        camera_id=camera_id,
        frame_index=frame_index,
        bbox=BoundingBox(cx=cx, cy=cy, w=20.0, h=40.0),
        identity=identity,
        **kwargs,
    )


def make_camera(
    camera_id="cam",
    position=(0.0, 0.0),
    mounting_height=300.0,
    focal=400.0,
    principal_point=(512.0, 512.0),
    yaw=0.0,
    image_size=(1024, 1024),
):
    return FisheyeCamera(
        camera_id=camera_id,
        position=position,
        mounting_height=mounting_height,
        focal=focal,
        principal_point=principal_point,
        yaw=yaw,
        image_size=image_size,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
