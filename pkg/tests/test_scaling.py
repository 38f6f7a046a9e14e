import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sceneedit import primitives
from sceneedit.errors import NoValidImages, UnknownCategory
from sceneedit.mesh.core import Aabb
from sceneedit.scaling import (
    BoundingBox2D,
    DetectorClient,
    ImageClient,
    PriorTable,
    ScaleEstimate,
    apply_scale,
    estimate_scale,
)


def test_box2d_width_and_validation():
    box = BoundingBox2D(10, 10, 60, 40, "cup", 0.9)
    assert box.width == 50
    with pytest.raises(ValueError):
        BoundingBox2D(10, 10, 5, 40, "cup", 0.9)


def test_prior_table_cup_on_table():
    estimate = estimate_scale("cup", "table", backend="prior_table")
    assert estimate.scale == pytest.approx(0.075)  # 0.09 m / 1.2 m
    assert estimate.source == "prior_table"
    assert not estimate.clamped


def test_prior_table_unknown_category():
    with pytest.raises(UnknownCategory):
        estimate_scale("flux capacitor", "table", backend="prior_table")


def test_cap_clamping_recorded():
    estimate = estimate_scale("couch", "cup", backend="prior_table", max_scale_cap=1.0)
    assert estimate.scale == 1.0
    assert estimate.clamped


# --- detector path over stub clients ---------------------------------------------


class _FakeImages(ImageClient):
    def __init__(self):
        super().__init__(endpoint="unused")
        self.count = 0

    def generate(self, prompt, seed):
        self.count += 1
        return f"image-{seed}"


class _FakeDetector(DetectorClient):
    def __init__(self, per_image):
        super().__init__(endpoint="unused")
        self.per_image = list(per_image)

    def detect(self, image_b64, labels):
        return self.per_image.pop(0)


def _boxes(w_p, w_g):
    out = []
    if w_p is not None:
        out.append(BoundingBox2D(0, 0, w_p, 10, "cup", 0.9))
    if w_g is not None:
        out.append(BoundingBox2D(0, 0, w_g, 10, "table", 0.9))
    return out


def test_single_image_ratio_is_width_ratio():
    estimate = estimate_scale(
        "cup", "table", backend="detector", k_images=1,
        image_client=_FakeImages(),
        detector_client=_FakeDetector([_boxes(50, 100)]),
    )
    assert estimate.scale == pytest.approx(0.5)
    assert estimate.samples == ((50.0, 100.0, 0.5),)


def test_minimum_ratio_wins():
    detector = _FakeDetector([_boxes(40, 100), _boxes(50, 100), _boxes(60, 100)])
    estimate = estimate_scale("cup", "table", backend="detector", k_images=3,
                              image_client=_FakeImages(), detector_client=detector)
    assert estimate.scale == pytest.approx(0.4)
    assert len(estimate.samples) == 3


def test_images_missing_an_object_are_skipped():
    detector = _FakeDetector([_boxes(None, 100), _boxes(45, 90)])
    estimate = estimate_scale("cup", "table", backend="detector", k_images=2,
                              image_client=_FakeImages(), detector_client=detector)
    assert estimate.scale == pytest.approx(0.5)
    assert len(estimate.samples) == 1


def test_no_valid_images_raises():
    detector = _FakeDetector([_boxes(None, 100), _boxes(40, None)])
    with pytest.raises(NoValidImages):
        estimate_scale("cup", "table", backend="detector", k_images=2,
                       image_client=_FakeImages(), detector_client=detector)


def test_ratio_clamped_with_flag():
    detector = _FakeDetector([_boxes(300, 100)])
    estimate = estimate_scale("cup", "table", backend="detector", k_images=1,
                              image_client=_FakeImages(), detector_client=detector,
                              max_scale_cap=1.0)
    assert estimate.scale == 1.0
    assert estimate.clamped


# --- apply_scale ---------------------------------------------------------------


def _grounding_box(width):
    return Aabb([0, 0, 0], [width, 1.0, 1.0])


def test_apply_scale_sets_width():
    cube = primitives.box(1, 1, 1)
    est = ScaleEstimate(scale=0.5, samples=(), source="prior_table")
    out = apply_scale(cube, est, _grounding_box(2.0))
    assert out.aabb.extents[0] == pytest.approx(1.0)
    assert out.aabb.min[2] == pytest.approx(0.0)


def test_apply_scale_identity():
    cube = primitives.box(1, 1, 1)
    est = ScaleEstimate(scale=1.0, samples=(), source="prior_table")
    out = apply_scale(cube, est, _grounding_box(1.0))
    assert np.allclose(out.aabb.extents, cube.aabb.extents)


def test_apply_scale_targets_absolute_width():
    """Repeated applies are stable: the post-state width is an absolute
    target (scale x grounding width), not a multiplier on the current one."""
    cube = primitives.box(1, 1, 1)
    est = ScaleEstimate(scale=0.5, samples=(), source="prior_table")
    once = apply_scale(cube, est, _grounding_box(1.0))
    twice = apply_scale(once, est, _grounding_box(1.0))
    assert once.aabb.extents[0] == pytest.approx(0.5)
    assert twice.aabb.extents[0] == pytest.approx(0.5)


@given(scale=st.floats(0.05, 0.8), width=st.floats(0.5, 3.0))
@settings(max_examples=40, deadline=None)
def test_apply_scale_preserves_aspect_ratio(scale, width):
    mesh = primitives.box(0.8, 0.5, 0.3)
    est = ScaleEstimate(scale=scale, samples=(), source="prior_table")
    out = apply_scale(mesh, est, _grounding_box(width))
    before = mesh.aabb.extents
    after = out.aabb.extents
    ratios = after / before
    assert np.all(np.abs(ratios / ratios[0] - 1) < 1e-9)


def test_estimate_below_every_sample_and_cap():
    detector = _FakeDetector([_boxes(40, 100), _boxes(90, 100)])
    estimate = estimate_scale("cup", "table", backend="detector", k_images=2,
                              image_client=_FakeImages(), detector_client=detector,
                              max_scale_cap=0.8)
    assert all(estimate.scale <= ratio for _, _, ratio in estimate.samples)
    assert estimate.scale <= 0.8
