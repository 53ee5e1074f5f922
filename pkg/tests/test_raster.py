"""Rendering, pixel classification, room-mask extraction, and resizing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planmetrics import synthetic
from planmetrics.core import RASTER_SIDE, FloorPlan, RoomCategory, room_from_mask
from planmetrics.errors import EmptyImage, MissingMask
from planmetrics.raster import (
    BLACK_ID,
    LEGEND_RGB,
    WALL_THICKNESS_PX,
    WHITE_ID,
    classify_pixels,
    extract_room_masks,
    nearest_color_distance,
    recolor,
    render,
    resize_nearest,
)


def _rect(x0, y0, x1, y1):
    mask = np.zeros((RASTER_SIDE, RASTER_SIDE), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return mask


class TestRender:
    def test_single_room_fills_interior_with_legend_color(self):
        outline = _rect(20, 20, 236, 236)
        room = _rect(23, 23, 233, 233)  # interior inside the 3-px wall
        plan = FloorPlan(rooms=[room_from_mask(0, RoomCategory.Kitchen, room)],
                         outline=outline)
        img = render(plan, jitter_seed=0)
        interior = img[30:220, 30:220]
        assert (interior == LEGEND_RGB[RoomCategory.Kitchen.color_class.value]).all()
        # 3-px black wall along the outline boundary
        assert (img[20:23, 20:236] == 0).all()
        # exterior stays white
        assert (img[:20] == 255).all()

    def test_larger_room_painted_first(self):
        big = _rect(20, 20, 200, 200)
        small = _rect(100, 100, 150, 150)  # fully inside the big room
        plan = FloorPlan(
            rooms=[room_from_mask(0, RoomCategory.Kitchen, small),
                   room_from_mask(1, RoomCategory.Balcony, big)],
            outline=_rect(10, 10, 246, 246))
        img = render(plan, jitter_seed=0)
        # overlap resolved to the smaller room (painted last)
        assert (img[120, 120] == LEGEND_RGB[RoomCategory.Kitchen.color_class.value]).all()
        assert (img[50, 50] == LEGEND_RGB[RoomCategory.Balcony.color_class.value]).all()

    def test_deterministic(self):
        plan = synthetic.make_plan(4, 5)
        assert np.array_equal(render(plan, jitter_seed=9), render(plan, jitter_seed=9))

    def test_seed_zero_is_jitter_free(self):
        plan = synthetic.make_plan(4, 4)
        img = render(plan, jitter_seed=0)
        labels = classify_pixels(img)
        assert np.array_equal(recolor(labels), img)

    def test_jitter_stays_within_bound(self):
        plan = synthetic.make_plan(4, 4)
        base = render(plan, jitter_seed=0).astype(int)
        jit = render(plan, jitter_seed=77).astype(int)
        assert np.abs(base - jit).max() <= 6

    def test_adjacent_rooms_get_white_seam(self):
        left = _rect(20, 20, 128, 200)
        right = _rect(128, 20, 236, 200)
        plan = FloorPlan(rooms=[room_from_mask(0, RoomCategory.Kitchen, left),
                                room_from_mask(1, RoomCategory.Bathroom, right)],
                         outline=_rect(10, 10, 246, 246))
        img = render(plan, jitter_seed=0)
        assert (img[100, 128] == 255).all()
        assert (img[100, 127] == LEGEND_RGB[RoomCategory.Kitchen.color_class.value]).all()

    def test_missing_masks(self):
        with pytest.raises(MissingMask):
            render(FloorPlan(rooms=[], outline=None))
        plan = FloorPlan(rooms=[room_from_mask(0, RoomCategory.Kitchen,
                                               _rect(20, 20, 60, 60))],
                         outline=_rect(0, 0, 256, 256))
        plan.rooms[0].mask = None
        with pytest.raises(MissingMask):
            render(plan)


class TestClassifyPixels:
    def test_all_black(self):
        img = np.zeros((256, 256, 3), dtype=np.uint8)
        assert (classify_pixels(img) == BLACK_ID).all()

    def test_legend_colors_map_to_own_ids(self):
        img = LEGEND_RGB.astype(np.uint8).reshape(1, 10, 3)
        assert list(classify_pixels(img)[0]) == list(range(10))

    def test_near_yellow_pixel(self):
        # (250, 210, 5) is nearest to bright yellow (255, 215, 0) by L2
        img = np.array([[[250, 210, 5]]], dtype=np.uint8)
        assert classify_pixels(img)[0, 0] == 7

    def test_tie_breaks_to_lowest_index(self):
        legend = np.array([[0, 0, 0], [2, 0, 0]], dtype=np.int32)
        img = np.array([[[1, 0, 0]]], dtype=np.uint8)
        assert classify_pixels(img, legend)[0, 0] == 0

    def test_nearest_color_distance(self):
        img = np.zeros((2, 2, 3), dtype=np.uint8)
        assert (nearest_color_distance(img) == 0).all()
        gray = np.full((2, 2, 3), 128, dtype=np.uint8)
        assert (nearest_color_distance(gray) > 40).all()


class TestExtractRoomMasks:
    def test_single_khaki_rectangle(self):
        labels = np.full((256, 256), WHITE_ID, dtype=np.uint8)
        labels[40:80, 40:120] = 0  # light khaki
        masks = extract_room_masks(labels)
        assert len(masks) == 1
        class_id, mask = masks[0]
        assert class_id == 0
        assert np.array_equal(mask, labels == 0)

    def test_two_disjoint_yellow_blobs(self):
        labels = np.full((256, 256), WHITE_ID, dtype=np.uint8)
        labels[10:40, 10:40] = 7
        labels[100:140, 100:140] = 7
        masks = extract_room_masks(labels)
        assert [c for c, _ in masks] == [7, 7]
        assert masks[0][1].sum() == 30 * 30 and masks[1][1].sum() == 40 * 40

    def test_small_speck_dropped(self):
        labels = np.full((256, 256), WHITE_ID, dtype=np.uint8)
        labels[5:7, 5:7] = 7  # 4 px < min_room_px
        assert extract_room_masks(labels) == []

    def test_black_and_white_never_extracted(self):
        labels = np.full((256, 256), BLACK_ID, dtype=np.uint8)
        labels[0:50] = WHITE_ID
        assert extract_room_masks(labels) == []


class TestResizeNearest:
    def test_solid_512(self):
        img = np.full((512, 512, 3), 42, dtype=np.uint8)
        out = resize_nearest(img)
        assert out.shape == (256, 256, 3) and (out == 42).all()

    def test_identity_at_native_size(self):
        img = np.random.RandomState(0).randint(0, 256, (256, 256, 3), dtype=np.uint8)
        assert np.array_equal(resize_nearest(img), img)

    def test_checkerboard_palette_preserved(self):
        board = np.zeros((2, 2, 3), dtype=np.uint8)
        board[0, 1] = board[1, 0] = 255
        up = resize_nearest(board, side=256)
        colors = {tuple(c) for c in up.reshape(-1, 3)}
        assert colors == {(0, 0, 0), (255, 255, 255)}

    def test_bad_shape(self):
        with pytest.raises(EmptyImage):
            resize_nearest(np.zeros((256, 256), dtype=np.uint8))

    @settings(max_examples=15, deadline=None)
    @given(h=st.integers(2, 600), w=st.integers(2, 600))
    def test_never_introduces_new_colors(self, h, w):
        rng = np.random.RandomState(h * 1000 + w)
        img = rng.choice([0, 85, 170, 255], size=(h, w, 3)).astype(np.uint8)
        out = resize_nearest(img)
        src = {tuple(c) for c in img.reshape(-1, 3)}
        dst = {tuple(c) for c in out.reshape(-1, 3)}
        assert dst <= src


def test_render_classify_round_trip_recovers_rooms():
    plan = synthetic.make_plan(11, 6)
    labels = classify_pixels(render(plan, jitter_seed=0))
    masks = extract_room_masks(labels)
    assert len(masks) == len(plan.rooms)
    got = sorted(c for c, _ in masks)
    want = sorted(r.category.color_class.value for r in plan.rooms)
    assert got == want


def test_wall_thickness_constant():
    assert WALL_THICKNESS_PX == 3
