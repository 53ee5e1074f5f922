"""Synthetic rectilinear floor plans for tests, demos, and codebook training.

Plans are guillotine subdivisions of a rectangular outline: rooms tile the
interior exactly, so rendering produces clean walls and 1-px seams.
"""

from __future__ import annotations

import numpy as np

from .core import RASTER_SIDE, FloorPlan, RoomCategory, room_from_mask
from .graph import extract_adjacency
from .raster import WALL_THICKNESS_PX

MIN_ROOM_SIDE_PX = 28

_CATEGORY_POOL = (
    RoomCategory.LivingRoom,
    RoomCategory.MasterRoom,
    RoomCategory.Kitchen,
    RoomCategory.Bathroom,
    RoomCategory.Balcony,
    RoomCategory.DiningRoom,
    RoomCategory.Storage,
    RoomCategory.SecondRoom,
    RoomCategory.StudyRoom,
    RoomCategory.ChildRoom,
)


def _rect_mask(x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
    mask = np.zeros((RASTER_SIDE, RASTER_SIDE), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return mask


def _split_rects(rng: np.random.RandomState, bounds: tuple, n_rooms: int) -> list:
    rects = [bounds]
    while len(rects) < n_rooms:
        # split the largest rectangle that still can be split
        order = sorted(range(len(rects)),
                       key=lambda i: -(rects[i][2] - rects[i][0]) * (rects[i][3] - rects[i][1]))
        for i in order:
            x0, y0, x1, y1 = rects[i]
            w, h = x1 - x0, y1 - y0
            options = []
            if w >= 2 * MIN_ROOM_SIDE_PX:
                options.append("v")
            if h >= 2 * MIN_ROOM_SIDE_PX:
                options.append("h")
            if not options:
                continue
            axis = options[rng.randint(len(options))]
            if axis == "v":
                cut = rng.randint(x0 + MIN_ROOM_SIDE_PX, x1 - MIN_ROOM_SIDE_PX + 1)
                rects[i:i + 1] = [(x0, y0, cut, y1), (cut, y0, x1, y1)]
            else:
                cut = rng.randint(y0 + MIN_ROOM_SIDE_PX, y1 - MIN_ROOM_SIDE_PX + 1)
                rects[i:i + 1] = [(x0, y0, x1, cut), (x0, cut, x1, y1)]
            break
        else:
            break  # nothing splittable left
    return rects


def make_plan(seed: int, n_rooms: int = 5, wall_px: int = WALL_THICKNESS_PX) -> FloorPlan:
    """Random rectilinear plan with rooms tiling the outline interior."""
    rng = np.random.RandomState(seed % (2**32))
    margin_x0 = rng.randint(4, 24)
    margin_y0 = rng.randint(4, 24)
    margin_x1 = rng.randint(4, 24)
    margin_y1 = rng.randint(4, 24)
    outline = _rect_mask(margin_x0, margin_y0,
                         RASTER_SIDE - margin_x1, RASTER_SIDE - margin_y1)
    interior = (margin_x0 + wall_px, margin_y0 + wall_px,
                RASTER_SIDE - margin_x1 - wall_px, RASTER_SIDE - margin_y1 - wall_px)
    rects = _split_rects(rng, interior, n_rooms)

    # biggest room becomes the living room, the rest draw from the pool
    order = sorted(range(len(rects)),
                   key=lambda i: -(rects[i][2] - rects[i][0]) * (rects[i][3] - rects[i][1]))
    categories = [None] * len(rects)
    categories[order[0]] = RoomCategory.LivingRoom
    for i in order[1:]:
        categories[i] = _CATEGORY_POOL[1 + rng.randint(len(_CATEGORY_POOL) - 1)]

    rooms = [room_from_mask(i, categories[i], _rect_mask(*rects[i]))
             for i in range(len(rects))]
    plan = FloorPlan(rooms=rooms, outline=outline)

    graph = extract_adjacency([(r.category, r.mask) for r in rooms], wall_px=wall_px)
    from .core import Edge

    for i, j, rel in graph.edges:
        plan.edges.append(Edge(i, j, rel,
                               f"{categories[i].value} is {rel} {categories[j].value}"))
    plan.description = f"Synthetic plan with {len(rooms)} rooms."
    return plan


def add_noise(raster: np.ndarray, seed: int, speckle_fraction: float = 0.01) -> np.ndarray:
    """Random off-legend speckle plus a gray smudge, for pipeline tests."""
    rng = np.random.RandomState(seed % (2**32))
    noisy = np.asarray(raster).copy()
    n = int(speckle_fraction * raster.shape[0] * raster.shape[1])
    ys = rng.randint(0, raster.shape[0], n)
    xs = rng.randint(0, raster.shape[1], n)
    noisy[ys, xs] = rng.randint(0, 256, (n, 3))
    cy, cx = rng.randint(40, raster.shape[0] - 40, 2)
    noisy[cy:cy + 4, cx:cx + 4] = (128, 128, 128)
    return noisy
