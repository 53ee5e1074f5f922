"""Rendering plans to the 10-color raster convention and reading rasters back.

A LayoutRaster is a (256, 256, 3) uint8 RGB array; a LabelMap is a
(256, 256) uint8 array of legend indices (see LEGEND for the table order).
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .core import RASTER_SIDE, ColorClass, FloorPlan
from .errors import EmptyImage, MissingMask

# Legend table order fixes both label ids and nearest-color tie-breaking.
LEGEND = (
    (ColorClass.LIGHT_KHAKI, (238, 232, 170)),
    (ColorClass.ORANGE, (255, 165, 0)),
    (ColorClass.LIGHT_SALMON, (240, 128, 128)),
    (ColorClass.LIGHT_CYAN, (173, 216, 210)),
    (ColorClass.OLIVE_GREEN, (107, 142, 35)),
    (ColorClass.VIOLET, (218, 112, 214)),
    (ColorClass.PLUM, (221, 160, 221)),
    (ColorClass.BRIGHT_YELLOW, (255, 215, 0)),
    (ColorClass.BLACK, (0, 0, 0)),
    (ColorClass.WHITE, (255, 255, 255)),
)

LEGEND_RGB = np.array([rgb for _, rgb in LEGEND], dtype=np.int32)
ROOM_CLASS_IDS = tuple(range(8))  # everything except black and white
BLACK_ID = ColorClass.BLACK.value
WHITE_ID = ColorClass.WHITE.value

WALL_THICKNESS_PX = 3
JITTER_MAX = 6
MIN_ROOM_PX = 16

_CONN4 = ndimage.generate_binary_structure(2, 1)


def _room_jitter(seed: int, room_idx: int) -> np.ndarray:
    if seed == 0:
        return np.zeros(3, dtype=np.int32)
    rng = np.random.RandomState((seed * 1000003 + room_idx) % (2**32))
    return rng.randint(-JITTER_MAX, JITTER_MAX + 1, size=3)


def render(plan: FloorPlan, jitter_seed: int = 0) -> np.ndarray:
    """Render a plan with masks to RGB: rooms painted in descending area
    order, 1-px white separators between adjacent rooms, 3-px black outer
    wall along the outline boundary, white exterior."""
    if plan.outline is None:
        raise MissingMask("plan has no outline mask")
    for room in plan.rooms:
        if room.mask is None:
            raise MissingMask(f"room {room.idx} has no mask")

    canvas = np.full((RASTER_SIDE, RASTER_SIDE, 3), 255, dtype=np.uint8)
    owner = np.full((RASTER_SIDE, RASTER_SIDE), -1, dtype=np.int32)

    ordered = sorted(plan.rooms, key=lambda r: -int(np.count_nonzero(r.mask)))
    for room in ordered:
        base = LEGEND_RGB[room.category.color_class.value]
        color = np.clip(base + _room_jitter(jitter_seed, room.idx), 0, 255)
        mask = np.asarray(room.mask, dtype=bool)
        canvas[mask] = color.astype(np.uint8)
        owner[mask] = room.idx

    # 1-px white separator: a room pixel whose up or left neighbor belongs
    # to a different room is whitened (keeps the seam one pixel wide).
    seam = np.zeros_like(owner, dtype=bool)
    seam[1:, :] |= (owner[1:, :] >= 0) & (owner[:-1, :] >= 0) & (owner[1:, :] != owner[:-1, :])
    seam[:, 1:] |= (owner[:, 1:] >= 0) & (owner[:, :-1] >= 0) & (owner[:, 1:] != owner[:, :-1])
    canvas[seam] = 255

    outline = np.asarray(plan.outline, dtype=bool)
    interior = ndimage.binary_erosion(outline, structure=_CONN4,
                                      iterations=WALL_THICKNESS_PX)
    canvas[outline & ~interior] = 0
    return canvas


def classify_pixels(raster: np.ndarray, legend_rgb: np.ndarray = LEGEND_RGB) -> np.ndarray:
    """Nearest-legend-color label per pixel (L2 in RGB, ties -> table order)."""
    pixels = np.asarray(raster, dtype=np.int32)
    dists = ((pixels[..., None, :] - legend_rgb[None, None, :, :]) ** 2).sum(axis=-1)
    return dists.argmin(axis=-1).astype(np.uint8)


def nearest_color_distance(raster: np.ndarray, legend_rgb: np.ndarray = LEGEND_RGB) -> np.ndarray:
    pixels = np.asarray(raster, dtype=np.int32)
    dists = ((pixels[..., None, :] - legend_rgb[None, None, :, :]) ** 2).sum(axis=-1)
    return np.sqrt(dists.min(axis=-1))


def recolor(labels: np.ndarray, legend_rgb: np.ndarray = LEGEND_RGB) -> np.ndarray:
    return legend_rgb[labels].astype(np.uint8)


def extract_room_masks(labels: np.ndarray, min_room_px: int = MIN_ROOM_PX) -> list:
    """4-connected components per room color class; specks below
    min_room_px are dropped.  Returns [(class_id, mask), ...]."""
    out = []
    for class_id in ROOM_CLASS_IDS:
        class_mask = labels == class_id
        if not class_mask.any():
            continue
        comp, n = ndimage.label(class_mask, structure=_CONN4)
        sizes = ndimage.sum_labels(class_mask, comp, index=np.arange(1, n + 1))
        for k in range(1, n + 1):
            if sizes[k - 1] >= min_room_px:
                out.append((class_id, comp == k))
    return out


def resize_nearest(image: np.ndarray, side: int = RASTER_SIDE) -> np.ndarray:
    """Nearest-neighbor resize to side x side; never introduces new colors."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[0] < 1 or image.shape[1] < 1:
        raise EmptyImage(f"bad image shape {image.shape}")
    h, w = image.shape[:2]
    rows = np.minimum(((np.arange(side) + 0.5) * h / side).astype(int), h - 1)
    cols = np.minimum(((np.arange(side) + 0.5) * w / side).astype(int), w - 1)
    return image[rows][:, cols]
