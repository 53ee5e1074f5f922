"""Unified raster post-processing: structural correction (ambiguous-pixel
voting + per-component open-close), nearest-legend color standardization,
and contour refinement (black outer walls, white inner separators)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import (
    BLACK_ID,
    LEGEND_RGB,
    ROOM_CLASS_IDS,
    WHITE_ID,
    classify_pixels,
    nearest_color_distance,
    recolor,
    resize_nearest,
)

GRAY_TOLERANCE = 40.0
VOTE_NEIGHBORHOOD = 5
VOTE_MAX_PASSES = 10
PIPELINE_MAX_ROUNDS = 8

_CONN4 = ndimage.generate_binary_structure(2, 1)
_CONN8 = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True)
class MorphKernel:
    radius: int = 2

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("kernel radius must be >= 1")

    @property
    def footprint(self) -> np.ndarray:
        side = 2 * self.radius + 1
        return np.ones((side, side), dtype=bool)


@dataclass(frozen=True)
class PipelineConfig:
    correction_enabled: bool = True
    open_close_radius: int = 2
    noise_component_px: int = 16
    wall_thickness: int = 3

    def __post_init__(self):
        if min(self.open_close_radius, self.noise_component_px, self.wall_thickness) < 1:
            raise ValueError("all pipeline parameters must be positive")


def dilate(mask: np.ndarray, kernel: MorphKernel) -> np.ndarray:
    return ndimage.binary_dilation(np.asarray(mask, dtype=bool),
                                   structure=kernel.footprint)


def erode(mask: np.ndarray, kernel: MorphKernel) -> np.ndarray:
    return ndimage.binary_erosion(np.asarray(mask, dtype=bool),
                                  structure=kernel.footprint, border_value=0)


def open_mask(mask: np.ndarray, kernel: MorphKernel) -> np.ndarray:
    return dilate(erode(mask, kernel), kernel)


def close_mask(mask: np.ndarray, kernel: MorphKernel) -> np.ndarray:
    return erode(dilate(mask, kernel), kernel)


def _vote_ambiguous(labels: np.ndarray, ambiguous: np.ndarray) -> np.ndarray:
    """Relabel ambiguous pixels to the modal class of their resolved 5x5
    neighbors; iterated so patches resolve from the rim inward."""
    labels = labels.copy()
    present = np.unique(labels[~ambiguous]) if (~ambiguous).any() else np.array([], int)
    for _ in range(VOTE_MAX_PASSES):
        if not ambiguous.any() or present.size == 0:
            break
        counts = np.zeros((len(present),) + labels.shape, dtype=np.int32)
        resolved = ~ambiguous
        kernel = np.ones((VOTE_NEIGHBORHOOD, VOTE_NEIGHBORHOOD), dtype=np.int32)
        for ci, c in enumerate(present):
            ind = ((labels == c) & resolved).astype(np.int32)
            counts[ci] = ndimage.convolve(ind, kernel, mode="constant", cval=0)
        total = counts.sum(axis=0)
        winner = counts.argmax(axis=0)  # ties -> lowest class id (table order)
        fixable = ambiguous & (total > 0)
        if not fixable.any():
            break
        labels[fixable] = present[winner[fixable]]
        ambiguous = ambiguous & ~fixable
    return labels


def _per_component_open_close(labels: np.ndarray, radius: int) -> np.ndarray:
    """Open-close every room-class component independently; pixels shed by
    smoothing turn white, pixels gained fill in unless contested."""
    kernel = MorphKernel(radius)
    out = labels.copy()
    room_pixels = np.isin(labels, ROOM_CLASS_IDS)
    additions = {}
    claimed = np.zeros(labels.shape, dtype=np.int32)
    for class_id in ROOM_CLASS_IDS:
        class_mask = labels == class_id
        if not class_mask.any():
            continue
        comp, n = ndimage.label(class_mask, structure=_CONN4)
        for k in range(1, n + 1):
            component = comp == k
            smoothed = close_mask(open_mask(component, kernel), kernel)
            freed = component & ~smoothed
            out[freed] = WHITE_ID
            added = smoothed & ~component & ~room_pixels
            if added.any():
                additions[(class_id, k)] = added
                claimed += added
    for (class_id, _), added in additions.items():
        out[added & (claimed == 1)] = class_id
    return out


def structural_correction(raster: np.ndarray, cfg: PipelineConfig = PipelineConfig()) -> np.ndarray:
    labels = classify_pixels(raster)
    ambiguous = nearest_color_distance(raster) > GRAY_TOLERANCE
    labels = _vote_ambiguous(labels, ambiguous)
    labels = _per_component_open_close(labels, cfg.open_close_radius)
    return recolor(labels)


def standardize_colors(raster: np.ndarray) -> np.ndarray:
    """Snap every pixel to the nearest legend color (idempotent)."""
    return recolor(classify_pixels(raster))


def refine_contours(raster: np.ndarray, cfg: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """Stroke the outer boundary of the room union black (wall_thickness)
    and 1-px white seams where distinct room components meet; room
    interiors are left untouched."""
    labels = classify_pixels(raster)
    room_pixels = np.isin(labels, ROOM_CLASS_IDS)
    out = np.full_like(np.asarray(raster), 255)
    out[room_pixels] = np.asarray(raster)[room_pixels]
    if not room_pixels.any():
        return out

    band = ndimage.binary_dilation(room_pixels, structure=_CONN8,
                                   iterations=cfg.wall_thickness) & ~room_pixels
    out[band] = 0

    # white seam: non-room pixels touched by >= 2 distinct room components
    touch = np.zeros(labels.shape, dtype=np.int32)
    for class_id in ROOM_CLASS_IDS:
        class_mask = labels == class_id
        if not class_mask.any():
            continue
        comp, n = ndimage.label(class_mask, structure=_CONN4)
        for k in range(1, n + 1):
            grown = ndimage.binary_dilation(comp == k, structure=_CONN4)
            touch += (grown & ~room_pixels).astype(np.int32)
    out[(touch >= 2) & ~room_pixels] = 255
    return out


def run_pipeline(image: np.ndarray, cfg: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """resize -> [correction] -> standardize -> refine, iterated to a pixel
    fixed point so a second application is a no-op."""
    raster = resize_nearest(np.asarray(image))
    for _ in range(PIPELINE_MAX_ROUNDS):
        stage = raster
        if cfg.correction_enabled:
            stage = structural_correction(stage, cfg)
        stage = standardize_colors(stage)
        stage = refine_contours(stage, cfg)
        if np.array_equal(stage, raster):
            return stage
        raster = stage
    return raster
