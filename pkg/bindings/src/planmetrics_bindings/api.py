"""Marshalling layer over the planmetrics library.

Images cross the boundary as contiguous row-major uint8 buffers plus an
explicit (H, W, C) shape; plans as JSON text (str or UTF-8 bytes); token
sequences as their text form.  All scoring delegates to
``planmetrics.harness`` so a binding call and a CLI run share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from planmetrics.harness import (
    detokenize_text,
    score_editing,
    score_generation,
    score_understanding,
    tokenize_image,
)
from planmetrics.core import parse_canonical_json
from planmetrics.postproc import PipelineConfig, run_pipeline
from planmetrics.raster import LEGEND_RGB
from planmetrics.tokenizer import Codebook


@dataclass(frozen=True)
class BoundHandle:
    """Immutable bundle of the resources a binding call may need."""

    outline_codebook: Optional[Codebook] = None
    room_codebook: Optional[Codebook] = None
    pipeline_config: PipelineConfig = PipelineConfig()
    legend: tuple = tuple(map(tuple, LEGEND_RGB.tolist()))
    _released: list = field(default_factory=list, repr=False)

    def free(self) -> None:
        """Release the handle; calling twice is a no-op."""
        if not self._released:
            self._released.append(True)

    @property
    def released(self) -> bool:
        return bool(self._released)


def open_handle(outline_codebook_json: Optional[str | bytes] = None,
                room_codebook_json: Optional[str | bytes] = None,
                correction_enabled: bool = True) -> BoundHandle:
    """Build a handle from serialized codebooks and pipeline settings."""
    def load(blob):
        if blob is None:
            return None
        return Codebook.from_json(_as_text(blob))

    return BoundHandle(outline_codebook=load(outline_codebook_json),
                       room_codebook=load(room_codebook_json),
                       pipeline_config=PipelineConfig(
                           correction_enabled=correction_enabled))


def _as_text(blob: str | bytes) -> str:
    if isinstance(blob, bytes):
        return blob.decode("utf-8")
    return blob


def _as_image(buffer: bytes | bytearray | memoryview, shape: tuple) -> np.ndarray:
    shape = tuple(int(s) for s in shape)
    if len(shape) != 3 or shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) shape, got {shape}")
    arr = np.frombuffer(buffer, dtype=np.uint8)
    if arr.size != shape[0] * shape[1] * shape[2]:
        raise ValueError(f"buffer of {arr.size} bytes does not match {shape}")
    return arr.reshape(shape)


def _as_buffer(image: np.ndarray) -> tuple:
    image = np.ascontiguousarray(image, dtype=np.uint8)
    return image.tobytes(), image.shape


def bind_understanding_score(gt_json: str | bytes,
                             pred_json: Optional[str | bytes]) -> dict:
    """Understanding scores for a predicted plan JSON against ground truth."""
    gt_plan = parse_canonical_json(_as_text(gt_json))
    pred_text = None if pred_json is None else _as_text(pred_json)
    return score_understanding(gt_plan, pred_text)


def bind_generation_score(gt_buffer, gt_shape, pred_buffer, pred_shape,
                          wall_px: int = 3) -> dict:
    """Generation metrics between two 256x256 RGB rasters."""
    return score_generation(_as_image(gt_buffer, gt_shape),
                            _as_image(pred_buffer, pred_shape),
                            wall_px=wall_px)


def bind_editing_score(before_buffer, before_shape, pred_buffer, pred_shape,
                       gt_buffer, gt_shape, wall_px: int = 3) -> dict:
    """Editing metrics for a predicted after-raster given before/gt rasters."""
    return score_editing(_as_image(before_buffer, before_shape),
                         _as_image(pred_buffer, pred_shape),
                         _as_image(gt_buffer, gt_shape),
                         wall_px=wall_px)


def bind_run_pipeline(buffer, shape, handle: Optional[BoundHandle] = None) -> tuple:
    """Post-processing pipeline over a raw RGB buffer; returns (bytes, shape)."""
    cfg = handle.pipeline_config if handle is not None else PipelineConfig()
    return _as_buffer(run_pipeline(_as_image(buffer, shape), cfg))


def bind_tokenize(buffer, shape, handle: BoundHandle, grid_n: int = 8) -> str:
    """Rendered plan buffer to its text-form token sequence."""
    if handle.outline_codebook is None or handle.room_codebook is None:
        raise ValueError("handle is missing a codebook")
    return tokenize_image(_as_image(buffer, shape), handle.outline_codebook,
                          handle.room_codebook, n=grid_n)


def bind_detokenize(text: str | bytes, handle: BoundHandle,
                    grid_n: int = 8) -> tuple:
    """Text-form token sequence back to a rendered raster (bytes, shape)."""
    if handle.outline_codebook is None or handle.room_codebook is None:
        raise ValueError("handle is missing a codebook")
    raster = detokenize_text(_as_text(text), handle.outline_codebook,
                             handle.room_codebook, n=grid_n)
    return _as_buffer(raster)
