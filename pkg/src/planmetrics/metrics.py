"""Score suite for the three evaluation tasks plus the Pearson coupling
statistic: understanding scores over parsed plans, pixel metrics over
rasters/label maps, the Frechet distance over feature summaries, and the
editing change-map metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from .core import RASTER_SIDE, FloorPlan, Position, Room
from .errors import DegenerateInput, DimensionMismatch, NonPSDCovariance, ShapeMismatch
from .graph import RELATION_INVERSE
from .raster import BLACK_ID, ROOM_CLASS_IDS, WHITE_ID

TYPE_MISMATCH_COST = 10.0
SSIM_WINDOW_SIGMA = 1.5
SSIM_WINDOW_RADIUS = 5  # 11x11 window
SSIM_C1 = (0.01 * 255) ** 2
SSIM_C2 = (0.03 * 255) ** 2
PSNR_CAP_DB = 60.0


@dataclass
class RoomMatching:
    pairs: list = field(default_factory=list)  # (pred_idx, gt_idx)
    unmatched_pred: list = field(default_factory=list)
    unmatched_gt: list = field(default_factory=list)


@dataclass
class UnderstandingScore:
    success: int
    rmr: float
    loc_acc: float
    adj_acc: float
    rel_acc: float
    area_diff_m2: float


_POSITION_CELL = {
    Position.NORTHWEST: (0, 0), Position.NORTH: (1, 0), Position.NORTHEAST: (2, 0),
    Position.WEST: (0, 1), Position.CENTER: (1, 1), Position.EAST: (2, 1),
    Position.SOUTHWEST: (0, 2), Position.SOUTH: (1, 2), Position.SOUTHEAST: (2, 2),
}


def _room_point(room: Room) -> np.ndarray:
    """Centroid when known, otherwise the room's 3x3 position cell center."""
    if room.centroid_px is not None:
        return np.array(room.centroid_px, dtype=float)
    cx, cy = _POSITION_CELL[room.position]
    third = RASTER_SIDE / 3.0
    return np.array([(cx + 0.5) * third, (cy + 0.5) * third])


def match_rooms(pred: list, gt: list) -> RoomMatching:
    """Minimum-cost bipartite matching between room lists; rooms of
    different color classes never match."""
    if not pred or not gt:
        return RoomMatching(unmatched_pred=[r.idx for r in pred],
                            unmatched_gt=[r.idx for r in gt])
    cost = np.zeros((len(pred), len(gt)))
    for i, p in enumerate(pred):
        for j, g in enumerate(gt):
            mismatch = p.category.color_class != g.category.color_class
            dist = float(np.linalg.norm(_room_point(p) - _room_point(g)))
            cost[i, j] = TYPE_MISMATCH_COST * mismatch + dist / RASTER_SIDE
    rows, cols = linear_sum_assignment(cost)
    matching = RoomMatching()
    paired_pred, paired_gt = set(), set()
    for i, j in zip(rows, cols):
        if cost[i, j] < TYPE_MISMATCH_COST:
            matching.pairs.append((pred[i].idx, gt[j].idx))
            paired_pred.add(pred[i].idx)
            paired_gt.add(gt[j].idx)
    matching.unmatched_pred = [r.idx for r in pred if r.idx not in paired_pred]
    matching.unmatched_gt = [r.idx for r in gt if r.idx not in paired_gt]
    return matching


def _edge_category_keys(plan: FloorPlan) -> set:
    cls = {r.idx: r.category.color_class.value for r in plan.rooms}
    keys = set()
    for e in plan.edges:
        a, b = cls[e.room1], cls[e.room2]
        keys.add((min(a, b), max(a, b)))
    return keys


def understanding_score(pred: Optional[FloorPlan], gt: FloorPlan) -> UnderstandingScore:
    """Room-level and relation-level agreement of a predicted plan with the
    ground truth; pred=None means the model output failed to parse."""
    n = len(gt.rooms)
    if pred is None:
        worst_area = sum(r.area_m2 for r in gt.rooms) / n if n else 0.0
        return UnderstandingScore(success=0, rmr=0.0, loc_acc=0.0,
                                  adj_acc=0.0, rel_acc=0.0,
                                  area_diff_m2=worst_area)

    matching = match_rooms(pred.rooms, gt.rooms)
    pred_by_idx = {r.idx: r for r in pred.rooms}
    gt_by_idx = {r.idx: r for r in gt.rooms}
    gt_to_pred = {g: p for p, g in matching.pairs}

    if n == 0:
        rmr = loc = 1.0
        area_diff = 0.0
    else:
        type_hits = loc_hits = 0
        area_total = 0.0
        for g in gt.rooms:
            p_idx = gt_to_pred.get(g.idx)
            if p_idx is None:
                area_total += g.area_m2  # unmatched gt room: full penalty
                continue
            p = pred_by_idx[p_idx]
            type_hits += p.category == g.category
            loc_hits += p.position == g.position
            area_total += abs(p.area_m2 - g.area_m2)
        rmr = type_hits / n
        loc = loc_hits / n
        area_diff = area_total / n

    pred_keys = _edge_category_keys(pred)
    gt_keys = _edge_category_keys(gt)
    union = pred_keys | gt_keys
    adj_acc = len(pred_keys & gt_keys) / len(union) if union else 1.0

    # RelAcc: each gt edge scored once; the matched pred edge must carry an
    # equal relation label (orientation normalized through the matching).
    pred_rel = {}
    for e in pred.edges:
        pred_rel[(e.room1, e.room2)] = e.relation
        pred_rel[(e.room2, e.room1)] = RELATION_INVERSE[e.relation]
    if gt.edges:
        hits = 0
        for e in gt.edges:
            p1, p2 = gt_to_pred.get(e.room1), gt_to_pred.get(e.room2)
            if p1 is None or p2 is None:
                continue
            hits += pred_rel.get((p1, p2)) == e.relation
        rel_acc = hits / len(gt.edges)
    else:
        rel_acc = 1.0

    return UnderstandingScore(success=1, rmr=rmr, loc_acc=loc,
                              adj_acc=adj_acc, rel_acc=rel_acc,
                              area_diff_m2=area_diff)


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")


def _category_iou_terms(pred: np.ndarray, gt: np.ndarray):
    for c in ROOM_CLASS_IDS:
        p, g = pred == c, gt == c
        union = int(np.count_nonzero(p | g))
        if union:
            yield int(np.count_nonzero(p & g)), union


def micro_iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Pixel IoU pooled over room color classes (black/white excluded)."""
    _check_same_shape(pred, gt)
    terms = list(_category_iou_terms(pred, gt))
    if not terms:
        return 1.0
    inter = sum(i for i, _ in terms)
    union = sum(u for _, u in terms)
    return inter / union


def macro_iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean per-category IoU over categories present in either map."""
    _check_same_shape(pred, gt)
    terms = list(_category_iou_terms(pred, gt))
    if not terms:
        return 1.0
    return float(np.mean([i / u for i, u in terms]))


def _luminance(raster: np.ndarray) -> np.ndarray:
    rgb = np.asarray(raster, dtype=np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def _gauss_window(x: np.ndarray) -> np.ndarray:
    return ndimage.gaussian_filter(x, sigma=SSIM_WINDOW_SIGMA,
                                   truncate=SSIM_WINDOW_RADIUS / SSIM_WINDOW_SIGMA,
                                   mode="nearest")


def ssim(pred: np.ndarray, gt: np.ndarray) -> float:
    """Windowed SSIM on luminance (11x11 Gaussian window, sigma 1.5)."""
    _check_same_shape(np.asarray(pred), np.asarray(gt))
    x = _luminance(pred)
    y = _luminance(gt)
    mu_x, mu_y = _gauss_window(x), _gauss_window(y)
    sigma_x = _gauss_window(x * x) - mu_x**2
    sigma_y = _gauss_window(y * y) - mu_y**2
    sigma_xy = _gauss_window(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + SSIM_C1) * (2 * sigma_xy + SSIM_C2)
    den = (mu_x**2 + mu_y**2 + SSIM_C1) * (sigma_x + sigma_y + SSIM_C2)
    return float((num / den).mean())


def psnr(pred: np.ndarray, gt: np.ndarray) -> float:
    """PSNR in dB over all pixels/channels; identical images give inf."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    _check_same_shape(pred, gt)
    mse = float(((pred - gt) ** 2).mean())
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


@dataclass
class FeatureSet:
    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def from_rows(cls, rows: np.ndarray) -> "FeatureSet":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 2:
            raise DegenerateInput("need a 2-D matrix with at least 2 rows")
        cov = np.cov(rows, rowvar=False)
        cov = np.atleast_2d(cov)
        return cls(mean=rows.mean(axis=0), cov=(cov + cov.T) / 2.0)

    @classmethod
    def from_moments(cls, mean, cov) -> "FeatureSet":
        mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
        return cls(mean=mean, cov=(cov + cov.T) / 2.0)


EIG_CLAMP_TOL = 1e-6


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    if vals.min() < -EIG_CLAMP_TOL:
        raise NonPSDCovariance(f"eigenvalue {vals.min():.3g} below tolerance")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(real: FeatureSet, gen: FeatureSet) -> float:
    """||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^{1/2}), the square
    root taken via the symmetric product S_g^{1/2} S_r S_g^{1/2}."""
    if real.mean.shape != gen.mean.shape:
        raise DimensionMismatch(f"{real.mean.shape} vs {gen.mean.shape}")
    sg_half = _psd_sqrt(gen.cov)
    inner = sg_half @ real.cov @ sg_half
    vals = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    if vals.min() < -EIG_CLAMP_TOL:
        raise NonPSDCovariance(f"eigenvalue {vals.min():.3g} below tolerance")
    vals = np.clip(vals, 0.0, None)
    mean_term = float(((real.mean - gen.mean) ** 2).sum())
    trace_term = float(np.trace(real.cov) + np.trace(gen.cov) - 2.0 * np.sqrt(vals).sum())
    return mean_term + trace_term


@dataclass
class EditingScore:
    delta_iou: float
    delta_mse: float


def wall_mask_from(after_a: np.ndarray, after_b: np.ndarray) -> np.ndarray:
    """Black/white pixels of both after-label-maps, dilated by one pixel."""
    walls = np.isin(after_a, (BLACK_ID, WHITE_ID)) | np.isin(after_b, (BLACK_ID, WHITE_ID))
    return ndimage.binary_dilation(walls, structure=ndimage.generate_binary_structure(2, 2))


def editing_score(before: np.ndarray, pred_after: np.ndarray,
                  gt_after: np.ndarray,
                  wall_mask: Optional[np.ndarray] = None) -> EditingScore:
    """Change-map agreement between predicted and ground-truth edits,
    with wall pixels excluded."""
    _check_same_shape(before, pred_after)
    _check_same_shape(before, gt_after)
    if wall_mask is None:
        wall_mask = wall_mask_from(pred_after, gt_after)
    keep = ~np.asarray(wall_mask, dtype=bool)
    change_pred = (pred_after != before) & keep
    change_gt = (gt_after != before) & keep
    union = int(np.count_nonzero(change_pred | change_gt))
    if union == 0:
        delta_iou = 1.0
    else:
        delta_iou = int(np.count_nonzero(change_pred & change_gt)) / union
    n_keep = int(np.count_nonzero(keep))
    if n_keep == 0:
        delta_mse = 0.0
    else:
        diff = change_gt.astype(np.float64) - change_pred.astype(np.float64)
        delta_mse = float((diff[keep] ** 2).mean())
    return EditingScore(delta_iou=delta_iou, delta_mse=delta_mse)


def pearson_r(xs, ys) -> float:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise DegenerateInput("need two equal-length 1-D lists of length >= 2")
    if xs.std() == 0 or ys.std() == 0:
        raise DegenerateInput("zero variance input")
    return float(np.corrcoef(xs, ys)[0, 1])
