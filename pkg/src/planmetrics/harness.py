"""Batch evaluation: dataset ingestion, per-sample scoring for the three
tasks, deterministic JSONL/CSV reports, and the coupling analysis."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from . import metrics as M
from .core import FloorPlan, RoomCategory, parse_canonical_json, room_from_mask
from .errors import EmptyDataset, PlanMetricsError, UnreadableFile
from .graph import edge_overlap, extract_adjacency, graph_edit_distance, node_f1
from .metrics import PSNR_CAP_DB
from .postproc import PipelineConfig, run_pipeline
from .raster import WHITE_ID, classify_pixels, extract_room_masks, render, resize_nearest
from .tokenizer import (
    Codebook,
    SequenceCodec,
    TokenSequence,
    decode,
    extract_features,
    quantize,
)

JOBS_ENV_VAR = "PLANMETRICS_JOBS"

UNDERSTANDING_COLUMNS = ("success", "rmr", "loc_acc", "area_diff", "adj_acc", "rel_acc")
GENERATION_COLUMNS = ("micro_iou", "macro_iou", "ssim", "psnr", "fid",
                      "ged", "node_f1", "edge_overlap")
EDITING_COLUMNS = ("delta_iou", "delta_mse", "micro_iou", "macro_iou",
                   "ged", "node_f1", "edge_overlap")


@dataclass
class SamplePair:
    id: str
    gt_path: Path
    pred_path: Optional[Path] = None
    before_path: Optional[Path] = None


@dataclass
class RunReport:
    task: str
    per_sample: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    config_snapshot: dict = field(default_factory=dict)


def default_jobs() -> int:
    env = os.environ.get(JOBS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def load_image(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from None


def save_image(arr: np.ndarray, path: Path) -> None:
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="RGB").save(path)


def load_plan(path: Path) -> FloorPlan:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from None
    return parse_canonical_json(text)


def ingest_dataset(root_dir: Path, task: str) -> list:
    """Pairs gt/<stem> with pred/<stem> (and before/<stem> for editing);
    missing predictions stay in the list and score as failures."""
    root = Path(root_dir)
    gt_dir = root / "gt"
    pred_dir = root / "pred"
    before_dir = root / "before"
    gt_files = sorted(gt_dir.glob("*")) if gt_dir.is_dir() else []
    gt_files = [p for p in gt_files if p.is_file()]
    if not gt_files:
        raise EmptyDataset(f"no ground-truth files under {gt_dir}")
    pairs = []
    for gt_path in gt_files:
        stem = gt_path.stem
        pred_path = None
        if pred_dir.is_dir():
            candidates = sorted(pred_dir.glob(stem + ".*"))
            pred_path = candidates[0] if candidates else None
        before_path = None
        if task == "editing" and before_dir.is_dir():
            candidates = sorted(before_dir.glob(stem + ".*"))
            before_path = candidates[0] if candidates else None
        pairs.append(SamplePair(id=stem, gt_path=gt_path,
                                pred_path=pred_path, before_path=before_path))
    return pairs


# --- per-sample scoring (shared by the CLI and the bindings package) ---


def score_understanding(gt_plan: FloorPlan, pred_text: Optional[str]) -> dict:
    pred = None
    if pred_text is not None:
        try:
            pred = parse_canonical_json(pred_text)
        except PlanMetricsError:
            pred = None
    s = M.understanding_score(pred, gt_plan)
    return {"success": s.success, "rmr": s.rmr, "loc_acc": s.loc_acc,
            "area_diff": s.area_diff_m2, "adj_acc": s.adj_acc, "rel_acc": s.rel_acc}


def _graph_of_raster(labels: np.ndarray, wall_px: int):
    masks = extract_room_masks(labels)
    return extract_adjacency(masks, wall_px=wall_px)


def score_generation(gt_raster: np.ndarray, pred_raster: np.ndarray,
                     wall_px: int = 3) -> dict:
    """Pixel and graph metrics for a post-processed prediction raster
    against a ground-truth raster (both 256x256 RGB)."""
    gt_labels = classify_pixels(gt_raster)
    pred_labels = classify_pixels(pred_raster)
    record = {
        "micro_iou": M.micro_iou(pred_labels, gt_labels),
        "macro_iou": M.macro_iou(pred_labels, gt_labels),
        "ssim": M.ssim(pred_raster, gt_raster),
        "psnr": M.psnr(pred_raster, gt_raster),
    }
    g_gt = _graph_of_raster(gt_labels, wall_px)
    g_pred = _graph_of_raster(pred_labels, wall_px)
    record["ged"] = graph_edit_distance(g_pred, g_gt)
    record["node_f1"] = node_f1(g_pred, g_gt)
    record["edge_overlap"] = edge_overlap(g_pred, g_gt)
    return record


def score_editing(before_raster: np.ndarray, pred_raster: np.ndarray,
                  gt_raster: np.ndarray, wall_px: int = 3) -> dict:
    before_labels = classify_pixels(resize_nearest(before_raster))
    pred_labels = classify_pixels(pred_raster)
    gt_labels = classify_pixels(gt_raster)
    edit = M.editing_score(before_labels, pred_labels, gt_labels)
    record = {"delta_iou": edit.delta_iou, "delta_mse": edit.delta_mse}
    gen = score_generation(gt_raster, pred_raster, wall_px=wall_px)
    for key in ("micro_iou", "macro_iou", "ged", "node_f1", "edge_overlap"):
        record[key] = gen[key]
    return record


def outline_from_labels(labels: np.ndarray) -> np.ndarray:
    """Building footprint of a label map: everything non-white, holes filled."""
    from scipy.ndimage import binary_fill_holes

    return binary_fill_holes(labels != WHITE_ID)


def tokenize_image(raster: np.ndarray, book_o: Codebook, book_r: Codebook,
                   n: int = 8) -> str:
    """Rendered plan raster to the text-form token sequence."""
    labels = classify_pixels(np.asarray(raster))
    outline = outline_from_labels(labels)
    codec = SequenceCodec(k_outline=book_o.K, k_room=book_r.K, n=n)
    outline_ids = quantize(extract_features(outline, n=n), book_o)
    rooms = []
    for class_id, mask in extract_room_masks(labels):
        category = next(c for c in RoomCategory if c.color_class.value == class_id)
        feats = extract_features(mask, context=outline, n=n)
        rooms.append((category, list(quantize(feats, book_r).reshape(-1))))
    seq = TokenSequence(outline_tokens=list(outline_ids.reshape(-1)), rooms=rooms)
    return codec.to_text(seq)


def detokenize_text(text: str, book_o: Codebook, book_r: Codebook,
                    n: int = 8) -> np.ndarray:
    """Text-form token sequence back to a rendered 256x256 raster."""
    codec = SequenceCodec(k_outline=book_o.K, k_room=book_r.K, n=n)
    seq = codec.from_text(text.strip())
    outline = decode(np.array(seq.outline_tokens), book_o, n=n)
    plan = FloorPlan(outline=outline)
    for j, (category, ids) in enumerate(seq.rooms):
        mask = decode(np.array(ids), book_r, n=n)
        if mask.any():
            plan.rooms.append(room_from_mask(j, category, mask))
    return render(plan, jitter_seed=0)


_WORST = {
    "understanding": {"success": 0, "rmr": 0.0, "loc_acc": 0.0, "area_diff": float("nan"),
                      "adj_acc": 0.0, "rel_acc": 0.0},
    "generation": {c: 0.0 for c in GENERATION_COLUMNS},
    "editing": {c: 0.0 for c in EDITING_COLUMNS},
}


def _score_sample(task: str, pair: SamplePair, cfg: PipelineConfig,
                  wall_px: int) -> dict:
    record = {"id": pair.id}
    try:
        if task == "understanding":
            gt_plan = load_plan(pair.gt_path)
            pred_text = None
            if pair.pred_path is not None:
                pred_text = Path(pair.pred_path).read_text(encoding="utf-8")
            record.update(score_understanding(gt_plan, pred_text))
            return record
        gt_raster = resize_nearest(load_image(pair.gt_path))
        if pair.pred_path is None:
            record.update(_WORST[task])
            record["error"] = "missing prediction"
            return record
        pred_raster = run_pipeline(load_image(pair.pred_path), cfg)
        if task == "generation":
            record.update(score_generation(gt_raster, pred_raster, wall_px=wall_px))
        else:
            before_raster = load_image(pair.before_path)
            record.update(score_editing(before_raster, pred_raster, gt_raster,
                                        wall_px=wall_px))
    except PlanMetricsError as exc:
        record.update(_WORST[task])
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


def evaluate(task: str, root_dir: Path, cfg: PipelineConfig = PipelineConfig(),
             wall_px: int = 3, jobs: Optional[int] = None,
             features_real: Optional[np.ndarray] = None,
             features_gen: Optional[np.ndarray] = None) -> RunReport:
    pairs = ingest_dataset(root_dir, task)
    jobs = jobs or default_jobs()
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        records = list(pool.map(
            lambda p: _score_sample(task, p, cfg, wall_px), pairs))
    records.sort(key=lambda r: r["id"])

    report = RunReport(task=task, per_sample=records,
                       config_snapshot={
                           "correction_enabled": cfg.correction_enabled,
                           "open_close_radius": cfg.open_close_radius,
                           "wall_thickness": cfg.wall_thickness,
                           "wall_px": wall_px,
                           "jobs": jobs,
                       })
    columns = {"understanding": UNDERSTANDING_COLUMNS,
               "generation": GENERATION_COLUMNS,
               "editing": EDITING_COLUMNS}[task]
    report.aggregates = aggregate(records, columns)
    if task == "generation" and features_real is not None and features_gen is not None:
        report.aggregates["fid"] = M.frechet_distance(
            M.FeatureSet.from_rows(features_real),
            M.FeatureSet.from_rows(features_gen))
    return report


def aggregate(records: list, columns: tuple) -> dict:
    """Plain means per metric; infinite PSNR rows are excluded from the
    PSNR mean (count reported) with a 60 dB-capped mean alongside."""
    out = {"samples": len(records)}
    for col in columns:
        values = [r[col] for r in records if col in r]
        if not values:
            continue
        if col == "psnr":
            finite = [v for v in values if math.isfinite(v)]
            capped = [min(v, PSNR_CAP_DB) for v in values]
            out["psnr"] = float(np.mean(finite)) if finite else float("inf")
            out["psnr_inf_excluded"] = len(values) - len(finite)
            out["psnr_capped60"] = float(np.mean(capped))
        else:
            finite = [v for v in values if isinstance(v, (int, float)) and math.isfinite(v)]
            out[col] = float(np.mean(finite)) if finite else float("nan")
    return out


def _format_value(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.6f}"
    return str(value)


def write_report(report: RunReport, out_dir: Path) -> None:
    """JSONL of per-sample scores plus an aggregate CSV, byte-deterministic
    for identical inputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jsonl_path = out_dir / f"{report.task}_samples.jsonl"
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        for record in report.per_sample:
            fh.write(json.dumps(_json_safe(record), sort_keys=True) + "\n")
    csv_path = out_dir / f"{report.task}_aggregate.csv"
    columns = list(report.aggregates.keys())
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerow([_format_value(report.aggregates[c]) for c in columns])


def _json_safe(record: dict) -> dict:
    safe = {}
    for key, value in record.items():
        if isinstance(value, float) and math.isinf(value):
            safe[key] = "inf"
        elif isinstance(value, float) and math.isnan(value):
            safe[key] = "nan"
        elif isinstance(value, np.floating):
            safe[key] = float(value)
        elif isinstance(value, np.integer):
            safe[key] = int(value)
        else:
            safe[key] = value
    return safe


def read_feature_csv(path: Path) -> np.ndarray:
    """Feature matrix CSV with an f0,f1,... header, one row per image."""
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or not header[0].startswith("f"):
            raise UnreadableFile(f"{path}: expected an f0,f1,... header")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise EmptyDataset(f"{path}: no feature rows")
    return np.array(rows, dtype=np.float64)


def coupling(report_a: list, report_b: list, metric_a: str, metric_b: str):
    """Per-sample Pearson r between two metrics; returns (r, [(id, x, y)])."""
    by_id_a = {r["id"]: r for r in report_a}
    by_id_b = {r["id"]: r for r in report_b}
    shared = sorted(set(by_id_a) & set(by_id_b))
    points = [(sid, float(by_id_a[sid][metric_a]), float(by_id_b[sid][metric_b]))
              for sid in shared
              if metric_a in by_id_a[sid] and metric_b in by_id_b[sid]]
    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    return M.pearson_r(xs, ys), points
