"""Command-line interface.

Exit codes: 0 success, 1 evaluation produced per-sample failures,
2 usage or configuration error.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import harness, synthetic
from .core import parse_canonical_json
from .errors import PlanMetricsError
from .postproc import PipelineConfig, run_pipeline
from .raster import classify_pixels, extract_room_masks, render
from .metrics import psnr as psnr_metric
from .metrics import ssim as ssim_metric
from .tokenizer import Codebook, decode, extract_features, quantize, train_codebook

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}


def _read_config(path: str | None) -> dict:
    """TOML-style key=value file mirroring the CLI flags."""
    if not path:
        return {}
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"bad config line: {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip().strip('"')
    return values


@click.group(context_settings=CONTEXT_SETTINGS)
def main():
    """Floor-plan tokenization, post-processing, and evaluation toolkit."""


def _common_eval(task, gt, pred, before, out, jobs, no_correction, wall_px, config):
    cfg_file = _read_config(config)
    jobs = jobs or (int(cfg_file["jobs"]) if "jobs" in cfg_file else None)
    wall_px = wall_px or int(cfg_file.get("wall_px", 3))
    if "no_correction" in cfg_file and not no_correction:
        no_correction = cfg_file["no_correction"].lower() in ("1", "true", "yes")

    root = Path(gt).parent if (Path(gt).name == "gt") else Path(gt)
    # allow --gt/--pred/--before as sibling directories of a common root
    if pred or before:
        root = _assemble_root(task, gt, pred, before, out)
    cfg = PipelineConfig(correction_enabled=not no_correction)
    try:
        report = harness.evaluate(task, root, cfg=cfg, wall_px=wall_px, jobs=jobs)
    except PlanMetricsError as exc:
        raise click.ClickException(str(exc))
    harness.write_report(report, Path(out))
    for key, value in report.aggregates.items():
        click.echo(f"{key}: {harness._format_value(value)}")
    failed = sum(1 for r in report.per_sample if "error" in r)
    sys.exit(1 if failed else 0)


def _assemble_root(task, gt, pred, before, out) -> Path:
    """Build a symlinked gt/pred(/before) root when the three directories
    are given separately."""
    root = Path(out) / "_dataset"
    root.mkdir(parents=True, exist_ok=True)
    for name, src in (("gt", gt), ("pred", pred), ("before", before)):
        if src is None:
            continue
        link = root / name
        if link.is_symlink() or link.exists():
            if link.is_symlink():
                link.unlink()
        link.symlink_to(Path(src).resolve())
    return root


_EVAL_OPTIONS = [
    click.option("--gt", required=True, help="ground-truth directory"),
    click.option("--pred", default=None, help="prediction directory"),
    click.option("--before", default=None, help="pre-edit directory (editing only)"),
    click.option("--out", required=True, help="report output directory"),
    click.option("--jobs", type=int, default=None,
                 help=f"worker threads (default ${harness.JOBS_ENV_VAR} or CPU count)"),
    click.option("--no-correction", is_flag=True, default=False,
                 help="disable the structural-correction stage"),
    click.option("--wall-px", type=int, default=None, help="adjacency dilation radius"),
    click.option("--config", default=None, help="key=value config file"),
]


def _with_eval_options(fn):
    for option in reversed(_EVAL_OPTIONS):
        fn = option(fn)
    return fn


@main.command("eval-understanding")
@_with_eval_options
def eval_understanding(gt, pred, before, out, jobs, no_correction, wall_px, config):
    """Score predicted plan JSONs against ground-truth plan JSONs."""
    _common_eval("understanding", gt, pred, before, out, jobs, no_correction,
                 wall_px, config)


@main.command("eval-generation")
@_with_eval_options
def eval_generation(gt, pred, before, out, jobs, no_correction, wall_px, config):
    """Score generated layout PNGs against ground-truth PNGs."""
    _common_eval("generation", gt, pred, before, out, jobs, no_correction,
                 wall_px, config)


@main.command("eval-editing")
@_with_eval_options
def eval_editing(gt, pred, before, out, jobs, no_correction, wall_px, config):
    """Score edited layout PNGs against before/after ground truth."""
    _common_eval("editing", gt, pred, before, out, jobs, no_correction,
                 wall_px, config)


@main.command("postprocess")
@click.option("--in", "input_path", required=True, help="input PNG")
@click.option("--out", required=True, help="output PNG")
@click.option("--no-correction", is_flag=True, default=False)
def postprocess(input_path, out, no_correction):
    """Run the full post-processing pipeline on one image."""
    cfg = PipelineConfig(correction_enabled=not no_correction)
    image = harness.load_image(Path(input_path))
    harness.save_image(run_pipeline(image, cfg), Path(out))


def _load_codebook(path: str) -> Codebook:
    try:
        return Codebook.from_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot load codebook {path}: {exc}", err=True)
        sys.exit(2)


@main.command("tokenize")
@click.option("--plan", "plan_paths", multiple=True, required=True,
              help="rendered plan PNG (repeatable)")
@click.option("--outline-codebook", required=True)
@click.option("--room-codebook", required=True)
@click.option("--grid-n", type=int, default=8, show_default=True)
@click.option("--out", required=True, help="token stream file (one sequence per line)")
def tokenize(plan_paths, outline_codebook, room_codebook, grid_n, out):
    """Tokenize rendered plan PNGs into text-form token sequences."""
    book_o = _load_codebook(outline_codebook)
    book_r = _load_codebook(room_codebook)
    lines = []
    try:
        for path in plan_paths:
            image = harness.load_image(Path(path))
            lines.append(harness.tokenize_image(image, book_o, book_r, n=grid_n))
    except PlanMetricsError as exc:
        raise click.ClickException(str(exc))
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")


@main.command("detokenize")
@click.option("--tokens", required=True, help="token stream file")
@click.option("--outline-codebook", required=True)
@click.option("--room-codebook", required=True)
@click.option("--grid-n", type=int, default=8, show_default=True)
@click.option("--out-dir", required=True)
def detokenize(tokens, outline_codebook, room_codebook, grid_n, out_dir):
    """Decode token sequences back to masks and a rendered raster."""
    book_o = _load_codebook(outline_codebook)
    book_r = _load_codebook(room_codebook)
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    try:
        for i, line in enumerate(Path(tokens).read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            raster = harness.detokenize_text(line, book_o, book_r, n=grid_n)
            harness.save_image(raster, out_root / f"plan_{i:04d}.png")
    except PlanMetricsError as exc:
        raise click.ClickException(str(exc))


@main.command("train-codebook")
@click.option("--corpus", required=True, help="directory of rendered plan PNGs")
@click.option("--k", "k_values", multiple=True, type=int, default=(256,),
              show_default=True)
@click.option("--grid-n", "n_values", multiple=True, type=int, default=(8,),
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", required=True)
def train_codebook_cmd(corpus, k_values, n_values, seed, out_dir):
    """Train outline/room codebooks and report reconstruction PSNR/SSIM
    per (grid, K) configuration."""
    paths = sorted(Path(corpus).glob("*.png"))
    if not paths:
        raise click.ClickException(f"no PNGs under {corpus}")
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)

    plans = []
    for path in paths:
        labels = classify_pixels(harness.load_image(path))
        outline = harness.outline_from_labels(labels)
        masks = [m for _, m in extract_room_masks(labels)]
        plans.append((outline, masks))

    rows = []
    for n in n_values:
        feats_o = np.array([extract_features(o, n=n).reshape(-1, 64)
                            for o, _ in plans]).reshape(-1, 64)
        feats_r = np.concatenate([
            extract_features(m, context=o, n=n).reshape(-1, 128)
            for o, ms in plans for m in ms]) if any(ms for _, ms in plans) else None
        for k in k_values:
            try:
                book_o = train_codebook(feats_o, k, seed, kind="outline")
                book_r = train_codebook(feats_r, k, seed + 1, kind="room")
            except PlanMetricsError as exc:
                raise click.ClickException(str(exc))
            (out_root / f"outline_n{n}_k{k}.json").write_text(book_o.to_json())
            (out_root / f"room_n{n}_k{k}.json").write_text(book_r.to_json())
            psnrs, ssims = [], []
            for outline, masks in plans:
                for mask, book, ctx in ([(outline, book_o, None)]
                                        + [(m, book_r, outline) for m in masks]):
                    ids = quantize(extract_features(mask, context=ctx, n=n), book)
                    recon = decode(ids.reshape(-1), book, n=n)
                    a = mask.astype(np.uint8) * 255
                    b = recon.astype(np.uint8) * 255
                    p = psnr_metric(a[..., None].repeat(3, -1), b[..., None].repeat(3, -1))
                    psnrs.append(min(p, 99.0))
                    ssims.append(ssim_metric(a[..., None].repeat(3, -1),
                                             b[..., None].repeat(3, -1)))
            rows.append((f"{n}x{n}", k, float(np.mean(psnrs)), float(np.mean(ssims))))

    with open(out_root / "reconstruction.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tokens", "codebook", "psnr", "ssim"])
        for row in rows:
            writer.writerow([row[0], row[1], f"{row[2]:.3f}", f"{row[3]:.4f}"])
    for row in rows:
        click.echo(f"{row[0]} K={row[1]}: PSNR {row[2]:.3f} dB, SSIM {row[3]:.4f}")


@main.command("coupling")
@click.option("--report-a", required=True, help="per-sample JSONL file")
@click.option("--report-b", required=True, help="per-sample JSONL file")
@click.option("--metric-a", required=True)
@click.option("--metric-b", required=True)
@click.option("--out", required=True, help="scatter CSV (id, x, y)")
def coupling_cmd(report_a, report_b, metric_a, metric_b, out):
    """Pearson r between two per-sample metrics across shared sample ids."""
    def load(path):
        return [json.loads(line) for line in
                Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]

    try:
        r, points = harness.coupling(load(report_a), load(report_b),
                                     metric_a, metric_b)
    except PlanMetricsError as exc:
        raise click.ClickException(str(exc))
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", metric_a, metric_b])
        for sid, x, y in points:
            writer.writerow([sid, f"{x:.6f}", f"{y:.6f}"])
    click.echo(f"pearson_r: {r:.6f}")


@main.command("render")
@click.option("--plan", "plan_path", default=None,
              help="plan JSON with rect-extended room entries")
@click.option("--synthetic", "synthetic_seed", type=int, default=None,
              help="render a synthetic plan from this seed instead")
@click.option("--rooms", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="color jitter seed (0 = no jitter)")
@click.option("--out", required=True)
def render_cmd(plan_path, synthetic_seed, rooms, seed, out):
    """Render a plan to the 256x256 color raster convention."""
    if (plan_path is None) == (synthetic_seed is None):
        raise click.UsageError("give exactly one of --plan or --synthetic")
    if synthetic_seed is not None:
        plan = synthetic.make_plan(synthetic_seed, n_rooms=rooms)
    else:
        plan = _plan_with_rect_masks(Path(plan_path))
    harness.save_image(render(plan, jitter_seed=seed), Path(out))


def _plan_with_rect_masks(path: Path):
    """Canonical JSON extended with "rect": [x0, y0, x1, y1] per room and an
    optional top-level "outline_rect"; builds masks from the rectangles."""
    from .core import RASTER_SIDE

    text = path.read_text(encoding="utf-8")
    plan = parse_canonical_json(text)
    data = json.loads(text)
    rect = data.get("outline_rect", [0, 0, RASTER_SIDE, RASTER_SIDE])
    plan.outline = synthetic._rect_mask(*rect)
    for room, entry in zip(plan.rooms, data["rooms"]):
        if "rect" not in entry:
            raise click.ClickException(f"room {room.idx} has no rect")
        room.mask = synthetic._rect_mask(*entry["rect"])
    return plan


if __name__ == "__main__":
    main()
