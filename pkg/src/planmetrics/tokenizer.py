"""Room-instance tokenization: pooled patch features on a fixed grid,
nearest-codebook quantization, k-means codebook training, decoding, and
the interleaved token-sequence codec with its text form."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .core import RASTER_SIDE, RoomCategory
from .errors import (
    BadGridSize,
    BadToken,
    DimensionMismatch,
    LengthMismatch,
    MissingMarker,
    TooFewSamples,
    TruncatedSequence,
    UnknownLabel,
    UnparsableToken,
)

DEFAULT_GRID_N = 8
DEFAULT_K = 256
POOLED_SIDE = 8  # every grid cell pools its patch down to 8x8 occupancy
CELL_DIM = POOLED_SIDE * POOLED_SIDE

KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-6

CATEGORIES = tuple(RoomCategory)
_LABEL_INDEX = {cat: i for i, cat in enumerate(CATEGORIES)}


@dataclass
class Codebook:
    kind: str  # "outline" or "room"
    codes: np.ndarray  # (K, D) float64

    @property
    def K(self) -> int:
        return self.codes.shape[0]

    @property
    def D(self) -> int:
        return self.codes.shape[1]

    def to_json(self) -> str:
        rows = [[float(f"{v:.9g}") for v in row] for row in self.codes]
        return json.dumps({"kind": self.kind, "K": self.K, "D": self.D,
                           "codes": [v for row in rows for v in row]})

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        data = json.loads(text)
        codes = np.array(data["codes"], dtype=np.float64).reshape(data["K"], data["D"])
        return cls(kind=data["kind"], codes=codes)


@dataclass
class TokenSequence:
    outline_tokens: list
    rooms: list = field(default_factory=list)  # [(RoomCategory, [ids]), ...]


def _check_grid(n: int) -> int:
    if n < 1 or RASTER_SIDE % n != 0:
        raise BadGridSize(f"grid side {n} must divide {RASTER_SIDE}")
    patch = RASTER_SIDE // n
    if patch % POOLED_SIDE != 0:
        raise BadGridSize(f"patch side {patch} not divisible by {POOLED_SIDE}")
    return patch


def _pool_patches(mask: np.ndarray, n: int) -> np.ndarray:
    """(n, n, 64) per-cell occupancy features: each (256/n)^2 patch average-
    pooled down to 8x8 and flattened, values in [0, 1]."""
    patch = _check_grid(n)
    s = patch // POOLED_SIDE
    m = np.asarray(mask, dtype=np.float64)
    if m.shape != (RASTER_SIDE, RASTER_SIDE):
        raise BadGridSize(f"mask shape {m.shape} is not {RASTER_SIDE}x{RASTER_SIDE}")
    cells = m.reshape(n, patch, n, patch).transpose(0, 2, 1, 3)
    pooled = cells.reshape(n, n, POOLED_SIDE, s, POOLED_SIDE, s).mean(axis=(3, 5))
    return pooled.reshape(n, n, CELL_DIM)


def extract_features(mask: np.ndarray, context: np.ndarray | None = None,
                     n: int = DEFAULT_GRID_N) -> np.ndarray:
    """Feature grid (n, n, D): D=64 for the outline branch, D=128 when an
    outline context mask is concatenated (room branch)."""
    feats = _pool_patches(mask, n)
    if context is not None:
        feats = np.concatenate([feats, _pool_patches(context, n)], axis=-1)
    return feats


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise squared L2 distances, (P, C), without the (P, C, D) blowup."""
    d2 = ((points**2).sum(axis=1)[:, None]
          - 2.0 * points @ centers.T
          + (centers**2).sum(axis=1)[None, :])
    return np.maximum(d2, 0.0)


def quantize(grid: np.ndarray, book: Codebook) -> np.ndarray:
    """Nearest-code index per cell (L2, ties -> lowest index)."""
    n1, n2, d = grid.shape
    if d != book.D:
        raise DimensionMismatch(f"feature dim {d} vs codebook dim {book.D}")
    flat = grid.reshape(-1, d)
    d2 = ((flat[:, None, :] - book.codes[None, :, :]) ** 2).sum(axis=-1)
    return d2.argmin(axis=1).reshape(n1, n2)


def _kmeans_pp_init(samples: np.ndarray, k: int, rng: np.random.RandomState) -> np.ndarray:
    centers = np.empty((k, samples.shape[1]))
    centers[0] = samples[rng.randint(len(samples))]
    d2 = ((samples - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i] = samples[rng.randint(len(samples))]
        else:
            centers[i] = samples[rng.choice(len(samples), p=d2 / total)]
        d2 = np.minimum(d2, ((samples - centers[i]) ** 2).sum(axis=1))
    return centers


def train_codebook(samples: np.ndarray, k: int, seed: int, kind: str = "room",
                   objective_trace: list | None = None) -> Codebook:
    """k-means (k-means++ init, empty clusters reseeded to the farthest
    point) over cell feature vectors; centroids become the codebook."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        samples = samples.reshape(-1, samples.shape[-1])
    if len(samples) < k:
        raise TooFewSamples(f"{len(samples)} samples for K={k}")
    if len(np.unique(samples, axis=0)) < k:
        raise TooFewSamples(f"fewer than K={k} distinct samples")

    rng = np.random.RandomState(seed % (2**32))
    centers = _kmeans_pp_init(samples, k, rng)
    for _ in range(KMEANS_MAX_ITER):
        d2 = _sq_dists(samples, centers)
        assign = d2.argmin(axis=1)
        if objective_trace is not None:
            objective_trace.append(float(d2[np.arange(len(samples)), assign].sum()))
        new_centers = centers.copy()
        for c in range(k):
            members = samples[assign == c]
            if len(members):
                new_centers[c] = members.mean(axis=0)
            else:
                far = d2[np.arange(len(samples)), assign].argmax()
                new_centers[c] = samples[far]
        shift = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if shift < KMEANS_TOL:
            break
    return Codebook(kind=kind, codes=centers)


def kmeans_objective(samples: np.ndarray, centers: np.ndarray) -> float:
    samples = np.asarray(samples, dtype=np.float64).reshape(len(samples), -1)
    return float(_sq_dists(samples, centers).min(axis=1).sum())


def decode(tokens: np.ndarray, book: Codebook, n: int = DEFAULT_GRID_N) -> np.ndarray:
    """Token ids back to a binary 256x256 mask: each cell's code prototype
    (first 64 dims) is upsampled nearest-neighbor and thresholded at 0.5."""
    patch = _check_grid(n)
    s = patch // POOLED_SIDE
    ids = np.asarray(tokens, dtype=int).reshape(-1)
    if ids.size != n * n:
        raise BadToken(f"expected {n * n} tokens, got {ids.size}")
    if ids.min() < 0 or ids.max() >= book.K:
        raise BadToken(f"token id out of range for K={book.K}")
    protos = book.codes[ids, :CELL_DIM].reshape(n, n, POOLED_SIDE, POOLED_SIDE)
    up = protos.repeat(s, axis=2).repeat(s, axis=3)
    mask = up.transpose(0, 2, 1, 3).reshape(RASTER_SIDE, RASTER_SIDE)
    return mask >= 0.5


class SequenceCodec:
    """Flat-id-stream and text-form codec for interleaved token sequences.

    Unified id space: begin marker 0, end marker 1, the 14 room labels,
    then outline codes, then room codes.
    """

    BEGIN = 0
    END = 1
    LABEL_BASE = 2

    def __init__(self, k_outline: int = DEFAULT_K, k_room: int = DEFAULT_K,
                 n: int = DEFAULT_GRID_N):
        _check_grid(n)
        self.k_outline = k_outline
        self.k_room = k_room
        self.n = n
        self.cells = n * n
        self.outline_base = self.LABEL_BASE + len(CATEGORIES)
        self.room_base = self.outline_base + k_outline

    def serialize(self, seq: TokenSequence) -> list:
        if len(seq.outline_tokens) != self.cells:
            raise LengthMismatch(
                f"outline has {len(seq.outline_tokens)} tokens, expected {self.cells}")
        stream = [self.BEGIN]
        stream += [self.outline_base + int(t) for t in seq.outline_tokens]
        for label, ids in seq.rooms:
            if len(ids) != self.cells:
                raise LengthMismatch(
                    f"room {label} has {len(ids)} tokens, expected {self.cells}")
            stream.append(self.LABEL_BASE + _LABEL_INDEX[label])
            stream += [self.room_base + int(t) for t in ids]
        stream.append(self.END)
        return stream

    def parse(self, stream: list) -> TokenSequence:
        if len(stream) < 2 or stream[0] != self.BEGIN or stream[-1] != self.END:
            raise MissingMarker("stream must start/end with the plan markers")
        body = stream[1:-1]
        if len(body) < self.cells:
            raise TruncatedSequence("stream shorter than one outline block")
        outline = []
        for t in body[:self.cells]:
            k = t - self.outline_base
            if not (0 <= k < self.k_outline):
                raise BadToken(f"id {t} is not an outline code")
            outline.append(k)
        rooms = []
        rest = body[self.cells:]
        while rest:
            label_id = rest[0] - self.LABEL_BASE
            if not (0 <= label_id < len(CATEGORIES)):
                raise UnknownLabel(f"id {rest[0]} is not a room label")
            if len(rest) < 1 + self.cells:
                raise TruncatedSequence("room block truncated")
            ids = []
            for t in rest[1:1 + self.cells]:
                k = t - self.room_base
                if not (0 <= k < self.k_room):
                    raise BadToken(f"id {t} is not a room code")
                ids.append(k)
            rooms.append((CATEGORIES[label_id], ids))
            rest = rest[1 + self.cells:]
        return TokenSequence(outline_tokens=outline, rooms=rooms)

    # --- text form ---

    _TOKEN_RE = re.compile(r"<\|(/?plan|o_\d+|r_\d+|lbl_[A-Za-z]+)\|>")

    def to_text(self, seq: TokenSequence) -> str:
        parts = ["<|plan|>"]
        parts += [f"<|o_{int(t)}|>" for t in seq.outline_tokens]
        for label, ids in seq.rooms:
            parts.append(f"<|lbl_{label.value}|>")
            parts += [f"<|r_{int(t)}|>" for t in ids]
        parts.append("<|/plan|>")
        return "".join(parts)

    def from_text(self, text: str) -> TokenSequence:
        pos = 0
        stream = []
        for match in self._TOKEN_RE.finditer(text):
            if match.start() != pos:
                raise UnparsableToken(f"stray characters at offset {pos}")
            pos = match.end()
            body = match.group(1)
            if body == "plan":
                stream.append(self.BEGIN)
            elif body == "/plan":
                stream.append(self.END)
            elif body.startswith("o_"):
                stream.append(self.outline_base + int(body[2:]))
            elif body.startswith("r_"):
                stream.append(self.room_base + int(body[2:]))
            else:
                name = body[4:]
                try:
                    cat = RoomCategory(name)
                except ValueError:
                    raise UnknownLabel(f"unknown label token {body!r}")
                stream.append(self.LABEL_BASE + _LABEL_INDEX[cat])
        if pos != len(text):
            raise UnparsableToken(f"stray characters at offset {pos}")
        return self.parse(stream)
