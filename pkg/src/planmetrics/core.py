"""Canonical floor-plan data model, world/raster geometry, and the JSON codec.

All geometry lives on a fixed 256x256 pixel raster covering an 18m x 18m
world, so one pixel is 18/256 m on a side.  Masks are plain boolean numpy
arrays of shape (256, 256), row-major, with mask[y, x] indexing.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import EmptyMask, MalformedJson, SchemaViolation, UnknownCategory

RASTER_SIDE = 256
WORLD_SIDE_M = 18.0
METERS_PER_PIXEL = WORLD_SIDE_M / RASTER_SIDE


class ColorClass(Enum):
    """The ten legend colors a pixel can carry (ids are legend table order)."""

    LIGHT_KHAKI = 0
    ORANGE = 1
    LIGHT_SALMON = 2
    LIGHT_CYAN = 3
    OLIVE_GREEN = 4
    VIOLET = 5
    PLUM = 6
    BRIGHT_YELLOW = 7
    BLACK = 8
    WHITE = 9


class RoomCategory(Enum):
    LivingRoom = "LivingRoom"
    MasterRoom = "MasterRoom"
    Kitchen = "Kitchen"
    Bathroom = "Bathroom"
    Balcony = "Balcony"
    DiningRoom = "DiningRoom"
    Storage = "Storage"
    CommonRoom = "CommonRoom"
    SecondRoom = "SecondRoom"
    StudyRoom = "StudyRoom"
    ChildRoom = "ChildRoom"
    GuestRoom = "GuestRoom"
    Entrance = "Entrance"
    WallIn = "WallIn"

    @property
    def color_class(self) -> ColorClass:
        return CATEGORY_COLOR_CLASS[self]


CATEGORY_COLOR_CLASS = {
    RoomCategory.LivingRoom: ColorClass.LIGHT_KHAKI,
    RoomCategory.Entrance: ColorClass.LIGHT_KHAKI,
    RoomCategory.WallIn: ColorClass.LIGHT_KHAKI,
    RoomCategory.MasterRoom: ColorClass.ORANGE,
    RoomCategory.Kitchen: ColorClass.LIGHT_SALMON,
    RoomCategory.Bathroom: ColorClass.LIGHT_CYAN,
    RoomCategory.Balcony: ColorClass.OLIVE_GREEN,
    RoomCategory.DiningRoom: ColorClass.VIOLET,
    RoomCategory.Storage: ColorClass.PLUM,
    RoomCategory.CommonRoom: ColorClass.BRIGHT_YELLOW,
    RoomCategory.SecondRoom: ColorClass.BRIGHT_YELLOW,
    RoomCategory.StudyRoom: ColorClass.BRIGHT_YELLOW,
    RoomCategory.ChildRoom: ColorClass.BRIGHT_YELLOW,
    RoomCategory.GuestRoom: ColorClass.BRIGHT_YELLOW,
}

# Normalization table: category names are matched case-insensitively with
# hyphens/underscores/spaces stripped ("Second-room" == "SecondRoom").
_CATEGORY_LOOKUP = {c.value.lower(): c for c in RoomCategory}
_CATEGORY_LOOKUP["wall-in"] = RoomCategory.WallIn


def normalize_category(name: str) -> RoomCategory:
    key = name.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
    cat = _CATEGORY_LOOKUP.get(key)
    if cat is None:
        raise UnknownCategory(f"unknown room type {name!r}")
    return cat


class Position(Enum):
    NORTH = "north"
    SOUTH = "south"
    EAST = "east"
    WEST = "west"
    NORTHEAST = "northeast"
    NORTHWEST = "northwest"
    SOUTHEAST = "southeast"
    SOUTHWEST = "southwest"
    CENTER = "center"


RELATION_NAMES = (
    "left-above",
    "left-below",
    "left-of",
    "above",
    "inside",
    "surrounding",
    "below",
    "right-of",
    "right-above",
    "right-below",
)


@dataclass(frozen=True)
class Edge:
    room1: int
    room2: int
    relation: str
    text: str = ""


@dataclass
class Room:
    idx: int
    category: RoomCategory
    area_m2: float
    width_m: float = 0.0
    height_m: float = 0.0
    position: Position = Position.CENTER
    mask: Optional[np.ndarray] = None
    centroid_px: Optional[tuple] = None


@dataclass
class FloorPlan:
    rooms: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    description: str = ""
    outline: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str


def derive_geometry(mask: np.ndarray):
    """Area (m^2), bounding-box extents (m), and pixel centroid of a mask.

    The centroid is (x, y) = (mean column, mean row) of the set pixels.
    """
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyMask("cannot derive geometry of an empty mask")
    area_m2 = ys.size * METERS_PER_PIXEL**2
    width_m = (xs.max() - xs.min() + 1) * METERS_PER_PIXEL
    height_m = (ys.max() - ys.min() + 1) * METERS_PER_PIXEL
    centroid = (float(xs.mean()), float(ys.mean()))
    return area_m2, width_m, height_m, centroid


def room_from_mask(idx: int, category: RoomCategory, mask: np.ndarray) -> Room:
    area, width, height, centroid = derive_geometry(mask)
    from .graph import classify_position  # local import: graph depends on core

    return Room(
        idx=idx,
        category=category,
        area_m2=area,
        width_m=width,
        height_m=height,
        position=classify_position(mask),
        mask=np.asarray(mask, dtype=bool),
        centroid_px=centroid,
    )


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaViolation(message)


def parse_canonical_json(text: str) -> FloorPlan:
    """Parse the canonical plan JSON (rooms / edges / description).

    Accepts strict JSON; single-quoted Python-literal style (as it appears
    in some model outputs) is tolerated as a fallback.  Masks are not part
    of the JSON format, so parsed rooms carry no masks.
    """
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, TypeError):
        try:
            data = ast.literal_eval(text)
        except (ValueError, SyntaxError) as exc:
            raise MalformedJson(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaViolation("top-level value must be an object")
    for key in ("rooms", "edges", "description"):
        _require(key in data, f"missing top-level key {key!r}")
    _require(isinstance(data["rooms"], list), "rooms must be a list")
    _require(isinstance(data["edges"], list), "edges must be a list")

    rooms = []
    seen_idx = set()
    for entry in data["rooms"]:
        _require(isinstance(entry, dict), "room entries must be objects")
        _require("idx" in entry and "type" in entry and "area" in entry,
                 "room entries need idx, type, and area")
        idx = entry["idx"]
        _require(isinstance(idx, int), f"room idx {idx!r} is not an integer")
        _require(idx not in seen_idx, f"duplicate room idx {idx}")
        seen_idx.add(idx)
        category = normalize_category(str(entry["type"]))
        try:
            area = float(entry["area"])
        except (TypeError, ValueError):
            raise SchemaViolation(f"room {idx}: area is not a number")
        pos_name = str(entry.get("position", "center")).strip().lower()
        try:
            position = Position(pos_name)
        except ValueError:
            raise SchemaViolation(f"room {idx}: unknown position {pos_name!r}")
        rooms.append(Room(
            idx=idx,
            category=category,
            area_m2=area,
            width_m=float(entry.get("width", 0.0)),
            height_m=float(entry.get("height", 0.0)),
            position=position,
        ))

    edges = []
    for entry in data["edges"]:
        _require(isinstance(entry, dict), "edge entries must be objects")
        for key in ("room1", "room2", "relation"):
            _require(key in entry, f"edge missing key {key!r}")
        r1, r2 = entry["room1"], entry["room2"]
        _require(r1 in seen_idx, f"edge references unknown room idx {r1}")
        _require(r2 in seen_idx, f"edge references unknown room idx {r2}")
        relation = str(entry["relation"])
        _require(relation in RELATION_NAMES, f"unknown relation {relation!r}")
        edges.append(Edge(r1, r2, relation, str(entry.get("text", ""))))

    return FloorPlan(rooms=rooms, edges=edges,
                     description=str(data.get("description", "")))


def emit_canonical_json(plan: FloorPlan) -> str:
    """Serialize a plan back to canonical JSON (numbers kept to <= 3 decimals)."""
    data = {
        "rooms": [
            {
                "idx": r.idx,
                "type": r.category.value,
                "area": round(float(r.area_m2), 3),
                "width": round(float(r.width_m), 3),
                "height": round(float(r.height_m), 3),
                "position": r.position.value,
            }
            for r in plan.rooms
        ],
        "edges": [
            {"room1": e.room1, "room2": e.room2,
             "relation": e.relation, "text": e.text}
            for e in plan.edges
        ],
        "description": plan.description,
    }
    return json.dumps(data, ensure_ascii=False)


# Tolerances for validate(); see module docstring for the raster geometry.
AREA_TOLERANCE_M2 = 0.5
OUTLINE_CONTAINMENT_MIN = 0.99
OVERLAP_MAX_FRACTION = 0.01


def validate(plan: FloorPlan) -> list:
    """Check all FloorPlan invariants; returns violations instead of raising."""
    violations = []
    seen = set()
    for room in plan.rooms:
        if room.idx in seen:
            violations.append(Violation("DuplicateIdx", f"room idx {room.idx} repeated"))
        seen.add(room.idx)
        if room.area_m2 < 0:
            violations.append(Violation("NegativeArea", f"room {room.idx} area < 0"))
        if room.mask is not None:
            pop = int(np.count_nonzero(room.mask))
            if pop == 0:
                violations.append(Violation("EmptyRoomMask", f"room {room.idx} mask empty"))
                continue
            derived = pop * METERS_PER_PIXEL**2
            if abs(room.area_m2 - derived) > AREA_TOLERANCE_M2:
                violations.append(Violation(
                    "AreaMismatch",
                    f"room {room.idx}: stored {room.area_m2:.3f} m^2 vs mask {derived:.3f} m^2"))
            if plan.outline is not None:
                inside = np.count_nonzero(room.mask & plan.outline)
                if inside < OUTLINE_CONTAINMENT_MIN * pop:
                    violations.append(Violation(
                        "RoomOutsideOutline",
                        f"room {room.idx}: only {inside}/{pop} pixels inside outline"))

    with_masks = [r for r in plan.rooms if r.mask is not None]
    for i, a in enumerate(with_masks):
        for b in with_masks[i + 1:]:
            inter = int(np.count_nonzero(a.mask & b.mask))
            smaller = min(int(np.count_nonzero(a.mask)), int(np.count_nonzero(b.mask)))
            if smaller and inter > OVERLAP_MAX_FRACTION * smaller:
                violations.append(Violation(
                    "RoomOverlap", f"rooms {a.idx} and {b.idx} overlap by {inter} px"))

    for edge in plan.edges:
        if edge.room1 not in seen or edge.room2 not in seen:
            violations.append(Violation(
                "DanglingEdge", f"edge ({edge.room1},{edge.room2}) references missing room"))
        if edge.relation not in RELATION_NAMES:
            violations.append(Violation(
                "UnknownRelation", f"edge ({edge.room1},{edge.room2}) relation {edge.relation!r}"))
    return violations
