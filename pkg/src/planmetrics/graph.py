"""Room-adjacency graphs: extraction from masks, the 10-way spatial relation
classifier, coarse 3x3 position binning, and the structural metrics
(exact GED via branch-and-bound, node F1, edge overlap)."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import RASTER_SIDE, Position, RoomCategory
from .errors import EmptyMask, GraphTooLarge

RELATION_INVERSE = {
    "left-of": "right-of",
    "right-of": "left-of",
    "above": "below",
    "below": "above",
    "left-above": "right-below",
    "right-below": "left-above",
    "left-below": "right-above",
    "right-above": "left-below",
    "inside": "surrounding",
    "surrounding": "inside",
}

CONTAINMENT_MIN = 0.95
ADJACENCY_MIN_OVERLAP_PX = 8
DEFAULT_WALL_PX = 3
GED_MAX_NODES = 12

_CONN8 = ndimage.generate_binary_structure(2, 2)


@dataclass
class AdjacencyGraph:
    """Nodes are (idx, RoomCategory); edges (i, j, relation) with i < j and
    the relation expressed from i's perspective."""

    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    def add_edge(self, i: int, j: int, relation: str) -> None:
        if i == j:
            raise ValueError("self-loops are not allowed")
        if i > j:
            i, j = j, i
            relation = RELATION_INVERSE[relation]
        if any(e[0] == i and e[1] == j for e in self.edges):
            return
        self.edges.append((i, j, relation))


def _centroid(mask: np.ndarray):
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyMask("mask has no pixels")
    return float(xs.mean()), float(ys.mean())


def _bbox_region(mask: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    box = np.zeros_like(mask, dtype=bool)
    box[ys.min():ys.max() + 1, xs.min():xs.max() + 1] = True
    return box


# Sector index (45 deg steps around atan2(dy, dx), screen coords with y down)
# mapped to "A <relation> B" where (dx, dy) points from A's centroid to B's.
_SECTOR_RELATION = (
    "left-of",      # east
    "left-above",   # southeast (B below-right of A)
    "above",        # south
    "right-above",  # southwest
    "right-of",     # west
    "right-below",  # northwest
    "below",        # north
    "left-below",   # northeast
)


def classify_relation(mask_a: np.ndarray, mask_b: np.ndarray) -> str:
    """Spatial relation of A with respect to B (A is <relation> B)."""
    mask_a = np.asarray(mask_a, dtype=bool)
    mask_b = np.asarray(mask_b, dtype=bool)
    pop_a = int(np.count_nonzero(mask_a))
    pop_b = int(np.count_nonzero(mask_b))
    if pop_a == 0 or pop_b == 0:
        raise EmptyMask("relation needs two nonempty masks")

    a_in_b = np.count_nonzero(mask_a & _bbox_region(mask_b)) / pop_a
    b_in_a = np.count_nonzero(mask_b & _bbox_region(mask_a)) / pop_b
    if a_in_b >= CONTAINMENT_MIN and b_in_a >= CONTAINMENT_MIN:
        # Mutual bbox containment: the smaller room counts as contained.
        return "inside" if pop_a <= pop_b else "surrounding"
    if a_in_b >= CONTAINMENT_MIN:
        return "inside"
    if b_in_a >= CONTAINMENT_MIN:
        return "surrounding"

    ax, ay = _centroid(mask_a)
    bx, by = _centroid(mask_b)
    dx, dy = bx - ax, by - ay
    if dx == 0 and dy == 0:
        return "inside" if pop_a <= pop_b else "surrounding"
    theta = math.degrees(math.atan2(dy, dx)) % 360.0
    sector = int(math.floor((theta + 22.5) / 45.0)) % 8
    return _SECTOR_RELATION[sector]


_POSITION_GRID = (
    (Position.NORTHWEST, Position.NORTH, Position.NORTHEAST),
    (Position.WEST, Position.CENTER, Position.EAST),
    (Position.SOUTHWEST, Position.SOUTH, Position.SOUTHEAST),
)


def classify_position(mask: np.ndarray) -> Position:
    """Bin a mask's centroid into the 3x3 compass grid."""
    x, y = _centroid(np.asarray(mask, dtype=bool))
    col = min(int(x // (RASTER_SIDE / 3)), 2)
    row = min(int(y // (RASTER_SIDE / 3)), 2)
    return _POSITION_GRID[row][col]


def extract_adjacency(masks: list, wall_px: int = DEFAULT_WALL_PX) -> AdjacencyGraph:
    """Graph over (category, mask) rooms; rooms are adjacent when their
    wall_px dilations overlap by at least ADJACENCY_MIN_OVERLAP_PX pixels."""
    graph = AdjacencyGraph(nodes=[(i, cat) for i, (cat, _) in enumerate(masks)])
    dilated = [
        ndimage.binary_dilation(np.asarray(m, dtype=bool), structure=_CONN8,
                                iterations=wall_px)
        for _, m in masks
    ]
    for i, j in itertools.combinations(range(len(masks)), 2):
        overlap = int(np.count_nonzero(dilated[i] & dilated[j]))
        if overlap >= ADJACENCY_MIN_OVERLAP_PX:
            graph.add_edge(i, j, classify_relation(masks[i][1], masks[j][1]))
    return graph


def _node_label(category) -> int:
    if isinstance(category, RoomCategory):
        return category.color_class.value
    return int(category)  # already a color-class id


def _edge_lookup(graph: AdjacencyGraph) -> dict:
    return {(i, j): rel for i, j, rel in graph.edges}


def _histogram_lower_bound(labels1: list, labels2: list) -> int:
    c1, c2 = Counter(labels1), Counter(labels2)
    common = sum(min(c1[k], c2[k]) for k in c1)
    return max(len(labels1), len(labels2)) - common


def graph_edit_distance(g1: AdjacencyGraph, g2: AdjacencyGraph) -> float:
    """Exact minimum edit cost: node ins/del 1, node sub 1 unless the color
    classes match; edge ins/del 1, edge sub 1 unless the relations match.
    Branch-and-bound over injective node mappings."""
    n1, n2 = len(g1.nodes), len(g2.nodes)
    if n1 > GED_MAX_NODES or n2 > GED_MAX_NODES:
        raise GraphTooLarge(f"exact GED limited to {GED_MAX_NODES} nodes")

    labels1 = [_node_label(cat) for _, cat in g1.nodes]
    labels2 = [_node_label(cat) for _, cat in g2.nodes]
    edges1 = _edge_lookup(g1)
    edges2 = _edge_lookup(g2)

    best = [float(n1 + n2 + len(edges1) + len(edges2))]  # delete everything

    def edge_rel(edges: dict, a: int, b: int):
        if a < b:
            return edges.get((a, b))
        rel = edges.get((b, a))
        return RELATION_INVERSE[rel] if rel is not None else None

    def recurse(pos: int, mapping: list, used: set, cost: float) -> None:
        if cost >= best[0]:
            return
        if pos == n1:
            total = cost
            # unmapped g2 nodes are insertions
            unused = [v for v in range(n2) if v not in used]
            total += len(unused)
            # edges incident to inserted nodes, and edges among mapped g2
            # nodes with no mapped g1 counterpart
            mapped_pairs = {}
            for u, v in enumerate(mapping):
                if v is not None:
                    mapped_pairs[v] = u
            for (a, b), _rel in edges2.items():
                if a in mapped_pairs and b in mapped_pairs:
                    continue  # already charged during mapping
                total += 1  # edge insertion
            if total < best[0]:
                best[0] = total
            return

        # admissible bound: remaining node histogram difference
        rem1 = labels1[pos:]
        rem2 = [labels2[v] for v in range(n2) if v not in used]
        bound = _histogram_lower_bound(rem1, rem2)
        if cost + bound >= best[0]:
            return

        u = pos
        for v in list(range(n2)) + [None]:
            if v is not None and v in used:
                continue
            step = 0.0
            if v is None:
                step += 1  # node deletion
                for w, w_img in enumerate(mapping):
                    rel1 = edge_rel(edges1, u, w)
                    if rel1 is not None:
                        step += 1  # incident edge deleted
            else:
                step += 0 if labels1[u] == labels2[v] else 1
                for w, w_img in enumerate(mapping):
                    rel1 = edge_rel(edges1, u, w)
                    rel2 = edge_rel(edges2, v, w_img) if w_img is not None else None
                    if rel1 is not None and rel2 is not None:
                        step += 0 if rel1 == rel2 else 1
                    elif rel1 is not None or rel2 is not None:
                        step += 1
            mapping.append(v)
            if v is not None:
                used.add(v)
            recurse(pos + 1, mapping, used, cost + step)
            mapping.pop()
            if v is not None:
                used.discard(v)

    recurse(0, [], set(), 0.0)
    return best[0]


def _category_multiset(graph: AdjacencyGraph) -> Counter:
    return Counter(_node_label(cat) for _, cat in graph.nodes)


def node_f1(pred: AdjacencyGraph, gt: AdjacencyGraph, multiset: bool = True) -> float:
    """F1 over node color classes; multiset intersection (per-class min
    count) by default, plain set intersection otherwise."""
    if multiset:
        cp, cg = _category_multiset(pred), _category_multiset(gt)
        inter = sum(min(cp[k], cg[k]) for k in cp)
        np_, ng = sum(cp.values()), sum(cg.values())
    else:
        sp = set(_category_multiset(pred))
        sg = set(_category_multiset(gt))
        inter = len(sp & sg)
        np_, ng = len(sp), len(sg)
    if np_ == 0 and ng == 0:
        return 1.0
    precision = inter / np_ if np_ else 0.0
    recall = inter / ng if ng else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _edge_keys(graph: AdjacencyGraph) -> set:
    label = {idx: _node_label(cat) for idx, cat in graph.nodes}
    return {frozenset_pair(label[i], label[j]) for i, j, _ in graph.edges}


def frozenset_pair(a: int, b: int) -> tuple:
    return (a, b) if a <= b else (b, a)


def edge_overlap(pred: AdjacencyGraph, gt: AdjacencyGraph) -> float:
    """Jaccard over unordered color-class pair keys (relations ignored)."""
    ep, eg = _edge_keys(pred), _edge_keys(gt)
    union = ep | eg
    if not union:
        return 1.0
    return len(ep & eg) / len(union)


def graph_from_plan(plan) -> AdjacencyGraph:
    """Adjacency graph of a parsed plan's explicit edge list."""
    graph = AdjacencyGraph(nodes=[(r.idx, r.category) for r in plan.rooms])
    for edge in plan.edges:
        graph.add_edge(edge.room1, edge.room2, edge.relation)
    return graph
