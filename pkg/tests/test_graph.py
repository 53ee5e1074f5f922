"""Adjacency extraction, relation/position classifiers, and graph metrics."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planmetrics.core import RASTER_SIDE, Position, RoomCategory
from planmetrics.errors import EmptyMask, GraphTooLarge
from planmetrics.graph import (
    RELATION_INVERSE,
    AdjacencyGraph,
    classify_position,
    classify_relation,
    edge_overlap,
    extract_adjacency,
    graph_edit_distance,
    graph_from_plan,
    node_f1,
)


def _rect(x0, y0, x1, y1):
    mask = np.zeros((RASTER_SIDE, RASTER_SIDE), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return mask


def _blob(cx, cy, r=6):
    return _rect(cx - r, cy - r, cx + r, cy + r)


def _edge_rel(edges, a, b):
    if (a, b) in edges:
        return edges[(a, b)]
    if (b, a) in edges:
        return RELATION_INVERSE[edges[(b, a)]]
    return None


def _ged_exhaustive(g1, g2):
    """Reference GED: enumerate every injective node mapping directly."""
    labels1 = [cat if isinstance(cat, int) else cat.color_class.value
               for _, cat in g1.nodes]
    labels2 = [cat if isinstance(cat, int) else cat.color_class.value
               for _, cat in g2.nodes]
    e1 = {(i, j): rel for i, j, rel in g1.edges}
    e2 = {(i, j): rel for i, j, rel in g2.edges}
    n1, n2 = len(labels1), len(labels2)
    best = float("inf")
    for image in itertools.product(list(range(n2)) + [None], repeat=n1):
        mapped = [v for v in image if v is not None]
        if len(set(mapped)) != len(mapped):
            continue
        cost = sum(1 for u, v in enumerate(image)
                   if v is None or labels1[u] != labels2[v])
        cost += n2 - len(mapped)
        covered = set()
        for (a, b), rel in e1.items():
            va, vb = image[a], image[b]
            if va is None or vb is None:
                cost += 1
                continue
            covered.add((min(va, vb), max(va, vb)))
            rel2 = _edge_rel(e2, va, vb)
            if rel2 is None:
                cost += 1
            elif rel2 != rel:
                cost += 1
        for (a, b) in e2:
            if (a, b) not in covered:
                cost += 1
        best = min(best, cost)
    return best


def _random_graph(rng, max_nodes=4):
    n = rng.randint(0, max_nodes + 1)
    cats = [RoomCategory.LivingRoom, RoomCategory.Kitchen,
            RoomCategory.Bathroom, RoomCategory.MasterRoom,
            RoomCategory.Balcony]
    g = AdjacencyGraph(nodes=[(i, cats[rng.randint(len(cats))]) for i in range(n)])
    rels = list(RELATION_INVERSE)
    for i, j in itertools.combinations(range(n), 2):
        if rng.rand() < 0.5:
            g.add_edge(i, j, rels[rng.randint(len(rels))])
    return g


class TestExtractAdjacency:
    def test_rooms_across_thin_wall_are_adjacent(self):
        a = _rect(20, 20, 100, 100)
        b = _rect(102, 20, 180, 100)  # 2-px gap
        g = extract_adjacency([(RoomCategory.Kitchen, a),
                               (RoomCategory.Bathroom, b)], wall_px=3)
        assert g.edges == [(0, 1, "left-of")]

    def test_distant_rooms_not_adjacent(self):
        a = _rect(20, 20, 60, 60)
        b = _rect(80, 20, 120, 60)  # 20 px apart
        g = extract_adjacency([(RoomCategory.Kitchen, a),
                               (RoomCategory.Bathroom, b)], wall_px=3)
        assert g.edges == []

    def test_single_room(self):
        g = extract_adjacency([(RoomCategory.Kitchen, _rect(20, 20, 60, 60))])
        assert len(g.nodes) == 1 and g.edges == []


class TestClassifyRelation:
    def test_diagonal_sector(self):
        # A centroid (50,50), B centroid (150,150): theta = 45 deg
        assert classify_relation(_blob(50, 50), _blob(150, 150)) == "left-above"

    @pytest.mark.parametrize("b_center,expected", [
        ((200, 50), "left-of"),
        ((10, 50), "right-of"),
        ((50, 200), "above"),
        ((50, 10), "below"),
        ((200, 200), "left-above"),
        ((10, 10), "right-below"),
        ((10, 90), "right-above"),
        ((90, 10), "left-below"),
    ])
    def test_eight_sectors(self, b_center, expected):
        assert classify_relation(_blob(50, 50), _blob(*b_center)) == expected

    def test_containment(self):
        inner = _rect(100, 100, 120, 120)
        outer = _rect(60, 60, 200, 200)
        assert classify_relation(inner, outer) == "inside"
        assert classify_relation(outer, inner) == "surrounding"

    def test_empty_mask(self):
        with pytest.raises(EmptyMask):
            classify_relation(np.zeros((256, 256), dtype=bool), _blob(50, 50))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 100_000))
    def test_antisymmetry_on_separated_rectangles(self, seed):
        rng = np.random.RandomState(seed)
        # two rectangles with disjoint bounding boxes (split the frame)
        if rng.rand() < 0.5:
            cut = rng.randint(40, 216)
            a = _rect(rng.randint(0, cut - 20), 10, cut - rng.randint(1, 10), 246)
            b = _rect(cut + rng.randint(1, 10), 10, 246, 246)
        else:
            cut = rng.randint(40, 216)
            a = _rect(10, rng.randint(0, cut - 20), 246, cut - rng.randint(1, 10))
            b = _rect(10, cut + rng.randint(1, 10), 246, 246)
        rel_ab = classify_relation(a, b)
        rel_ba = classify_relation(b, a)
        assert rel_ba == RELATION_INVERSE[rel_ab]


class TestClassifyPosition:
    def test_center(self):
        assert classify_position(_blob(128, 128)) == Position.CENTER

    def test_northwest(self):
        assert classify_position(_blob(30, 30)) == Position.NORTHWEST

    def test_north(self):
        assert classify_position(_blob(128, 20)) == Position.NORTH

    def test_all_nine_cells(self):
        expected = {
            (42, 42): Position.NORTHWEST, (128, 42): Position.NORTH,
            (214, 42): Position.NORTHEAST, (42, 128): Position.WEST,
            (128, 128): Position.CENTER, (214, 128): Position.EAST,
            (42, 214): Position.SOUTHWEST, (128, 214): Position.SOUTH,
            (214, 214): Position.SOUTHEAST,
        }
        for (cx, cy), want in expected.items():
            assert classify_position(_blob(cx, cy)) == want


class TestGraphEditDistance:
    def test_identity(self):
        g = _random_graph(np.random.RandomState(0), max_nodes=4)
        assert graph_edit_distance(g, g) == 0

    def test_single_node_substitution(self):
        g1 = AdjacencyGraph(nodes=[(0, RoomCategory.Kitchen)])
        g2 = AdjacencyGraph(nodes=[(0, RoomCategory.Bathroom)])
        assert graph_edit_distance(g1, g2) == 1

    def test_same_color_class_is_free(self):
        g1 = AdjacencyGraph(nodes=[(0, RoomCategory.SecondRoom)])
        g2 = AdjacencyGraph(nodes=[(0, RoomCategory.StudyRoom)])  # both yellow
        assert graph_edit_distance(g1, g2) == 0

    def test_missing_edge_costs_one(self):
        nodes = [(0, RoomCategory.Kitchen), (1, RoomCategory.Bathroom)]
        g1 = AdjacencyGraph(nodes=list(nodes))
        g1.add_edge(0, 1, "above")
        g2 = AdjacencyGraph(nodes=list(nodes))
        assert graph_edit_distance(g1, g2) == 1
        assert graph_edit_distance(g2, g1) == 1

    def test_relation_substitution_costs_one(self):
        nodes = [(0, RoomCategory.Kitchen), (1, RoomCategory.Bathroom)]
        g1 = AdjacencyGraph(nodes=list(nodes))
        g1.add_edge(0, 1, "above")
        g2 = AdjacencyGraph(nodes=list(nodes))
        g2.add_edge(0, 1, "left-of")
        assert graph_edit_distance(g1, g2) == 1

    def test_empty_vs_graph(self):
        g1 = AdjacencyGraph()
        g2 = _random_graph(np.random.RandomState(1), max_nodes=4)
        assert graph_edit_distance(g1, g2) == len(g2.nodes) + len(g2.edges)

    def test_too_large(self):
        g = AdjacencyGraph(nodes=[(i, RoomCategory.Kitchen) for i in range(13)])
        with pytest.raises(GraphTooLarge):
            graph_edit_distance(g, AdjacencyGraph())

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 100_000))
    def test_matches_exhaustive(self, seed):
        rng = np.random.RandomState(seed)
        g1 = _random_graph(rng)
        g2 = _random_graph(rng)
        assert graph_edit_distance(g1, g2) == _ged_exhaustive(g1, g2)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 100_000))
    def test_symmetry(self, seed):
        rng = np.random.RandomState(seed)
        g1 = _random_graph(rng)
        g2 = _random_graph(rng)
        assert graph_edit_distance(g1, g2) == graph_edit_distance(g2, g1)


class TestNodeF1:
    def _graph(self, cats):
        return AdjacencyGraph(nodes=[(i, c) for i, c in enumerate(cats)])

    def test_identical(self):
        g = self._graph([RoomCategory.LivingRoom, RoomCategory.Kitchen])
        assert node_f1(g, g) == 1.0

    def test_half_overlap(self):
        pred = self._graph([RoomCategory.LivingRoom, RoomCategory.Kitchen])
        gt = self._graph([RoomCategory.LivingRoom, RoomCategory.Bathroom])
        assert node_f1(pred, gt) == 0.5

    def test_multiset_counts_duplicates(self):
        pred = self._graph([RoomCategory.LivingRoom, RoomCategory.LivingRoom])
        gt = self._graph([RoomCategory.LivingRoom])
        assert node_f1(pred, gt) == pytest.approx(2 / 3)
        assert node_f1(pred, gt, multiset=False) == 1.0

    def test_both_empty(self):
        assert node_f1(AdjacencyGraph(), AdjacencyGraph()) == 1.0

    def test_disjoint(self):
        pred = self._graph([RoomCategory.Kitchen])
        gt = self._graph([RoomCategory.Bathroom])
        assert node_f1(pred, gt) == 0.0


class TestEdgeOverlap:
    def _graph(self, cats, edges):
        g = AdjacencyGraph(nodes=[(i, c) for i, c in enumerate(cats)])
        for i, j in edges:
            g.add_edge(i, j, "above")
        return g

    def test_identical(self):
        g = self._graph([RoomCategory.LivingRoom, RoomCategory.Kitchen,
                         RoomCategory.Bathroom], [(0, 1), (1, 2)])
        assert edge_overlap(g, g) == 1.0

    def test_one_of_three(self):
        # {AB, BC} vs {AB, CD} -> Jaccard 1/3
        cats = [RoomCategory.LivingRoom, RoomCategory.Kitchen,
                RoomCategory.Bathroom, RoomCategory.MasterRoom]
        pred = self._graph(cats, [(0, 1), (1, 2)])
        gt = self._graph(cats, [(0, 1), (2, 3)])
        assert edge_overlap(pred, gt) == pytest.approx(1 / 3)

    def test_empty_pred(self):
        cats = [RoomCategory.LivingRoom, RoomCategory.Kitchen]
        pred = self._graph(cats, [])
        gt = self._graph(cats, [(0, 1)])
        assert edge_overlap(pred, gt) == 0.0

    def test_both_empty(self):
        assert edge_overlap(AdjacencyGraph(), AdjacencyGraph()) == 1.0


class TestAdjacencyGraphEdges:
    def test_add_edge_normalizes_orientation(self):
        g = AdjacencyGraph(nodes=[(0, RoomCategory.Kitchen),
                                  (1, RoomCategory.Bathroom)])
        g.add_edge(1, 0, "above")
        assert g.edges == [(0, 1, "below")]

    def test_add_edge_dedups(self):
        g = AdjacencyGraph(nodes=[(0, RoomCategory.Kitchen),
                                  (1, RoomCategory.Bathroom)])
        g.add_edge(0, 1, "above")
        g.add_edge(1, 0, "below")
        assert len(g.edges) == 1

    def test_self_loop_rejected(self):
        g = AdjacencyGraph(nodes=[(0, RoomCategory.Kitchen)])
        with pytest.raises(ValueError):
            g.add_edge(0, 0, "above")


def test_graph_from_plan_matches_edge_list(example_plan_json):
    from planmetrics.core import parse_canonical_json

    plan = parse_canonical_json(example_plan_json)
    g = graph_from_plan(plan)
    assert len(g.nodes) == 6
    assert sorted((i, j) for i, j, _ in g.edges) == \
           [(0, 5), (1, 3), (1, 4), (2, 4), (3, 5)]
    rel = {(i, j): r for i, j, r in g.edges}
    assert rel[(3, 5)] == "left-of"  # Kitchen right-of StudyRoom, normalized
    assert rel[(2, 4)] == "below"    # Bathroom above MasterRoom, normalized
