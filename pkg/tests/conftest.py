"""Shared fixtures: the worked 6-room example plan and synthetic corpora."""

import json

import numpy as np
import pytest

from planmetrics import synthetic
from planmetrics.raster import render

EXAMPLE_PLAN = {
    "rooms": [
        {"idx": 0, "type": "LivingRoom", "area": 33, "width": 6, "height": 9,
         "position": "east"},
        {"idx": 1, "type": "SecondRoom", "area": 12, "width": 3, "height": 4,
         "position": "northwest"},
        {"idx": 2, "type": "MasterRoom", "area": 12, "width": 3, "height": 5,
         "position": "southwest"},
        {"idx": 3, "type": "StudyRoom", "area": 11, "width": 3, "height": 4,
         "position": "north"},
        {"idx": 4, "type": "Bathroom", "area": 4, "width": 2, "height": 2,
         "position": "west"},
        {"idx": 5, "type": "Kitchen", "area": 4, "width": 2, "height": 2,
         "position": "northeast"},
    ],
    "edges": [
        {"room1": 5, "room2": 3, "relation": "right-of",
         "text": "Kitchen is right-of StudyRoom"},
        {"room1": 5, "room2": 0, "relation": "above",
         "text": "Kitchen is above LivingRoom"},
        {"room1": 1, "room2": 3, "relation": "left-of",
         "text": "SecondRoom is left-of StudyRoom"},
        {"room1": 1, "room2": 4, "relation": "above",
         "text": "SecondRoom is above Bathroom"},
        {"room1": 4, "room2": 2, "relation": "above",
         "text": "Bathroom is above MasterRoom"},
    ],
    "description": "The floor plan centers around the spacious Living Room, "
                   "with surrounding rooms arranged by clear spatial logic.",
}


@pytest.fixture(scope="session")
def example_plan_json() -> str:
    return json.dumps(EXAMPLE_PLAN)


@pytest.fixture(scope="session")
def small_plans():
    """A handful of synthetic plans with varied room counts."""
    return [synthetic.make_plan(seed, 3 + seed % 5) for seed in range(8)]


@pytest.fixture(scope="session")
def small_renders(small_plans):
    return [render(p, jitter_seed=0) for p in small_plans]


@pytest.fixture(scope="session")
def room_feature_bank(small_plans):
    """Room-branch feature rows pooled over the small synthetic corpus."""
    from planmetrics.tokenizer import extract_features

    rows = [extract_features(r.mask, context=p.outline, n=8).reshape(-1, 128)
            for p in small_plans for r in p.rooms]
    return np.concatenate(rows)


@pytest.fixture(scope="session")
def outline_feature_bank(small_plans):
    from planmetrics.tokenizer import extract_features

    rows = [extract_features(p.outline, n=8).reshape(-1, 64) for p in small_plans]
    return np.concatenate(rows)
