import json

import numpy as np
import pytest

from helpers import make_network

@pytest.fixture
def confounder_triangle():
    return make_network(["GA", "GH", "AH"])


@pytest.fixture
def corpus_record():
    return {
        "ceg_id": "c1",
        "scene_id": "s1",
        "objects": [
            {"object_id": "o1", "shape": "sphere", "color": "red", "material": "metal"},
            {"object_id": "o2", "shape": "cube", "color": "blue", "material": "rubber"},
        ],
        "nodes": [
            {"node_id": "a", "event_label": "collided", "participants": ["o1", "o2"]},
            {"node_id": "b", "event_label": "exit", "participants": ["o2"], "raw_description": "the cube exits"},
        ],
        "edges": [{"src": "a", "dst": "b", "score": 3}],
    }


@pytest.fixture
def write_corpus(tmp_path):
    def _write(records, name="corpus.json"):
        path = tmp_path / name
        path.write_text(json.dumps(records), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
