"""Synthetic confounded event-graph corpora.

Each graph starts as a random out-tree (every node has at most one
parent, and the tree has depth >= 2), so no causal link has a backdoor
path. Then, for each tree link u -> v whose head u has a parent, a fresh
common cause g -> u, g -> v is planted with probability
``confounder_rate`` while the 12-node budget allows.

Event labels flow down the graph: a node copies a fixed corpus-wide
relabelling of its dominant parent's label (with a little noise). The
planted confounder is the dominant parent of both ends of its pair, so it
explains the effect's type better than the cause does; that is the
spurious association a backdoor path carries. Dominant edges are scored
4-5 and the others 2-3, so the weights are informative. A few score-1
back edges are sprinkled in as annotation noise.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ingest import COLORS, MATERIALS, SHAPES, Lexicon, default_lexicon

MIN_NODES, MAX_NODES = 4, 12
BASE_NODES = (4, 7)
LABEL_NOISE = 0.1
NOISE_EDGE_RATE = 0.3


def _scene(rng: np.random.Generator, scene_id: str) -> list[dict]:
    n = int(rng.integers(3, 7))
    return [
        {
            "object_id": f"o{i}",
            "shape": SHAPES[rng.integers(len(SHAPES))],
            "color": COLORS[rng.integers(len(COLORS))],
            "material": MATERIALS[rng.integers(len(MATERIALS))],
        }
        for i in range(n)
    ]


def _graph(rng, index: int, labels: list[str], relabel: dict[str, str], lexicon: Lexicon, rate: float) -> dict:
    n_base = int(rng.integers(BASE_NODES[0], BASE_NODES[1] + 1))
    parent: dict[int, int] = {1: 0, 2: 1}  # spine 0 -> 1 -> 2 guarantees depth 2
    for j in range(3, n_base):
        parent[j] = int(rng.integers(0, j))
    edges = {(p, c) for c, p in parent.items()}

    dominant: dict[int, int] = dict(parent)
    n_nodes = n_base
    eligible = sorted((p, c) for (p, c) in edges if p in parent)
    planted = []
    for k in rng.permutation(len(eligible)):
        u, v = eligible[k]
        if n_nodes >= MAX_NODES:
            break
        if rng.random() >= rate:
            continue
        g = n_nodes
        n_nodes += 1
        edges |= {(g, u), (g, v)}
        planted.append((g, u, v))
        # first planted confounder wins dominance
        if dominant.get(u) == parent.get(u):
            dominant[u] = g
        if dominant.get(v) == parent.get(v):
            dominant[v] = g

    # labels in topological order: confounders are roots, then tree order
    label: dict[int, str] = {}
    for g, _, _ in planted:
        label[g] = labels[rng.integers(len(labels))]
    for j in range(n_base):
        d = dominant.get(j)
        if d is None or rng.random() < LABEL_NOISE:
            label[j] = labels[rng.integers(len(labels))]
        else:
            label[j] = relabel[label[d]]

    objects = _scene(rng, f"s{index}")
    nodes = []
    for j in range(n_nodes):
        k = lexicon.arity[label[j]]
        picks = rng.choice(len(objects), size=k, replace=False)
        nodes.append({"node_id": f"n{j}", "event_label": label[j], "participants": [objects[i]["object_id"] for i in sorted(picks)]})

    scored = []
    for p, c in sorted(edges):
        score = int(rng.integers(4, 6)) if dominant.get(c) == p else int(rng.integers(2, 4))
        scored.append({"src": f"n{p}", "dst": f"n{c}", "score": score})
    if rng.random() < NOISE_EDGE_RATE:
        c = int(rng.integers(1, n_base))
        scored.append({"src": f"n{c}", "dst": f"n{parent[c]}", "score": 1})
    return {
        "ceg_id": f"ceg{index:04d}",
        "scene_id": f"s{index}",
        "objects": objects,
        "nodes": nodes,
        "edges": scored,
    }


def gen_synthetic(
    n_graphs: int,
    confounder_rate: float,
    seed: int = 0,
    path: str | Path | None = None,
    lexicon: Lexicon | None = None,
) -> list[dict]:
    """Generate corpus records; also write them to ``path`` when given."""
    if n_graphs < 1:
        raise ValueError("n_graphs must be >= 1")
    if not 0.0 <= confounder_rate <= 1.0:
        raise ValueError("confounder_rate must be in [0, 1]")
    lexicon = lexicon or default_lexicon()
    rng = np.random.default_rng(seed)
    labels = lexicon.labels
    relabel = dict(zip(labels, (labels[i] for i in rng.permutation(len(labels)))))
    records = [_graph(rng, i, labels, relabel, lexicon, confounder_rate) for i in range(n_graphs)]
    if path is not None:
        Path(path).write_text(json.dumps(records, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return records
