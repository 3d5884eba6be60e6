"""Shared builders and independent oracles for the test suites."""
import itertools

import networkx as nx
import numpy as np

from causalkg.ingest import EventNode, SceneObject
from causalkg.network import CausalNetwork


def make_network(edges, cn_id="cn", labels=None, weights=None, extra_nodes=()):
    """Small network helper: ``edges`` as "GA" strings or (src, dst) pairs."""
    edges = [tuple(e) for e in edges]
    names = sorted({n for e in edges for n in e} | set(extra_nodes))
    labels = labels or {}
    objects = {"o1": SceneObject("o1", "sphere", "red", "metal"), "o2": SceneObject("o2", "cube", "blue", "rubber")}
    nodes = {}
    for n in names:
        label = labels.get(n, "move")
        parts = ("o1", "o2") if label in ("collide", "hit", "bump") else ("o1",)
        nodes[n] = EventNode(n, label, parts)
    w = weights or {}
    return CausalNetwork(cn_id, nodes, {e: w.get(e, 1.0) for e in edges}, "scene0", objects)


def random_dag(rng, n_max=12, p=None):
    n = int(rng.integers(2, n_max + 1))
    p = p if p is not None else float(rng.uniform(0.15, 0.4))
    names = [f"v{i:02d}" for i in range(n)]
    order = rng.permutation(n)
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            a, b = names[order[i]], names[order[j]]
            edges.append((a, b))
    return make_network(edges, extra_nodes=names)


def oracle_backdoor_paths(cn, cause, effect, strict=True, max_len=None):
    """All simple skeleton paths via networkx, filtered by arrow direction at the ends."""
    g = nx.Graph()
    g.add_nodes_from(cn.nodes)
    g.add_edges_from(cn.edges)
    out = []
    for path in nx.all_simple_paths(g, cause, effect, cutoff=max_len):
        if len(path) < 2:
            continue
        first = (path[1], path[0])
        last = (path[-2], path[-1])
        if first not in cn.edges:
            continue
        if strict and last not in cn.edges:
            continue
        out.append(tuple(path))
    return sorted(out)


def oracle_sets(cn, cause, effect, strict=True, max_len=None):
    paths = oracle_backdoor_paths(cn, cause, effect, strict, max_len)
    parents = {s for (s, d) in cn.edges if d == cause}
    children = {d for (s, d) in cn.edges if s == cause}
    interior = {n for p in paths for n in p[1:-1]}
    return interior & parents, interior - children


def finite_difference(f, x, step=1e-5):
    """Central differences of scalar ``f`` at every coordinate of ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        old = x[i]
        x[i] = old + step
        up = f(x)
        x[i] = old - step
        down = f(x)
        x[i] = old
        g[i] = (up - down) / (2 * step)
    return g


def relative_error(analytic, numeric):
    a, n = np.ravel(analytic), np.ravel(numeric)
    denom = max(np.linalg.norm(a), np.linalg.norm(n), 1e-8)
    return float(np.linalg.norm(a - n) / denom)


def brute_force_rank(model, h, r, t, pool, filter_set, side="tail"):
    """Rank by scoring each candidate alone and sorting; mean tie policy."""
    true = model.score(h, r, t)
    scored = []
    for e in pool:
        cand = (h, r, e) if side == "tail" else (e, r, t)
        if cand == (h, r, t) or cand in filter_set:
            continue
        scored.append(model.score(*cand))
    ordered = sorted(scored + [true], reverse=True)
    first = ordered.index(true) + 1
    last = len(ordered) - ordered[::-1].index(true)
    # mean of the tied block, halves rounded up
    return (first + last + 1) // 2
