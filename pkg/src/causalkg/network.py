"""Causal networks and backdoor paths.

A causal network is a weighted DAG over event nodes. Backdoor paths are
walks through the undirected skeleton that start with an edge pointing
into the cause and (in the default strict mode) end with an edge pointing
into the effect. No collider blocking is applied: the definition is purely
structural.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Iterable, Literal, Mapping

from .ingest import CausalEventGraph, EventNode, SceneObject, UnknownLabel

Edge = tuple[str, str]
Variant = Literal["sufficient", "maximum"]

MIN_DEPTH = 2


class NetworkRejected(ValueError):
    """Raised when a causal event graph cannot become a causal network."""

    def __init__(self, cn_id: str, reason: str, detail: str = ""):
        self.cn_id = cn_id
        self.reason = reason
        self.detail = detail
        super().__init__(f"{cn_id}: {reason}" + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class CausalNetwork:
    cn_id: str
    nodes: dict[str, EventNode]
    edges: dict[Edge, float]
    scene_id: str = ""
    objects: dict[str, SceneObject] = field(default_factory=dict)

    @cached_property
    def _parents(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for s, d in sorted(self.edges):
            out[d].append(s)
        return out

    @cached_property
    def _children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for s, d in sorted(self.edges):
            out[s].append(d)
        return out

    @cached_property
    def _bitsets(self) -> tuple[list[str], dict[str, int], list[int], list[int]]:
        """Node names, their indices, and parent/child sets as integer bitmasks."""
        names = sorted(self.nodes)
        index = {n: i for i, n in enumerate(names)}
        par, ch = [0] * len(names), [0] * len(names)
        for s, d in self.edges:
            par[index[d]] |= 1 << index[s]
            ch[index[s]] |= 1 << index[d]
        return names, index, par, ch

    def parents(self, node: str) -> list[str]:
        return self._parents[node]

    def children(self, node: str) -> list[str]:
        return self._children[node]

    def with_edges(self, edges: Mapping[Edge, float]) -> "CausalNetwork":
        return replace(self, edges=dict(edges))

    def depth(self) -> int:
        return longest_path_length(self.nodes, self.edges)


def score_to_weight(score: int) -> float:
    """Map an annotator score in 1..5 onto [0, 1]; score 1 maps to 0."""
    return (score - 1) / 4


def _reaches(adj: Mapping[str, set[str]], start: str, goal: str) -> bool:
    stack, seen = [start], {start}
    while stack:
        n = stack.pop()
        if n == goal:
            return True
        for m in adj.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return False


def break_cycles(edges: Mapping[Edge, float]) -> dict[Edge, float]:
    """Greedy maximal acyclic subset, strongest edges first.

    Edges are inserted in order of descending weight, ties broken by
    (src, dst); an edge is skipped when its head already reaches its tail.
    """
    adj: dict[str, set[str]] = {}
    kept: dict[Edge, float] = {}
    for (s, d), w in sorted(edges.items(), key=lambda kv: (-kv[1], kv[0])):
        if _reaches(adj, d, s):
            continue
        adj.setdefault(s, set()).add(d)
        kept[(s, d)] = w
    return kept


def topological_order(nodes: Iterable[str], edges: Iterable[Edge]) -> list[str]:
    ts = TopologicalSorter({n: () for n in nodes})
    for s, d in edges:
        ts.add(d, s)
    return list(ts.static_order())


def is_acyclic(nodes: Iterable[str], edges: Iterable[Edge]) -> bool:
    try:
        topological_order(nodes, edges)
    except CycleError:
        return False
    return True


def longest_path_length(nodes: Iterable[str], edges: Iterable[Edge]) -> int:
    """Number of edges on the longest directed path (DAG input)."""
    edges = list(edges)
    preds: dict[str, list[str]] = {}
    for s, d in edges:
        preds.setdefault(d, []).append(s)
    dist: dict[str, int] = {}
    for n in topological_order(nodes, edges):
        dist[n] = max((dist[p] + 1 for p in preds.get(n, ())), default=0)
    return max(dist.values(), default=0)


def build_network(ceg: CausalEventGraph, *, min_depth: int = MIN_DEPTH) -> CausalNetwork:
    """Turn a composite-filtered event graph into a causal network.

    Score-1 annotations are dropped; repeated (src, dst) annotations keep
    the strongest remaining weight. Raises :class:`NetworkRejected` with
    reason ``"degenerate"`` when nothing is left or the DAG is too shallow.
    """
    weights: dict[Edge, float] = {}
    for e in ceg.edges:
        if e.score <= 1:
            continue
        w = score_to_weight(e.score)
        key = (e.src, e.dst)
        if w > weights.get(key, 0.0):
            weights[key] = w
    if not weights:
        raise NetworkRejected(ceg.ceg_id, "degenerate", "no causal edges left")
    dag = break_cycles(weights)
    depth = longest_path_length(ceg.nodes, dag)
    if depth < min_depth:
        raise NetworkRejected(ceg.ceg_id, "degenerate", f"depth {depth} < {min_depth}")
    return CausalNetwork(ceg.ceg_id, dict(ceg.nodes), dag, ceg.scene_id, dict(ceg.objects))


# -- backdoor paths ---------------------------------------------------------


@dataclass(frozen=True)
class BackdoorPath:
    cause: str
    effect: str
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    @property
    def interior(self) -> tuple[str, ...]:
        return self.nodes[1:-1]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class BackdoorSet:
    pair: Edge
    members: frozenset[str]
    variant: Variant


def _check_pair(cn: CausalNetwork, cause: str, effect: str) -> None:
    for n in (cause, effect):
        if n not in cn.nodes:
            raise KeyError(f"node {n!r} not in network {cn.cn_id!r}")
    if cause == effect:
        raise ValueError("cause and effect must differ")


def _walk_backdoor(cn: CausalNetwork, cause: str, effect: str, max_len: int | None, strict: bool, visit, first_only=False):
    """Depth-first search over backdoor paths on bitmask adjacency.

    ``visit(path, used)`` gets the node indices (cause first, effect
    excluded) and the bitmask of those nodes for each path found. A branch
    is entered only if a node that may step onto the effect is still
    reachable without revisiting the path, so dead ends are cut early.
    With ``first_only`` the search stops at the first path per first hop.
    """
    _check_pair(cn, cause, effect)
    limit = len(cn.nodes) if max_len is None else max_len
    names, index, par, ch = cn._bitsets
    c, e = index[cause], index[effect]
    ebit = 1 << e
    nb = [p | q for p, q in zip(par, ch)]
    finish = par[e] if strict else nb[e]
    path = [c]

    def can_finish(start: int, used: int) -> bool:
        seen = frontier = 1 << start
        blocked = used | ebit
        while frontier:
            if seen & finish:
                return True
            nxt = 0
            while frontier:
                low = frontier & -frontier
                frontier ^= low
                nxt |= nb[low.bit_length() - 1]
            frontier = nxt & ~seen & ~blocked
            seen |= frontier
        return False

    def extend(x: int, used: int) -> bool:
        steps = len(path) - 1
        if finish >> x & 1 and steps + 1 <= limit:
            visit(path, used)
            if first_only:
                return True
        if steps + 2 > limit:
            return False
        m = nb[x] & ~used & ~ebit
        while m:
            low = m & -m
            m ^= low
            y = low.bit_length() - 1
            if can_finish(y, used):
                path.append(y)
                done = extend(y, used | low)
                path.pop()
                if done:
                    return True
        return False

    used0 = 1 << c
    m = par[c] & ~ebit
    if limit >= 2:
        while m:
            low = m & -m
            m ^= low
            y = low.bit_length() - 1
            if can_finish(y, used0):
                path.append(y)
                extend(y, used0 | low)
                path.pop()
    return names, index, ch


def enumerate_backdoor_paths(
    cn: CausalNetwork,
    cause: str,
    effect: str,
    max_len: int | None = None,
    *,
    strict: bool = True,
) -> list[BackdoorPath]:
    """All simple skeleton paths from ``cause`` to ``effect`` entering the cause.

    With ``strict`` (the default) the final edge must also point into the
    effect; ``strict=False`` gives the textbook definition, where only the
    cause end is constrained. ``max_len`` bounds the number of edges.
    """
    raw: list[list[int]] = []
    names, index, ch = _walk_backdoor(cn, cause, effect, max_len, strict, lambda path, used: raw.append(path[:]))
    found = []
    if not strict and (effect, cause) in cn.edges and (max_len is None or max_len >= 1):
        # effect -> cause directly: only the textbook definition admits it
        found.append(BackdoorPath(cause, effect, (cause, effect), ((effect, cause),)))
    for idx in raw:
        nodes = [names[i] for i in idx] + [effect]
        edges = tuple((a, b) if ch[index[a]] >> index[b] & 1 else (b, a) for a, b in zip(nodes, nodes[1:]))
        found.append(BackdoorPath(cause, effect, tuple(nodes), edges))
    found.sort(key=lambda bp: bp.nodes)
    return found


def sufficient_backdoor_set(
    cn: CausalNetwork, cause: str, effect: str, max_len: int | None = None, *, strict: bool = True
) -> BackdoorSet:
    """Parents of the cause through which some backdoor path opens."""
    # a parent met deeper along a path also opens a shorter path of its own,
    # so the first hop of each path is enough
    hops: set[int] = set()
    names, _, _ = _walk_backdoor(cn, cause, effect, max_len, strict, lambda path, used: hops.add(path[1]), True)
    return BackdoorSet((cause, effect), frozenset(names[i] for i in hops), "sufficient")


def maximum_backdoor_set(
    cn: CausalNetwork, cause: str, effect: str, max_len: int | None = None, *, strict: bool = True
) -> BackdoorSet:
    """Every interior node of every backdoor path, minus children of the cause."""
    acc = [0]

    def visit(path, used):
        acc[0] |= used

    names, index, ch = _walk_backdoor(cn, cause, effect, max_len, strict, visit)
    interior = acc[0] & ~(1 << index[cause]) & ~ch[index[cause]]
    return BackdoorSet((cause, effect), frozenset(n for i, n in enumerate(names) if interior >> i & 1), "maximum")


def backdoor_set(cn: CausalNetwork, cause: str, effect: str, variant: Variant, **kw) -> BackdoorSet:
    if variant == "sufficient":
        return sufficient_backdoor_set(cn, cause, effect, **kw)
    if variant == "maximum":
        return maximum_backdoor_set(cn, cause, effect, **kw)
    raise ValueError(f"unknown backdoor variant {variant!r}")


def _descendants(cn: CausalNetwork, node: str) -> set[str]:
    out, stack = {node}, [node]
    while stack:
        for c in cn.children(stack.pop()):
            if c not in out:
                out.add(c)
                stack.append(c)
    return out


def _ancestors(cn: CausalNetwork, node: str) -> set[str]:
    out, stack = {node}, [node]
    while stack:
        for p in cn.parents(stack.pop()):
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def causal_path_edges(cn: CausalNetwork, cause: str, effect: str) -> set[Edge]:
    """Edges lying on some directed path cause -> ... -> effect."""
    down, up = _descendants(cn, cause), _ancestors(cn, effect)
    return {(s, d) for (s, d) in cn.edges if s in down and d in up}


def backdoor_edges(
    cn: CausalNetwork,
    pairs: Iterable[Edge],
    variant: Variant,
    max_len: int | None = None,
    *,
    strict: bool = True,
) -> set[Edge]:
    """Edges that removal of the given variant deletes, all judged on ``cn``."""
    doomed: set[Edge] = set()
    for cause, effect in pairs:
        if variant == "sufficient":
            bd = sufficient_backdoor_set(cn, cause, effect, max_len, strict=strict)
            doomed.update((p, cause) for p in bd.members)
        elif variant == "maximum":
            paths = enumerate_backdoor_paths(cn, cause, effect, max_len, strict=strict)
            if not paths:
                continue
            keep = causal_path_edges(cn, cause, effect)
            doomed.update(e for bp in paths for e in bp.edges if e not in keep)
        else:
            raise ValueError(f"unknown backdoor variant {variant!r}")
    return doomed


def remove_backdoor_edges(
    cn: CausalNetwork,
    pairs: Iterable[Edge],
    variant: Variant,
    max_len: int | None = None,
    *,
    strict: bool = True,
) -> CausalNetwork:
    doomed = backdoor_edges(cn, pairs, variant, max_len, strict=strict)
    if not doomed:
        return cn
    return cn.with_edges({e: w for e, w in cn.edges.items() if e not in doomed})


# -- serialization ----------------------------------------------------------


def save_network(cn: CausalNetwork, directory: str | Path) -> Path:
    """Write ``<cn_id>.tsv`` (src, dst, weight) plus a ``<cn_id>.json`` payload sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tsv = directory / f"{cn.cn_id}.tsv"
    with open(tsv, "w", encoding="utf-8") as fh:
        for (s, d), w in sorted(cn.edges.items()):
            fh.write(f"{s}\t{d}\t{w!r}\n")
    sidecar = {
        "cn_id": cn.cn_id,
        "scene_id": cn.scene_id,
        "nodes": [
            {
                "node_id": n.node_id,
                "event_label": str(n.event_label),
                "known": n.known,
                "participants": list(n.participants),
                "raw_description": n.raw_description,
            }
            for n in cn.nodes.values()
        ],
        "objects": [
            {"object_id": o.object_id, "shape": o.shape, "color": o.color, "material": o.material}
            for o in cn.objects.values()
        ],
    }
    with open(directory / f"{cn.cn_id}.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
    return tsv


def read_edge_tsv(path: str | Path) -> dict[Edge, float]:
    edges: dict[Edge, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                s, d, w = line.rstrip("\n").split("\t")
                edges[(s, d)] = float(w)
    return edges


def load_network(directory: str | Path, cn_id: str) -> CausalNetwork:
    directory = Path(directory)
    with open(directory / f"{cn_id}.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    nodes = {}
    for n in meta["nodes"]:
        label = n["event_label"] if n.get("known", True) else UnknownLabel(n["event_label"])
        nodes[n["node_id"]] = EventNode(n["node_id"], label, tuple(n["participants"]), n.get("raw_description"))
    objects = {o["object_id"]: SceneObject(o["object_id"], o["shape"], o["color"], o["material"]) for o in meta["objects"]}
    return CausalNetwork(meta["cn_id"], nodes, read_edge_tsv(directory / f"{cn_id}.tsv"), meta["scene_id"], objects)


def load_networks(directory: str | Path) -> list[CausalNetwork]:
    directory = Path(directory)
    index = directory / "index.json"
    if index.exists():
        ids = json.loads(index.read_text(encoding="utf-8"))
    else:
        ids = sorted(p.stem for p in directory.glob("*.json"))
    return [load_network(directory, i) for i in ids]


def save_networks(networks: Iterable[CausalNetwork], directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ids = []
    for cn in networks:
        save_network(cn, directory)
        ids.append(cn.cn_id)
    (directory / "index.json").write_text(json.dumps(ids, indent=1) + "\n", encoding="utf-8")
