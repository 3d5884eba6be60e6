"""Filtered ranking of held-out causal links.

Ties use the mean policy: ``rank = 1 + better + round_half_up(ties / 2)``
where ``ties`` counts surviving corruptions with exactly the true score.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from .kg import CAUSED_BY_TYPE, CAUSES_TYPE, Quad
from .kge.model import EmbeddingModel

TaskKind = Literal["causal_prediction", "causal_explanation"]
TASK_RELATION = {"causal_prediction": CAUSES_TYPE, "causal_explanation": CAUSED_BY_TYPE}
HITS_AT = (1, 3, 10)

Triple = tuple[str, str, str]


@dataclass
class EvalTask:
    kind: TaskKind
    test_links: list[Quad]
    filter_set: set[Triple] = field(default_factory=set)

    def __post_init__(self):
        rel = TASK_RELATION.get(self.kind)
        if rel is None:
            raise ValueError(f"unknown task kind {self.kind!r}")
        bad = [q for q in self.test_links if q.relation != rel]
        if bad:
            raise ValueError(f"{self.kind} expects relation {rel!r}, got {bad[0]}")


@dataclass
class RankReport:
    ranks: list[int]
    mrr: float
    hits: dict[int, float]
    tags: dict = field(default_factory=dict)

    @property
    def n_links(self) -> int:
        return len(self.ranks)

    def to_dict(self, per_link: bool = True) -> dict:
        out = {**self.tags, "mrr": self.mrr, "hits": {str(k): v for k, v in self.hits.items()}, "n_links": self.n_links}
        if per_link:
            out["per_link_ranks"] = list(self.ranks)
        return out

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RankReport":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        hits = {int(k): v for k, v in doc.pop("hits").items()}
        mrr = doc.pop("mrr")
        ranks = doc.pop("per_link_ranks", [])
        doc.pop("n_links", None)
        return cls(ranks, mrr, hits, doc)


def metrics_from_ranks(ranks: Sequence[int], ks: Iterable[int] = HITS_AT) -> tuple[float, dict[int, float]]:
    r = np.asarray(ranks, dtype=np.float64)
    if not len(r):
        raise ValueError("no ranks")
    return float(np.mean(1.0 / r)), {k: float(np.mean(r <= k)) for k in ks}


def rank_link(
    model: EmbeddingModel,
    quad: Quad | Triple,
    entity_pool: Sequence[str] | None = None,
    filter_set: set[Triple] | frozenset = frozenset(),
    side: Literal["head", "tail"] = "tail",
) -> int:
    """Filtered rank of the true triple against corruptions on one side."""
    h, r, t = quad[:3]
    hid, rid, tid = model.ent_id(h), model.rel_id(r), model.ent_id(t)
    pool = model.entities if entity_pool is None else entity_pool
    if side == "tail":
        cands = [e for e in pool if e != t and (h, r, e) not in filter_set]
    elif side == "head":
        cands = [e for e in pool if e != h and (e, r, t) not in filter_set]
    else:
        raise ValueError(f"side must be 'head' or 'tail', got {side!r}")
    ids = np.array([tid if side == "tail" else hid] + [model.ent_id(e) for e in cands], dtype=np.int64)
    if side == "tail":
        scores = model.score_ids(np.full_like(ids, hid), np.full_like(ids, rid), ids)
    else:
        scores = model.score_ids(ids, np.full_like(ids, rid), np.full_like(ids, tid))
    true, rest = scores[0], scores[1:]
    better = int(np.count_nonzero(rest > true))
    ties = int(np.count_nonzero(rest == true))
    return 1 + better + (ties + 1) // 2


def evaluate(
    model: EmbeddingModel,
    task: EvalTask,
    entity_pool: Sequence[str] | None = None,
    *,
    sides: Literal["tail", "both"] = "tail",
    tags: dict | None = None,
) -> RankReport:
    """Tail-side filtered ranks for every test link; ``sides="both"`` also ranks heads."""
    if not task.test_links:
        raise ValueError("evaluation task has no test links")
    ranks = []
    for q in task.test_links:
        ranks.append(rank_link(model, q, entity_pool, task.filter_set, "tail"))
        if sides == "both":
            ranks.append(rank_link(model, q, entity_pool, task.filter_set, "head"))
    mrr, hits = metrics_from_ranks(ranks)
    return RankReport(ranks, mrr, hits, {"task": task.kind, **(tags or {})})
