"""Embedding model container and its on-disk format.

Binary layout (little endian)::

    magic  b"CKGE"      4 bytes
    scorer tag          uint8  (0 TransE, 1 DistMult, 2 HolE, 3 ComplEx)
    padding             3 bytes
    k                   uint32
    entity count        uint64
    relation count      uint64
    entity vectors      float64[n_ent, width * k]   (entity-id order)
    relation vectors    float64[n_rel, width * k]   (relation-id order)

ComplEx vectors are stored as interleaved (re, im) pairs, width 2. The
``.json`` sidecar holds the id -> name maps and training flags.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .scoring import WIDTH, get_scorer

MAGIC = b"CKGE"
HEADER = struct.Struct("<4sB3xIQQ")
SCORER_TAGS = ("TransE", "DistMult", "HolE", "ComplEx")


@dataclass
class EmbeddingModel:
    scorer: str
    entities: list[str]
    relations: list[str]
    entity_vectors: np.ndarray
    relation_vectors: np.ndarray
    k: int
    weighted: bool = False
    beta: float = 1.0
    entity_index: dict[str, int] = field(init=False, repr=False)
    relation_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        get_scorer(self.scorer)
        width = WIDTH[self.scorer] * self.k
        if self.entity_vectors.shape != (len(self.entities), width):
            raise ValueError(f"entity matrix shape {self.entity_vectors.shape} != {(len(self.entities), width)}")
        if self.relation_vectors.shape != (len(self.relations), width):
            raise ValueError(f"relation matrix shape {self.relation_vectors.shape} != {(len(self.relations), width)}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        self.entity_index = {e: i for i, e in enumerate(self.entities)}
        self.relation_index = {r: i for i, r in enumerate(self.relations)}
        if len(self.entity_index) != len(self.entities) or len(self.relation_index) != len(self.relations):
            raise ValueError("duplicate entity or relation names")

    def ent_id(self, name: str) -> int:
        try:
            return self.entity_index[name]
        except KeyError:
            raise KeyError(f"unknown entity {name!r}") from None

    def rel_id(self, name: str) -> int:
        try:
            return self.relation_index[name]
        except KeyError:
            raise KeyError(f"unknown relation {name!r}") from None

    def score_ids(self, h, r, t) -> np.ndarray:
        fn, _ = get_scorer(self.scorer)
        h, r, t = np.broadcast_arrays(np.asarray(h), np.asarray(r), np.asarray(t))
        return fn(self.entity_vectors[h], self.relation_vectors[r], self.entity_vectors[t])

    def score(self, h: str, r: str, t: str) -> float:
        return float(self.score_ids([self.ent_id(h)], [self.rel_id(r)], [self.ent_id(t)])[0])

    def score_many(self, triples: Sequence[tuple[str, str, str]]) -> np.ndarray:
        ids = np.array([(self.ent_id(h), self.rel_id(r), self.ent_id(t)) for h, r, t in triples], dtype=np.int64)
        if not len(ids):
            return np.zeros(0)
        return self.score_ids(ids[:, 0], ids[:, 1], ids[:, 2])

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(HEADER.pack(MAGIC, SCORER_TAGS.index(self.scorer), self.k, len(self.entities), len(self.relations)))
            fh.write(np.ascontiguousarray(self.entity_vectors, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(self.relation_vectors, dtype="<f8").tobytes())
        meta = {
            "scorer": self.scorer,
            "k": self.k,
            "weighted": self.weighted,
            "beta": self.beta,
            "entities": self.entities,
            "relations": self.relations,
            "layout": "complex interleaved (re, im)" if self.scorer == "ComplEx" else "real",
        }
        path.with_suffix(".json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingModel":
        path = Path(path)
        raw = path.read_bytes()
        magic, tag, k, n_ent, n_rel = HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a model file")
        scorer = SCORER_TAGS[tag]
        width = WIDTH[scorer] * k
        body = np.frombuffer(raw, dtype="<f8", offset=HEADER.size)
        if body.size != (n_ent + n_rel) * width:
            raise ValueError(f"{path}: truncated model file")
        ent = body[: n_ent * width].reshape(n_ent, width).astype(np.float64)
        rel = body[n_ent * width :].reshape(n_rel, width).astype(np.float64)
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        return cls(scorer, meta["entities"], meta["relations"], ent, rel, k, meta["weighted"], meta["beta"])
