"""Reading causal event graph corpora.

A corpus file is a JSON array of records::

    {"ceg_id": ..., "scene_id": ...,
     "objects": [{"object_id", "shape", "color", "material"}],
     "nodes": [{"node_id", "event_label", "participants", "raw_description"?, "composite"?}],
     "edges": [{"src", "dst", "score"}]}

Event labels are always reduced to their lexicon root. Object attributes
must already be members of their closed vocabularies unless the property
normalizer is switched on, in which case common drifts ("gold", "grey",
...) are mapped back.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

SHAPES = ("sphere", "cube", "cylinder")
COLORS = ("blue", "red", "yellow", "green", "purple", "gray", "cyan", "brown")
MATERIALS = ("metal", "rubber")

PROPERTY_SYNONYMS: dict[str, dict[str, str]] = {
    "color": {
        "gold": "yellow",
        "golden": "yellow",
        "grey": "gray",
        "silver": "gray",
        "violet": "purple",
        "magenta": "purple",
        "turquoise": "cyan",
        "teal": "cyan",
        "crimson": "red",
    },
    "shape": {
        "ball": "sphere",
        "spheres": "sphere",
        "cubes": "cube",
        "block": "cube",
        "cylinders": "cylinder",
    },
    "material": {
        "metallic": "metal",
        "shiny": "metal",
        "matte": "rubber",
    },
}

_VOCAB = {"shape": SHAPES, "color": COLORS, "material": MATERIALS}
_SUFFIXES = ("ing", "ed", "es", "s")


class CorpusError(Exception):
    """Base class for corpus reading failures."""


class CorpusParseError(CorpusError):
    def __init__(self, message: str, record: int | None = None):
        self.record = record
        where = f" (record {record})" if record is not None else ""
        super().__init__(f"{message}{where}")


class CorpusValidationError(CorpusError):
    def __init__(self, field_name: str, message: str, record: int | None = None):
        self.field = field_name
        self.record = record
        where = f"record {record}, " if record is not None else ""
        super().__init__(f"{where}field {field_name!r}: {message}")


class UnknownLabel(str):
    """An event label whose root is not in the lexicon.

    Behaves like the stripped root string, so it can be carried through
    serialization; ``isinstance(x, UnknownLabel)`` is the tag.
    """

    def __repr__(self) -> str:
        return f"UnknownLabel({str.__repr__(self)})"


@dataclass(frozen=True)
class Lexicon:
    arity: Mapping[str, int]

    def __contains__(self, label: object) -> bool:
        return label in self.arity and not isinstance(label, UnknownLabel)

    def __len__(self) -> int:
        return len(self.arity)

    @property
    def labels(self) -> list[str]:
        return sorted(self.arity)

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "Lexicon":
        arity: dict[str, int] = {}
        for i, rec in enumerate(records):
            try:
                label, n = rec["label"], rec["arity"]
            except (KeyError, TypeError):
                raise CorpusValidationError("label/arity", "lexicon entry needs both", i) from None
            if not isinstance(label, str) or not label or label != label.strip().lower():
                raise CorpusValidationError("label", f"not a lowercase token: {label!r}", i)
            if n not in (1, 2):
                raise CorpusValidationError("arity", f"must be 1 or 2, got {n!r}", i)
            if label in arity:
                raise CorpusValidationError("label", f"duplicate {label!r}", i)
            arity[label] = n
        return cls(arity)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_records(json.load(fh))


@lru_cache(maxsize=None)
def default_lexicon() -> Lexicon:
    text = resources.files("causalkg").joinpath("data/lexicon.json").read_text(encoding="utf-8")
    return Lexicon.from_records(json.loads(text))


def _stem_candidates(token: str):
    for suffix in _SUFFIXES:
        if len(token) > len(suffix) + 1 and token.endswith(suffix):
            stem = token[: -len(suffix)]
            yield stem
            yield stem + "e"
            if len(stem) > 2 and stem[-1] == stem[-2]:
                yield stem[:-1]


def normalize_event_label(raw: str, lexicon: Lexicon | None = None) -> str:
    """Map an inflected event token to its lexicon root.

    >>> normalize_event_label("Collided")
    'collide'
    >>> normalize_event_label("teleported")
    UnknownLabel('teleport')
    """
    lexicon = lexicon or default_lexicon()
    token = str(raw).strip().lower()
    if not token:
        raise ValueError("empty event label")
    if token in lexicon:
        return token
    first_stem = None
    for cand in _stem_candidates(token):
        if first_stem is None:
            first_stem = cand
        if cand in lexicon:
            return cand
    return UnknownLabel(first_stem or token)


@dataclass(frozen=True)
class SceneObject:
    object_id: str
    shape: str
    color: str
    material: str


@dataclass(frozen=True)
class EventNode:
    node_id: str
    event_label: str
    participants: tuple[str, ...] = ()
    raw_description: str | None = None
    composite: bool = False

    @property
    def known(self) -> bool:
        return not isinstance(self.event_label, UnknownLabel)


@dataclass(frozen=True)
class ScoredEdge:
    src: str
    dst: str
    score: int


@dataclass(frozen=True)
class CausalEventGraph:
    ceg_id: str
    scene_id: str
    nodes: dict[str, EventNode] = field(default_factory=dict)
    edges: tuple[ScoredEdge, ...] = ()
    objects: dict[str, SceneObject] = field(default_factory=dict)


def _prop(rec: Mapping, name: str, index: int, normalize: bool) -> str:
    value = rec.get(name)
    if not isinstance(value, str):
        raise CorpusValidationError(f"objects.{name}", f"missing or not a string: {value!r}", index)
    value = value.strip().lower()
    if normalize:
        value = PROPERTY_SYNONYMS[name].get(value, value)
    if value not in _VOCAB[name]:
        raise CorpusValidationError(f"objects.{name}", f"unknown value {value!r}", index)
    return value


def _require(rec: Mapping, key: str, index: int, prefix: str = ""):
    if key not in rec:
        raise CorpusValidationError(prefix + key, "missing", index)
    return rec[key]


def record_to_ceg(
    rec: Mapping, index: int = 0, *, normalize: bool = False, lexicon: Lexicon | None = None
) -> CausalEventGraph:
    """Validate one corpus record and build its graph."""
    lexicon = lexicon or default_lexicon()
    if not isinstance(rec, Mapping):
        raise CorpusValidationError("<record>", "expected an object", index)
    ceg_id = str(_require(rec, "ceg_id", index))
    scene_id = str(_require(rec, "scene_id", index))

    objects: dict[str, SceneObject] = {}
    for o in rec.get("objects", []):
        oid = str(_require(o, "object_id", index, "objects."))
        if oid in objects:
            raise CorpusValidationError("objects.object_id", f"duplicate {oid!r}", index)
        objects[oid] = SceneObject(
            oid,
            _prop(o, "shape", index, normalize),
            _prop(o, "color", index, normalize),
            _prop(o, "material", index, normalize),
        )

    nodes: dict[str, EventNode] = {}
    for n in _require(rec, "nodes", index):
        nid = str(_require(n, "node_id", index, "nodes."))
        if nid in nodes:
            raise CorpusValidationError("nodes.node_id", f"duplicate {nid!r}", index)
        raw_label = _require(n, "event_label", index, "nodes.")
        try:
            label = normalize_event_label(raw_label, lexicon)
        except ValueError:
            raise CorpusValidationError("nodes.event_label", "empty label", index) from None
        parts = tuple(str(p) for p in n.get("participants", []))
        if len(parts) > 2:
            raise CorpusValidationError("nodes.participants", f"{nid}: more than 2 participants", index)
        for p in parts:
            if p not in objects:
                raise CorpusValidationError("nodes.participants", f"{nid}: unknown object {p!r}", index)
        composite = bool(n.get("composite", False))
        if not isinstance(label, UnknownLabel) and not composite and len(parts) != lexicon.arity[label]:
            raise CorpusValidationError(
                "nodes.participants",
                f"{nid}: {label!r} takes {lexicon.arity[label]} participant(s), got {len(parts)}",
                index,
            )
        if isinstance(label, UnknownLabel):
            logger.info("record %d node %s: event label %r not in lexicon", index, nid, str(label))
        nodes[nid] = EventNode(nid, label, parts, n.get("raw_description"), composite)

    edges = []
    for e in _require(rec, "edges", index):
        src, dst = str(_require(e, "src", index, "edges.")), str(_require(e, "dst", index, "edges."))
        score = _require(e, "score", index, "edges.")
        if isinstance(score, bool) or not isinstance(score, int) or not 1 <= score <= 5:
            raise CorpusValidationError("edges.score", f"{src}->{dst}: {score!r} not an integer in [1, 5]", index)
        if src == dst:
            raise CorpusValidationError("edges.src", f"self-loop on {src!r}", index)
        for end in (src, dst):
            if end not in nodes:
                raise CorpusValidationError("edges", f"unknown node {end!r}", index)
        edges.append(ScoredEdge(src, dst, score))

    return CausalEventGraph(ceg_id, scene_id, nodes, tuple(edges), objects)


def parse_corpus(
    path: str | Path, *, normalize: bool = False, lexicon: Lexicon | None = None
) -> list[CausalEventGraph]:
    """Read a corpus file, keeping record order."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorpusParseError(f"malformed JSON at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, list):
        raise CorpusParseError("corpus must be a JSON array")
    return [record_to_ceg(rec, i, normalize=normalize, lexicon=lexicon) for i, rec in enumerate(data)]


def ceg_to_record(ceg: CausalEventGraph) -> dict:
    nodes = []
    for n in ceg.nodes.values():
        rec = {"node_id": n.node_id, "event_label": str(n.event_label), "participants": list(n.participants)}
        if n.raw_description is not None:
            rec["raw_description"] = n.raw_description
        if n.composite:
            rec["composite"] = True
        nodes.append(rec)
    return {
        "ceg_id": ceg.ceg_id,
        "scene_id": ceg.scene_id,
        "objects": [
            {"object_id": o.object_id, "shape": o.shape, "color": o.color, "material": o.material}
            for o in ceg.objects.values()
        ],
        "nodes": nodes,
        "edges": [{"src": e.src, "dst": e.dst, "score": e.score} for e in ceg.edges],
    }


def dump_corpus(cegs: Iterable[CausalEventGraph], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([ceg_to_record(c) for c in cegs], fh, indent=1, sort_keys=True)
        fh.write("\n")


def filter_composite_nodes(ceg: CausalEventGraph) -> CausalEventGraph:
    """Drop multi-event nodes and every edge touching them."""
    keep = {k: n for k, n in ceg.nodes.items() if not n.composite}
    if len(keep) == len(ceg.nodes):
        return ceg
    edges = tuple(e for e in ceg.edges if e.src in keep and e.dst in keep)
    return replace(ceg, nodes=keep, edges=edges)
