"""Compiling causal networks into a weighted quad store.

Every causal edge a -> b with weight w becomes four quads::

    (a, causes, b, w)            (b, causedBy, a, w)
    (a, causesType, type(b), w)  (b, causedByType, type(a), w)

where type(x) is the event label of x. Subgraph ``CT`` adds ``rdf_type``
quads for event instances; ``CTP`` further adds scene membership,
participants and object properties. Context quads carry weight 1.0.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Mapping, NamedTuple

from .network import CausalNetwork, Edge

logger = logging.getLogger(__name__)

Subgraph = Literal["C", "CT", "CTP"]
SUBGRAPHS: tuple[Subgraph, ...] = ("C", "CT", "CTP")

CAUSES, CAUSED_BY, CAUSES_TYPE, CAUSED_BY_TYPE = "causes", "causedBy", "causesType", "causedByType"
RDF_TYPE, INCLUDES, HAS_PARTICIPANT, HAS_PROPERTY = "rdf_type", "includes", "hasParticipant", "hasProperty"

EVENT_TYPE_CLASS = "EventType"
SCENE_CLASS = "Scene"
OBJECT_CLASS = "Object"
PROPERTY_CLASS = "Property"


@dataclass(frozen=True)
class RelationVocabulary:
    causal: tuple[str, ...] = (CAUSES, CAUSED_BY, CAUSES_TYPE, CAUSED_BY_TYPE)
    contextual: tuple[str, ...] = (RDF_TYPE, INCLUDES, HAS_PARTICIPANT, HAS_PROPERTY)
    reserved: tuple[str, str] = ("reserved_1", "reserved_2")
    namespaces: Mapping[str, str] = field(
        default_factory=lambda: {
            CAUSES: "causal:causes",
            CAUSED_BY: "causal:causedBy",
            CAUSES_TYPE: "causal:causesType",
            CAUSED_BY_TYPE: "causal:causedByType",
            RDF_TYPE: "rdf:type",
            INCLUDES: "so:includes",
            HAS_PARTICIPANT: "so:hasParticipant",
            HAS_PROPERTY: "ssn:hasProperty",
        }
    )

    def __post_init__(self):
        names = self.relations
        if len(names) != 10 or len(set(names)) != 10:
            raise ValueError(f"relation vocabulary must hold 10 distinct relations, got {names}")

    @property
    def relations(self) -> tuple[str, ...]:
        return self.causal + self.contextual + tuple(self.reserved)

    def __contains__(self, rel: object) -> bool:
        return rel in self.relations


DEFAULT_VOCABULARY = RelationVocabulary()


class Quad(NamedTuple):
    head: str
    relation: str
    tail: str
    weight: float

    @property
    def triple(self) -> tuple[str, str, str]:
        return self.head, self.relation, self.tail


@dataclass(frozen=True)
class CausalKG:
    quads: tuple[Quad, ...]
    entities: Mapping[str, str]  # entity -> class
    subgraph_tag: Subgraph = "C"

    def triples(self) -> set[tuple[str, str, str]]:
        return {q.triple for q in self.quads}

    def __len__(self) -> int:
        return len(self.quads)


def event_entity(cn_id: str, node_id: str) -> str:
    return f"event/{cn_id}/{node_id}"


def scene_entity(scene_id: str) -> str:
    return f"scene/{scene_id}"


def object_entity(scene_id: str, object_id: str) -> str:
    return f"object/{scene_id}/{object_id}"


def property_entity(kind: str, value: str) -> str:
    return f"{kind}/{value}"


def causal_quads(cn: CausalNetwork, edges: Mapping[Edge, float]) -> Iterable[Quad]:
    for (s, d), w in sorted(edges.items()):
        a, b = cn.nodes[s], cn.nodes[d]
        if not (a.known and b.known):
            logger.info("%s: edge %s->%s skipped, unknown event label", cn.cn_id, s, d)
            continue
        ea, eb = event_entity(cn.cn_id, s), event_entity(cn.cn_id, d)
        w = float(w)
        yield Quad(ea, CAUSES, eb, w)
        yield Quad(eb, CAUSED_BY, ea, w)
        yield Quad(ea, CAUSES_TYPE, str(b.event_label), w)
        yield Quad(eb, CAUSED_BY_TYPE, str(a.event_label), w)


def compile_kg(
    parts: Iterable[CausalNetwork | tuple[CausalNetwork, Mapping[Edge, float] | None]],
    subgraph: Subgraph = "C",
    vocabulary: RelationVocabulary = DEFAULT_VOCABULARY,
) -> CausalKG:
    """Build the quad store for a collection of networks.

    ``parts`` holds networks, or (network, edge subset) pairs when only
    some edges should become causal links (Markov-train sides). Context
    quads always cover every known node of the network.
    """
    if subgraph not in SUBGRAPHS:
        raise ValueError(f"unknown subgraph {subgraph!r}")
    quads: set[Quad] = set()
    classes: dict[str, str] = {}

    for part in parts:
        cn, edges = (part, None) if isinstance(part, CausalNetwork) else part
        edges = cn.edges if edges is None else edges
        for q in causal_quads(cn, edges):
            quads.add(q)
        for nid, node in cn.nodes.items():
            if node.known:
                classes[event_entity(cn.cn_id, nid)] = str(node.event_label)
        classes[scene_entity(cn.scene_id)] = SCENE_CLASS
        for obj in cn.objects.values():
            classes[object_entity(cn.scene_id, obj.object_id)] = OBJECT_CLASS
        if subgraph == "C":
            continue
        for nid, node in cn.nodes.items():
            if not node.known:
                continue
            ev = event_entity(cn.cn_id, nid)
            quads.add(Quad(ev, RDF_TYPE, str(node.event_label), 1.0))
            if subgraph != "CTP":
                continue
            quads.add(Quad(scene_entity(cn.scene_id), INCLUDES, ev, 1.0))
            for oid in node.participants:
                quads.add(Quad(ev, HAS_PARTICIPANT, object_entity(cn.scene_id, oid), 1.0))
        if subgraph == "CTP":
            for obj in cn.objects.values():
                oe = object_entity(cn.scene_id, obj.object_id)
                for kind in ("shape", "color", "material"):
                    quads.add(Quad(oe, HAS_PROPERTY, property_entity(kind, getattr(obj, kind)), 1.0))

    for q in quads:
        if q.relation not in vocabulary:
            raise ValueError(f"relation {q.relation!r} outside the vocabulary")
    ordered = tuple(sorted(quads))
    entities: dict[str, str] = {}
    for q in ordered:
        for ent in (q.head, q.tail):
            if ent in entities:
                continue
            entities[ent] = classes.get(ent) or _class_of(ent, q, ent == q.tail)
    return CausalKG(ordered, dict(sorted(entities.items())), subgraph)


def _class_of(entity: str, q: Quad, is_tail: bool) -> str:
    if is_tail and q.relation in (CAUSES_TYPE, CAUSED_BY_TYPE, RDF_TYPE):
        return EVENT_TYPE_CLASS
    if is_tail and q.relation == HAS_PROPERTY:
        return PROPERTY_CLASS
    raise ValueError(f"cannot classify entity {entity!r}")


def kg_stats(kg: CausalKG) -> dict[str, int]:
    return {
        "links": len(kg.quads),
        "entities": len(kg.entities),
        "entity_types": len(set(kg.entities.values())),
        "relations": len({q.relation for q in kg.quads}),
    }


def closure_violations(kg: CausalKG) -> list[str]:
    """Full scan for broken inverse/reification closure and stray entities."""
    have = set(kg.quads)
    out = []
    for q in kg.quads:
        for ent in (q.head, q.tail):
            if ent not in kg.entities:
                out.append(f"undeclared entity {ent!r} in {q}")
        if q.relation in (RDF_TYPE, INCLUDES, HAS_PARTICIPANT, HAS_PROPERTY) and q.weight != 1.0:
            out.append(f"context quad with weight {q.weight}: {q}")
        if q.relation != CAUSES:
            continue
        a, b, w = q.head, q.tail, q.weight
        required = [
            Quad(b, CAUSED_BY, a, w),
            Quad(a, CAUSES_TYPE, kg.entities.get(b, "?"), w),
            Quad(b, CAUSED_BY_TYPE, kg.entities.get(a, "?"), w),
        ]
        out.extend(f"missing {r} for {q}" for r in required if r not in have)
    return out


def task_quads(cn: CausalNetwork, links: Mapping[Edge, float], task: str) -> list[Quad]:
    """Evaluation queries for held-out links.

    ``prediction``: (cause, causesType, type(effect));
    ``explanation``: (effect, causedByType, type(cause)).
    """
    rel = {"prediction": CAUSES_TYPE, "explanation": CAUSED_BY_TYPE}[task]
    return [q for q in causal_quads(cn, links) if q.relation == rel]


# -- files ------------------------------------------------------------------


def save_kg(kg: CausalKG, directory: str | Path, name: str = "kg") -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    qpath, cpath = directory / f"{name}.quads.tsv", directory / f"{name}.classes.tsv"
    write_quads(kg.quads, qpath)
    with open(cpath, "w", encoding="utf-8") as fh:
        for ent, cls in kg.entities.items():
            fh.write(f"{ent}\t{cls}\n")
    return qpath, cpath


def write_quads(quads: Iterable[Quad], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in quads:
            fh.write(f"{q.head}\t{q.relation}\t{q.tail}\t{q.weight!r}\n")


def read_quads(path: str | Path) -> list[Quad]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                h, r, t, w = line.rstrip("\n").split("\t")
                out.append(Quad(h, r, t, float(w)))
    return out


def load_kg(directory: str | Path, name: str = "kg", subgraph: Subgraph = "C") -> CausalKG:
    directory = Path(directory)
    quads = tuple(read_quads(directory / f"{name}.quads.tsv"))
    entities = {}
    with open(directory / f"{name}.classes.tsv", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                ent, cls = line.rstrip("\n").split("\t")
                entities[ent] = cls
    return CausalKG(quads, entities, subgraph)


def entity_classes(kg: CausalKG) -> dict[str, list[str]]:
    by_class: dict[str, list[str]] = defaultdict(list)
    for ent, cls in kg.entities.items():
        by_class[cls].append(ent)
    return dict(by_class)
