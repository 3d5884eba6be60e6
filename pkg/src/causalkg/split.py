"""Corpus-level and Markov-based train/test splits.

Whole networks are first divided into train and test graphs. Each test
graph is then cut into Markov-train edges and held-out Markov-test links:
a link u -> v can be held out only if u has a parent, and every parent
edge p -> u stays on the training side, so the direct causes of every
held-out link remain observable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Literal, Mapping, NamedTuple, Sequence

import numpy as np

from .network import CausalNetwork, Edge, backdoor_edges, read_edge_tsv

Regime = Literal["with_backdoor", "no_sufficient", "no_maximum"]
REGIMES: tuple[Regime, ...] = ("with_backdoor", "no_maximum", "no_sufficient")
REGIME_VARIANT = {"no_sufficient": "sufficient", "no_maximum": "maximum"}

DEFAULT_RATIO = 0.8
DEFAULT_TEST_FRACTION = 0.2


class ManifestError(ValueError):
    pass


def split_corpus(
    networks: Sequence[CausalNetwork], ratio: float = DEFAULT_RATIO, seed: int = 0
) -> tuple[list[CausalNetwork], list[CausalNetwork]]:
    """Seeded shuffle; the first ``ceil(ratio * n)`` networks go to train."""
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    if not networks:
        raise ValueError("cannot split an empty corpus")
    n = len(networks)
    n_train = math.ceil(round(ratio * n, 9))
    order = np.random.default_rng(seed).permutation(n)
    train = [networks[i] for i in order[:n_train]]
    test = [networks[i] for i in order[n_train:]]
    return train, test


class MarkovSplit(NamedTuple):
    train_edges: dict[Edge, float]
    test_links: dict[Edge, float]

    @property
    def empty(self) -> bool:
        return not self.test_links


def markov_candidates(cn: CausalNetwork) -> list[Edge]:
    return sorted((u, v) for (u, v) in cn.edges if cn.parents(u))


def markov_split(cn: CausalNetwork, seed: int = 0, test_fraction: float = DEFAULT_TEST_FRACTION) -> MarkovSplit:
    """Hold out up to ``ceil(test_fraction * #candidates)`` links of one network."""
    candidates = markov_candidates(cn)
    if not candidates:
        return MarkovSplit(dict(cn.edges), {})
    target = math.ceil(round(test_fraction * len(candidates), 9))
    rng = np.random.default_rng(seed)
    chosen: set[Edge] = set()
    pinned: set[Edge] = set()
    for i in rng.permutation(len(candidates)):
        if len(chosen) >= target:
            break
        u, v = candidates[i]
        parent_edges = {(p, u) for p in cn.parents(u)}
        if (u, v) in pinned or parent_edges & chosen:
            continue
        chosen.add((u, v))
        pinned |= parent_edges
    train = {e: w for e, w in cn.edges.items() if e not in chosen}
    test = {e: cn.edges[e] for e in sorted(chosen)}
    return MarkovSplit(train, test)


@dataclass
class TestGraphSplit:
    cn_id: str
    markov_train_edges: dict[Edge, float]
    markov_test_links: dict[Edge, float]
    removed_edges: set[Edge] = field(default_factory=set)


@dataclass
class SplitManifest:
    train_cegs: list[str]
    test_cegs: list[str]
    tests: dict[str, TestGraphSplit]
    seed: int
    variant: Regime = "with_backdoor"
    ratio: float = DEFAULT_RATIO
    test_fraction: float = DEFAULT_TEST_FRACTION

    def test_links(self) -> list[tuple[str, Edge, float]]:
        return [(cid, e, w) for cid in self.test_cegs for e, w in self.tests[cid].markov_test_links.items()]


def _graph_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, index])


def build_manifest(
    networks: Sequence[CausalNetwork],
    ratio: float = DEFAULT_RATIO,
    seed: int = 0,
    test_fraction: float = DEFAULT_TEST_FRACTION,
) -> SplitManifest:
    train, test = split_corpus(networks, ratio, seed)
    tests = {}
    for i, cn in enumerate(test):
        ms = markov_split(cn, _graph_seed(seed, i), test_fraction)
        tests[cn.cn_id] = TestGraphSplit(cn.cn_id, ms.train_edges, ms.test_links)
    return SplitManifest(
        [cn.cn_id for cn in train], [cn.cn_id for cn in test], tests, seed, "with_backdoor", ratio, test_fraction
    )


def _by_id(networks: Iterable[CausalNetwork] | Mapping[str, CausalNetwork]) -> dict[str, CausalNetwork]:
    if isinstance(networks, Mapping):
        return dict(networks)
    return {cn.cn_id: cn for cn in networks}


def apply_backdoor_regime(
    manifest: SplitManifest,
    networks: Iterable[CausalNetwork] | Mapping[str, CausalNetwork],
    variant: Regime,
    *,
    max_len: int | None = None,
    strict: bool = True,
) -> SplitManifest:
    """Delete backdoor edges of every held-out link from the Markov-train side."""
    if manifest.variant != "with_backdoor":
        raise ManifestError(f"regimes apply to a with_backdoor manifest, got {manifest.variant!r}")
    if variant == "with_backdoor":
        return manifest
    if variant not in REGIME_VARIANT:
        raise ValueError(f"unknown regime {variant!r}")
    nets = _by_id(networks)
    tests = {}
    for cid in manifest.test_cegs:
        ts = manifest.tests[cid]
        doomed = backdoor_edges(nets[cid], ts.markov_test_links, REGIME_VARIANT[variant], max_len, strict=strict)
        doomed -= set(ts.markov_test_links)
        train = {e: w for e, w in ts.markov_train_edges.items() if e not in doomed}
        tests[cid] = TestGraphSplit(cid, train, dict(ts.markov_test_links), doomed & set(ts.markov_train_edges))
    out = replace(manifest, tests=tests, variant=variant)
    validate_manifest(out, nets)
    return out


def validate_manifest(
    manifest: SplitManifest, networks: Iterable[CausalNetwork] | Mapping[str, CausalNetwork]
) -> None:
    """Raise :class:`ManifestError` if any split invariant is broken."""
    nets = _by_id(networks)
    train, test = set(manifest.train_cegs), set(manifest.test_cegs)
    if train & test:
        raise ManifestError(f"graphs in both train and test: {sorted(train & test)}")
    total = len(train) + len(test)
    if total and abs(len(train) - manifest.ratio * total) > 1:
        raise ManifestError(f"train share {len(train)}/{total} is off ratio {manifest.ratio}")
    for cid in manifest.test_cegs:
        ts = manifest.tests[cid]
        cn = nets[cid]
        overlap = set(ts.markov_test_links) & set(ts.markov_train_edges)
        if overlap:
            raise ManifestError(f"{cid}: links on both sides {sorted(overlap)}")
        for (u, v) in ts.markov_test_links:
            for p in cn.parents(u):
                e = (p, u)
                if e not in ts.removed_edges and e not in ts.markov_train_edges:
                    raise ManifestError(f"{cid}: parent edge {e} of held-out link {(u, v)} not in training")


def leakage(manifest: SplitManifest, train_edge_sets: Mapping[str, Iterable[Edge]] | None = None) -> list:
    """Held-out links found in any training edge set (exhaustive scan)."""
    held = {(cid, e) for cid, e, _ in manifest.test_links()}
    sets = dict(train_edge_sets or {})
    for cid in manifest.test_cegs:
        sets.setdefault(cid, manifest.tests[cid].markov_train_edges)
    return sorted((cid, e) for cid, edges in sets.items() for e in edges if (cid, e) in held)


# -- files ------------------------------------------------------------------


def _write_edges(path: Path, edges: Mapping[Edge, float] | Iterable[Edge]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if isinstance(edges, Mapping):
            for (s, d), w in sorted(edges.items()):
                fh.write(f"{s}\t{d}\t{w!r}\n")
        else:
            for s, d in sorted(edges):
                fh.write(f"{s}\t{d}\t\n")


def save_manifest(manifest: SplitManifest, directory: str | Path) -> Path:
    directory = Path(directory)
    (directory / "edges").mkdir(parents=True, exist_ok=True)
    tests = []
    for cid in manifest.test_cegs:
        ts = manifest.tests[cid]
        files = {
            "markov_train_edges": f"edges/{cid}.markov_train.tsv",
            "markov_test_links": f"edges/{cid}.markov_test.tsv",
            "removed_edges": f"edges/{cid}.removed.tsv",
        }
        _write_edges(directory / files["markov_train_edges"], ts.markov_train_edges)
        _write_edges(directory / files["markov_test_links"], ts.markov_test_links)
        _write_edges(directory / files["removed_edges"], ts.removed_edges)
        tests.append({"cn_id": cid, **files})
    doc = {
        "train_cegs": manifest.train_cegs,
        "test_cegs": manifest.test_cegs,
        "tests": tests,
        "seed": manifest.seed,
        "variant": manifest.variant,
        "ratio": manifest.ratio,
        "test_fraction": manifest.test_fraction,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return path


def load_manifest(directory: str | Path) -> SplitManifest:
    directory = Path(directory)
    doc = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    tests = {}
    for t in doc["tests"]:
        removed = set(read_edge_tsv_keys(directory / t["removed_edges"]))
        tests[t["cn_id"]] = TestGraphSplit(
            t["cn_id"],
            read_edge_tsv(directory / t["markov_train_edges"]),
            read_edge_tsv(directory / t["markov_test_links"]),
            removed,
        )
    return SplitManifest(
        doc["train_cegs"], doc["test_cegs"], tests, doc["seed"], doc["variant"], doc["ratio"], doc["test_fraction"]
    )


def read_edge_tsv_keys(path: Path) -> list[Edge]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                s, d = line.rstrip("\n").split("\t")[:2]
                out.append((s, d))
    return out
