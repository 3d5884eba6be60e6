"""End-to-end runs: ingest, split, backdoor regimes, compile, train, evaluate.

Run directory layout::

    run.json                       config, status, stage seeds
    networks/                      <cn_id>.tsv + .json per causal network
    splits/<regime>/               manifest.json + edges/*.tsv
    kg/<regime>/<subgraph>/        kg.quads.tsv, kg.classes.tsv, test_<task>.quads.tsv
    models/<subgraph>/<scorer>/    <model name>.bin + .json
    reports/<subgraph>/<scorer>/   <model name>.<task>.json
    summary.csv, hits.csv          comparison tables

Every random choice is seeded from the single config seed through
:func:`stage_seed`, which hashes the stage name (and any cell keys)
together with that seed.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import shutil
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .evaluation import EvalTask, RankReport, evaluate
from .ingest import filter_composite_nodes, parse_corpus
from .kg import (
    DEFAULT_VOCABULARY,
    EVENT_TYPE_CLASS,
    CausalKG,
    compile_kg,
    kg_stats,
    read_quads,
    save_kg,
    task_quads,
    write_quads,
)
from .kge.model import EmbeddingModel
from .kge.presets import load_preset
from .kge.training import TrainConfig, train
from .network import CausalNetwork, NetworkRejected, build_network, save_networks
from .split import REGIMES, SplitManifest, apply_backdoor_regime, build_manifest, save_manifest

logger = logging.getLogger(__name__)

REGIME_NAMES = {
    "with_backdoor": "WithBackdoor",
    "no_maximum": "WithoutMaximumBackdoor",
    "no_sufficient": "WithoutSufficientBackdoor",
}
WEIGHTING_NAMES = {"base": "Base", "weighted": "W"}
TASKS = {"causal_prediction": "prediction", "causal_explanation": "explanation"}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, input_id: str, cause: BaseException | str):
        self.stage, self.input_id, self.cause = stage, input_id, cause
        super().__init__(f"stage {stage!r} failed on {input_id!r}: {cause}")


def stage_seed(seed: int, stage: str, *keys: object) -> int:
    digest = hashlib.sha256(":".join([str(seed), stage, *map(str, keys)]).encode()).digest()
    return int.from_bytes(digest[:4], "little")


def model_name(regime: str, weighting: str) -> str:
    return f"CausalKGE-{WEIGHTING_NAMES[weighting]}-{REGIME_NAMES[regime]}"


@dataclass
class PipelineConfig:
    corpus: str
    ratio: float = 0.8
    seed: int = 0
    subgraphs: list[str] = field(default_factory=lambda: ["C"])
    regimes: list[str] = field(default_factory=lambda: list(REGIMES))
    weighting: list[str] = field(default_factory=lambda: ["base"])
    scorers: list[str] = field(default_factory=lambda: ["TransE"])
    train: str | dict = "paper"
    preset_task: str = "prediction"
    tasks: list[str] = field(default_factory=lambda: list(TASKS))
    candidate_pool: str = "all"
    normalize: bool = False
    test_fraction: float = 0.2
    strict_backdoor: bool = True

    def __post_init__(self):
        if isinstance(self.subgraphs, str):
            self.subgraphs = [self.subgraphs]
        for name, values, allowed in (
            ("subgraphs", self.subgraphs, ("C", "CT", "CTP")),
            ("regimes", self.regimes, REGIMES),
            ("weighting", self.weighting, tuple(WEIGHTING_NAMES)),
            ("scorers", self.scorers, ("TransE", "DistMult", "HolE", "ComplEx")),
            ("tasks", self.tasks, tuple(TASKS)),
        ):
            if not values:
                raise ValueError(f"{name} must not be empty")
            bad = [v for v in values if v not in allowed]
            if bad:
                raise ValueError(f"unknown {name}: {bad}")
        if self.candidate_pool not in ("all", "types"):
            raise ValueError("candidate_pool must be 'all' or 'types'")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must be in (0, 1)")
        if isinstance(self.train, dict):
            TrainConfig(**self.train)

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        doc = dict(doc)
        if "subgraph_tag" in doc:
            doc["subgraphs"] = doc.pop("subgraph_tag")
        return cls(**doc)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def train_config(self, regime: str, subgraph: str, scorer: str) -> TrainConfig:
        seed = stage_seed(self.seed, "train", scorer, subgraph)
        if isinstance(self.train, dict):
            return TrainConfig(**{**self.train, "seed": seed})
        if self.train == "paper":
            return load_preset(regime, self.preset_task, subgraph, scorer, seed=seed)
        raise ValueError(f"unknown train preset {self.train!r}")


# -- stages -----------------------------------------------------------------


def ingest_stage(corpus: str | Path, normalize: bool = False) -> tuple[list[CausalNetwork], dict[str, str]]:
    """Parse, drop composite nodes, build networks; return kept networks and rejections."""
    cegs = parse_corpus(corpus, normalize=normalize)
    networks, rejected = [], {}
    for ceg in cegs:
        try:
            networks.append(build_network(filter_composite_nodes(ceg)))
        except NetworkRejected as exc:
            rejected[ceg.ceg_id] = f"{exc.reason}: {exc.detail}"
    return networks, rejected


def training_parts(manifest: SplitManifest, networks: dict[str, CausalNetwork]):
    parts: list = [networks[cid] for cid in manifest.train_cegs]
    parts += [(networks[cid], manifest.tests[cid].markov_train_edges) for cid in manifest.test_cegs]
    return parts


def test_links(manifest: SplitManifest, networks: dict[str, CausalNetwork], task: str):
    out = []
    for cid in manifest.test_cegs:
        out.extend(task_quads(networks[cid], manifest.tests[cid].markov_test_links, TASKS[task]))
    return out


def model_vocabulary(kg: CausalKG, tests: Iterable) -> tuple[list[str], list[str]]:
    ents = set(kg.entities)
    rels = {q.relation for q in kg.quads}
    for q in tests:
        ents.update((q.head, q.tail))
        rels.add(q.relation)
    return sorted(ents), sorted(rels)


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def run(config: PipelineConfig, out_dir: str | Path) -> Path:
    """Execute every stage and write a self-describing run directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for sub in ("networks", "splits", "kg", "models", "reports"):
        shutil.rmtree(out / sub, ignore_errors=True)
    status = {"config": asdict(config), "status": "running"}
    _write_json(out / "run.json", status)
    (out / "STALE").write_text("run incomplete\n", encoding="utf-8")

    stage, input_id = "ingest", str(config.corpus)
    try:
        networks, rejected = ingest_stage(config.corpus, config.normalize)
        if not networks:
            raise ValueError("no causal networks survived pre-processing")
        save_networks(networks, out / "networks")
        by_id = {cn.cn_id: cn for cn in networks}
        status["ingest"] = {"networks": len(networks), "rejected": rejected}

        stage = "split"
        base = build_manifest(networks, config.ratio, stage_seed(config.seed, "split"), config.test_fraction)
        manifests = {}
        for regime in config.regimes:
            stage, input_id = "backdoor", regime
            manifests[regime] = apply_backdoor_regime(base, by_id, regime, strict=config.strict_backdoor)
            save_manifest(manifests[regime], out / "splits" / regime)
        status["split"] = {"train": len(base.train_cegs), "test": len(base.test_cegs), "test_links": len(base.test_links())}

        stage = "compile"
        kgs: dict[tuple[str, str], CausalKG] = {}
        tests: dict[tuple[str, str, str], list] = {}
        for regime in config.regimes:
            for sg in config.subgraphs:
                input_id = f"{regime}/{sg}"
                kg = compile_kg(training_parts(manifests[regime], by_id), sg, DEFAULT_VOCABULARY)
                kdir = out / "kg" / regime / sg
                save_kg(kg, kdir)
                kgs[regime, sg] = kg
                for task in config.tasks:
                    tests[regime, sg, task] = test_links(manifests[regime], by_id, task)
                    write_quads(tests[regime, sg, task], kdir / f"test_{task}.quads.tsv")
                _write_json(kdir / "stats.json", kg_stats(kg))

        for sg in config.subgraphs:
            for scorer in config.scorers:
                for regime in config.regimes:
                    kg = kgs[regime, sg]
                    all_tests = [q for task in config.tasks for q in tests[regime, sg, task]]
                    ents, rels = model_vocabulary(kg, all_tests)
                    filter_base = kg.triples() | {q.triple for q in all_tests}
                    if config.candidate_pool == "types":
                        pool = sorted(e for e, c in kg.entities.items() if c == EVENT_TYPE_CLASS)
                    else:
                        pool = None
                    tc = config.train_config(regime, sg, scorer)
                    for weighting in config.weighting:
                        name = model_name(regime, weighting)
                        stage, input_id = "train", f"{sg}/{scorer}/{name}"
                        model, trace = train(kg.quads, tc, scorer, weighting == "weighted", entities=ents, relations=rels)
                        mpath = out / "models" / sg / scorer / f"{name}.bin"
                        model.save(mpath)
                        _write_json(mpath.with_suffix(".trace.json"), {"train_config": tc.to_dict(), "loss_trace": trace})
                        stage = "eval"
                        for task in config.tasks:
                            tags = {
                                "regime": regime,
                                "scorer": scorer,
                                "subgraph": sg,
                                "weighted": weighting == "weighted",
                                "model": name,
                                "candidate_pool": config.candidate_pool,
                            }
                            rep = evaluate(model, EvalTask(task, tests[regime, sg, task], filter_base), pool, tags=tags)
                            rpath = out / "reports" / sg / scorer / f"{name}.{task}.json"
                            rpath.parent.mkdir(parents=True, exist_ok=True)
                            rep.save(rpath)

        stage, input_id = "report", str(out)
        report(out)
    except Exception as exc:
        status.update(status="failed", failure={"stage": stage, "input": input_id, "cause": repr(exc)})
        _write_json(out / "run.json", status)
        raise PipelineError(stage, input_id, exc) from exc

    status["status"] = "complete"
    _write_json(out / "run.json", status)
    (out / "STALE").unlink()
    return out


# -- reports ----------------------------------------------------------------


def load_reports(run_dirs: str | Path | Sequence[str | Path]) -> list[RankReport]:
    if isinstance(run_dirs, (str, Path)):
        run_dirs = [run_dirs]
    reps = []
    for d in run_dirs:
        for p in sorted(Path(d).glob("reports/**/*.json")):
            reps.append(RankReport.load(p))
    return reps


def inflation(with_bd: float, without: float) -> float:
    """Relative excess of the with-backdoor score, in percent."""
    return (with_bd - without) / without * 100.0


@dataclass
class ComparisonTable:
    rows: list[dict]
    missing: list[str]
    long_rows: list[dict]


def comparison_table(reports: Iterable[RankReport]) -> ComparisonTable:
    """Rows per (task, weighting, scorer, subgraph) with one MRR per regime, plus averages."""
    cells: dict[tuple, dict[str, RankReport]] = {}
    subgraphs_seen: dict[tuple, list[str]] = {}
    long_rows = []
    for rep in reports:
        t = rep.tags
        weighting = "weighted" if t.get("weighted") else "base"
        key = (t["task"], weighting, t["scorer"])
        cells.setdefault(key + (t["subgraph"],), {})[t["regime"]] = rep
        subs = subgraphs_seen.setdefault(key, [])
        if t["subgraph"] not in subs:
            subs.append(t["subgraph"])
        long_rows.append(
            {
                "task": t["task"],
                "weighting": weighting,
                "algorithm": t["scorer"],
                "subgraph": t["subgraph"],
                "regime": t["regime"],
                "mrr": rep.mrr,
                **{f"hits@{k}": rep.hits.get(k) for k in (1, 3, 10)},
                "n_links": rep.n_links,
            }
        )
    order = {"C": 0, "CT": 1, "CTP": 2}
    rows, missing = [], []
    for key in sorted(subgraphs_seen):
        subs = sorted(subgraphs_seen[key], key=lambda s: order.get(s, 9))
        per_regime: dict[str, list[float]] = {r: [] for r in REGIMES}
        for sg in subs:
            cell = cells[key + (sg,)]
            row = _row(key, sg, {r: (cell[r].mrr if r in cell else None) for r in REGIMES})
            for r in REGIMES:
                if r in cell:
                    per_regime[r].append(cell[r].mrr)
                else:
                    missing.append("/".join(key + (sg, r)))
            rows.append(row)
        if len(subs) > 1:
            avg = {r: (sum(v) / len(v) if len(v) == len(subs) else None) for r, v in per_regime.items()}
            rows.append(_row(key, "Average", avg))
    return ComparisonTable(rows, missing, long_rows)


def _row(key: tuple, subgraph: str, mrr: dict[str, float | None]) -> dict:
    task, weighting, scorer = key
    bd, mx, sf = mrr["with_backdoor"], mrr["no_maximum"], mrr["no_sufficient"]
    return {
        "task": task,
        "weighting": weighting,
        "algorithm": scorer,
        "subgraph": subgraph,
        "mrr_with_bd": bd,
        "mrr_without_bdmax": mx,
        "mrr_without_sufficient": sf,
        "inflation_vs_max_pct": inflation(bd, mx) if bd is not None and mx else None,
        "inflation_vs_sufficient_pct": inflation(bd, sf) if bd is not None and sf else None,
    }


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})


def report(run_dir: str | Path, *more: str | Path) -> ComparisonTable:
    """Build comparison tables from the reports under one or more run dirs.

    Writes ``summary.csv`` and ``hits.csv`` into the first directory.
    """
    table = comparison_table(load_reports([run_dir, *more]))
    out = Path(run_dir)
    _write_csv(out / "summary.csv", table.rows)
    _write_csv(out / "hits.csv", table.long_rows)
    if table.missing:
        logger.warning("missing report cells: %s", ", ".join(table.missing))
    return table


def load_test_quads(kg_dir: str | Path, task: str):
    return read_quads(Path(kg_dir) / f"test_{task}.quads.tsv")


def load_model(path: str | Path) -> EmbeddingModel:
    return EmbeddingModel.load(path)
