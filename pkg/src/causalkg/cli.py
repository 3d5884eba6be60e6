"""Command line entry point: ``causalkg <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input or configuration and 1
for runtime failures. ``CAUSALKG_LOG_LEVEL`` sets the log level.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

logger = logging.getLogger("causalkg")


class UsageError(Exception):
    pass


def _config(args) -> dict:
    if not getattr(args, "config", None):
        return {}
    try:
        return json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc


def _emit(doc) -> None:
    print(json.dumps(doc, indent=1, sort_keys=True, default=str))


# -- subcommands ------------------------------------------------------------


def cmd_synth(args) -> None:
    from .synthetic import gen_synthetic

    recs = gen_synthetic(args.n_graphs, args.confounder_rate, args.seed or 0, args.out)
    _emit({"graphs": len(recs), "out": args.out})


def cmd_ingest(args) -> None:
    from .network import save_networks
    from .pipeline import ingest_stage

    networks, rejected = ingest_stage(args.corpus, args.normalize)
    save_networks(networks, args.out)
    (Path(args.out) / "rejected.json").write_text(json.dumps(rejected, indent=1, sort_keys=True) + "\n")
    _emit({"networks": len(networks), "rejected": len(rejected), "out": args.out})


def cmd_split(args) -> None:
    from .network import load_networks
    from .split import apply_backdoor_regime, build_manifest, save_manifest

    nets = load_networks(args.networks)
    cfg = _config(args)
    ratio = cfg.get("ratio", args.ratio)
    base = build_manifest(nets, ratio, args.seed or 0, cfg.get("test_fraction", 0.2))
    m = apply_backdoor_regime(base, nets, args.regime, strict=not args.loose)
    save_manifest(m, args.out)
    _emit({"train": len(m.train_cegs), "test": len(m.test_cegs), "test_links": len(m.test_links()), "out": args.out})


def cmd_backdoor(args) -> None:
    from .network import enumerate_backdoor_paths, load_network, maximum_backdoor_set, sufficient_backdoor_set

    cn = load_network(args.networks, args.cn)
    kw = {"max_len": args.max_len, "strict": not args.loose}
    paths = enumerate_backdoor_paths(cn, args.cause, args.effect, **kw)
    _emit(
        {
            "pair": [args.cause, args.effect],
            "paths": [list(p.nodes) for p in paths],
            "sufficient": sorted(sufficient_backdoor_set(cn, args.cause, args.effect, **kw).members),
            "maximum": sorted(maximum_backdoor_set(cn, args.cause, args.effect, **kw).members),
        }
    )


def cmd_compile(args) -> None:
    from .kg import compile_kg, kg_stats, save_kg, write_quads
    from .network import load_networks
    from .pipeline import TASKS, training_parts
    from .pipeline import test_links as held_out

    by_id = {cn.cn_id: cn for cn in load_networks(args.networks)}
    if args.split:
        from .split import load_manifest

        m = load_manifest(args.split)
        kg = compile_kg(training_parts(m, by_id), args.subgraph)
    else:
        m = None
        kg = compile_kg(by_id.values(), args.subgraph)
    save_kg(kg, args.out)
    if m is not None:
        for task in TASKS:
            write_quads(held_out(m, by_id, task), Path(args.out) / f"test_{task}.quads.tsv")
    stats = kg_stats(kg)
    (Path(args.out) / "stats.json").write_text(json.dumps(stats, indent=1) + "\n")
    _emit(stats)


def _test_quads(kg_dir: Path) -> list:
    from .kg import read_quads

    out = []
    for p in sorted(kg_dir.glob("test_*.quads.tsv")):
        out.extend(read_quads(p))
    return out


def cmd_train(args) -> None:
    from .kg import load_kg
    from .kge.presets import load_preset
    from .kge.training import TrainConfig, train
    from .pipeline import model_vocabulary

    kg_dir = Path(args.kg)
    kg = load_kg(kg_dir)
    cfg = _config(args)
    if args.preset:
        regime, task, subgraph = args.preset.split("/")
        tc = load_preset(regime, task, subgraph, args.scorer, **cfg)
    else:
        tc = TrainConfig(**cfg)
    if args.seed is not None:
        tc.seed = args.seed
    ents, rels = model_vocabulary(kg, _test_quads(kg_dir))
    model, trace = train(kg.quads, tc, args.scorer, args.weighted, entities=ents, relations=rels)
    path = model.save(args.out)
    Path(args.out).with_suffix(".trace.json").write_text(
        json.dumps({"train_config": tc.to_dict(), "loss_trace": trace}, indent=1) + "\n"
    )
    _emit({"model": str(path), "final_loss": trace[-1], "epochs": len(trace)})


def cmd_eval(args) -> None:
    from .evaluation import EvalTask, evaluate
    from .kg import load_kg, read_quads
    from .kge.model import EmbeddingModel

    model = EmbeddingModel.load(args.model)
    kg_dir = Path(args.kg)
    kg = load_kg(kg_dir)
    links = read_quads(kg_dir / f"test_{args.task}.quads.tsv")
    filt = kg.triples() | {q.triple for q in _test_quads(kg_dir)}
    rep = evaluate(model, EvalTask(args.task, links, filt), sides=args.sides, tags={"model": Path(args.model).stem})
    if args.out:
        rep.save(args.out)
    _emit(rep.to_dict(per_link=False))


def cmd_report(args) -> None:
    from .pipeline import report

    table = report(*args.runs)
    _emit({"rows": table.rows, "missing": table.missing})


def cmd_run(args) -> None:
    from .pipeline import PipelineConfig, run

    cfg = _config(args)
    if args.corpus:
        cfg["corpus"] = args.corpus
    if args.seed is not None:
        cfg["seed"] = args.seed
    if "corpus" not in cfg:
        raise UsageError("run needs a corpus (config key 'corpus' or --corpus)")
    out = run(PipelineConfig.from_dict(cfg), args.out)
    _emit(json.loads((out / "run.json").read_text()))


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--deterministic", action="store_true", help="single-threaded numerics")

    p = argparse.ArgumentParser(prog="causalkg", description="Causal knowledge graph embedding pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic confounded corpus")
    s.add_argument("--n-graphs", type=int, default=200)
    s.add_argument("--confounder-rate", type=float, default=0.8)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", parents=[common], help="corpus JSON to causal networks")
    s.add_argument("corpus")
    s.add_argument("--normalize", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("split", parents=[common], help="corpus and Markov split with a backdoor regime")
    s.add_argument("networks")
    s.add_argument("--ratio", type=float, default=0.8)
    s.add_argument("--regime", default="with_backdoor", choices=["with_backdoor", "no_sufficient", "no_maximum"])
    s.add_argument("--loose", action="store_true", help="textbook backdoor paths (only the cause end constrained)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("backdoor", parents=[common], help="backdoor paths and sets for one pair")
    s.add_argument("networks")
    s.add_argument("--cn", required=True)
    s.add_argument("--cause", required=True)
    s.add_argument("--effect", required=True)
    s.add_argument("--max-len", type=int)
    s.add_argument("--loose", action="store_true")
    s.add_argument("--out", help="unused; results go to stdout")
    s.set_defaults(func=cmd_backdoor)

    s = sub.add_parser("compile", parents=[common], help="compile networks into a quad store")
    s.add_argument("networks")
    s.add_argument("--split", help="manifest directory; compiles its training side")
    s.add_argument("--subgraph", default="C", choices=["C", "CT", "CTP"])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("train", parents=[common], help="train an embedding model")
    s.add_argument("kg")
    s.add_argument("--scorer", default="TransE", choices=["TransE", "DistMult", "HolE", "ComplEx"])
    s.add_argument("--weighted", action="store_true")
    s.add_argument("--preset", help="regime/task/subgraph, e.g. with_backdoor/prediction/C")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", parents=[common], help="filtered ranking of held-out links")
    s.add_argument("model")
    s.add_argument("--kg", required=True)
    s.add_argument("--task", default="causal_prediction", choices=["causal_prediction", "causal_explanation"])
    s.add_argument("--sides", default="tail", choices=["tail", "both"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("report", parents=[common], help="comparison tables from run directories")
    s.add_argument("runs", nargs="+")
    s.add_argument("--out", help="unused; tables go into the first run directory")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("run", parents=[common], help="full pipeline from a config")
    s.add_argument("--corpus")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_run)
    return p


def _is_validation(exc: BaseException) -> bool:
    from .ingest import CorpusError
    from .network import NetworkRejected
    from .pipeline import PipelineError
    from .split import ManifestError

    if isinstance(exc, PipelineError):
        exc = exc.cause if isinstance(exc.cause, BaseException) else exc
    return isinstance(exc, (UsageError, CorpusError, ManifestError, NetworkRejected, KeyError, ValueError))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=os.environ.get("CAUSALKG_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.deterministic:
        for var in THREAD_VARS:
            os.environ[var] = "1"
    try:
        args.func(args)
    except Exception as exc:
        code = 2 if _is_validation(exc) else 1
        print(f"causalkg {args.command}: {exc}", file=sys.stderr)
        logger.debug("failure", exc_info=True)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
