"""Causal knowledge graphs: backdoor-aware splits, compilation and weighted embeddings.

Submodules load on first attribute access so the command line can pin
numeric threading before numpy is imported.
"""
from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "parse_corpus": "ingest",
    "normalize_event_label": "ingest",
    "filter_composite_nodes": "ingest",
    "build_network": "network",
    "break_cycles": "network",
    "enumerate_backdoor_paths": "network",
    "sufficient_backdoor_set": "network",
    "maximum_backdoor_set": "network",
    "remove_backdoor_edges": "network",
    "split_corpus": "split",
    "markov_split": "split",
    "build_manifest": "split",
    "apply_backdoor_regime": "split",
    "compile_kg": "kg",
    "kg_stats": "kg",
    "train": "kge",
    "TrainConfig": "kge",
    "EmbeddingModel": "kge",
    "evaluate": "evaluation",
    "rank_link": "evaluation",
    "EvalTask": "evaluation",
    "PipelineConfig": "pipeline",
    "run": "pipeline",
    "report": "pipeline",
    "gen_synthetic": "synthetic",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name):
    if name in _EXPORTS:
        return getattr(import_module(f".{_EXPORTS[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
