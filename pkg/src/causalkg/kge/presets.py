"""Shipped hyperparameter presets, keyed by regime, task, subgraph and scorer.

Cells that list no learning rate use :data:`DEFAULT_LR`; an Lp regularizer
listed without parameters uses p=2, lambda=1e-5.
"""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .training import TrainConfig

DEFAULT_LR = 5e-4


@lru_cache(maxsize=None)
def preset_table() -> dict:
    text = resources.files("causalkg").joinpath("data/presets.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_preset(regime: str, task: str, subgraph: str, scorer: str, **overrides) -> TrainConfig:
    try:
        cell = dict(preset_table()[regime][task][subgraph][scorer])
    except KeyError:
        raise KeyError(f"no preset for {regime}/{task}/{subgraph}/{scorer}") from None
    if cell["learning_rate"] is None:
        cell["learning_rate"] = DEFAULT_LR
    cell.update(overrides)
    return TrainConfig(**cell)
