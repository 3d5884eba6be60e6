"""Mini-batch training of embedding models with Adam."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ..kg import Quad
from .losses import loss as loss_fn, lp_regularizer, modulate
from .model import EmbeddingModel
from .scoring import WIDTH, get_scorer

logger = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    def __init__(self, epoch: int, batch: int, message: str):
        self.epoch, self.batch = epoch, batch
        super().__init__(f"epoch {epoch}, batch {batch}: {message}")


@dataclass
class TrainConfig:
    k: int = 100
    eta: int = 5
    epochs: int = 100
    batches_count: int = 10
    loss: str = "nll"
    regularizer: dict | None = None  # {"p": ..., "lambda": ...}
    learning_rate: float = 5e-4
    seed: int = 0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.eta < 1:
            raise ValueError(f"eta must be >= 1, got {self.eta}")
        if self.epochs < 1 or self.batches_count < 1:
            raise ValueError("epochs and batches_count must be >= 1")
        if self.loss not in ("nll", "multiclass_nll"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.regularizer is not None:
            # "LP" reported without parameters falls back to p=2, lambda=1e-5
            p = self.regularizer.get("p")
            lam = self.regularizer.get("lambda")
            self.regularizer = {"p": float(2 if p is None else p), "lambda": float(1e-5 if lam is None else lam)}
            if self.regularizer["lambda"] < 0:
                raise ValueError("regularizer lambda must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


class Adam:
    def __init__(self, params: Sequence[np.ndarray], lr: float, b1: float = 0.9, b2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads: Sequence[np.ndarray]) -> None:
        self.t += 1
        c1 = 1 - self.b1**self.t
        c2 = 1 - self.b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def corrupt(h: np.ndarray, t: np.ndarray, n_entities: int, eta: int, rng: np.random.Generator):
    """``eta`` corruptions per row: head or tail (fair coin) swapped for a different entity."""
    if n_entities < 2:
        raise ValueError("need at least two entities to corrupt")
    n = len(h)
    side = rng.random((n, eta)) < 0.5
    draw = rng.integers(0, n_entities - 1, size=(n, eta))
    hh = np.repeat(h[:, None], eta, axis=1)
    tt = np.repeat(t[:, None], eta, axis=1)
    orig = np.where(side, hh, tt)
    repl = draw + (draw >= orig)
    return np.where(side, repl, hh), np.where(side, tt, repl)


def negative_sample(quad: Quad, entity_pool: Sequence[str], eta: int, seed: int = 0) -> list[Quad]:
    """Corruptions of a single quad, drawn from ``entity_pool``."""
    pool = list(dict.fromkeys(entity_pool))
    index = {e: i for i, e in enumerate(pool)}
    for ent in (quad.head, quad.tail):
        if ent not in index:
            index[ent] = len(pool)
            pool.append(ent)
    rng = np.random.default_rng(seed)
    nh, nt = corrupt(np.array([index[quad.head]]), np.array([index[quad.tail]]), len(pool), eta, rng)
    return [Quad(pool[a], quad.relation, pool[b], quad.weight) for a, b in zip(nh[0], nt[0])]


class TrainResult(NamedTuple):
    model: EmbeddingModel
    loss_trace: list[float]


def train(
    quads: Iterable[Quad],
    config: TrainConfig,
    scorer: str = "TransE",
    weighted: bool = False,
    *,
    entities: Sequence[str] | None = None,
    relations: Sequence[str] | None = None,
) -> TrainResult:
    """Fit embeddings to ``quads``.

    ``entities``/``relations`` fix the vocabulary (and its id order); they
    default to the names seen in ``quads``. Extra entities are embedded
    but only move through their initialization. In weighted mode scores
    pass through :func:`modulate` before the loss, with beta decaying
    linearly from 1 at the first epoch to 0 at the last.
    """
    quads = list(quads)
    if not quads:
        raise ValueError("no training quads")
    _, grad_fn = get_scorer(scorer)
    ents = list(entities) if entities is not None else sorted({q.head for q in quads} | {q.tail for q in quads})
    rels = list(relations) if relations is not None else sorted({q.relation for q in quads})
    e_idx = {e: i for i, e in enumerate(ents)}
    r_idx = {r: i for i, r in enumerate(rels)}
    try:
        H = np.array([e_idx[q.head] for q in quads], dtype=np.int64)
        R = np.array([r_idx[q.relation] for q in quads], dtype=np.int64)
        T = np.array([e_idx[q.tail] for q in quads], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"quad references {exc.args[0]!r} outside the vocabulary") from None
    W = np.array([q.weight for q in quads], dtype=np.float64)

    rng = np.random.default_rng(config.seed)
    width = WIDTH[scorer] * config.k
    bound = 1.0 / math.sqrt(config.k)
    E = rng.uniform(-bound, bound, size=(len(ents), width))
    Rv = rng.uniform(-bound, bound, size=(len(rels), width))
    opt = Adam([E, Rv], config.learning_rate)
    eta = config.eta
    reg = config.regularizer
    trace: list[float] = []

    for epoch in range(config.epochs):
        frac = epoch / (config.epochs - 1) if config.epochs > 1 else 1.0
        total = 0.0
        order = rng.permutation(len(quads))
        for b, idx in enumerate(np.array_split(order, config.batches_count)):
            if not len(idx):
                continue
            h, r, t, w = H[idx], R[idx], T[idx], W[idx]
            nh, nt = corrupt(h, t, len(ents), eta, rng)
            nh, nt, nr = nh.ravel(), nt.ravel(), np.repeat(r, eta)
            pos = grad_fn(E[h], Rv[r], E[t])
            neg = grad_fn(E[nh], Rv[nr], E[nt])
            sp, sn = pos.score, neg.score
            if weighted:
                sp, dp = modulate(sp, w, True, frac)
                sn, dn = modulate(sn, np.repeat(w, eta), False, frac)
            value, gp, gn = loss_fn(sp, sn.reshape(len(idx), eta), config.loss)
            gn = gn.ravel()
            if weighted:
                gp, gn = gp * dp, gn * dn

            gE = np.zeros_like(E)
            gR = np.zeros_like(Rv)
            np.add.at(gE, h, gp[:, None] * pos.dh)
            np.add.at(gE, t, gp[:, None] * pos.dt)
            np.add.at(gR, r, gp[:, None] * pos.dr)
            np.add.at(gE, nh, gn[:, None] * neg.dh)
            np.add.at(gE, nt, gn[:, None] * neg.dt)
            np.add.at(gR, nr, gn[:, None] * neg.dr)
            if reg is not None and reg["lambda"] > 0:
                touched_e = np.unique(np.concatenate([h, t, nh, nt]))
                touched_r = np.unique(r)
                ve, ge = lp_regularizer(E[touched_e], reg["p"], reg["lambda"])
                vr, gr = lp_regularizer(Rv[touched_r], reg["p"], reg["lambda"])
                value += ve + vr
                gE[touched_e] += ge
                gR[touched_r] += gr
            if not math.isfinite(value):
                raise TrainingError(epoch, b, f"non-finite loss {value}")
            opt.step([gE, gR])
            total += value
        trace.append(total)
        logger.debug("epoch %d loss %.6f", epoch, total)

    model = EmbeddingModel(scorer, ents, rels, E, Rv, config.k, weighted, 0.0 if weighted else 1.0)
    return TrainResult(model, trace)
