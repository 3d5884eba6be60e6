"""Losses, the Lp regularizer and causal-weight score modulation.

Each function returns the value together with its gradient(s) so the
training loop can chain them without an autodiff framework.
"""
from __future__ import annotations

import numpy as np


def softplus(x):
    return np.logaddexp(0.0, x)


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def nll(pos: np.ndarray, neg: np.ndarray):
    """sum log(1 + exp(-s+)) + sum log(1 + exp(s-))."""
    value = softplus(-pos).sum() + softplus(neg).sum()
    return float(value), -sigmoid(-pos), sigmoid(neg)


def multiclass_nll(pos: np.ndarray, neg: np.ndarray):
    """Per positive, -log softmax of s+ against its own row of negatives.

    ``pos`` has shape (n,), ``neg`` shape (n, eta).
    """
    logits = np.concatenate([pos[:, None], neg], axis=1)
    top = logits.max(axis=1, keepdims=True)
    ex = np.exp(logits - top)
    z = ex.sum(axis=1, keepdims=True)
    value = (np.log(z[:, 0]) + top[:, 0] - pos).sum()
    p = ex / z
    return float(value), p[:, 0] - 1.0, p[:, 1:]


LOSSES = {"nll": nll, "multiclass_nll": multiclass_nll}


def loss(pos: np.ndarray, neg: np.ndarray, kind: str = "nll"):
    try:
        fn = LOSSES[kind]
    except KeyError:
        raise ValueError(f"unknown loss {kind!r}") from None
    pos = np.asarray(pos, dtype=np.float64)
    neg = np.asarray(neg, dtype=np.float64)
    if neg.ndim == 1:
        neg = neg.reshape(len(pos), -1)
    return fn(pos, neg)


def lp_regularizer(vectors: np.ndarray, p: float, lam: float):
    """lam * sum |v|^p and its gradient."""
    a = np.abs(vectors)
    value = lam * float((a**p).sum())
    grad = lam * p * a ** (p - 1) * np.sign(vectors)
    return value, grad


def modulate(raw, weight, is_positive, epoch_fraction: float):
    """Non-negative score scaled by a decaying blend of the causal weight.

    softplus(raw) * (beta + (1 - beta) * w~), beta = 1 - epoch_fraction,
    with w~ = weight for positives and 1 - weight for negatives. Returns
    the modulated score and its derivative with respect to ``raw``.
    """
    raw = np.asarray(raw, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    beta = 1.0 - float(epoch_fraction)
    wt = np.where(is_positive, weight, 1.0 - weight)
    scale = beta + (1.0 - beta) * wt
    return softplus(raw) * scale, sigmoid(raw) * scale
