"""Triple scoring functions and their analytic gradients.

All functions take row-aligned batches ``h, r, t`` of shape (n, d) and
return scores of shape (n,). ComplEx rows hold interleaved (re, im)
pairs, so d = 2k for that scorer.
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np


class ScoreGrad(NamedTuple):
    score: np.ndarray
    dh: np.ndarray
    dr: np.ndarray
    dt: np.ndarray


def circular_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """corr(a, b)_i = sum_j a_j * b_{(j + i) mod k}, along the last axis."""
    k = a.shape[-1]
    return np.fft.irfft(np.conj(np.fft.rfft(a, axis=-1)) * np.fft.rfft(b, axis=-1), n=k, axis=-1)


def circular_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    k = a.shape[-1]
    return np.fft.irfft(np.fft.rfft(a, axis=-1) * np.fft.rfft(b, axis=-1), n=k, axis=-1)


def _as_complex(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64).view(np.complex128)


def _as_real(z: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(z).view(np.float64)


def transe(h, r, t):
    return -np.abs(h + r - t).sum(axis=-1)


def transe_grad(h, r, t) -> ScoreGrad:
    diff = h + r - t
    g = -np.sign(diff)
    return ScoreGrad(-np.abs(diff).sum(axis=-1), g, g, -g)


def distmult(h, r, t):
    return (h * r * t).sum(axis=-1)


def distmult_grad(h, r, t) -> ScoreGrad:
    return ScoreGrad((h * r * t).sum(axis=-1), r * t, h * t, h * r)


def hole(h, r, t):
    return (r * circular_correlation(h, t)).sum(axis=-1)


def hole_grad(h, r, t) -> ScoreGrad:
    corr = circular_correlation(h, t)
    return ScoreGrad(
        (r * corr).sum(axis=-1),
        circular_correlation(r, t),
        corr,
        circular_convolution(r, h),
    )


def complex_(h, r, t):
    zh, zr, zt = _as_complex(h), _as_complex(r), _as_complex(t)
    return np.real((zh * zr * np.conj(zt)).sum(axis=-1))


def complex_grad(h, r, t) -> ScoreGrad:
    # d Re(z c) / d(Re z, Im z) packs to conj(c)
    zh, zr, zt = _as_complex(h), _as_complex(r), _as_complex(t)
    s = np.real((zh * zr * np.conj(zt)).sum(axis=-1))
    return ScoreGrad(
        s,
        _as_real(np.conj(zr) * zt),
        _as_real(np.conj(zh) * zt),
        _as_real(zh * zr),
    )


ScoreFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

SCORERS: dict[str, tuple[ScoreFn, Callable[..., ScoreGrad]]] = {
    "TransE": (transe, transe_grad),
    "DistMult": (distmult, distmult_grad),
    "HolE": (hole, hole_grad),
    "ComplEx": (complex_, complex_grad),
}

# vector width per embedding dimension k
WIDTH = {"TransE": 1, "DistMult": 1, "HolE": 1, "ComplEx": 2}


def get_scorer(name: str):
    try:
        return SCORERS[name]
    except KeyError:
        raise ValueError(f"unknown scorer {name!r}; expected one of {sorted(SCORERS)}") from None
