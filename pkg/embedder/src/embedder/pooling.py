"""Sequence pooling over final-layer token representations.

mean pooling averages all token rows; summary-token pooling takes the
first row for encoder models (their summary token leads the sequence)
and the last row for decoder models (autoregressive, so only the final
position has seen the whole sequence).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMatrix

POOLINGS = ("mean", "sst")
FAMILIES = ("encoder", "decoder")


@dataclass(frozen=True)
class PoolingSpec:
    kind: str
    model_family: str

    def __post_init__(self):
        if self.kind not in POOLINGS:
            raise ValueError(f"unknown pooling {self.kind!r}")
        if self.model_family not in FAMILIES:
            raise ValueError(f"unknown model family {self.model_family!r}")


def _check_matrix(token_vectors) -> np.ndarray:
    m = np.asarray(token_vectors, dtype=np.float64)
    if m.ndim != 2:
        raise EmptyMatrix("token matrix must be 2-dimensional")
    if m.shape[0] == 0:
        raise EmptyMatrix("token matrix has no rows")
    return m


def mean_pool(token_vectors) -> np.ndarray:
    """Arithmetic mean over token rows."""
    return _check_matrix(token_vectors).mean(axis=0)


def sst_pool(token_vectors, spec: PoolingSpec) -> np.ndarray:
    """Single summary token: first row (encoder) or last row (decoder)."""
    m = _check_matrix(token_vectors)
    return m[0] if spec.model_family == "encoder" else m[-1]


def pool(token_vectors, spec: PoolingSpec) -> np.ndarray:
    if spec.kind == "mean":
        return mean_pool(token_vectors)
    return sst_pool(token_vectors, spec)
