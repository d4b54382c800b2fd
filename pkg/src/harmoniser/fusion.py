"""Weighted fusion of lexical, dense, and multi-vector retrieval signals.

Raw scores live on incompatible scales (BM25 is unbounded, cosine
similarity is in [-1, 1]), so each signal is min-max normalised within the
query's candidate pool before the weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingStore
from .errors import DimensionMismatch, EmptyMatrix, MissingSignal, UnknownQuestion
from .lexical import BM25Params, InvertedIndex, bm25_all_scores, top_k_by_score


@dataclass(frozen=True)
class FusionWeights:
    w_dense: float = 0.4
    w_lex: float = 0.2
    w_multi: float = 0.4

    def __post_init__(self):
        if min(self.w_dense, self.w_lex, self.w_multi) < 0:
            raise ValueError("fusion weights must be non-negative")
        if self.w_dense + self.w_lex + self.w_multi <= 0:
            raise ValueError("at least one fusion weight must be positive")

    @property
    def total(self) -> float:
        return self.w_dense + self.w_lex + self.w_multi


@dataclass(frozen=True)
class SignalVector:
    s_dense: float | None = None
    s_lex: float | None = None
    s_multi: float | None = None


def max_sim(query_tokens: np.ndarray, doc_tokens: np.ndarray) -> float:
    """Mean over query rows of the best dot product against doc rows.

    Rows are assumed unit-normalised, so the result lies in [-1, 1].
    Dividing by the query row count keeps scores comparable across
    queries of different lengths.
    """
    q = np.asarray(query_tokens, dtype=np.float64)
    d = np.asarray(doc_tokens, dtype=np.float64)
    if q.ndim != 2 or d.ndim != 2:
        raise EmptyMatrix("token matrices must be 2-dimensional")
    if q.shape[0] == 0 or d.shape[0] == 0:
        raise EmptyMatrix("token matrix has no rows")
    if q.shape[1] != d.shape[1]:
        raise DimensionMismatch(f"row dims {q.shape[1]} and {d.shape[1]} differ")
    return float(np.mean(np.max(q @ d.T, axis=1)))


def normalise_signals(raw) -> np.ndarray:
    """Min-max normalise one signal within a candidate pool.

    A constant pool (including a singleton) maps to 1.0 everywhere: every
    candidate is equally good on that signal, not equally bad.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        raise ValueError("candidate pool must be non-empty")
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return np.ones_like(raw)
    return (raw - lo) / (hi - lo)


def fuse(s: SignalVector, w: FusionWeights) -> float:
    """Weighted mean of the available signals; in [0, 1] for normalised input."""
    total = 0.0
    for name, weight, value in (
        ("dense", w.w_dense, s.s_dense),
        ("lex", w.w_lex, s.s_lex),
        ("multi", w.w_multi, s.s_multi),
    ):
        if weight > 0:
            if value is None:
                raise MissingSignal(name)
            total += weight * value
    return total / w.total


def hybrid_scores(
    query_id: str,
    candidate_ids: list[str],
    index: InvertedIndex,
    params: BM25Params,
    store: EmbeddingStore,
    weights: FusionWeights,
) -> np.ndarray:
    """Fused score per candidate, aligned with candidate_ids.

    The query must be indexed (its token counts come from the index) and
    present in the store when a dense or multi-vector weight is positive.
    """
    parts = []
    if weights.w_dense > 0:
        ids, sims = store.dense_similarities(query_id)
        sim_by_id = dict(zip(ids, sims))
        try:
            raw = np.array([sim_by_id[c] for c in candidate_ids])
        except KeyError as exc:
            raise UnknownQuestion(str(exc.args[0])) from None
        parts.append((weights.w_dense, normalise_signals(raw)))
    if weights.w_lex > 0:
        all_scores = bm25_all_scores(index.doc_terms(query_id), index, params)
        raw = np.array([all_scores[index.doc_index(c)] for c in candidate_ids])
        parts.append((weights.w_lex, normalise_signals(raw)))
    if weights.w_multi > 0:
        if not store.has_token_level:
            raise MissingSignal("multi")
        q_tokens = store[query_id].tokens
        if q_tokens is None:
            raise MissingSignal("multi")
        raw = np.array([max_sim(q_tokens, store[c].tokens) for c in candidate_ids])
        parts.append((weights.w_multi, normalise_signals(raw)))
    fused = np.zeros(len(candidate_ids), dtype=np.float64)
    for weight, values in parts:
        fused += weight * values
    return fused / weights.total


def hybrid_top_k(
    query_id: str,
    k: int,
    exclude: set[str] | frozenset[str],
    index: InvertedIndex,
    params: BM25Params,
    store: EmbeddingStore,
    weights: FusionWeights,
    candidate_ids: list[str] | None = None,
) -> list[tuple[str, float]]:
    """Top-k candidates by fused score, ties by ascending id.

    The candidate pool defaults to every indexed document except the
    query and the exclusions; pass candidate_ids (ascending id order) to
    restrict it, e.g. when re-ranking a shortlist.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if query_id not in index:
        raise UnknownQuestion(query_id)
    if (weights.w_dense > 0 or weights.w_multi > 0) and query_id not in store:
        raise UnknownQuestion(query_id)
    excluded = set(exclude) | {query_id}
    if candidate_ids is None:
        pool = [d for d in index.doc_ids if d not in excluded]
    else:
        pool = [d for d in candidate_ids if d not in excluded]
    if not pool:
        return []
    fused = hybrid_scores(query_id, pool, index, params, store, weights)
    return top_k_by_score(pool, fused, k, set())
