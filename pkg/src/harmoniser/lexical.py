"""BM25 inverted index with exact top-k retrieval.

Scoring uses the non-negative idf variant ln(1 + (N - n + 0.5) / (n + 0.5))
so every score is >= 0. Ranking ties break by ascending document id, which
makes batch runs fully deterministic.
"""

from __future__ import annotations

import bisect
import math
import re
import struct
from collections import Counter
from dataclasses import dataclass
from typing import IO

import numpy as np

from .corpus import Corpus, build_input_sequence
from .errors import EmptyCorpus, IndexCacheError, IndexVersionMismatch, UnknownDoc

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Conservative English stopword list; disabled unless explicitly enabled.
ENGLISH_STOPWORDS = frozenset(
    "a an and are as at be by for from has have he her his i in is it its of on"
    " or she that the their they this to was were will with you your".split()
)


def tokenize(text: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    """Lower-case and split on any non-alphanumeric character; digits kept."""
    tokens = _TOKEN_RE.findall(text.lower())
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.5
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be non-negative")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


class InvertedIndex:
    """Immutable term -> postings map over input sequences.

    Documents are stored in ascending id order, so positional index order
    doubles as the id tie-break order.
    """

    def __init__(
        self,
        doc_ids: list[str],
        postings: dict[str, tuple[np.ndarray, np.ndarray]],
        doc_lengths: np.ndarray,
        stopwords: frozenset[str],
        doc_terms: list[dict[str, int]] | None = None,
    ):
        self.doc_ids = doc_ids
        self._idx = {d: i for i, d in enumerate(doc_ids)}
        self.postings = postings  # term -> (doc index asc int32, tf float64)
        self.doc_lengths = doc_lengths
        self.doc_count = len(doc_ids)
        self.avg_doc_length = float(doc_lengths.mean()) if len(doc_ids) else 0.0
        self.stopwords = stopwords
        self._doc_terms = doc_terms

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._idx

    def doc_index(self, doc_id: str) -> int:
        try:
            return self._idx[doc_id]
        except KeyError:
            raise UnknownDoc(doc_id) from None

    def tokenize(self, text: str) -> list[str]:
        return tokenize(text, self.stopwords)

    def doc_terms(self, doc_id: str) -> dict[str, int]:
        """Term -> frequency map of an indexed document."""
        idx = self.doc_index(doc_id)
        if self._doc_terms is None:
            # Cache rebuilt from postings after loading from disk.
            rebuilt: list[dict[str, int]] = [dict() for _ in self.doc_ids]
            for term in sorted(self.postings):
                doc_idx, tfs = self.postings[term]
                for i, tf in zip(doc_idx.tolist(), tfs.tolist()):
                    rebuilt[i][term] = int(tf)
            self._doc_terms = rebuilt
        return self._doc_terms[idx]

    def term_frequency(self, term: str, doc_id: str) -> float:
        idx = self.doc_index(doc_id)
        posting = self.postings.get(term)
        if posting is None:
            return 0.0
        doc_idx, tfs = posting
        pos = np.searchsorted(doc_idx, idx)
        if pos < len(doc_idx) and doc_idx[pos] == idx:
            return float(tfs[pos])
        return 0.0

    def idf(self, term: str) -> float:
        posting = self.postings.get(term)
        n = len(posting[0]) if posting is not None else 0
        return math.log(1.0 + (self.doc_count - n + 0.5) / (n + 0.5))


def build_index(corpus: Corpus, stopwords: frozenset[str] = frozenset()) -> InvertedIndex:
    """Index build_input_sequence of every question, ids ascending."""
    if len(corpus) == 0:
        raise EmptyCorpus("cannot index an empty corpus")
    doc_ids = corpus.ids()
    lengths = np.zeros(len(doc_ids), dtype=np.float64)
    term_docs: dict[str, list[tuple[int, int]]] = {}
    doc_terms: list[dict[str, int]] = []
    for i, doc_id in enumerate(doc_ids):
        tokens = tokenize(build_input_sequence(corpus[doc_id]), stopwords)
        lengths[i] = len(tokens)
        counts = dict(Counter(tokens))
        doc_terms.append(counts)
        for term, tf in counts.items():
            term_docs.setdefault(term, []).append((i, tf))
    postings = {
        term: (
            np.array([i for i, _ in pairs], dtype=np.int32),
            np.array([tf for _, tf in pairs], dtype=np.float64),
        )
        for term, pairs in term_docs.items()
    }
    return InvertedIndex(doc_ids, postings, lengths, stopwords, doc_terms)


def _length_norm(index: InvertedIndex, params: BM25Params) -> np.ndarray:
    return params.k1 * (
        1.0 - params.b + params.b * index.doc_lengths / index.avg_doc_length
    )


def _term_counts(query_tokens) -> dict[str, int]:
    if isinstance(query_tokens, dict):
        return query_tokens
    return dict(Counter(query_tokens))


def bm25_score(
    query_tokens: list[str] | dict[str, int],
    doc_id: str,
    index: InvertedIndex,
    params: BM25Params = BM25Params(),
) -> float:
    """Score one document; terms absent from the corpus contribute 0."""
    idx = index.doc_index(doc_id)
    norm = params.k1 * (
        1.0 - params.b
        + params.b * float(index.doc_lengths[idx]) / index.avg_doc_length
    )
    score = 0.0
    for term, qtf in _term_counts(query_tokens).items():
        tf = index.term_frequency(term, doc_id)
        if tf == 0.0:
            continue
        score += qtf * index.idf(term) * tf * (params.k1 + 1.0) / (tf + norm)
    return score


def bm25_all_scores(
    query_tokens: list[str] | dict[str, int],
    index: InvertedIndex,
    params: BM25Params = BM25Params(),
) -> np.ndarray:
    """Scores for every document, positionally aligned with index.doc_ids."""
    scores = np.zeros(index.doc_count, dtype=np.float64)
    norm = _length_norm(index, params)
    for term, qtf in _term_counts(query_tokens).items():
        posting = index.postings.get(term)
        if posting is None:
            continue
        doc_idx, tfs = posting
        idf = index.idf(term)
        scores[doc_idx] += qtf * idf * tfs * (params.k1 + 1.0) / (tfs + norm[doc_idx])
    return scores


def top_k_by_score(
    doc_ids: list[str],
    scores: np.ndarray,
    k: int,
    exclude: set[str] | frozenset[str],
) -> list[tuple[str, float]]:
    """Top-k by descending score, ties by ascending id; exact selection.

    doc_ids must be in ascending order (excluded ids are located by
    binary search).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    mask = np.ones(len(doc_ids), dtype=bool)
    if exclude:
        for d in exclude:
            pos = bisect.bisect_left(doc_ids, d)
            if pos < len(doc_ids) and doc_ids[pos] == d:
                mask[pos] = False
    candidates = np.nonzero(mask)[0]
    if len(candidates) == 0:
        return []
    cand_scores = scores[candidates]
    take = min(k, len(candidates))
    if take < len(candidates):
        # Partition by score, then widen to every candidate tied with the
        # k-th score so the id tie-break is applied exactly.
        part = np.argpartition(-cand_scores, take - 1)[:take]
        threshold = cand_scores[part].min()
        pool = np.nonzero(cand_scores >= threshold)[0]
    else:
        pool = np.arange(len(candidates))
    order = np.lexsort((candidates[pool], -cand_scores[pool]))
    chosen = pool[order][:take]
    return [(doc_ids[candidates[i]], float(cand_scores[i])) for i in chosen]


def retrieve_top_k(
    query_tokens: list[str],
    k: int,
    exclude: set[str] | frozenset[str],
    index: InvertedIndex,
    params: BM25Params = BM25Params(),
) -> list[tuple[str, float]]:
    """Exact BM25 top-k over all documents not excluded."""
    scores = bm25_all_scores(query_tokens, index, params)
    return top_k_by_score(index.doc_ids, scores, k, exclude)


# --- on-disk cache --------------------------------------------------------

_CACHE_MAGIC = b"HIDX"
_CACHE_VERSION = 1


def _write_str(out: IO[bytes], s: str) -> None:
    raw = s.encode("utf-8")
    out.write(struct.pack("<I", len(raw)))
    out.write(raw)


def _read_exact(f: IO[bytes], n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise IndexCacheError("truncated index cache")
    return data


def _read_str(f: IO[bytes]) -> str:
    (n,) = struct.unpack("<I", _read_exact(f, 4))
    return _read_exact(f, n).decode("utf-8")


def save_index(index: InvertedIndex, out: IO[bytes]) -> None:
    """Write a deterministic, version-tagged cache of the index."""
    out.write(_CACHE_MAGIC)
    out.write(struct.pack("<H", _CACHE_VERSION))
    out.write(struct.pack("<Q", index.doc_count))
    for doc_id in index.doc_ids:
        _write_str(out, doc_id)
    out.write(index.doc_lengths.astype("<f8").tobytes())
    stop = sorted(index.stopwords)
    out.write(struct.pack("<I", len(stop)))
    for word in stop:
        _write_str(out, word)
    terms = sorted(index.postings)
    out.write(struct.pack("<Q", len(terms)))
    for term in terms:
        doc_idx, tfs = index.postings[term]
        _write_str(out, term)
        out.write(struct.pack("<I", len(doc_idx)))
        out.write(doc_idx.astype("<i4").tobytes())
        out.write(tfs.astype("<f8").tobytes())


def load_index(f: IO[bytes]) -> InvertedIndex:
    if _read_exact(f, 4) != _CACHE_MAGIC:
        raise IndexCacheError("bad index cache magic")
    (version,) = struct.unpack("<H", _read_exact(f, 2))
    if version != _CACHE_VERSION:
        raise IndexVersionMismatch(f"unsupported index cache version {version}")
    (count,) = struct.unpack("<Q", _read_exact(f, 8))
    doc_ids = [_read_str(f) for _ in range(count)]
    lengths = np.frombuffer(_read_exact(f, 8 * count), dtype="<f8").copy()
    (n_stop,) = struct.unpack("<I", _read_exact(f, 4))
    stopwords = frozenset(_read_str(f) for _ in range(n_stop))
    (n_terms,) = struct.unpack("<Q", _read_exact(f, 8))
    postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for _ in range(n_terms):
        term = _read_str(f)
        (n,) = struct.unpack("<I", _read_exact(f, 4))
        doc_idx = np.frombuffer(_read_exact(f, 4 * n), dtype="<i4").copy()
        tfs = np.frombuffer(_read_exact(f, 8 * n), dtype="<f8").copy()
        postings[term] = (doc_idx, tfs)
    if f.read(1):
        raise IndexCacheError("trailing bytes in index cache")
    return InvertedIndex(doc_ids, postings, lengths, stopwords)
