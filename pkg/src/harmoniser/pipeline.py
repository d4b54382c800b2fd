"""End-to-end ranking and re-ranking over the code-list corpus.

Every code-list question is used as a query against all other code-list
questions (leave-one-out by id). Runs persist as line-delimited JSON with
a header record, written deterministically so identical configuration
yields byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Callable, Iterable, Protocol

from .corpus import Corpus, filter_code_list
from .embeddings import EmbeddingStore, dense_top_k
from .errors import (
    MissingBaseRun,
    RunFormatError,
    ScorerFailure,
    UnmatchedPair,
)
from .fusion import FusionWeights, hybrid_top_k
from .lexical import BM25Params, InvertedIndex, retrieve_top_k

RUN_FORMAT = "harmoniser-run"
RUN_VERSION = 1

MODELS = ("bm25", "dense", "hybrid", "external")
MODES = ("end_to_end", "rerank")

DEFAULT_RERANK_DEPTH = 50

PairScorer = Callable[[str, str], float]


@dataclass
class RankingRun:
    run_id: str
    model: str
    mode: str
    k: int
    per_query: dict[str, list[tuple[str, float]]]
    config_snapshot: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        for qid, ranked in self.per_query.items():
            if any(cid == qid for cid, _ in ranked):
                raise ValueError(f"query {qid!r} ranks itself")
            if len(ranked) > self.k:
                raise ValueError(f"query {qid!r} has more than k candidates")

    def queries(self) -> list[str]:
        return sorted(self.per_query)

    def top1(self, query_id: str) -> tuple[str, float]:
        return self.per_query[query_id][0]


class Ranker(Protocol):
    def rank(self, query_id: str, k: int,
             exclude: set[str]) -> list[tuple[str, float]]: ...


class BM25Ranker:
    def __init__(self, index: InvertedIndex, params: BM25Params = BM25Params()):
        self.index = index
        self.params = params

    def rank(self, query_id, k, exclude):
        counts = self.index.doc_terms(query_id)
        return retrieve_top_k(counts, k, exclude, self.index, self.params)


class DenseRanker:
    """Ranks by ascending cosine distance; stores similarity as the score."""

    def __init__(self, store: EmbeddingStore):
        self.store = store

    def rank(self, query_id, k, exclude):
        ranked = dense_top_k(query_id, k, exclude, self.store)
        return [(cid, 1.0 - dist) for cid, dist in ranked]


class HybridRanker:
    def __init__(self, index: InvertedIndex, store: EmbeddingStore,
                 params: BM25Params = BM25Params(),
                 weights: FusionWeights = FusionWeights()):
        self.index = index
        self.store = store
        self.params = params
        self.weights = weights

    def rank(self, query_id, k, exclude):
        return hybrid_top_k(query_id, k, exclude, self.index, self.params,
                            self.store, self.weights)


def _config_run_id(model: str, mode: str, k: int, config: dict) -> str:
    digest = hashlib.sha256(
        json.dumps({"model": model, "mode": mode, "k": k, "config": config},
                   sort_keys=True).encode("utf-8")
    ).hexdigest()[:12]
    return f"{model}-{mode}-k{k}-{digest}"


def end_to_end_rank(
    ranker: Ranker,
    corpus: Corpus,
    k: int,
    model: str,
    config: dict | None = None,
    workers: int = 1,
    run_id: str | None = None,
) -> RankingRun:
    """Rank every code-list question against all other code-list questions.

    Queries are independent, so the worker count never changes the result;
    output order is fixed by ascending query id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    config = dict(config or {})
    code_list = filter_code_list(corpus)
    queries = code_list.ids()
    if run_id is None:
        run_id = _config_run_id(model, "end_to_end", k, config)

    def one(qid: str) -> list[tuple[str, float]]:
        return ranker.rank(qid, k, {qid})

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, queries))
    else:
        results = [one(q) for q in queries]
    per_query = dict(zip(queries, results))
    return RankingRun(run_id=run_id, model=model, mode="end_to_end", k=k,
                      per_query=per_query, config_snapshot=config)


def rerank(
    base: RankingRun,
    scorer: PairScorer,
    k: int,
    depth: int = DEFAULT_RERANK_DEPTH,
    model: str = "external",
    config: dict | None = None,
    run_id: str | None = None,
) -> RankingRun:
    """Re-score each query's top-`depth` base candidates and re-sort.

    Sorting is stable on the base order, so a constant scorer reproduces
    the base ranking exactly. Output per query is a permutation of the
    truncated base pool, cut to k.
    """
    if base is None:
        raise MissingBaseRun("no base run to re-rank")
    if base.mode != "end_to_end":
        raise MissingBaseRun("re-ranking requires an end-to-end base run")
    if k < 1 or depth < 1:
        raise ValueError("k and depth must be >= 1")
    config = dict(config or {})
    config["base_run_id"] = base.run_id
    config["depth"] = depth
    if run_id is None:
        run_id = _config_run_id(model, "rerank", k, config)

    per_query: dict[str, list[tuple[str, float]]] = {}
    for qid in base.queries():
        pool = base.per_query[qid][:depth]
        rescored = []
        for cid, _ in pool:
            try:
                rescored.append((cid, float(scorer(qid, cid))))
            except Exception as exc:
                if isinstance(exc, UnmatchedPair):
                    raise
                raise ScorerFailure(qid, cid, exc) from exc
        rescored.sort(key=lambda pair: -pair[1])  # stable on base order
        per_query[qid] = rescored[:k]
    return RankingRun(run_id=run_id, model=model, mode="rerank", k=k,
                      per_query=per_query, config_snapshot=config)


# --- run persistence ------------------------------------------------------

def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def save_run(run: RankingRun, path: str | Path) -> None:
    """Atomically persist a run; partial files are never left behind."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(_dump({
            "format": RUN_FORMAT,
            "version": RUN_VERSION,
            "run_id": run.run_id,
            "model": run.model,
            "mode": run.mode,
            "k": run.k,
            "config_snapshot": run.config_snapshot,
        }) + "\n")
        for qid in run.queries():
            for rank_pos, (cid, score) in enumerate(run.per_query[qid], start=1):
                f.write(_dump({
                    "query_id": qid,
                    "rank": rank_pos,
                    "candidate_id": cid,
                    "score": score,
                }) + "\n")
    os.replace(tmp, path)


def load_run(path: str | Path) -> RankingRun:
    with open(path, encoding="utf-8") as f:
        header_line = f.readline()
        if not header_line:
            raise RunFormatError("empty run file")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise RunFormatError(f"bad run header: {exc.msg}") from exc
        if header.get("format") != RUN_FORMAT:
            raise RunFormatError("not a run file")
        if header.get("version") != RUN_VERSION:
            raise RunFormatError(f"unsupported run version {header.get('version')}")
        per_query: dict[str, list[tuple[str, float]]] = {}
        for line_no, line in enumerate(f, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RunFormatError(f"line {line_no}: {exc.msg}") from exc
            ranked = per_query.setdefault(rec["query_id"], [])
            if rec["rank"] != len(ranked) + 1:
                raise RunFormatError(f"line {line_no}: rank out of sequence")
            ranked.append((rec["candidate_id"], float(rec["score"])))
    return RankingRun(
        run_id=header["run_id"], model=header["model"], mode=header["mode"],
        k=header["k"], per_query=per_query,
        config_snapshot=header.get("config_snapshot", {}),
    )


# --- out-of-process pair scoring -----------------------------------------

def write_pair_manifest(run: RankingRun, depth: int, out: IO[str]) -> int:
    """Emit the (query, candidate) pairs an external scorer must score."""
    n = 0
    for qid in run.queries():
        for cid, _ in run.per_query[qid][:depth]:
            out.write(_dump({"query_id": qid, "candidate_id": cid}) + "\n")
            n += 1
    return n


def load_pair_scores(stream: IO[str] | Iterable[str]) -> dict[tuple[str, str], float]:
    scores: dict[tuple[str, str], float] = {}
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            key = (rec["query_id"], rec["candidate_id"])
            scores[key] = float(rec["score"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise RunFormatError(f"score file line {line_no}: {exc}") from exc
    return scores


def external_pair_scorer(scores: dict[tuple[str, str], float]) -> PairScorer:
    """Wrap a score table; missing pairs are an error, not a default."""
    def scorer(query_id: str, candidate_id: str) -> float:
        try:
            return scores[(query_id, candidate_id)]
        except KeyError:
            raise UnmatchedPair(query_id, candidate_id) from None
    return scorer
