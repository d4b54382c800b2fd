import json
from pathlib import Path

import pytest

from harmoniser.corpus import parse_corpus
from harmoniser.embeddings import load_store

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def load_fixture_corpus(name: str):
    with open(FIXTURES / name, encoding="utf-8") as f:
        return parse_corpus(f)


def load_fixture_store(name: str):
    with open(FIXTURES / name, "rb") as f:
        return load_store(f)


@pytest.fixture(scope="session")
def corpus_12():
    return load_fixture_corpus("corpus_12.jsonl")


@pytest.fixture(scope="session")
def store_12():
    return load_fixture_store("emb_12.hemb")


@pytest.fixture(scope="session")
def corpus_120():
    return load_fixture_corpus("corpus_120.jsonl")


@pytest.fixture(scope="session")
def store_120():
    return load_fixture_store("emb_120.hemb")


@pytest.fixture(scope="session")
def corpus_dup():
    return load_fixture_corpus("corpus_dup.jsonl")


@pytest.fixture(scope="session")
def golden_hybrid_12():
    rows = []
    with open(FIXTURES / "golden_hybrid_12.jsonl", encoding="utf-8") as f:
        for line in f:
            rows.append(json.loads(line))
    return rows


def make_record(qid="q1", **overrides):
    rec = {
        "id": qid,
        "questionnaire": "wave-1",
        "study": "study-a",
        "year": 1970,
        "text": "What is his current job?",
        "options": [
            {"code": "1", "label": "self-employed"},
            {"code": "2", "label": "manager"},
            {"code": "3", "label": "foreman"},
            {"code": "4", "label": "employee"},
        ],
        "typology": "standard",
        "topic_top": "employment",
        "topic_sub": None,
        "is_code_list": True,
    }
    rec.update(overrides)
    return rec


def records_to_corpus(records):
    lines = [json.dumps(r) for r in records]
    return parse_corpus(lines)


def run_from_pairs(pairs):
    """pairs: list of (query_topic, candidate_topic); builds corpus + run."""
    from harmoniser.pipeline import RankingRun

    records, per_query = [], {}
    for i, (qt, ct) in enumerate(pairs):
        qid, cid = f"q{i:03d}", f"c{i:03d}"
        records.append(make_record(qid, topic_top=qt))
        records.append(make_record(cid, topic_top=ct))
        per_query[qid] = [(cid, 1.0)]
    corpus = records_to_corpus(records)
    run = RankingRun("test-run", "bm25", "end_to_end", 1, per_query)
    return run, corpus
