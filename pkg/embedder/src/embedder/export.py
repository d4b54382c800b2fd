"""Batch export: corpus JSONL in, HEMB file out.

The corpus contract: one JSON object per line with at least id, text,
options ([{code, label}, ...]) and is_code_list; only code-list questions
are exported. The retrieval document is the question text followed by
every response option:

    "{text} {code}, {label} | {code}, {label} | ..."
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .encoders import load_model
from .errors import EncodeFailure
from .hemb import write_hemb
from .pooling import PoolingSpec, pool


def input_sequence(record: dict) -> str:
    rendered = " | ".join(
        f"{o['code']}, {o['label']}" for o in record["options"]
    )
    return f"{record['text']} {rendered}"


def read_code_list(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("is_code_list"):
                records.append(rec)
    records.sort(key=lambda r: r["id"])
    return records


def export_corpus(
    corpus_path: str | Path,
    model_id: str,
    spec: PoolingSpec,
    include_tokens: bool,
    out_path: str | Path,
) -> int:
    """Encode every code-list question and write the HEMB file atomically."""
    model = load_model(model_id)
    questions = read_code_list(corpus_path)
    records = []
    for rec in questions:
        qid = rec["id"]
        try:
            matrix = model.encode(qid, input_sequence(rec))
        except EncodeFailure:
            raise
        except Exception as exc:
            raise EncodeFailure(qid, str(exc)) from exc
        dense = pool(matrix, spec)
        records.append((qid, dense, matrix if include_tokens else None))

    out_path = Path(out_path)
    tmp = out_path.with_name(out_path.name + ".tmp")
    with open(tmp, "wb") as f:
        write_hemb(f, records, dim=model.dim, model_tag=model_id,
                   rep_kind=spec.kind)
    os.replace(tmp, out_path)
    return len(records)
