"""Append-only store of specialist annotations.

Annotations persist as one JSON object per line. Replaying the log
reconstructs identical state; the (query, candidate, annotator, run)
key is unique, so a judgment can never be silently overwritten.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from threading import Lock

from .errors import DuplicateAnnotation, InvalidLabel
from .evaluation import LABELS


@dataclass(frozen=True)
class Annotation:
    query_id: str
    candidate_id: str
    label: str
    annotator: str
    run_id: str
    timestamp: str

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.query_id, self.candidate_id, self.annotator, self.run_id)


def make_annotation(query_id: str, candidate_id: str, label: str,
                    annotator: str, run_id: str,
                    timestamp: str | None = None) -> Annotation:
    if label not in LABELS:
        raise InvalidLabel(label)
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return Annotation(query_id=query_id, candidate_id=candidate_id,
                      label=label, annotator=annotator, run_id=run_id,
                      timestamp=timestamp)


class AnnotationStore:
    """Durable annotation log with single-writer semantics."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = Lock()
        self._by_key: dict[tuple[str, str, str, str], Annotation] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                for line in f:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    a = Annotation(**rec)
                    self._by_key[a.key] = a

    def __len__(self) -> int:
        return len(self._by_key)

    def submit(self, annotation: Annotation) -> tuple[str, str, str, str]:
        """Append one annotation; acknowledged only after the write lands."""
        if annotation.label not in LABELS:
            raise InvalidLabel(annotation.label)
        with self._lock:
            if annotation.key in self._by_key:
                raise DuplicateAnnotation(
                    f"annotation already exists for {annotation.key}"
                )
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(asdict(annotation), ensure_ascii=False) + "\n")
                f.flush()
                os.fsync(f.fileno())
            self._by_key[annotation.key] = annotation
        return annotation.key

    def annotations(self, run_id: str | None = None) -> list[Annotation]:
        out = list(self._by_key.values())
        if run_id is not None:
            out = [a for a in out if a.run_id == run_id]
        return out

    def labels(self, run_id: str | None = None) -> list[str]:
        return [a.label for a in self.annotations(run_id)]
