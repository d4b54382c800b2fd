"""Survey question corpus: parsing, validation, filtering, input sequences.

The corpus file is UTF-8 JSON lines, one question per line:

    {"id": ..., "questionnaire": ..., "study": ..., "year": ...,
     "text": ..., "options": [{"code": ..., "label": ...}, ...],
     "typology": "standard"|"qualified"|"compound",
     "topic_top": ..., "topic_sub": ...|null, "is_code_list": bool}

A single malformed line fails the whole ingest: silently dropping records
would skew every leave-one-out evaluation built on top.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .errors import DuplicateId, MalformedRecord, NotCodeList

TYPOLOGIES = ("standard", "qualified", "compound")

YEAR_MIN = 1900
YEAR_MAX = 2100


@dataclass(frozen=True)
class ResponseOption:
    code: str
    label: str


@dataclass(frozen=True)
class TopicCode:
    top_level: str
    sub_topic: str | None = None


@dataclass(frozen=True)
class Question:
    id: str
    questionnaire: str
    study: str
    year: int
    text: str
    options: tuple[ResponseOption, ...]
    typology: str
    topic: TopicCode
    is_code_list: bool


class Corpus:
    """Immutable id-keyed collection of questions."""

    def __init__(self, questions: Iterable[Question]):
        self._questions: dict[str, Question] = {}
        for q in questions:
            if q.id in self._questions:
                raise DuplicateId(q.id)
            self._questions[q.id] = q

    def __len__(self) -> int:
        return len(self._questions)

    def __contains__(self, qid: str) -> bool:
        return qid in self._questions

    def __iter__(self) -> Iterator[Question]:
        return iter(self._questions.values())

    def __getitem__(self, qid: str) -> Question:
        return self._questions[qid]

    def get(self, qid: str) -> Question | None:
        return self._questions.get(qid)

    def ids(self) -> list[str]:
        return sorted(self._questions)

    @property
    def questionnaire_count(self) -> int:
        return len({q.questionnaire for q in self._questions.values()})


def _field(record: dict, name: str, kind, line: int):
    if name not in record:
        raise MalformedRecord(line, f"missing field {name!r}")
    value = record[name]
    if not isinstance(value, kind):
        raise MalformedRecord(line, f"field {name!r} has wrong type")
    return value


def _parse_record(record: dict, line: int) -> Question:
    qid = _field(record, "id", str, line)
    if not qid:
        raise MalformedRecord(line, "empty id")
    year = _field(record, "year", int, line)
    if isinstance(year, bool) or not (YEAR_MIN <= year <= YEAR_MAX):
        raise MalformedRecord(line, f"year {year!r} outside [{YEAR_MIN}, {YEAR_MAX}]")
    typology = _field(record, "typology", str, line)
    if typology not in TYPOLOGIES:
        raise MalformedRecord(line, f"unknown typology {typology!r}")
    topic_top = _field(record, "topic_top", str, line)
    if not topic_top:
        raise MalformedRecord(line, "empty topic_top")
    topic_sub = record.get("topic_sub")
    if topic_sub is not None and not isinstance(topic_sub, str):
        raise MalformedRecord(line, "field 'topic_sub' has wrong type")
    if "topic_sub" not in record:
        raise MalformedRecord(line, "missing field 'topic_sub'")

    raw_options = _field(record, "options", list, line)
    options = []
    for opt in raw_options:
        if not isinstance(opt, dict):
            raise MalformedRecord(line, "option is not an object")
        code = opt.get("code")
        label = opt.get("label")
        if not isinstance(code, str) or not code:
            raise MalformedRecord(line, "option code must be a non-empty string")
        if not isinstance(label, str):
            raise MalformedRecord(line, "option label must be a string")
        options.append(ResponseOption(code=code, label=label))

    is_code_list = _field(record, "is_code_list", bool, line)
    if is_code_list and not options:
        raise MalformedRecord(line, "code list question with no options")

    return Question(
        id=qid,
        questionnaire=_field(record, "questionnaire", str, line),
        study=_field(record, "study", str, line),
        year=year,
        text=_field(record, "text", str, line),
        options=tuple(options),
        typology=typology,
        topic=TopicCode(top_level=topic_top, sub_topic=topic_sub),
        is_code_list=is_code_list,
    )


def parse_corpus(stream: IO[str] | Iterable[str]) -> Corpus:
    """Parse a line-delimited corpus file; any bad line fails the whole input."""
    questions: dict[str, Question] = {}
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise MalformedRecord(line_no, "record is not an object")
        q = _parse_record(record, line_no)
        if q.id in questions:
            raise DuplicateId(q.id, line=line_no)
        questions[q.id] = q
    return Corpus(questions.values())


def question_to_record(q: Question) -> dict:
    return {
        "id": q.id,
        "questionnaire": q.questionnaire,
        "study": q.study,
        "year": q.year,
        "text": q.text,
        "options": [{"code": o.code, "label": o.label} for o in q.options],
        "typology": q.typology,
        "topic_top": q.topic.top_level,
        "topic_sub": q.topic.sub_topic,
        "is_code_list": q.is_code_list,
    }


def serialize_corpus(corpus: Corpus, stream: IO[str]) -> None:
    for q in corpus:
        stream.write(json.dumps(question_to_record(q), ensure_ascii=False))
        stream.write("\n")


def filter_code_list(corpus: Corpus) -> Corpus:
    """Keep only code list questions; the input corpus is untouched."""
    return Corpus(q for q in corpus if q.is_code_list)


def build_input_sequence(q: Question) -> str:
    """Concatenate question text with its rendered response options.

    Options render as "code, label" joined by " | " in stored order, e.g.
    "Do you get homework? 1, never | 2, sometimes | 3, often | 4, always".
    """
    if not q.is_code_list or not q.options:
        raise NotCodeList(q.id)
    rendered = " | ".join(f"{o.code}, {o.label}" for o in q.options)
    return f"{q.text} {rendered}"
