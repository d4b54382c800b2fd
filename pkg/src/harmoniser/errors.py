"""Typed errors shared across the package."""


class HarmoniserError(Exception):
    """Base class for all errors raised by this package."""


# --- corpus ---------------------------------------------------------------

class MalformedRecord(HarmoniserError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateId(HarmoniserError):
    def __init__(self, qid: str, line: int | None = None):
        self.qid = qid
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate question id {qid!r}{where}")


class NotCodeList(HarmoniserError):
    def __init__(self, qid: str):
        self.qid = qid
        super().__init__(f"question {qid!r} has no coded response options")


# --- lexical index --------------------------------------------------------

class EmptyCorpus(HarmoniserError):
    pass


class UnknownDoc(HarmoniserError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"unknown document {doc_id!r}")


class IndexCacheError(HarmoniserError):
    pass


class IndexVersionMismatch(IndexCacheError):
    pass


# --- embedding store ------------------------------------------------------

class EmbeddingFormatError(HarmoniserError):
    """Any structural defect in an embedding file."""


class BadMagic(EmbeddingFormatError):
    pass


class UnsupportedVersion(EmbeddingFormatError):
    pass


class UnsupportedFlags(EmbeddingFormatError):
    pass


class HeaderChecksumError(EmbeddingFormatError):
    pass


class TruncatedFile(EmbeddingFormatError):
    pass


class TrailingBytes(EmbeddingFormatError):
    pass


class DimensionMismatch(HarmoniserError):
    pass


class ZeroVector(HarmoniserError):
    def __init__(self, qid: str = ""):
        self.qid = qid
        super().__init__(f"zero vector{f' for {qid!r}' if qid else ''}")


class InvalidVector(EmbeddingFormatError):
    pass


class UnknownQuestion(HarmoniserError):
    def __init__(self, qid: str):
        self.qid = qid
        super().__init__(f"unknown question {qid!r}")


# --- fusion ---------------------------------------------------------------

class EmptyMatrix(HarmoniserError):
    pass


class MissingSignal(HarmoniserError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"signal {name!r} has positive weight but is unavailable")


# --- pipeline -------------------------------------------------------------

class MissingBaseRun(HarmoniserError):
    pass


class ScorerFailure(HarmoniserError):
    def __init__(self, query_id: str, candidate_id: str, cause: Exception):
        self.query_id = query_id
        self.candidate_id = candidate_id
        self.cause = cause
        super().__init__(f"scorer failed on ({query_id!r}, {candidate_id!r}): {cause}")


class UnmatchedPair(HarmoniserError):
    def __init__(self, query_id: str, candidate_id: str):
        self.query_id = query_id
        self.candidate_id = candidate_id
        super().__init__(f"no score for pair ({query_id!r}, {candidate_id!r})")


class RunFormatError(HarmoniserError):
    pass


class UnknownRun(HarmoniserError):
    def __init__(self, run_id: str):
        self.run_id = run_id
        super().__init__(f"unknown run {run_id!r}")


# --- evaluation -----------------------------------------------------------

class MissingTopic(HarmoniserError):
    def __init__(self, qid: str):
        self.qid = qid
        super().__init__(f"no topic code for question {qid!r}")


class EmptyRun(HarmoniserError):
    pass


class SampleTooLarge(HarmoniserError):
    pass


class NoAnnotations(HarmoniserError):
    pass


# --- annotations ----------------------------------------------------------

class InvalidLabel(HarmoniserError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"invalid label {label!r}; expected one of 1, 1a, 2, 3")


class DuplicateAnnotation(HarmoniserError):
    pass
