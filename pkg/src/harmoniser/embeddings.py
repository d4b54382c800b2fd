"""Precomputed embedding store with a bit-exact binary file format (HEMB).

Layout (little-endian):

    magic "HEMB" | version u16 = 1 | flags u16 (bit 0: token matrices)
    dim u32 | count u64 | model_tag_len u16 + UTF-8 bytes
    rep_kind u8 (0 = mean, 1 = sst) | header_crc32 u32

followed by `count` records:

    id_len u16 | id UTF-8 bytes | dense dim x f32
    [n_tokens u16 | n_tokens x dim x f32   when flag bit 0 is set]

The crc32 covers every header byte before it, so any single-byte header
corruption is rejected rather than silently misread. Readers reject
trailing bytes. Vectors are L2-normalised at load; zero vectors are an
error because their direction is undefined.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    HeaderChecksumError,
    InvalidVector,
    TrailingBytes,
    TruncatedFile,
    UnknownQuestion,
    UnsupportedFlags,
    UnsupportedVersion,
    ZeroVector,
)

MAGIC = b"HEMB"
VERSION = 1
_FLAG_TOKENS = 0x0001
REP_KINDS = {0: "mean", 1: "sst"}
REP_CODES = {"mean": 0, "sst": 1}

# Tolerance under which a vector is considered already unit-norm; skipping
# the divide keeps load -> write byte-identical for normalised files.
_UNIT_TOL = 1e-6


def _unit(v: np.ndarray, qid: str) -> np.ndarray:
    v64 = v.astype(np.float64)
    if not np.all(np.isfinite(v64)):
        raise InvalidVector(f"non-finite value in vector for {qid!r}")
    n = float(np.sqrt(np.dot(v64, v64)))
    if n == 0.0:
        raise ZeroVector(qid)
    if abs(n - 1.0) <= _UNIT_TOL:
        return np.ascontiguousarray(v, dtype=np.float32)
    return np.ascontiguousarray(v64 / n, dtype=np.float32)


@dataclass(frozen=True)
class EmbeddingRecord:
    question_id: str
    dense: np.ndarray                 # (dim,) float32, unit norm
    tokens: np.ndarray | None         # (n_tokens, dim) float32, unit rows
    rep_kind: str
    model_tag: str


class EmbeddingStore:
    """Immutable, memory-resident collection of embedding records."""

    def __init__(self, records: list[EmbeddingRecord], dim: int,
                 rep_kind: str, model_tag: str):
        self.dim = dim
        self.rep_kind = rep_kind
        self.model_tag = model_tag
        self.records: dict[str, EmbeddingRecord] = {}
        for rec in records:
            self.records[rec.question_id] = rec
        self.has_token_level = bool(records) and all(
            r.tokens is not None for r in records
        )
        # Dense vectors stacked in ascending id order for batched scoring.
        self.ids = sorted(self.records)
        if self.ids:
            self._dense = np.stack(
                [self.records[i].dense for i in self.ids]
            ).astype(np.float64)
        else:
            self._dense = np.zeros((0, dim), dtype=np.float64)

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, qid: str) -> bool:
        return qid in self.records

    def __getitem__(self, qid: str) -> EmbeddingRecord:
        try:
            return self.records[qid]
        except KeyError:
            raise UnknownQuestion(qid) from None

    def dense_similarities(self, query_id: str) -> tuple[list[str], np.ndarray]:
        """Cosine similarity of every record to the query, ids ascending."""
        q = self[query_id].dense.astype(np.float64)
        sims = self._dense @ q
        return self.ids, sims


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cosine similarity, in [0, 2]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape} differ")
    nu = float(np.sqrt(np.dot(u, u)))
    nv = float(np.sqrt(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector()
    d = 1.0 - float(np.dot(u, v)) / (nu * nv)
    return min(max(d, 0.0), 2.0)


def dense_top_k(
    query_id: str,
    k: int,
    exclude: set[str] | frozenset[str],
    store: EmbeddingStore,
) -> list[tuple[str, float]]:
    """k nearest records by cosine distance; the query itself is excluded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ids, sims = store.dense_similarities(query_id)
    dist = 1.0 - sims
    excluded = set(exclude) | {query_id}
    order = np.lexsort((np.arange(len(ids)), dist))
    out: list[tuple[str, float]] = []
    for i in order:
        qid = ids[i]
        if qid in excluded:
            continue
        out.append((qid, float(dist[i])))
        if len(out) == k:
            break
    return out


# --- file I/O -------------------------------------------------------------

def _read_exact(f: IO[bytes], n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise TruncatedFile(f"unexpected end of file while reading {what}")
    return data


def load_store(f: IO[bytes]) -> EmbeddingStore:
    """Read an HEMB file, validating every header field and the checksum."""
    magic = _read_exact(f, 4, "magic")
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    fixed = _read_exact(f, 16, "header")
    version, flags, dim, count = struct.unpack("<HHIQ", fixed)
    if version != VERSION:
        raise UnsupportedVersion(f"unsupported version {version}")
    if flags & ~_FLAG_TOKENS:
        raise UnsupportedFlags(f"unknown flag bits 0x{flags:04x}")
    if dim == 0:
        raise InvalidVector("dimension must be positive")
    tag_len_raw = _read_exact(f, 2, "model tag length")
    (tag_len,) = struct.unpack("<H", tag_len_raw)
    tag_raw = _read_exact(f, tag_len, "model tag")
    try:
        model_tag = tag_raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidVector("model tag is not valid UTF-8") from exc
    rep_raw = _read_exact(f, 1, "rep kind")
    rep_code = rep_raw[0]
    if rep_code not in REP_KINDS:
        raise InvalidVector(f"unknown rep kind {rep_code}")
    (stored_crc,) = struct.unpack("<I", _read_exact(f, 4, "header checksum"))
    header = magic + fixed + tag_len_raw + tag_raw + rep_raw
    if zlib.crc32(header) != stored_crc:
        raise HeaderChecksumError("header checksum mismatch")

    has_tokens = bool(flags & _FLAG_TOKENS)
    rep_kind = REP_KINDS[rep_code]
    records: list[EmbeddingRecord] = []
    seen: set[str] = set()
    for _ in range(count):
        (id_len,) = struct.unpack("<H", _read_exact(f, 2, "record id length"))
        try:
            qid = _read_exact(f, id_len, "record id").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidVector("record id is not valid UTF-8") from exc
        if not qid or qid in seen:
            raise InvalidVector(f"empty or duplicate record id {qid!r}")
        seen.add(qid)
        dense = np.frombuffer(
            _read_exact(f, 4 * dim, f"dense vector of {qid!r}"), dtype="<f4"
        )
        tokens = None
        if has_tokens:
            (n_tokens,) = struct.unpack(
                "<H", _read_exact(f, 2, f"token count of {qid!r}")
            )
            if n_tokens == 0:
                raise InvalidVector(f"record {qid!r} has zero token rows")
            raw = _read_exact(f, 4 * dim * n_tokens, f"token matrix of {qid!r}")
            rows = np.frombuffer(raw, dtype="<f4").reshape(n_tokens, dim)
            tokens = np.stack([_unit(row, qid) for row in rows])
        records.append(
            EmbeddingRecord(
                question_id=qid,
                dense=_unit(dense, qid),
                tokens=tokens,
                rep_kind=rep_kind,
                model_tag=model_tag,
            )
        )
    if f.read(1):
        raise TrailingBytes("trailing bytes after last record")
    return EmbeddingStore(records, dim=dim, rep_kind=rep_kind, model_tag=model_tag)


def write_store(store: EmbeddingStore, f: IO[bytes]) -> None:
    """Write the store back out in HEMB format (records in ascending id)."""
    flags = _FLAG_TOKENS if store.has_token_level else 0
    tag_raw = store.model_tag.encode("utf-8")
    header = MAGIC
    header += struct.pack("<HHIQ", VERSION, flags, store.dim, len(store.records))
    header += struct.pack("<H", len(tag_raw)) + tag_raw
    header += struct.pack("<B", REP_CODES[store.rep_kind])
    f.write(header)
    f.write(struct.pack("<I", zlib.crc32(header)))
    for qid in store.ids:
        rec = store.records[qid]
        id_raw = qid.encode("utf-8")
        f.write(struct.pack("<H", len(id_raw)))
        f.write(id_raw)
        f.write(rec.dense.astype("<f4").tobytes())
        if store.has_token_level:
            assert rec.tokens is not None
            f.write(struct.pack("<H", rec.tokens.shape[0]))
            f.write(rec.tokens.astype("<f4").tobytes())
