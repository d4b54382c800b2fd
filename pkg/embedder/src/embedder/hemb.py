"""Writer for the HEMB embedding file format (little-endian).

    magic "HEMB" | version u16 = 1 | flags u16 (bit 0: token matrices)
    dim u32 | count u64 | model_tag_len u16 + UTF-8 bytes
    rep_kind u8 (0 = mean, 1 = sst) | header_crc32 u32

followed by one record per question:

    id_len u16 | id UTF-8 | dense dim x f32
    [n_tokens u16 | n_tokens x dim x f32   when flag bit 0 is set]

Vectors are L2-normalised before writing so readers see unit norms.
"""

from __future__ import annotations

import struct
import zlib
from typing import IO

import numpy as np

from .errors import EncodeFailure

MAGIC = b"HEMB"
VERSION = 1
FLAG_TOKENS = 0x0001
REP_CODES = {"mean": 0, "sst": 1}


def unit(v: np.ndarray, question_id: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n == 0.0 or not np.isfinite(n):
        raise EncodeFailure(question_id, "pooled vector has no direction")
    return (v / n).astype("<f4")


def unit_rows(m: np.ndarray, question_id: str) -> np.ndarray:
    return np.stack([unit(row, question_id) for row in np.asarray(m)])


def write_hemb(
    out: IO[bytes],
    records: list[tuple[str, np.ndarray, np.ndarray | None]],
    dim: int,
    model_tag: str,
    rep_kind: str,
) -> None:
    """records: (question_id, dense, token matrix or None), ids ascending."""
    with_tokens = bool(records) and records[0][2] is not None
    flags = FLAG_TOKENS if with_tokens else 0
    tag_raw = model_tag.encode("utf-8")
    header = MAGIC
    header += struct.pack("<HHIQ", VERSION, flags, dim, len(records))
    header += struct.pack("<H", len(tag_raw)) + tag_raw
    header += struct.pack("<B", REP_CODES[rep_kind])
    out.write(header)
    out.write(struct.pack("<I", zlib.crc32(header)))
    for qid, dense, tokens in records:
        id_raw = qid.encode("utf-8")
        out.write(struct.pack("<H", len(id_raw)))
        out.write(id_raw)
        out.write(unit(dense, qid).tobytes())
        if with_tokens:
            rows = unit_rows(tokens, qid)
            out.write(struct.pack("<H", rows.shape[0]))
            out.write(rows.tobytes())
