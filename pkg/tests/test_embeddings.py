import io
import struct
import zlib

import numpy as np
import pytest

from harmoniser.embeddings import (
    EmbeddingRecord,
    EmbeddingStore,
    cosine_distance,
    dense_top_k,
    load_store,
    write_store,
)
from harmoniser.errors import (
    BadMagic,
    DimensionMismatch,
    EmbeddingFormatError,
    TrailingBytes,
    TruncatedFile,
    UnknownQuestion,
    UnsupportedFlags,
    UnsupportedVersion,
    ZeroVector,
)

from oracles import naive_cosine_distance, naive_dense_rank


def hand_built_file(vectors, dim, tag="tiny", rep_kind=0, tokens=None):
    """Assemble HEMB bytes with struct only, independent of write_store."""
    flags = 1 if tokens is not None else 0
    header = b"HEMB"
    header += struct.pack("<HHIQ", 1, flags, dim, len(vectors))
    tag_raw = tag.encode()
    header += struct.pack("<H", len(tag_raw)) + tag_raw
    header += struct.pack("<B", rep_kind)
    body = b""
    for qid, vec in vectors.items():
        id_raw = qid.encode()
        body += struct.pack("<H", len(id_raw)) + id_raw
        body += np.asarray(vec, dtype="<f4").tobytes()
        if tokens is not None:
            rows = np.asarray(tokens[qid], dtype="<f4")
            body += struct.pack("<H", rows.shape[0]) + rows.tobytes()
    return header + struct.pack("<I", zlib.crc32(header)) + body


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return (v / np.linalg.norm(v)).astype(np.float32)


class TestLoadStore:
    def test_reads_hand_built_file(self):
        vecs = {"a": unit([1, 2, 3]), "b": unit([0, 1, 0])}
        store = load_store(io.BytesIO(hand_built_file(vecs, 3)))
        assert store.dim == 3
        assert store.model_tag == "tiny"
        assert store.rep_kind == "mean"
        np.testing.assert_array_equal(store["a"].dense, vecs["a"])
        assert not store.has_token_level

    def test_reads_token_matrices(self):
        vecs = {"a": unit([1.0, 0.0])}
        toks = {"a": np.stack([unit([1.0, 0]), unit([0, 1.0])])}
        store = load_store(io.BytesIO(hand_built_file(vecs, 2, tokens=toks)))
        assert store.has_token_level
        assert store["a"].tokens.shape == (2, 2)

    def test_round_trip_byte_identical(self):
        data = hand_built_file({"a": unit([1, 2, 3]), "b": unit([3, 1, 4])}, 3)
        store = load_store(io.BytesIO(data))
        out = io.BytesIO()
        write_store(store, out)
        assert out.getvalue() == data

    def test_round_trip_with_tokens(self, store_120):
        out = io.BytesIO()
        write_store(store_120, out)
        again = load_store(io.BytesIO(out.getvalue()))
        out2 = io.BytesIO()
        write_store(again, out2)
        assert out2.getvalue() == out.getvalue()

    def test_bad_magic(self):
        data = bytearray(hand_built_file({"a": unit([1, 0])}, 2))
        data[0:4] = b"XEMB"
        with pytest.raises(BadMagic):
            load_store(io.BytesIO(bytes(data)))

    def test_unsupported_version(self):
        vecs = {"a": unit([1, 0])}
        data = bytearray(hand_built_file(vecs, 2))
        data[4] = 9
        # keep the checksum consistent so the version check itself fires
        header = bytes(data[:23])
        data[23:27] = struct.pack("<I", zlib.crc32(header))
        with pytest.raises(UnsupportedVersion):
            load_store(io.BytesIO(bytes(data)))

    def test_unknown_flags(self):
        vecs = {"a": unit([1, 0])}
        data = bytearray(hand_built_file(vecs, 2))
        data[6] |= 0x02
        header = bytes(data[:23])
        data[23:27] = struct.pack("<I", zlib.crc32(header))
        with pytest.raises(UnsupportedFlags):
            load_store(io.BytesIO(bytes(data)))

    def test_zero_vector_rejected(self):
        data = hand_built_file({"a": np.zeros(2, dtype=np.float32)}, 2)
        with pytest.raises(ZeroVector):
            load_store(io.BytesIO(data))

    def test_truncated_rejected(self):
        data = hand_built_file({"a": unit([1, 0]), "b": unit([0, 1])}, 2)
        with pytest.raises(TruncatedFile):
            load_store(io.BytesIO(data[:-3]))

    def test_trailing_bytes_rejected(self):
        data = hand_built_file({"a": unit([1, 0])}, 2)
        with pytest.raises(TrailingBytes):
            load_store(io.BytesIO(data + b"\x00"))

    def test_header_byte_mutations_rejected(self):
        data = hand_built_file({"a": unit([1, 0]), "b": unit([0, 1])}, 2)
        header_len = 4 + 16 + 2 + 4 + 1 + 4  # through the checksum
        rng = np.random.default_rng(5)
        for _ in range(200):
            pos = int(rng.integers(header_len))
            delta = int(rng.integers(1, 256))
            mutated = bytearray(data)
            mutated[pos] = (mutated[pos] + delta) % 256
            with pytest.raises(EmbeddingFormatError):
                load_store(io.BytesIO(bytes(mutated)))

    def test_vectors_normalised_at_load(self):
        data = hand_built_file({"a": np.array([3.0, 4.0], dtype=np.float32)}, 2)
        store = load_store(io.BytesIO(data))
        np.testing.assert_allclose(np.linalg.norm(store["a"].dense), 1.0, atol=1e-6)


class TestCosineDistance:
    def test_identical_direction(self):
        v = np.array([1.0, 2.0, 3.0])
        assert cosine_distance(v, v) == pytest.approx(0.0, abs=1e-12)
        assert cosine_distance(v, 5 * v) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0

    def test_antipodal(self):
        v = np.array([1.0, 1.0])
        assert cosine_distance(v, -v) == pytest.approx(2.0, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            u, v = rng.normal(size=4), rng.normal(size=4)
            assert cosine_distance(u, v) == cosine_distance(v, u)

    def test_matches_naive(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            u, v = rng.normal(size=6), rng.normal(size=6)
            assert cosine_distance(u, v) == pytest.approx(
                naive_cosine_distance(u.tolist(), v.tolist()), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_distance(np.ones(2), np.ones(3))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine_distance(np.zeros(2), np.ones(2))


def store_of(vectors, dim):
    records = [
        EmbeddingRecord(qid, unit(v), None, "mean", "t")
        for qid, v in vectors.items()
    ]
    return EmbeddingStore(records, dim=dim, rep_kind="mean", model_tag="t")


class TestDenseTopK:
    def test_duplicate_vector_first(self):
        store = store_of({"q": [1, 2], "dup": [2, 4], "far": [-1, 3]}, 2)
        out = dense_top_k("q", 2, set(), store)
        assert out[0][0] == "dup"
        assert out[0][1] == pytest.approx(0.0, abs=1e-7)

    def test_exhaustion(self):
        store = store_of({"a": [1, 0], "b": [0, 1], "c": [1, 1]}, 2)
        assert len(dense_top_k("a", 10, set(), store)) == 2

    def test_query_excluded(self, store_120):
        out = dense_top_k(store_120.ids[0], 5, set(), store_120)
        assert store_120.ids[0] not in [c for c, _ in out]

    def test_unknown_question(self, store_120):
        with pytest.raises(UnknownQuestion):
            dense_top_k("nope", 3, set(), store_120)

    def test_matches_naive_on_random_stores(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(3, 60))
            vectors = {f"v{i:03d}": rng.normal(size=5) for i in range(n)}
            store = store_of(vectors, 5)
            unit_vectors = {qid: store[qid].dense.astype(np.float64).tolist()
                            for qid in vectors}
            qid = f"v{int(rng.integers(n)):03d}"
            k = int(rng.integers(1, n))
            got = dense_top_k(qid, k, set(), store)
            want = naive_dense_rank(qid, unit_vectors, k)
            assert [c for c, _ in got] == [c for c, _ in want]
            # stored vectors are f32, so the oracle's re-normalisation can
            # differ from the store's unit-norm assumption at ~1e-7
            for (_, gd), (_, wd) in zip(got, want):
                assert gd == pytest.approx(wd, abs=1e-6)

    def test_distance_rank_equals_similarity_rank(self, store_120):
        ids, sims = store_120.dense_similarities(store_120.ids[4])
        by_dist = np.lexsort((np.arange(len(ids)), 1.0 - sims))
        by_sim = np.lexsort((np.arange(len(ids)), -sims))
        assert list(by_dist) == list(by_sim)
