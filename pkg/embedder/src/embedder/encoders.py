"""Token-level encoders producing final-layer representation matrices.

The hash encoder is a deterministic stand-in for a pretrained model: each
token's vector is drawn from a generator seeded by the token's digest, so
identical input always yields identical output with no weights on disk.
Model ids look like "hash-<dim>", e.g. "hash-64".
"""

from __future__ import annotations

import hashlib
import logging
import re

import numpy as np

from .errors import EncodeFailure, ModelLoadFailure

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_HASH_ID = re.compile(r"^hash-(\d+)$")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class HashEncoder:
    """Deterministic pseudo-model; one unit-variance row per input token."""

    max_length = 256

    def __init__(self, model_id: str, dim: int):
        self.model_id = model_id
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            vec = np.random.default_rng(seed).normal(size=self.dim)
            self._cache[token] = vec
        return vec

    def encode(self, question_id: str, text: str) -> np.ndarray:
        """(n_tokens, dim) final-layer matrix for one input sequence."""
        tokens = tokenize(text)
        if not tokens:
            raise EncodeFailure(question_id, "input sequence has no tokens")
        if len(tokens) > self.max_length:
            log.warning("truncating %s: %d tokens exceed max length %d",
                        question_id, len(tokens), self.max_length)
            tokens = tokens[: self.max_length]
        return np.stack([self._token_vector(t) for t in tokens])


def load_model(model_id: str) -> HashEncoder:
    match = _HASH_ID.match(model_id)
    if not match:
        raise ModelLoadFailure(model_id, "expected a 'hash-<dim>' model id")
    dim = int(match.group(1))
    if dim == 0:
        raise ModelLoadFailure(model_id, "dimension must be positive")
    return HashEncoder(model_id, dim)
