"""Embedding providers behind one interface.

``HashingEmbedder`` is the deterministic reference provider used by tests and
offline runs; ``TfidfEmbedder`` fits a vocabulary on a corpus; and
``RemoteEmbedder`` talks to an HTTP service hosting a sentence/CLIP model.
"""
from __future__ import annotations

import base64
import hashlib
import math
import os
import re
from collections import Counter
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np

from ._http import JsonService
from .errors import EmbeddingError, TransportError, ValidationError

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumerics (shared by all metrics)."""
    return _TOKEN.findall(text.lower())


class Embedder(Protocol):
    dim: int
    name: str

    def embed_text(self, text: str) -> np.ndarray: ...

    def embed_image(self, image_ref: str) -> np.ndarray: ...


def _unit(vec: np.ndarray, what: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    if not np.all(np.isfinite(vec)):
        raise EmbeddingError(f"non-finite embedding for {what}")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise EmbeddingError(f"zero embedding for {what}")
    return vec / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two vectors, clipped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValidationError("cosine of a zero vector is undefined")
    return float(min(1.0, max(-1.0, float(a @ b) / (na * nb))))


def embed_texts(embedder: Embedder, texts: Sequence[str]) -> np.ndarray:
    """Stack ``embed_text`` over many inputs into an (n, dim) matrix."""
    if not texts:
        return np.zeros((0, embedder.dim))
    rows = [embedder.embed_text(t) for t in texts]
    out = np.vstack(rows)
    if out.shape[1] != embedder.dim:
        raise EmbeddingError(f"{embedder.name}: got dim {out.shape[1]}, declared {embedder.dim}")
    return out


class HashingEmbedder:
    """Hashed bag-of-tokens, L2-normalised.

    Tokens land in ``dim - 1`` buckets via blake2b. The last coordinate is a
    shared baseline set to ``sqrt(b / (1 - b))`` times the bucket-part norm,
    so token-disjoint inputs score cosine ``b`` instead of 0 and every
    cosine is the affine map ``b + (1 - b) * bag_cosine``. This imitates the
    positive floor of contextual token embeddings. ``baseline=0`` gives the
    plain hashed bag.

    Images embed as the tokens of the file stem plus an optional
    ``<file>.caption`` sidecar, so a captioned image and its caption agree.
    """

    name = "hashing"

    def __init__(self, dim: int = 256, baseline: float = 0.1):
        if dim < 2:
            raise ValidationError("dim must be >= 2")
        if not 0.0 <= baseline < 1.0:
            raise ValidationError("baseline must be in [0, 1)")
        self.dim = dim
        self.baseline = baseline
        self._lift = math.sqrt(baseline / (1.0 - baseline))

    def bucket(self, token: str) -> int:
        h = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(h, "little") % (self.dim - 1)

    def _embed_tokens(self, tokens: Sequence[str], what: str) -> np.ndarray:
        if not tokens:
            raise EmbeddingError(f"no tokens in {what!r}")
        vec = np.zeros(self.dim)
        for tok, count in Counter(tokens).items():
            vec[self.bucket(tok)] += count
        vec[-1] = self._lift * np.linalg.norm(vec[:-1])
        return _unit(vec, what)

    def embed_text(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise ValidationError("text must be non-empty")
        return self._embed_tokens(tokenize(text), text)

    def embed_token(self, token: str) -> np.ndarray:
        return self._embed_tokens([token], token)

    def image_tokens(self, image_ref: str) -> list[str]:
        path = Path(image_ref)
        if not path.is_file():
            raise FileNotFoundError(f"image not readable: {image_ref}")
        tokens = tokenize(path.stem)
        caption = path.with_name(path.name + ".caption")
        if caption.is_file():
            tokens += tokenize(caption.read_text(encoding="utf-8"))
        if not tokens:
            # nameless file: fall back to a content hash so bytes still matter
            tokens = [hashlib.blake2b(path.read_bytes(), digest_size=8).hexdigest()]
        return tokens

    def embed_image(self, image_ref: str) -> np.ndarray:
        return self._embed_tokens(self.image_tokens(image_ref), image_ref)


class TfidfEmbedder:
    """TF-IDF over a fitted vocabulary.

    ``tf`` is the raw count, ``idf = ln((1 + N) / (1 + df)) + 1``; rows are
    L2-normalised. Texts with no in-vocabulary token cannot be embedded.
    """

    name = "tfidf"

    def __init__(self, corpus: Sequence[str]):
        docs = [tokenize(d) for d in corpus]
        if not docs:
            raise ValidationError("TF-IDF needs a non-empty corpus")
        vocab = sorted({t for d in docs for t in d})
        if not vocab:
            raise ValidationError("TF-IDF corpus has no tokens")
        self.vocabulary = {t: i for i, t in enumerate(vocab)}
        df = Counter(t for d in docs for t in set(d))
        n = len(docs)
        self.idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in vocab])
        self.dim = len(vocab)

    def weights(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for tok, count in Counter(tokenize(text)).items():
            idx = self.vocabulary.get(tok)
            if idx is not None:
                vec[idx] = count * self.idf[idx]
        return vec

    def embed_text(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise ValidationError("text must be non-empty")
        return _unit(self.weights(text), text)

    def embed_token(self, token: str) -> np.ndarray:
        return self.embed_text(token)

    def embed_image(self, image_ref: str) -> np.ndarray:
        raise EmbeddingError("TF-IDF provider has no image modality")


class RemoteEmbedder:
    """Client for an embedding service.

    Wire format: ``POST /embed/text {"text": ...}`` and
    ``POST /embed/image {"path": ...}`` (or ``{"bytes_b64": ...}`` with
    ``send_bytes=True``), each answering ``{"vector": [...]}``. 4xx raises
    :class:`ValidationError`, 5xx and connection failures raise
    :class:`TransportError`.
    """

    name = "remote"

    def __init__(
        self,
        base_url: str,
        dim: int,
        model: str | None = None,
        timeout: float = 30.0,
        max_in_flight: int = 8,
        send_bytes: bool = False,
        transport: httpx.BaseTransport | None = None,
    ):
        self.dim = dim
        self.model = model
        self.send_bytes = send_bytes
        self._service = JsonService(base_url, timeout, max_in_flight, transport)

    def _post(self, route: str, payload: dict) -> np.ndarray:
        if self.model:
            payload = {**payload, "model": self.model}
        raw = self._service.field(route, payload, "vector")
        try:
            vec = np.asarray(raw, dtype=np.float64)
        except (ValueError, TypeError) as exc:
            raise TransportError(f"{route}: malformed vector: {exc}") from exc
        if vec.shape != (self.dim,):
            raise EmbeddingError(f"{route}: expected dim {self.dim}, got {vec.shape}")
        return _unit(vec, route)

    def embed_text(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise ValidationError("text must be non-empty")
        return self._post("/embed/text", {"text": text})

    def embed_token(self, token: str) -> np.ndarray:
        return self.embed_text(token)

    def embed_image(self, image_ref: str) -> np.ndarray:
        if self.send_bytes:
            data = Path(image_ref).read_bytes()
            return self._post("/embed/image", {"bytes_b64": base64.b64encode(data).decode("ascii")})
        if not os.path.isfile(image_ref):
            raise FileNotFoundError(f"image not readable: {image_ref}")
        return self._post("/embed/image", {"path": image_ref})

    def close(self) -> None:
        self._service.close()
