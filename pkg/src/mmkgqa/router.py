"""Hybrid image provisioning: reuse a graph image when one is close enough,
otherwise ask a generation service."""
from __future__ import annotations

import enum
import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from ._http import JsonService
from .consistency import ConsistencyConfig, Verdict, hallucination_check
from .embeddings import cosine
from .errors import EmbeddingError, MMKGError, ParseError, StageError, ValidationError
from .kg import EntityId, ImageLink, KnowledgeGraph


@dataclass(frozen=True)
class IndexEntry:
    entity: EntityId
    image: ImageLink
    vector: np.ndarray


class ImageIndex:
    """Immutable exact-search index over verified graph images, ordered by entity id."""

    def __init__(self, entries: list[IndexEntry], dim: int | None = None):
        entries = sorted(entries, key=lambda e: e.entity)
        dims = {e.vector.shape[0] for e in entries}
        if len(dims) > 1:
            raise EmbeddingError(f"index vectors have mixed dimensions {sorted(dims)}")
        self.entries = tuple(entries)
        self.dim = dims.pop() if dims else dim
        self.matrix = (np.vstack([e.vector for e in entries]) if entries
                       else np.zeros((0, self.dim or 0)))
        self.matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.entries)


def build_index(kg: KnowledgeGraph, embedder) -> ImageIndex:
    entries = [IndexEntry(eid, img, embedder.embed_image(img.path)) for eid, img in kg.verified_images()]
    return ImageIndex(entries, getattr(embedder, "dim", None))


@dataclass(frozen=True)
class Retrieval:
    entry: IndexEntry
    similarity: float


def retrieve(index: ImageIndex, query_text: str, embedder) -> Retrieval:
    """Exhaustive argmax of cosine; the lowest entity id wins ties."""
    if len(index) == 0:
        raise ValidationError("image index is empty")
    q = embedder.embed_text(query_text)
    if q.shape[0] != index.dim:
        raise EmbeddingError(f"query dim {q.shape[0]} != index dim {index.dim}")
    sims = index.matrix @ q
    best = int(np.argmax(sims))  # first occurrence of the max, i.e. lowest id
    return Retrieval(index.entries[best], float(min(1.0, max(-1.0, sims[best]))))


# -- generation clients ----------------------------------------------------------


@dataclass(frozen=True)
class Generated:
    image_ref: str
    latency: float


class GenerationClient(Protocol):
    def generate(self, prompt: str) -> Generated: ...


class MockGenerationClient:
    """Writes a placeholder image named by the prompt hash, with the prompt
    as its ``.caption`` sidecar, and reports a fixed synthetic latency."""

    name = "mock-gen"

    def __init__(self, out_dir, latency: float = 6.8):
        self.out_dir = Path(out_dir)
        self.latency = latency

    def generate(self, prompt: str) -> Generated:
        if not prompt or not prompt.strip():
            raise ValidationError("generation prompt must be non-empty")
        digest = hashlib.sha1(prompt.encode("utf-8")).hexdigest()[:16]
        path = self.out_dir / f"gen-{digest}.png"
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"\x89PNG\r\n\x1a\n" + digest.encode("ascii"))
        path.with_name(path.name + ".caption").write_text(prompt, encoding="utf-8")
        return Generated(str(path), self.latency)


class RemoteGenerationClient:
    """``POST /generate {"prompt"}`` returning ``{"image_path"}``; latency is wall-clock."""

    name = "remote-gen"

    def __init__(self, base_url: str, timeout: float = 300.0, max_in_flight: int = 2, transport=None):
        self._service = JsonService(base_url, timeout, max_in_flight, transport)

    def generate(self, prompt: str) -> Generated:
        start = time.perf_counter()
        path = self._service.field("/generate", {"prompt": prompt}, "image_path")
        return Generated(str(path), time.perf_counter() - start)

    def close(self) -> None:
        self._service.close()


# -- routing ----------------------------------------------------------------------


class Strategy(str, enum.Enum):
    RETRIEVED = "Retrieved"
    GENERATED = "Generated"


@dataclass
class RoutingDecision:
    strategy: Strategy
    image_ref: str
    similarity: float
    latency: float
    entity: EntityId | None = None
    hallucination_flag: bool | None = None

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "image_ref": self.image_ref,
            "similarity": self.similarity,
            "latency": self.latency,
            "entity": None if self.entity is None else str(self.entity),
            "hallucination_flag": self.hallucination_flag,
        }


def _check_tau(tau: float) -> None:
    if math.isnan(tau) or tau < 0:
        raise ValidationError(f"tau must be >= 0, got {tau}")


def route(question: str, answer_text: str, index: ImageIndex, gen_client: GenerationClient, embedder,
          tau: float = 0.5, retrieval_latency: float | None = None) -> RoutingDecision:
    """Retrieve by the question; fall back to generating from the answer text.

    ``similarity`` is the best retrieval score in both cases. Latency is the
    retrieval time, plus generation time on a miss; ``retrieval_latency``
    replaces the measured retrieval time with a fixed value.
    """
    _check_tau(tau)
    start = time.perf_counter()
    hit = retrieve(index, question, embedder)
    r_lat = time.perf_counter() - start if retrieval_latency is None else retrieval_latency
    if hit.similarity >= tau:
        return RoutingDecision(Strategy.RETRIEVED, hit.entry.image.path, hit.similarity, r_lat, hit.entry.entity)
    try:
        gen = gen_client.generate(answer_text)
    except (MMKGError, OSError) as exc:
        raise StageError("generate", exc, fallback=hit) from exc
    return RoutingDecision(Strategy.GENERATED, gen.image_ref, hit.similarity, r_lat + gen.latency)


def read_queries(path) -> list[dict]:
    """JSON Lines of ``{"question", "answer"}`` with optional ``gt_image``
    (resolved against the file's directory)."""
    base = Path(path).parent
    out = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                q = {"question": str(obj["question"]), "answer": str(obj["answer"])}
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"bad query record: {exc}", no, str(path)) from None
            if obj.get("gt_image"):
                q["gt_image"] = str(base / obj["gt_image"])
            out.append(q)
    return out


STRATEGIES = ("PureRetrieval", "PureGeneration", "Hybrid")


def strategy_report(queries: list[dict], index: ImageIndex, gen_client: GenerationClient, embedder,
                    tau: float = 0.5, consistency: tuple | None = None,
                    retrieval_latency: float | None = 0.15) -> dict:
    """Compare pure retrieval, pure generation and the hybrid router.

    Per strategy: mean cosine between the answer text and the provisioned
    image, mean latency, and (when ``consistency`` is a
    ``(VisionQAClient, ConsistencyConfig)`` pair and queries carry a
    ``gt_image``) the share of provisioned images judged hallucinated.
    """
    _check_tau(tau)
    if not queries:
        raise ValidationError("strategy_report needs at least one query")
    taus = {"PureRetrieval": 0.0, "PureGeneration": math.inf, "Hybrid": tau}
    rows = {}
    for name in STRATEGIES:
        sims, lats, flags, counts = [], [], [], {s.value: 0 for s in Strategy}
        for q in queries:
            d = route(q["question"], q["answer"], index, gen_client, embedder, taus[name], retrieval_latency)
            if consistency is not None and q.get("gt_image"):
                client, cfg = consistency
                rep = hallucination_check(q["gt_image"], d.image_ref, client, cfg or ConsistencyConfig())
                d.hallucination_flag = rep.verdict is Verdict.HALLUCINATION
                flags.append(d.hallucination_flag)
            sims.append(cosine(embedder.embed_text(q["answer"]), embedder.embed_image(d.image_ref)))
            lats.append(d.latency)
            counts[d.strategy.value] += 1
        rows[name] = {
            "cosine_sim": math.fsum(sims) / len(sims),
            "latency_s": math.fsum(lats) / len(lats),
            "hallucination_rate": (sum(flags) / len(flags)) if flags else None,
            "retrieved": counts["Retrieved"],
            "generated": counts["Generated"],
        }
    return {"tau": tau, "n": len(queries), "strategies": rows}


def format_table(report: dict) -> str:
    """Aligned text table: Strategy, Cosine Sim., Latency, Hallucination Rate."""
    header = ("Strategy", "Cosine Sim.", "Latency", "Hallucination Rate")
    lines = []
    for name in STRATEGIES:
        row = report["strategies"][name]
        h = row["hallucination_rate"]
        lines.append((
            name,
            f"{row['cosine_sim']:.2f}",
            f"{row['latency_s']:.2f} s",
            "n/a" if h is None else f"{100 * h:.1f}%",
        ))
    widths = [max(len(header[i]), *(len(r[i]) for r in lines)) for i in range(4)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*header), "  ".join("-" * w for w in widths)]
    out += [fmt.format(*r) for r in lines]
    return "\n".join(out)
