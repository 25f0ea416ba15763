"""Corpus refinement: exact and semantic dedup, cluster balancing, curation.

Every function returns a new list holding a subsequence of its input; pairs
themselves are never modified.
"""
from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .diversity import kmeans
from .embeddings import embed_texts
from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)


def normalize_text(text: str) -> str:
    """NFKC, case-folded, single-spaced, trailing punctuation dropped."""
    text = unicodedata.normalize("NFKC", text).casefold()
    text = " ".join(text.split())
    return text.rstrip(" ?.!")


def dedupe_exact(corpus: list) -> list:
    seen: set[tuple[str, str]] = set()
    out = []
    for pair in corpus:
        key = (normalize_text(pair.question), normalize_text(pair.answer))
        if key in seen:
            continue
        seen.add(key)
        out.append(pair)
    return out


def dedupe_semantic(corpus: list, embedder, threshold: float = 0.95) -> list:
    """Keep-first greedy filter: a question is dropped when its cosine with
    any already-kept question is at least ``threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold must be in (0, 1), got {threshold}")
    if not corpus:
        return []
    V = embed_texts(embedder, [p.question for p in corpus])
    keep = _backend.greedy_select(np.ascontiguousarray(V), float(threshold))
    return [corpus[i] for i in keep]


def _balance_once(corpus, embedder, k, cap, seed):
    V = embed_texts(embedder, [p.question for p in corpus])
    labels = kmeans(V, min(k, len(corpus)), seed=seed).labels
    taken: dict[int, int] = {}
    out = []
    for pair, lab in zip(corpus, labels):
        lab = int(lab)
        if taken.get(lab, 0) < cap:
            taken[lab] = taken.get(lab, 0) + 1
            out.append(pair)
    return out


def balance(corpus: list, embedder, k: int = 50, per_cluster_cap: int = 100, seed: int = 42) -> list:
    """Cluster questions with K-Means and keep at most ``per_cluster_cap``
    members of each cluster, earliest first.

    Re-clustering the reduced corpus can split clusters differently, so the
    step repeats until nothing more is removed; the result is a fixpoint and
    the function is idempotent.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if per_cluster_cap < 1:
        raise ValidationError("per_cluster_cap must be >= 1")
    current = list(corpus)
    while current:
        nxt = _balance_once(current, embedder, k, per_cluster_cap, seed)
        if len(nxt) == len(current):
            break
        current = nxt
    return current


@dataclass(frozen=True)
class BlockRule:
    kind: str  # "id" or "re"
    value: str
    line: int

    def matches(self, pair) -> bool:
        if self.kind == "id":
            return pair.id == self.value
        return re.search(self.value, pair.question) is not None

    def __str__(self) -> str:
        return f"{self.kind}:{self.value}"


def parse_blocklist(text: str, path: str | None = None) -> list[BlockRule]:
    rules = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, sep, value = line.partition(":")
        if not sep or kind not in ("id", "re") or not value:
            raise ParseError(f"blocklist entry must be id:<pair-id> or re:<pattern>, got {line!r}", no, path)
        if kind == "re":
            try:
                re.compile(value)
            except re.error as exc:
                raise ParseError(f"bad pattern {value!r}: {exc}", no, path) from None
        rules.append(BlockRule(kind, value, no))
    return rules


def apply_curation(corpus: list, blocklist) -> tuple[list, list[dict]]:
    """Drop pairs matched by the blocklist.

    ``blocklist`` is a path or an already-parsed list of rules. Returns the
    kept pairs and a removal log with one record per dropped pair.
    """
    if isinstance(blocklist, (str, Path)):
        rules = parse_blocklist(Path(blocklist).read_text(encoding="utf-8"), str(blocklist))
    else:
        rules = list(blocklist or [])
    kept, removed = [], []
    for pair in corpus:
        hit = next((r for r in rules if r.matches(pair)), None)
        if hit is None:
            kept.append(pair)
        else:
            removed.append({"id": pair.id, "question": pair.question, "rule": str(hit)})
    if removed:
        log.info("curation removed %d pairs", len(removed))
    return kept, removed


@dataclass
class RefineConfig:
    semantic_threshold: float = 0.95
    k: int = 50
    per_cluster_cap: int | None = None
    seed: int = 42


def refine(corpus: list, embedder, config: RefineConfig | None = None, blocklist=None,
           augmented: list | None = None) -> tuple[list, dict]:
    """merge -> exact -> semantic -> balance -> curation.

    Balancing runs only when ``per_cluster_cap`` is set. Returns the refined
    corpus and a report of how many pairs each stage removed.
    """
    config = config or RefineConfig()
    report: dict = {"input": len(corpus) + len(augmented or [])}
    current = list(corpus) + list(augmented or [])
    before = len(current)
    current = dedupe_exact(current)
    report["exact_removed"] = before - len(current)
    before = len(current)
    current = dedupe_semantic(current, embedder, config.semantic_threshold)
    report["semantic_removed"] = before - len(current)
    before = len(current)
    if config.per_cluster_cap is not None:
        current = balance(current, embedder, config.k, config.per_cluster_cap, config.seed)
    report["balance_removed"] = before - len(current)
    removal_log: list[dict] = []
    if blocklist is not None:
        current, removal_log = apply_curation(current, blocklist)
    report["curation_removed"] = len(removal_log)
    report["curation_log"] = removal_log
    report["output"] = len(current)
    return current, report
