"""BLEU, ROUGE-N, ROUGE-L and greedy-matching token F1.

All functions take token lists (see :func:`mmkgqa.embeddings.tokenize`).
BLEU uses no smoothing: if any order has zero matches the score is 0.
"""
from __future__ import annotations

import math
from collections import Counter
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .embeddings import tokenize
from .errors import ValidationError

__all__ = ["PRF", "bleu", "rouge_n", "rouge_l", "token_f1", "tokenize", "ngrams", "score_pair"]


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


def _prf(matches: float, cand_total: float, ref_total: float) -> PRF:
    p = matches / cand_total if cand_total else 0.0
    r = matches / ref_total if ref_total else 0.0
    f = 2 * p * r / (p + r) if p > 0 and r > 0 else 0.0
    return PRF(p, r, f)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: Sequence[str], reference: Sequence[str], n: int = 4) -> float:
    """Sentence BLEU with uniform weights over orders 1..n and brevity penalty."""
    if not 1 <= n <= 4:
        raise ValidationError("BLEU order must be in 1..4")
    c, r = len(candidate), len(reference)
    if c == 0:
        return 0.0
    log_sum = 0.0
    for order in range(1, n + 1):
        cand = ngrams(candidate, order)
        total = sum(cand.values())
        if total == 0:
            return 0.0
        ref = ngrams(reference, order)
        clipped = sum(min(cnt, ref[g]) for g, cnt in cand.items())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / n)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> PRF:
    cand, ref = ngrams(candidate, n), ngrams(reference, n)
    overlap = sum((cand & ref).values())
    return _prf(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    vocab: dict[str, int] = {}
    ia = [vocab.setdefault(t, len(vocab)) for t in a]
    ib = [vocab.setdefault(t, len(vocab)) for t in b]
    return _backend.lcs_length(ia, ib)


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> PRF:
    return _prf(lcs_length(candidate, reference), len(candidate), len(reference))


def token_f1(candidate: Sequence[str], reference: Sequence[str], embedder) -> PRF:
    """Greedy max-cosine matching in the style of BERTScore.

    Each candidate token takes its best cosine against the reference tokens
    (precision), and vice versa (recall). ``embedder.embed_token`` supplies
    unit vectors.
    """
    if not candidate or not reference:
        return PRF(0.0, 0.0, 0.0)
    cache: dict[str, np.ndarray] = {}

    def vecs(tokens):
        for t in tokens:
            if t not in cache:
                cache[t] = embedder.embed_token(t)
        return np.vstack([cache[t] for t in tokens])

    sim = vecs(candidate) @ vecs(reference).T
    p = float(np.clip(sim.max(axis=1), -1.0, 1.0).mean())
    r = float(np.clip(sim.max(axis=0), -1.0, 1.0).mean())
    # scores are cosines, so clamp to [0, 1] before combining
    p, r = max(p, 0.0), max(r, 0.0)
    f = 2 * p * r / (p + r) if p > 0 and r > 0 else 0.0
    return PRF(p, r, f)


def score_pair(candidate: str, reference: str, embedder=None) -> dict:
    """Every metric for one candidate/reference text pair."""
    c, r = tokenize(candidate), tokenize(reference)
    out = {f"bleu{n}": bleu(c, r, n) for n in range(1, 5)}
    for n in (1, 2):
        out[f"rouge{n}"] = rouge_n(c, r, n)._asdict()
    out["rougeL"] = rouge_l(c, r)._asdict()
    if embedder is not None:
        out["token_f1"] = token_f1(c, r, embedder)._asdict()
    return out
