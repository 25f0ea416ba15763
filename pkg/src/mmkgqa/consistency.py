"""Image-text mismatch detection and the QA-consistency hallucination check."""
from __future__ import annotations

import enum
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Protocol

from ._http import JsonService
from .embeddings import HashingEmbedder, cosine, tokenize
from .errors import MMKGError, ParseError, TransportError, ValidationError
from .textmetrics import bleu, rouge_l, token_f1

log = logging.getLogger(__name__)


# -- mismatch -----------------------------------------------------------------


class MismatchResult(NamedTuple):
    cosine: float
    mismatch: bool


def _check_threshold(threshold: float) -> None:
    if not (0.0 <= threshold < 1.0):
        raise ValidationError(f"threshold must be in [0, 1), got {threshold}")


def detect_mismatch(text: str, image_ref: str, embedder, threshold: float = 0.30) -> MismatchResult:
    """Flag a text/image pair whose embedding cosine falls below ``threshold``."""
    _check_threshold(threshold)
    c = cosine(embedder.embed_text(text), embedder.embed_image(image_ref))
    return MismatchResult(c, c < threshold)


def mismatch_rate(pairs, embedder, threshold: float = 0.30) -> dict:
    """``pairs`` yields ``(text, image_ref)``. Returns counts and the rate."""
    _check_threshold(threshold)
    flags = [detect_mismatch(t, img, embedder, threshold).mismatch for t, img in pairs]
    if not flags:
        raise ValidationError("mismatch_rate needs at least one pair")
    hits = sum(flags)
    return {
        "total_pairs": len(flags),
        "detected_mismatches": hits,
        "mismatch_rate": hits / len(flags),
        "threshold": threshold,
    }


def read_pairs(path) -> list[tuple[str, str]]:
    """JSON Lines of ``{"text", "image"}``; image paths resolve against the file."""
    base = Path(path).parent
    out = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                text, image = obj["text"], obj["image"]
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"bad pair record: {exc}", no, str(path)) from None
            out.append((text, str(base / image)))
    return out


# -- vision-QA clients -------------------------------------------------------


class VisionQAClient(Protocol):
    def generate_qa(self, image_ref: str) -> list[dict]: ...

    def answer(self, image_ref: str, question: str) -> str: ...


class MockVisionQAClient:
    """Fixture-backed client.

    The fixture is JSON with two maps: ``generate`` from image ref to a list
    of ``{"question", "answer"}``, and ``answer`` from image ref to a
    question-to-answer map. Refs are looked up verbatim, then by file name.
    A missing entry behaves like a failed request.
    """

    name = "mock-vqa"

    def __init__(self, fixture: dict):
        self.generate = fixture.get("generate", {})
        self.answers = fixture.get("answer", {})

    @classmethod
    def from_file(cls, path) -> "MockVisionQAClient":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    @staticmethod
    def _lookup(table: dict, ref: str):
        if ref in table:
            return table[ref]
        return table.get(Path(ref).name)

    def generate_qa(self, image_ref: str) -> list[dict]:
        qa = self._lookup(self.generate, image_ref)
        if qa is None:
            raise TransportError(f"mock has no questions for {image_ref}", 404)
        return [dict(item) for item in qa]

    def answer(self, image_ref: str, question: str) -> str:
        table = self._lookup(self.answers, image_ref) or {}
        if question not in table:
            raise TransportError(f"mock has no answer for {image_ref!r} / {question!r}", 404)
        return table[question]


class RemoteVisionQAClient:
    """``POST /vqa/generate {image}`` and ``POST /vqa/answer {image, question}``."""

    name = "remote-vqa"

    def __init__(self, base_url: str, timeout: float = 60.0, max_in_flight: int = 4, transport=None):
        self._service = JsonService(base_url, timeout, max_in_flight, transport)

    def generate_qa(self, image_ref: str) -> list[dict]:
        qa = self._service.field("/vqa/generate", {"image": image_ref}, "qa")
        if not isinstance(qa, list) or not all(isinstance(q, dict) and "question" in q and "answer" in q for q in qa):
            raise TransportError("/vqa/generate: 'qa' must be a list of {question, answer}")
        return qa

    def answer(self, image_ref: str, question: str) -> str:
        ans = self._service.field("/vqa/answer", {"image": image_ref, "question": question}, "answer")
        return str(ans)

    def close(self) -> None:
        self._service.close()


# -- hallucination check ----------------------------------------------------------


class Verdict(str, enum.Enum):
    MATCH = "Match"
    PARTIAL = "PartialMatch"
    HALLUCINATION = "Hallucination"


@dataclass
class ConsistencyConfig:
    theta_match: float = 0.85
    theta_halluc: float = 0.60
    mismatch_threshold: float = 0.30
    embedder: object = field(default_factory=HashingEmbedder)
    jobs: int = 1

    def __post_init__(self):
        if not 0.0 <= self.theta_halluc < self.theta_match <= 1.0:
            raise ValidationError("need 0 <= theta_halluc < theta_match <= 1")

    def verdict(self, f1: float) -> Verdict:
        if f1 >= self.theta_match:
            return Verdict.MATCH
        if f1 < self.theta_halluc:
            return Verdict.HALLUCINATION
        return Verdict.PARTIAL


@dataclass
class QuestionResult:
    question: str
    reference: str
    answer: str | None
    scores: dict | None
    error: str | None = None


@dataclass
class ConsistencyReport:
    pair_id: str
    mismatch: bool | None
    cosine: float | None
    verdict: Verdict
    scores: dict
    questions: list[QuestionResult] = field(default_factory=list)

    @property
    def unanswered(self) -> list[str]:
        return [q.question for q in self.questions if q.answer is None]

    def as_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "mismatch": self.mismatch,
            "cosine": self.cosine,
            "verdict": self.verdict.value,
            "scores": self.scores,
            "unanswered": self.unanswered,
        }


def answer_scores(candidate: str, reference: str, embedder) -> dict:
    c, r = tokenize(candidate), tokenize(reference)
    return {
        "token_f1": token_f1(c, r, embedder).f1,
        "rouge_l_f1": rouge_l(c, r).f1,
        "bleu1": bleu(c, r, 1),
    }


def hallucination_check(gt_image: str, gen_image: str, client: VisionQAClient,
                        cfg: ConsistencyConfig | None = None, pair_id: str | None = None) -> ConsistencyReport:
    """Ask the ground-truth image's questions of the generated image and score
    the answers against the ground truth.

    Scores are unweighted means over answered questions. A question whose
    answer request fails is kept in the report as unanswered; if none can be
    answered the check raises :class:`TransportError`. ``cosine`` and
    ``mismatch`` compare the two images' embeddings and are ``None`` when the
    embedder cannot read them.
    """
    cfg = cfg or ConsistencyConfig()
    qa = client.generate_qa(gt_image)
    if not qa:
        raise ValidationError(f"vision-QA client produced no questions for {gt_image}")
    results = []
    for item in qa:
        q, ref = item["question"], item["answer"]
        try:
            ans = client.answer(gen_image, q)
        except (TransportError, OSError) as exc:
            log.warning("unanswered %r on %s: %s", q, gen_image, exc)
            results.append(QuestionResult(q, ref, None, None, str(exc)))
            continue
        results.append(QuestionResult(q, ref, ans, answer_scores(ans, ref, cfg.embedder)))
    answered = [r for r in results if r.scores is not None]
    if not answered:
        raise TransportError(f"no question about {gt_image} could be answered on {gen_image}")
    scores = {key: math.fsum(r.scores[key] for r in answered) / len(answered)
              for key in ("token_f1", "rouge_l_f1", "bleu1")}
    try:
        c = cosine(cfg.embedder.embed_image(gt_image), cfg.embedder.embed_image(gen_image))
        mismatch = c < cfg.mismatch_threshold
    except (OSError, MMKGError):
        c, mismatch = None, None
    return ConsistencyReport(
        pair_id=pair_id or f"{gt_image}|{gen_image}",
        mismatch=mismatch,
        cosine=c,
        verdict=cfg.verdict(scores["token_f1"]),
        scores=scores,
        questions=results,
    )


def read_dataset(path) -> list[dict]:
    """JSON Lines of ``{"id", "gt_image", "gen_image"}``."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out.append({"id": str(obj["id"]), "gt_image": obj["gt_image"], "gen_image": obj["gen_image"]})
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"bad dataset record: {exc}", no, str(path)) from None
    return out


def hallucination_rate(dataset: list[dict], client: VisionQAClient, cfg: ConsistencyConfig | None = None) -> dict:
    """Share of ``Hallucination`` verdicts plus mean scores over the dataset."""
    cfg = cfg or ConsistencyConfig()
    if not dataset:
        raise ValidationError("hallucination_rate needs at least one case")

    def run(case):
        return hallucination_check(case["gt_image"], case["gen_image"], client, cfg, case["id"])

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(run, dataset))
    else:
        reports = [run(c) for c in dataset]
    reports.sort(key=lambda r: r.pair_id)
    n = len(reports)
    halluc = sum(r.verdict is Verdict.HALLUCINATION for r in reports)
    return {
        "total": n,
        "hallucinations": halluc,
        "rate": halluc / n,
        "mean_scores": {
            key: math.fsum(r.scores[key] for r in reports) / n
            for key in ("token_f1", "rouge_l_f1", "bleu1")
        },
        "reports": [r.as_dict() for r in reports],
    }
