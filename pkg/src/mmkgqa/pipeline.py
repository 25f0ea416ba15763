"""Question -> text answer -> image, the end-to-end multimodal flow."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Protocol

from ._http import JsonService
from .errors import MMKGError, StageError, ValidationError
from .kg import EntityId, KnowledgeGraph, Kind
from .plans import AuxTables, Context, fmt_profile
from .qa import Template, answer_binding, load_templates, match_template
from .router import ImageIndex, RoutingDecision, route

UNKNOWN_ANSWER = "I don't know."


def link_entities(question: str, kg: KnowledgeGraph) -> list[EntityId]:
    """Longest-first, case-insensitive, whole-word matches of entity names.

    Matches never overlap; a longer name claims its span before any shorter
    name inside it is considered. Results are in order of appearance.
    """
    text = question.casefold()
    names = [(kg.name_of(eid).casefold(), eid) for eid in (*kg.recipes, *kg.ingredients)]
    names.sort(key=lambda ne: (-len(ne[0]), ne[1]))
    taken = [False] * len(text)
    found: list[tuple[int, EntityId]] = []
    for name, eid in names:
        for m in re.finditer(r"(?<![a-z0-9])" + re.escape(name) + r"(?![a-z0-9])", text):
            if any(taken[m.start():m.end()]):
                continue
            taken[m.start():m.end()] = [True] * (m.end() - m.start())
            found.append((m.start(), eid))
            break
    return [eid for _, eid in sorted(found)]


def context_triples(kg: KnowledgeGraph, entities: list[EntityId]) -> list[str]:
    """Facts about the linked entities, one short line each."""
    out: list[str] = []
    for eid in entities:
        ent = kg.entity(eid)
        if eid.kind is Kind.RECIPE:
            for ing in kg.ingredients_of(eid):
                out.append(f"{ent.title} hasIngredient {ing.canonical_name}")
            if ent.instructions:
                out.append(f"{ent.title} instructions {ent.instructions}")
        else:
            if ent.nutrition is not None:
                out.append(f"{ent.canonical_name} nutrition {fmt_profile(ent.nutrition)}")
            for rec in kg.recipes_with(eid):
                out.append(f"{rec.title} hasIngredient {ent.canonical_name}")
    return out


class TextAnswerClient(Protocol):
    def answer(self, question: str, context: list[str]) -> str: ...


class KGTextClient:
    """Answers by matching the question against the templates and running the
    matching answer plan on the graph. Unmatched questions get
    ``"I don't know."``; the context argument is accepted and ignored."""

    name = "kg-mock"

    def __init__(self, kg: KnowledgeGraph, templates: list[Template] | None = None,
                 tables: AuxTables | None = None):
        if not kg.frozen:
            raise ValidationError("freeze the graph before answering questions")
        self.kg = kg
        self.templates = templates if templates is not None else load_templates()
        self.ctx = Context(kg, tables if tables is not None else AuxTables.load())

    def answer(self, question: str, context: list[str]) -> str:
        hit = match_template(question, self.templates, self.kg)
        if hit is None:
            return UNKNOWN_ANSWER
        template, slots = hit
        pair = answer_binding(template, self.ctx, slots)
        return UNKNOWN_ANSWER if pair is None else pair.answer


class RemoteTextAnswerClient:
    """``POST /answer {"question", "context"}`` returning ``{"answer"}``."""

    name = "remote-text"

    def __init__(self, base_url: str, timeout: float = 120.0, max_in_flight: int = 4, transport=None):
        self._service = JsonService(base_url, timeout, max_in_flight, transport)

    def answer(self, question: str, context: list[str]) -> str:
        return str(self._service.field("/answer", {"question": question, "context": context}, "answer"))

    def close(self) -> None:
        self._service.close()


@dataclass
class Clients:
    text: TextAnswerClient
    generation: object
    embedder: object
    index: ImageIndex


@dataclass
class PipelineConfig:
    tau: float = 0.5
    retrieval_latency: float | None = None


@dataclass
class MultimodalAnswer:
    question: str
    text_answer: str
    image_ref: str
    routing: RoutingDecision
    entities: list[EntityId] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "question": self.question,
            "text_answer": self.text_answer,
            "image_ref": self.image_ref,
            "routing": self.routing.as_dict(),
            "entities": [str(e) for e in self.entities],
            "provenance": self.provenance,
        }


def answer_question(question: str, kg: KnowledgeGraph, clients: Clients,
                    cfg: PipelineConfig | None = None) -> MultimodalAnswer:
    cfg = cfg or PipelineConfig()
    if not question or not question.strip():
        raise ValidationError("question must be non-empty")
    if not kg.frozen:
        raise ValidationError("freeze the graph before answering questions")
    entities = link_entities(question, kg)
    context = context_triples(kg, entities)
    try:
        text = clients.text.answer(question, context)
    except (MMKGError, OSError) as exc:
        raise StageError("text", exc) from exc
    if not text or not text.strip():
        raise StageError("text", ValidationError("text client returned an empty answer"))
    try:
        decision = route(question, text, clients.index, clients.generation, clients.embedder,
                         cfg.tau, cfg.retrieval_latency)
    except StageError:
        raise
    except (MMKGError, OSError) as exc:
        raise StageError("image", exc) from exc
    return MultimodalAnswer(
        question=question,
        text_answer=text,
        image_ref=decision.image_ref,
        routing=decision,
        entities=entities,
        provenance={
            "text_client": getattr(clients.text, "name", type(clients.text).__name__),
            "generation_client": getattr(clients.generation, "name", type(clients.generation).__name__),
            "embedder": getattr(clients.embedder, "name", type(clients.embedder).__name__),
            "context_facts": len(context),
        },
    )
