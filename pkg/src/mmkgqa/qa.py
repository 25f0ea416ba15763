"""Template instantiation and QA corpus I/O."""
from __future__ import annotations

import enum
import hashlib
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import GraphError, ParseError, SchemaError, ValidationError
from .kg import EntityId, ImageLink, KnowledgeGraph, Kind
from .plans import AuxTables, Context, Plan, enumerate_bindings, execute, validate_plan

log = logging.getLogger(__name__)

_SLOT = re.compile(r"\{([a-z_]+)\}")


class Hop(str, enum.Enum):
    ONE = "OneHop"
    TWO = "TwoHop"

    @property
    def steps(self) -> int:
        return 1 if self is Hop.ONE else 2


class Source(str, enum.Enum):
    TEMPLATE = "Template"
    AUGMENTED = "Augmented"


@dataclass(frozen=True)
class Template:
    id: str
    hop: Hop
    pattern: str
    slot_kinds: dict[str, Kind]
    plan: Plan

    @property
    def slots(self) -> list[str]:
        return _SLOT.findall(self.pattern)

    def render(self, names: dict[str, str]) -> str:
        return _SLOT.sub(lambda m: names[m.group(1)], self.pattern)

    def pieces(self) -> tuple[list[str], list[str]]:
        """Literal text around the slots: ``len(literals) == len(slots) + 1``."""
        literals, pos = [], 0
        for m in _SLOT.finditer(self.pattern):
            literals.append(self.pattern[pos:m.start()])
            pos = m.end()
        literals.append(self.pattern[pos:])
        return literals, self.slots


@dataclass
class QAPair:
    question: str
    answer: str
    template_id: str | None = None
    hop: Hop | None = None
    entities: list[EntityId] = field(default_factory=list)
    image: ImageLink | None = None
    source: Source = Source.TEMPLATE
    aux: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    pair_id: str | None = None

    def __post_init__(self):
        if not self.question or not self.question.strip():
            raise ValidationError("question must be non-empty")
        if not self.answer or not str(self.answer).strip():
            raise ValidationError("answer must be non-empty")

    @property
    def id(self) -> str:
        if self.pair_id:
            return self.pair_id
        digest = hashlib.sha1(f"{self.question}\x1f{self.answer}".encode("utf-8")).hexdigest()[:12]
        prefix = self.template_id if self.source is Source.TEMPLATE and self.template_id else "aug"
        return f"{prefix}-{digest}"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "template_id": self.template_id,
            "hop": self.hop.value if self.hop else None,
            "entities": [str(e) for e in self.entities],
            "image": None if self.image is None else {"path": self.image.path, "verified": self.image.verified},
            "source": self.source.value,
            "aux": self.aux,
            "flags": self.flags,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QAPair":
        img = obj.get("image")
        if isinstance(img, str):
            img = ImageLink(img, False)
        elif isinstance(img, dict):
            img = ImageLink(img["path"], bool(img.get("verified", False)))
        hop = obj.get("hop")
        return cls(
            question=obj["question"],
            answer=obj["answer"],
            template_id=obj.get("template_id"),
            hop=Hop(hop) if hop else None,
            entities=[EntityId.parse(e) for e in obj.get("entities") or []],
            image=img,
            source=Source(obj.get("source", "Template")),
            aux=list(obj.get("aux") or []),
            flags=list(obj.get("flags") or []),
            pair_id=obj.get("id"),
        )


# -- templates ----------------------------------------------------------------


def _parse_slots(text: str, where) -> dict[str, Kind]:
    kinds: dict[str, Kind] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, kind = item.partition("=")
        kind = kind.strip()
        if not kind:
            raise SchemaError(f"{where}: slot {name!r} has no kind")
        try:
            kinds[name.strip()] = {"recipe": Kind.RECIPE, "ingredient": Kind.INGREDIENT}[kind.lower()]
        except KeyError:
            raise SchemaError(f"{where}: unknown slot kind {kind!r}") from None
    return kinds


def parse_templates(text: str, path: str | None = None) -> list[Template]:
    templates: list[Template] = []
    seen: set[str] = set()
    for no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#") or line.startswith("id\t"):
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise ParseError(f"expected 5 tab-separated columns, got {len(cols)}", no, path)
        tid, hop_s, slots_s, plan_s, pattern = (c.strip() for c in cols)
        where = f"{path or 'templates'}:{no}"
        try:
            hop = Hop(hop_s)
        except ValueError:
            raise SchemaError(f"{where}: hop must be OneHop or TwoHop, got {hop_s!r}") from None
        kinds = _parse_slots(slots_s, where)
        used = _SLOT.findall(pattern)
        for slot in used:
            if slot not in kinds:
                raise SchemaError(f"{where}: slot {{{slot}}} has no declared kind")
        for slot in kinds:
            if slot not in used:
                raise SchemaError(f"{where}: declared slot {slot!r} not in pattern")
        plan = Plan.parse(plan_s)
        try:
            validate_plan(plan, kinds, hop.steps)
        except SchemaError as exc:
            raise SchemaError(f"{where}: {exc}") from None
        if tid in seen:
            raise SchemaError(f"{where}: duplicate template id {tid!r}")
        seen.add(tid)
        templates.append(Template(tid, hop, pattern, kinds, plan))
    return templates


def load_templates(path=None) -> list[Template]:
    """Load templates from ``path``, or the 40 shipped defaults when omitted."""
    if path is None:
        text = resources.files("mmkgqa").joinpath("data", "templates.tsv").read_text(encoding="utf-8")
        return parse_templates(text, "templates.tsv")
    return parse_templates(Path(path).read_text(encoding="utf-8"), str(path))


# -- instantiation --------------------------------------------------------------


def _require_frozen(kg: KnowledgeGraph) -> None:
    if not kg.frozen:
        raise GraphError("freeze the graph before generating questions")


def answer_binding(template: Template, ctx: Context, slots: dict[str, EntityId]) -> QAPair | None:
    result = execute(template.plan, ctx, slots)
    if result is None:
        return None
    answer, trace, aux = result
    if not answer:
        return None
    kg = ctx.kg
    names = {s: kg.name_of(e) for s, e in slots.items()}
    image = None
    food = slots.get("food_item")
    if food is not None:
        image = kg.recipes[food].image
    return QAPair(
        question=template.render(names),
        answer=answer,
        template_id=template.id,
        hop=template.hop,
        entities=[slots[s] for s in template.slots],
        image=image,
        source=Source.TEMPLATE,
        aux=list(aux),
    )


def instantiate(template: Template, kg: KnowledgeGraph, limit: int | None = None,
                tables: AuxTables | None = None) -> list[QAPair]:
    """One QA pair per binding with a non-empty answer, in binding order."""
    _require_frozen(kg)
    if limit is not None and limit <= 0:
        return []
    ctx = Context(kg, tables if tables is not None else AuxTables.load())
    out: list[QAPair] = []
    for slots in enumerate_bindings(template.plan, ctx):
        pair = answer_binding(template, ctx, slots)
        if pair is None:
            continue
        out.append(pair)
        if limit is not None and len(out) >= limit:
            break
    return out


@dataclass
class CorpusConfig:
    limit: int | None = None
    jobs: int = 1
    tables: AuxTables | None = None


def generate_corpus(kg: KnowledgeGraph, templates: list[Template], config: CorpusConfig | None = None) -> list[QAPair]:
    """Concatenate instantiations of every template, ordered by template id."""
    config = config or CorpusConfig()
    _require_frozen(kg)
    tables = config.tables if config.tables is not None else AuxTables.load()
    ordered = sorted(templates, key=lambda t: t.id)

    def run(t):
        return instantiate(t, kg, config.limit, tables)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(run, ordered))
    else:
        chunks = [run(t) for t in ordered]
    return [p for chunk in chunks for p in chunk]


def _bind(text: str, literals: list[str], slots: list[str], resolve) -> dict | None:
    """Backtracking split of ``text`` into slot values; every value must resolve."""
    if not text.startswith(literals[0]):
        return None
    text = text[len(literals[0]):]
    if not slots:
        return {} if text == "" else None
    name, sep, rest_literals = slots[0], literals[1], literals[1:]
    start = 0
    while True:
        # the last slot must run to the end of the text
        end = len(text) - len(sep) if len(slots) == 1 else text.find(sep, start + 1) if sep else -1
        if end < 1 or (len(slots) == 1 and not text.endswith(sep)):
            return None
        eid = resolve(name, text[:end])
        if eid is not None:
            tail = _bind(text[end:], rest_literals, slots[1:], resolve)
            if tail is not None:
                return {name: eid, **tail}
        if len(slots) == 1:
            return None
        start = end


def match_template(question: str, templates: list[Template], kg: KnowledgeGraph) -> tuple[Template, dict[str, EntityId]] | None:
    """Find the first template whose pattern matches ``question`` with slot
    values that resolve to graph entities of the declared kinds. Every way of
    splitting the question between slots is tried, so names may contain the
    template's own separator words."""
    q = " ".join(question.split()).casefold()

    for t in sorted(templates, key=lambda t: t.id):
        def resolve(name, value, t=t):
            value = value.strip().strip("?.! ")
            if t.slot_kinds[name] is Kind.RECIPE:
                return kg.recipe_by_title(value)
            return kg.ingredient_by_name(value)

        literals, slots = t.pieces()
        hit = _bind(q, [lit.casefold() for lit in literals], slots, resolve)
        if hit is not None:
            return t, hit
    return None


# -- corpus files ---------------------------------------------------------------


def write_corpus(pairs: list[QAPair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(p.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def read_corpus(path) -> list[QAPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                pairs.append(QAPair.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"bad QA record: {exc}", no, str(path)) from None
    return pairs


def ingest_augmented(path, kg: KnowledgeGraph | None = None, errors: list | None = None) -> list[QAPair]:
    """Read externally generated (paraphrased/expanded) pairs from JSON Lines.

    Each line needs ``question`` and ``answer``; ``entities`` (ids like
    ``R:3``), ``image`` and ``id`` are optional. Unknown entity ids are kept
    but the pair gets an ``unknown-entity`` flag. Malformed lines are skipped
    and described in ``errors`` when a list is passed.
    """
    out: list[QAPair] = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("record is not an object")
                flags = []
                ents = []
                for raw in obj.get("entities") or []:
                    try:
                        eid = EntityId.parse(str(raw))
                    except ValidationError:
                        flags.append(f"bad-entity:{raw}")
                        continue
                    if kg is not None and not kg.has_entity(eid):
                        flags.append(f"unknown-entity:{eid}")
                    ents.append(eid)
                img = obj.get("image")
                pair = QAPair(
                    question=str(obj["question"]),
                    answer=str(obj["answer"]),
                    template_id=obj.get("template_id"),
                    hop=Hop(obj["hop"]) if obj.get("hop") else None,
                    entities=ents,
                    image=ImageLink(img, False) if isinstance(img, str) and img else None,
                    source=Source.AUGMENTED,
                    flags=flags,
                    pair_id=obj.get("id"),
                )
            except (ValueError, KeyError, TypeError) as exc:
                msg = {"line": no, "reason": str(exc)}
                log.warning("skipping augmented line %d: %s", no, exc)
                if errors is not None:
                    errors.append(msg)
                continue
            out.append(pair)
    return out
