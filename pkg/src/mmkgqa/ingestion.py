"""Recipe, nutrition and image-manifest ingestion.

Raw ingredient lines ("2 large egg whites") go through an ordered rule
pipeline to canonical names ("egg white") before they become graph nodes.
The lexicons live in ``mmkgqa/data`` as editable text files.
"""
from __future__ import annotations

import ast
import csv
import enum
import json
import logging
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol

from .errors import ParseError, UnresolvableIngredient, ValidationError
from .kg import ImageLink, KnowledgeGraph, NutritionFacts, check_canonical_name, title_key

log = logging.getLogger(__name__)


class RuleKind(str, enum.Enum):
    QUANTITY_STRIP = "QuantityStrip"
    UNIT_STRIP = "UnitStrip"
    MODIFIER_STRIP = "ModifierStrip"
    SYNONYM_MAP = "SynonymMap"
    SINGULARIZE = "Singularize"


_ORDER = list(RuleKind)


@dataclass(frozen=True)
class StandardizationRule:
    kind: RuleKind
    pattern: str
    replacement: str = ""


class ExternalResolver(Protocol):
    """Anything that maps a raw ingredient phrase to a canonical name,
    e.g. an LLM prompted with worked examples."""

    def resolve(self, raw: str) -> str: ...


@dataclass
class TableResolver:
    """Resolver backed by a fixed mapping; unknown inputs return ``None``."""

    table: dict[str, str]

    def resolve(self, raw: str) -> str | None:
        return self.table.get(raw)


@dataclass
class RawRecipeRecord:
    title: str
    raw_ingredients: list[str]
    instructions: str = ""
    image_path: str | None = None


def _data_lines(name: str):
    text = resources.files("mmkgqa").joinpath("data", name).read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            yield line.rstrip("\n")


def default_rules() -> list[StandardizationRule]:
    rules = [
        StandardizationRule(RuleKind.QUANTITY_STRIP, r"\b\S*\d\S*"),
        StandardizationRule(RuleKind.QUANTITY_STRIP, r"^\s*(?:an?|x)\b"),
    ]
    rules += [StandardizationRule(RuleKind.UNIT_STRIP, w.strip()) for w in _data_lines("units.txt")]
    rules += [StandardizationRule(RuleKind.MODIFIER_STRIP, w.strip()) for w in _data_lines("modifiers.txt")]
    for line in _data_lines("synonyms.tsv"):
        src, dst = line.split("\t")
        rules.append(StandardizationRule(RuleKind.SYNONYM_MAP, src, dst))
    for line in _data_lines("plurals.tsv"):
        parts = line.split("\t")
        kind, pattern = parts[0], parts[1]
        repl = parts[2] if len(parts) > 2 else pattern
        if kind == "suffix":
            rules.append(StandardizationRule(RuleKind.SINGULARIZE, pattern, repl))
        else:
            # exact-word rules are anchored so they only ever hit a whole word
            rules.append(StandardizationRule(RuleKind.SINGULARIZE, f"^{re.escape(pattern)}$", repl))
    return rules


_FRACTIONS = {"½": " 1/2", "⅓": " 1/3", "⅔": " 2/3", "¼": " 1/4", "¾": " 3/4", "⅛": " 1/8"}


class Standardizer:
    """Compiled form of an ordered rule list."""

    def __init__(self, rules: list[StandardizationRule] | None = None, max_words: int = 3):
        rules = default_rules() if rules is None else list(rules)
        if [r.kind for r in rules] != sorted((r.kind for r in rules), key=_ORDER.index):
            raise ValidationError("standardisation rules must be grouped in pipeline order")
        self.rules = rules
        self.max_words = max_words
        self._quantity = [re.compile(r.pattern) for r in rules if r.kind is RuleKind.QUANTITY_STRIP]
        self._units = _word_regex(r.pattern for r in rules if r.kind is RuleKind.UNIT_STRIP)
        self._modifiers = _word_regex(r.pattern for r in rules if r.kind is RuleKind.MODIFIER_STRIP)
        self._synonyms = {r.pattern: r.replacement for r in rules if r.kind is RuleKind.SYNONYM_MAP}
        self._plural = [
            (re.compile(r.pattern), r.replacement) for r in rules if r.kind is RuleKind.SINGULARIZE
        ]

    def _singular(self, word: str) -> str:
        for pattern, repl in self._plural:
            if pattern.search(word):
                return pattern.sub(repl, word, count=1)
        return word

    def _singularize(self, phrase: str) -> str:
        words = phrase.split()
        if words:
            words[-1] = self._singular(words[-1])
        return " ".join(words)

    def _synonym(self, phrase: str) -> str:
        if phrase in self._synonyms:
            return self._synonyms[phrase]
        single = self._singularize(phrase)
        return self._synonyms.get(single, phrase)

    def _one_pass(self, text: str) -> str:
        for q in self._quantity:
            text = q.sub(" ", text)
        text = " ".join(text.split())
        if self._units is not None:
            text = self._units.sub(" ", text)
        text = re.sub(r"^\s*of\b", " ", text)
        if self._modifiers is not None:
            text = self._modifiers.sub(" ", text)
        text = " ".join(text.split()).strip(" -")
        text = re.sub(r"^(and|or)\s+|\s+(and|or)$", "", text)
        text = self._synonym(text)
        return self._singularize(text)

    def rule_pipeline(self, raw: str) -> tuple[str, bool]:
        """Run the rules; returns ``(name, ambiguous)``."""
        text = raw.casefold()
        for k, v in _FRACTIONS.items():
            text = text.replace(k, v)
        text = re.sub(r"\([^)]*\)", " ", text)
        text = text.split(",")[0]
        text = re.sub(r"[^a-z0-9/.\- ]+", " ", text.replace("'", ""))
        text = re.sub(r"(?<![0-9])[./]|[./](?![0-9])", " ", text)
        ambiguous = False
        if re.search(r"\bor\b", text):
            ambiguous = True
            text = re.split(r"\bor\b", text)[0]
        # iterate to a fixpoint so the pipeline is idempotent
        for _ in range(5):
            nxt = self._one_pass(text)
            if nxt == text:
                break
            text = nxt
        if len(text.split()) > self.max_words:
            ambiguous = True
        return text, ambiguous

    def standardize(self, raw: str, resolver: ExternalResolver | None = None) -> str:
        if not raw or not raw.strip():
            raise ValidationError("raw ingredient must be non-empty")
        name, ambiguous = self.rule_pipeline(raw)
        if (ambiguous or not name) and resolver is not None:
            resolved = resolver.resolve(raw)
            if resolved:
                name = " ".join(resolved.casefold().split())
        if not name:
            raise UnresolvableIngredient(f"nothing left of {raw!r} after standardisation")
        try:
            check_canonical_name(name)
        except ValidationError as exc:
            raise UnresolvableIngredient(str(exc)) from None
        return name


def _word_regex(words) -> re.Pattern | None:
    words = sorted({w for w in words if w}, key=len, reverse=True)
    if not words:
        return None
    alt = "|".join(re.escape(w) for w in words)
    return re.compile(rf"(?<![a-z\-])(?:{alt})(?![a-z\-])")


_default: Standardizer | None = None


def standardize(raw: str, resolver: ExternalResolver | None = None) -> str:
    """Map a raw ingredient phrase to its canonical name with the default rules."""
    global _default
    if _default is None:
        _default = Standardizer()
    return _default.standardize(raw, resolver)


# -- file parsing -----------------------------------------------------------


@dataclass
class ParseResult:
    records: list[RawRecipeRecord]
    rejects: list[dict] = field(default_factory=list)


def _split_ingredients(field_value: str) -> list[str]:
    text = field_value.strip()
    if text.startswith("["):
        value = ast.literal_eval(text)
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ValueError("ingredient list must be a list of strings")
        items = value
    else:
        items = text.split(",")
    return [i.strip() for i in items if i.strip()]


def parse_recipes(path) -> ParseResult:
    """Read a recipes CSV with header ``title,ingredients,instructions,image``.

    Bad rows land in ``rejects`` as ``{"row", "reason"}``; row numbers count
    data rows from 1.
    """
    records: list[RawRecipeRecord] = []
    rejects: list[dict] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"title", "ingredients"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"missing columns {sorted(missing)}", 1, str(path))
        for row_no, row in enumerate(reader, start=1):
            title = (row.get("title") or "").strip()
            if not title:
                rejects.append({"row": row_no, "reason": "missing title"})
                continue
            try:
                raw = _split_ingredients(row.get("ingredients") or "")
            except (ValueError, SyntaxError) as exc:
                rejects.append({"row": row_no, "reason": f"bad ingredient list: {exc}"})
                continue
            if not raw:
                rejects.append({"row": row_no, "reason": "no ingredients"})
                continue
            image = (row.get("image") or "").strip() or None
            records.append(RawRecipeRecord(title, raw, (row.get("instructions") or "").strip(), image))
    return ParseResult(records, rejects)


@dataclass
class NutritionReport:
    attached: int = 0
    unmatched: list[str] = field(default_factory=list)
    rejects: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def enrich_nutrition(kg: KnowledgeGraph, nutrition_table_path) -> NutritionReport:
    """Attach nutrition rows to ingredients by exact (trimmed, lowercased) name."""
    report = NutritionReport()
    seen: set[str] = set()
    with open(nutrition_table_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row_no, row in enumerate(reader, start=1):
            name = " ".join((row.get("ingredient") or "").casefold().split())
            try:
                facts = NutritionFacts(
                    *(float(row[k]) for k in ("calories", "fat", "protein", "carbohydrates"))
                )
            except (TypeError, ValueError, KeyError) as exc:
                report.rejects.append({"row": row_no, "reason": str(exc) or "missing value"})
                continue
            if name in seen:
                msg = f"duplicate nutrition row for {name!r} (row {row_no}); first wins"
                report.warnings.append(msg)
                log.warning(msg)
                continue
            seen.add(name)
            iid = kg.ingredient_by_name(name)
            if iid is None:
                report.unmatched.append(name)
                continue
            kg.set_nutrition(iid, facts)
            report.attached += 1
    return report


@dataclass
class ImageReport:
    linked: int = 0
    verified: int = 0
    missing_files: list[str] = field(default_factory=list)
    unmatched: list[str] = field(default_factory=list)


def link_images(kg: KnowledgeGraph, manifest_path) -> ImageReport:
    """Attach images from a tab-separated ``entity_name<TAB>path`` manifest.

    Paths resolve against the manifest's directory. Recipe titles are matched
    case-insensitively first, then ingredient names.
    """
    report = ImageReport()
    base = os.path.dirname(os.fspath(manifest_path))
    with open(manifest_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ParseError("expected entity_name<TAB>path", line_no, str(manifest_path))
            name, rel = parts[0].strip(), parts[1].strip()
            eid = kg.recipe_by_title(name) or kg.ingredient_by_name(title_key(name))
            if eid is None:
                report.unmatched.append(name)
                continue
            path = rel if os.path.isabs(rel) else os.path.normpath(os.path.join(base, rel))
            exists = os.path.isfile(path)
            kg.set_image(eid, ImageLink(path, exists))
            report.linked += 1
            if exists:
                report.verified += 1
            else:
                report.missing_files.append(path)
    return report


@dataclass
class BuildResult:
    kg: KnowledgeGraph
    rejects: list[dict]
    unresolved: list[dict]
    nutrition: NutritionReport
    images: ImageReport

    def summary(self) -> dict:
        return {
            "stats": self.kg.stats(),
            "rejects": self.rejects,
            "unresolved": self.unresolved,
            "nutrition": {
                "attached": self.nutrition.attached,
                "unmatched": self.nutrition.unmatched,
                "rejects": self.nutrition.rejects,
                "warnings": self.nutrition.warnings,
            },
            "images": {
                "linked": self.images.linked,
                "verified": self.images.verified,
                "missing_files": self.images.missing_files,
                "unmatched": self.images.unmatched,
            },
        }


def build(recipes_path, nutrition_path=None, manifest_path=None, resolver=None) -> BuildResult:
    parsed = parse_recipes(recipes_path)
    std = Standardizer()
    kg = KnowledgeGraph()
    unresolved: list[dict] = []
    cache: dict[str, str | None] = {}
    for rec in parsed.records:
        rid = kg.add_recipe(rec.title, rec.instructions)
        for raw in rec.raw_ingredients:
            if raw not in cache:
                try:
                    cache[raw] = std.standardize(raw, resolver)
                except UnresolvableIngredient as exc:
                    cache[raw] = None
                    unresolved.append({"recipe": rec.title, "raw": raw, "reason": str(exc)})
            name = cache[raw]
            if name is not None:
                kg.link_ingredient(rid, kg.add_ingredient(name))
    nutrition = enrich_nutrition(kg, nutrition_path) if nutrition_path else NutritionReport()
    images = link_images(kg, manifest_path) if manifest_path else ImageReport()
    base = os.path.dirname(os.fspath(recipes_path))
    for rec in parsed.records:
        rid = kg.recipe_by_title(rec.title)
        if rec.image_path and kg.recipes[rid].image is None:
            path = rec.image_path if os.path.isabs(rec.image_path) else os.path.normpath(
                os.path.join(base, rec.image_path))
            kg.set_image(rid, ImageLink(path, os.path.isfile(path)))
    return BuildResult(kg.freeze(), parsed.rejects, unresolved, nutrition, images)


def build_graph(recipes_path, nutrition_path=None, manifest_path=None, resolver=None) -> KnowledgeGraph:
    return build(recipes_path, nutrition_path, manifest_path, resolver).kg


def write_rejects(rejects: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rejects:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
