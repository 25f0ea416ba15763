"""In-memory food knowledge graph.

Recipes and ingredients are nodes; ``hasIngredient`` is the only edge type.
Nutrition and image links live on the entities themselves. Both adjacency
directions are indexed so one- and two-hop queries stay dictionary lookups.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import GraphError, ParseError, ValidationError

HAS_INGREDIENT = "hasIngredient"
NUTRIENTS = ("calories", "fat", "protein", "carbohydrates")
NUTRIENT_UNITS = {"calories": "kcal", "fat": "g", "protein": "g", "carbohydrates": "g"}

_END_MARKER = "# end"
_HEADER = "# mmkg triples v1"

# digits or a bare unit token make a name unstandardised
_UNIT_TOKENS = frozenset(
    "g kg mg oz lb lbs ml l cup cups tbsp tsp tablespoon tablespoons teaspoon "
    "teaspoons pinch dash can cans package packages pcs pc".split()
)


class Kind(str, enum.Enum):
    RECIPE = "R"
    INGREDIENT = "I"


@dataclass(frozen=True, order=True)
class EntityId:
    kind: Kind
    local_id: int

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.local_id}"

    @classmethod
    def parse(cls, text: str) -> "EntityId":
        m = re.fullmatch(r"([RI]):(\d+)", text.strip())
        if not m:
            raise ValidationError(f"bad entity id {text!r}")
        return cls(Kind(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class ImageLink:
    path: str
    verified: bool = False

    def __post_init__(self):
        if not self.path:
            raise ValidationError("image path must be non-empty")


@dataclass(frozen=True)
class NutritionFacts:
    calories: float
    fat: float
    protein: float
    carbohydrates: float

    def __post_init__(self):
        for name in NUTRIENTS:
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")

    def get(self, nutrient: str) -> float:
        if nutrient not in NUTRIENTS:
            raise ValidationError(f"unknown nutrient {nutrient!r}")
        return getattr(self, nutrient)


@dataclass
class RecipeEntity:
    id: EntityId
    title: str
    instructions: str = ""
    image: ImageLink | None = None


@dataclass
class IngredientEntity:
    id: EntityId
    canonical_name: str
    nutrition: NutritionFacts | None = None
    image: ImageLink | None = None


@dataclass(frozen=True, order=True)
class Triple:
    subject: EntityId
    predicate: str
    object: EntityId


def title_key(title: str) -> str:
    return " ".join(title.split()).casefold()


def check_canonical_name(name: str) -> None:
    if not name or not name.strip():
        raise ValidationError("ingredient name must be non-empty")
    if name != name.lower() or name != name.strip():
        raise ValidationError(f"ingredient name must be trimmed lowercase: {name!r}")
    if any(ch.isdigit() for ch in name):
        raise ValidationError(f"ingredient name contains digits: {name!r}")
    bad = [t for t in re.split(r"[^a-z]+", name) if t in _UNIT_TOKENS]
    if bad:
        raise ValidationError(f"ingredient name contains unit token {bad[0]!r}: {name!r}")


@dataclass
class KnowledgeGraph:
    recipes: dict[EntityId, RecipeEntity] = field(default_factory=dict)
    ingredients: dict[EntityId, IngredientEntity] = field(default_factory=dict)
    _recipe_by_title: dict[str, EntityId] = field(default_factory=dict, repr=False)
    _ingredient_by_name: dict[str, EntityId] = field(default_factory=dict, repr=False)
    _out: dict[EntityId, set[EntityId]] = field(default_factory=dict, repr=False)
    _in: dict[EntityId, set[EntityId]] = field(default_factory=dict, repr=False)
    frozen: bool = False

    # -- build phase -------------------------------------------------------

    def _check_mutable(self):
        if self.frozen:
            raise GraphError("graph is frozen")

    def freeze(self) -> "KnowledgeGraph":
        self.frozen = True
        return self

    def add_recipe(self, title: str, instructions: str = "", image: ImageLink | None = None) -> EntityId:
        if not title or not title.strip():
            raise ValidationError("recipe title must be non-empty")
        key = title_key(title)
        if key in self._recipe_by_title:
            return self._recipe_by_title[key]
        self._check_mutable()
        rid = EntityId(Kind.RECIPE, len(self.recipes) + 1)
        self.recipes[rid] = RecipeEntity(rid, title.strip(), instructions or "", image)
        self._recipe_by_title[key] = rid
        self._out[rid] = set()
        return rid

    def add_ingredient(
        self,
        canonical_name: str,
        nutrition: NutritionFacts | None = None,
        image: ImageLink | None = None,
    ) -> EntityId:
        check_canonical_name(canonical_name)
        existing = self._ingredient_by_name.get(canonical_name)
        if existing is not None:
            ent = self.ingredients[existing]
            if (nutrition is not None and ent.nutrition is None) or (image is not None and ent.image is None):
                self._check_mutable()
                if ent.nutrition is None:
                    ent.nutrition = nutrition
                if ent.image is None:
                    ent.image = image
            return existing
        self._check_mutable()
        iid = EntityId(Kind.INGREDIENT, len(self.ingredients) + 1)
        self.ingredients[iid] = IngredientEntity(iid, canonical_name, nutrition, image)
        self._ingredient_by_name[canonical_name] = iid
        self._in[iid] = set()
        return iid

    def link_ingredient(self, recipe: EntityId, ingredient: EntityId) -> None:
        self._require(recipe, Kind.RECIPE)
        self._require(ingredient, Kind.INGREDIENT)
        if ingredient in self._out[recipe]:
            return
        self._check_mutable()
        self._out[recipe].add(ingredient)
        self._in[ingredient].add(recipe)

    def set_nutrition(self, ingredient: EntityId, nutrition: NutritionFacts) -> None:
        self._check_mutable()
        self._require(ingredient, Kind.INGREDIENT)
        self.ingredients[ingredient].nutrition = nutrition

    def set_image(self, entity: EntityId, image: ImageLink) -> None:
        self._check_mutable()
        self.entity(entity).image = image

    # -- lookups -----------------------------------------------------------

    def _require(self, eid: EntityId, kind: Kind) -> None:
        if not isinstance(eid, EntityId):
            raise GraphError(f"not an entity id: {eid!r}")
        if eid.kind is not kind:
            raise GraphError(f"{eid} is not a {kind.name.lower()}")
        table = self.recipes if kind is Kind.RECIPE else self.ingredients
        if eid not in table:
            raise GraphError(f"unknown entity {eid}")

    def entity(self, eid: EntityId) -> RecipeEntity | IngredientEntity:
        table = self.recipes if eid.kind is Kind.RECIPE else self.ingredients
        try:
            return table[eid]
        except KeyError:
            raise GraphError(f"unknown entity {eid}") from None

    def has_entity(self, eid: EntityId) -> bool:
        table = self.recipes if eid.kind is Kind.RECIPE else self.ingredients
        return eid in table

    def name_of(self, eid: EntityId) -> str:
        ent = self.entity(eid)
        return ent.title if isinstance(ent, RecipeEntity) else ent.canonical_name

    def recipe_by_title(self, title: str) -> EntityId | None:
        return self._recipe_by_title.get(title_key(title))

    def ingredient_by_name(self, name: str) -> EntityId | None:
        return self._ingredient_by_name.get(name)

    def triples(self):
        """All triples in (recipe id, ingredient id) order."""
        for rid in sorted(self._out):
            for iid in sorted(self._out[rid]):
                yield Triple(rid, HAS_INGREDIENT, iid)

    # -- queries -----------------------------------------------------------

    def ingredients_of(self, recipe: EntityId) -> list[IngredientEntity]:
        self._require(recipe, Kind.RECIPE)
        ents = [self.ingredients[i] for i in self._out[recipe]]
        return sorted(ents, key=lambda e: e.canonical_name)

    def recipes_with(self, ingredient: EntityId) -> list[RecipeEntity]:
        self._require(ingredient, Kind.INGREDIENT)
        ents = [self.recipes[r] for r in self._in[ingredient]]
        return sorted(ents, key=lambda e: (title_key(e.title), e.id))

    def recipes_with_both(self, a: EntityId, b: EntityId) -> list[RecipeEntity]:
        self._require(a, Kind.INGREDIENT)
        self._require(b, Kind.INGREDIENT)
        both = self._in[a] & self._in[b]
        return sorted((self.recipes[r] for r in both), key=lambda e: (title_key(e.title), e.id))

    def ingredients_exceeding(self, nutrient: str, threshold: float) -> list[IngredientEntity]:
        if nutrient not in NUTRIENTS:
            raise ValidationError(f"unknown nutrient {nutrient!r}")
        if math.isnan(threshold):
            raise ValidationError("threshold must not be NaN")
        hits = [
            e for e in self.ingredients.values()
            if e.nutrition is not None and e.nutrition.get(nutrient) > threshold
        ]
        return sorted(hits, key=lambda e: e.canonical_name)

    def stats(self) -> dict[str, int]:
        return {
            "recipes": len(self.recipes),
            "ingredients": len(self.ingredients),
            "relations": sum(len(v) for v in self._out.values()),
            "ingredient_images": sum(
                1 for e in self.ingredients.values() if e.image is not None and e.image.verified
            ),
            "recipe_images": sum(
                1 for e in self.recipes.values() if e.image is not None and e.image.verified
            ),
        }

    def verified_images(self):
        """(entity id, image link) for every verified link, recipes first, by id."""
        for table in (self.recipes, self.ingredients):
            for eid in sorted(table):
                img = table[eid].image
                if img is not None and img.verified:
                    yield eid, img

    # -- persistence -------------------------------------------------------

    def dumps(self) -> str:
        lines = [_HEADER]
        for rid in sorted(self.recipes):
            r = self.recipes[rid]
            lines.append(f"{rid}\ttitle\t{_esc(r.title)}")
            lines.append(f"{rid}\tinstructions\t{_esc(r.instructions)}")
            _image_lines(lines, rid, r.image)
        for iid in sorted(self.ingredients):
            ing = self.ingredients[iid]
            lines.append(f"{iid}\tname\t{_esc(ing.canonical_name)}")
            if ing.nutrition is not None:
                for n in NUTRIENTS:
                    lines.append(f"{iid}\t{n}\t{_fmt_num(ing.nutrition.get(n))}")
            _image_lines(lines, iid, ing.image)
        for t in self.triples():
            lines.append(f"{t.subject}\t{t.predicate}\t{t.object}")
        lines.append(_END_MARKER)
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str, path: str | None = None) -> "KnowledgeGraph":
        return _parse(text, path)

    @classmethod
    def load(cls, path) -> "KnowledgeGraph":
        return _parse(Path(path).read_text(encoding="utf-8"), str(path))


def _image_lines(lines: list[str], eid: EntityId, image: ImageLink | None) -> None:
    if image is not None:
        lines.append(f"{eid}\timage\t{_esc(image.path)}")
        lines.append(f"{eid}\timage_verified\t{'true' if image.verified else 'false'}")


def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n", "\\r": "\r"}


def _esc(s: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in s)


def _unesc(s: str) -> str:
    return re.sub(r"\\[\\tnr]", lambda m: _UNESCAPES[m.group(0)], s)


def _parse(text: str, path: str | None) -> KnowledgeGraph:
    """Two passes: declarations and attributes first, then triples, so
    record order inside the file does not matter."""
    recipes: dict[EntityId, dict] = {}
    ingredients: dict[EntityId, dict] = {}
    links: list[tuple[int, EntityId, EntityId]] = []
    lines = text.splitlines()
    last = 0
    saw_end = False
    for no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        last = no
        if saw_end:
            raise ParseError("content after end marker", no, path)
        if raw.startswith("#"):
            if raw.strip() == _END_MARKER:
                saw_end = True
            continue
        parts = raw.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", no, path)
        subj, pred, obj = parts
        try:
            sid = EntityId.parse(subj)
        except ValidationError as exc:
            raise ParseError(str(exc), no, path) from None
        if pred == HAS_INGREDIENT:
            try:
                oid = EntityId.parse(obj)
            except ValidationError as exc:
                raise ParseError(str(exc), no, path) from None
            links.append((no, sid, oid))
            continue
        table = recipes if sid.kind is Kind.RECIPE else ingredients
        rec = table.setdefault(sid, {"_line": no})
        value = _unesc(obj)
        allowed = (
            {"title", "instructions", "image", "image_verified"}
            if sid.kind is Kind.RECIPE
            else {"name", "image", "image_verified", *NUTRIENTS}
        )
        if pred not in allowed:
            raise ParseError(f"unknown predicate {pred!r} for {sid}", no, path)
        if pred in NUTRIENTS:
            try:
                rec[pred] = float(value)
            except ValueError:
                raise ParseError(f"{pred} is not a number: {value!r}", no, path) from None
        elif pred == "image_verified":
            if value not in ("true", "false"):
                raise ParseError(f"image_verified must be true/false, got {value!r}", no, path)
            rec[pred] = value == "true"
        else:
            rec[pred] = value
    if not saw_end:
        raise ParseError("truncated file: missing end marker", last or 1, path)

    kg = KnowledgeGraph()
    for rid in sorted(recipes):
        rec = recipes[rid]
        if "title" not in rec:
            raise ParseError(f"{rid} has no title", rec["_line"], path)
        try:
            got = kg.add_recipe(rec["title"], rec.get("instructions", ""), _image_from(rec))
        except ValidationError as exc:
            raise ParseError(str(exc), rec["_line"], path) from None
        if got != rid:
            raise ParseError(f"non-sequential or duplicate recipe id {rid}", rec["_line"], path)
    for iid in sorted(ingredients):
        rec = ingredients[iid]
        if "name" not in rec:
            raise ParseError(f"{iid} has no name", rec["_line"], path)
        nutrition = None
        present = [n for n in NUTRIENTS if n in rec]
        try:
            if present:
                if len(present) != len(NUTRIENTS):
                    raise ValidationError(f"{iid} has partial nutrition {present}")
                nutrition = NutritionFacts(*(rec[n] for n in NUTRIENTS))
            got = kg.add_ingredient(rec["name"], nutrition, _image_from(rec))
        except ValidationError as exc:
            raise ParseError(str(exc), rec["_line"], path) from None
        if got != iid:
            raise ParseError(f"non-sequential or duplicate ingredient id {iid}", rec["_line"], path)
    for no, sid, oid in links:
        try:
            kg.link_ingredient(sid, oid)
        except GraphError as exc:
            raise ParseError(str(exc), no, path) from None
    return kg.freeze()


def _image_from(rec: dict) -> ImageLink | None:
    if "image" not in rec:
        return None
    return ImageLink(rec["image"], rec.get("image_verified", False))
