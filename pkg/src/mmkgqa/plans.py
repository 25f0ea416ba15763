"""Answer plans: the graph operations behind each question template.

A plan is written ``op(arg, ...)`` in the template file, where args are slot
names or literals (nutrient names, thresholds). Every op declares how many
relation/attribute steps it takes, how to enumerate slot bindings, and how
to render the answer. ``execute`` returns the answer plus the list of steps
actually taken, which is how hop labels are checked.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterator

from .errors import SchemaError
from .kg import NUTRIENT_UNITS, NUTRIENTS, EntityId, KnowledgeGraph, Kind

HAS = "hasIngredient"
INV = "^hasIngredient"


def fmt_amount(value: float) -> str:
    """Render a quantity with at most two decimals and no trailing zeros."""
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def fmt_nutrient(nutrient: str, value: float) -> str:
    return f"{fmt_amount(value)} {NUTRIENT_UNITS[nutrient]}"


def fmt_delta(nutrient: str, delta: float) -> str:
    sign = "+" if delta >= 0 else "-"
    return f"{nutrient} {sign}{fmt_amount(abs(delta))} {NUTRIENT_UNITS[nutrient]}"


def fmt_profile(nutrition) -> str:
    return ", ".join(f"{n} {fmt_nutrient(n, nutrition.get(n))}" for n in NUTRIENTS)


def join_names(names) -> str:
    return ", ".join(names)


# -- auxiliary tables ---------------------------------------------------------


def _read_tsv(text: str) -> list[list[str]]:
    rows = []
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            rows.append([c.strip() for c in line.split("\t")])
    return rows


@dataclass
class AuxTables:
    """Facts the graph does not model: substitutions, storage advice, side
    dishes and the non-vegan word list."""

    substitutions: dict[str, list[str]] = field(default_factory=dict)
    storage: dict[str, str] = field(default_factory=dict)
    side_dishes: dict[str, list[str]] = field(default_factory=dict)
    non_vegan: frozenset[str] = frozenset()

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "AuxTables":
        def read(name: str) -> str:
            if directory is None:
                return resources.files("mmkgqa").joinpath("data", name).read_text(encoding="utf-8")
            p = Path(directory) / name
            return p.read_text(encoding="utf-8") if p.exists() else ""

        subs: dict[str, list[str]] = {}
        for row in _read_tsv(read("substitutions.tsv")):
            subs.setdefault(row[0], []).append(row[1])
        storage = {row[0]: row[1] for row in _read_tsv(read("storage.tsv"))}
        sides: dict[str, list[str]] = {}
        for row in _read_tsv(read("side_dishes.tsv")):
            sides.setdefault(row[0].casefold(), []).append(row[1])
        words = frozenset(w for w in read("non_vegan.txt").split("\n") if w.strip() and not w.startswith("#"))
        return cls(subs, storage, sides, words)


# -- op registry ----------------------------------------------------------------


@dataclass
class Plan:
    op: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.op}({', '.join(self.args)})"

    @classmethod
    def parse(cls, text: str) -> "Plan":
        m = re.fullmatch(r"\s*([a-z_]+)\((.*)\)\s*", text)
        if not m:
            raise SchemaError(f"bad answer plan {text!r}")
        args = tuple(a.strip() for a in m.group(2).split(",") if a.strip())
        return cls(m.group(1), args)


@dataclass
class Op:
    name: str
    hop: int
    # (kind or 'nutrient' or 'number') per positional argument
    signature: tuple[str, ...]
    bindings: Callable[["Context", tuple], Iterator[tuple]]
    answer: Callable[["Context", tuple], tuple[str, list[str], list[str]] | None]


@dataclass
class Context:
    kg: KnowledgeGraph
    tables: AuxTables


OPS: dict[str, Op] = {}


def op(name: str, hop: int, signature: tuple[str, ...], bindings):
    def deco(fn):
        OPS[name] = Op(name, hop, signature, bindings, fn)
        return fn

    return deco


def _names(kg: KnowledgeGraph, ents) -> list[str]:
    return [kg.name_of(e.id) for e in ents]


def _recipes_sorted(kg):
    return sorted(kg.recipes.values(), key=lambda r: (r.title.casefold(), r.id))


def _ingredients_sorted(kg):
    return sorted(kg.ingredients.values(), key=lambda i: i.canonical_name)


# binding generators yield tuples of EntityId aligned with the slot args


def each_recipe(ctx, args):
    for r in _recipes_sorted(ctx.kg):
        yield (r.id,)


def each_ingredient(ctx, args):
    for i in _ingredients_sorted(ctx.kg):
        yield (i.id,)


def each_ingredient_with_nutrition(ctx, args):
    for i in _ingredients_sorted(ctx.kg):
        if i.nutrition is not None:
            yield (i.id,)


def recipe_and_member(ctx, args):
    """Each recipe with each of its ingredients, then as many non-members."""
    all_ings = _ingredients_sorted(ctx.kg)
    for r in _recipes_sorted(ctx.kg):
        members = ctx.kg.ingredients_of(r.id)
        member_ids = {m.id for m in members}
        for m in members:
            yield (r.id, m.id)
        others = [i for i in all_ings if i.id not in member_ids][: len(members)]
        for o in others:
            yield (r.id, o.id)


def ingredient_pairs(ctx, args):
    """Unordered co-occurring ingredient pairs (name order)."""
    seen = set()
    for r in _recipes_sorted(ctx.kg):
        ings = ctx.kg.ingredients_of(r.id)
        for a_i, a in enumerate(ings):
            for b in ings[a_i + 1:]:
                key = (a.id, b.id)
                if key not in seen:
                    seen.add(key)
    for a, b in sorted(seen, key=lambda k: (ctx.kg.name_of(k[0]), ctx.kg.name_of(k[1]))):
        yield (a, b)


def recipe_pairs(ctx, args):
    recipes = _recipes_sorted(ctx.kg)
    for i, a in enumerate(recipes):
        for b in recipes[i + 1:]:
            yield (a.id, b.id)


def recipe_member_alternative(ctx, args):
    kg = ctx.kg
    for r in _recipes_sorted(kg):
        for m in kg.ingredients_of(r.id):
            for alt_name in ctx.tables.substitutions.get(m.canonical_name, []):
                alt = kg.ingredient_by_name(alt_name)
                if alt is not None:
                    yield (r.id, m.id, alt)


# -- one-hop ops -----------------------------------------------------------


@op("ingredients", 1, (Kind.RECIPE,), each_recipe)
def _ingredients(ctx, b):
    names = _names(ctx.kg, ctx.kg.ingredients_of(b[0]))
    return (join_names(names), [HAS], []) if names else None


@op("ingredient_count", 1, (Kind.RECIPE,), each_recipe)
def _ingredient_count(ctx, b):
    n = len(ctx.kg.ingredients_of(b[0]))
    return (str(n), [HAS], []) if n else None


@op("contains", 1, (Kind.RECIPE, Kind.INGREDIENT), recipe_and_member)
def _contains(ctx, b):
    members = {e.id for e in ctx.kg.ingredients_of(b[0])}
    return ("Yes" if b[1] in members else "No", [HAS], [])


@op("instructions", 1, (Kind.RECIPE,), each_recipe)
def _instructions(ctx, b):
    text = ctx.kg.recipes[b[0]].instructions
    return (text, ["instructions"], []) if text else None


@op("recipe_image", 1, (Kind.RECIPE,), each_recipe)
def _recipe_image(ctx, b):
    img = ctx.kg.recipes[b[0]].image
    return (img.path, ["image"], []) if img is not None and img.verified else None


@op("ingredient_image", 1, (Kind.INGREDIENT,), each_ingredient)
def _ingredient_image(ctx, b):
    img = ctx.kg.ingredients[b[0]].image
    return (img.path, ["image"], []) if img is not None and img.verified else None


@op("nutrient", 1, (Kind.INGREDIENT, "nutrient"), each_ingredient_with_nutrition)
def _nutrient(ctx, b, nutrient):
    facts = ctx.kg.ingredients[b[0]].nutrition
    return (fmt_nutrient(nutrient, facts.get(nutrient)), [nutrient], []) if facts else None


@op("nutrition", 1, (Kind.INGREDIENT,), each_ingredient_with_nutrition)
def _nutrition(ctx, b):
    facts = ctx.kg.ingredients[b[0]].nutrition
    return (fmt_profile(facts), ["nutrition"], []) if facts else None


@op("above", 1, (Kind.INGREDIENT, "nutrient", "number"), each_ingredient_with_nutrition)
def _above(ctx, b, nutrient, threshold):
    facts = ctx.kg.ingredients[b[0]].nutrition
    if facts is None:
        return None
    v = facts.get(nutrient)
    word = "Yes" if v > float(threshold) else "No"
    return (f"{word} ({fmt_nutrient(nutrient, v)})", [nutrient], [])


@op("below", 1, (Kind.INGREDIENT, "nutrient", "number"), each_ingredient_with_nutrition)
def _below(ctx, b, nutrient, threshold):
    facts = ctx.kg.ingredients[b[0]].nutrition
    if facts is None:
        return None
    v = facts.get(nutrient)
    word = "Yes" if v < float(threshold) else "No"
    return (f"{word} ({fmt_nutrient(nutrient, v)})", [nutrient], [])


@op("storage", 1, (Kind.INGREDIENT,), each_ingredient)
def _storage(ctx, b):
    advice = ctx.tables.storage.get(ctx.kg.name_of(b[0]))
    return (advice, ["storage"], ["storage"]) if advice else None


@op("alternatives", 1, (Kind.INGREDIENT,), each_ingredient)
def _alternatives(ctx, b):
    alts = ctx.tables.substitutions.get(ctx.kg.name_of(b[0]), [])
    return (join_names(alts), ["substitutes"], ["substitutions"]) if alts else None


@op("vegan", 1, (Kind.RECIPE,), each_recipe)
def _vegan(ctx, b):
    ings = ctx.kg.ingredients_of(b[0])
    if not ings:
        return None
    bad = [i.canonical_name for i in ings if is_non_vegan(i.canonical_name, ctx.tables)]
    answer = "Yes" if not bad else f"No, it contains {join_names(bad)}"
    return (answer, [HAS], [])


def is_non_vegan(name: str, tables: AuxTables) -> bool:
    return any(w in tables.non_vegan for w in name.split())


@op("recipes", 1, (Kind.INGREDIENT,), each_ingredient)
def _recipes(ctx, b):
    titles = _names(ctx.kg, ctx.kg.recipes_with(b[0]))
    return (join_names(titles), [INV], []) if titles else None


@op("recipe_count", 1, (Kind.INGREDIENT,), each_ingredient)
def _recipe_count(ctx, b):
    n = len(ctx.kg.recipes_with(b[0]))
    return (str(n), [INV], []) if n else None


# -- two-hop ops -----------------------------------------------------------


def _with_nutrition(kg, recipe):
    return [i for i in kg.ingredients_of(recipe) if i.nutrition is not None]


@op("ingredient_nutrition", 2, (Kind.RECIPE,), each_recipe)
def _ingredient_nutrition(ctx, b):
    ings = _with_nutrition(ctx.kg, b[0])
    if not ings:
        return None
    parts = [f"{i.canonical_name} ({fmt_profile(i.nutrition)})" for i in ings]
    return ("; ".join(parts), [HAS, "nutrition"], [])


@op("ingredient_nutrient", 2, (Kind.RECIPE, "nutrient"), each_recipe)
def _ingredient_nutrient(ctx, b, nutrient):
    ings = _with_nutrition(ctx.kg, b[0])
    if not ings:
        return None
    parts = [f"{i.canonical_name}: {fmt_nutrient(nutrient, i.nutrition.get(nutrient))}" for i in ings]
    return (", ".join(parts), [HAS, nutrient], [])


@op("total_nutrient", 2, (Kind.RECIPE, "nutrient"), each_recipe)
def _total_nutrient(ctx, b, nutrient):
    ings = _with_nutrition(ctx.kg, b[0])
    if not ings:
        return None
    total = sum(i.nutrition.get(nutrient) for i in ings)
    return (fmt_nutrient(nutrient, total), [HAS, nutrient], [])


@op("richest_ingredient", 2, (Kind.RECIPE, "nutrient"), each_recipe)
def _richest(ctx, b, nutrient):
    ings = _with_nutrition(ctx.kg, b[0])
    if not ings:
        return None
    # ties go to the first name alphabetically
    best = min(ings, key=lambda i: (-i.nutrition.get(nutrient), i.canonical_name))
    return (f"{best.canonical_name} ({fmt_nutrient(nutrient, best.nutrition.get(nutrient))})", [HAS, nutrient], [])


@op("exceeding", 2, (Kind.RECIPE, "nutrient", "number"), each_recipe)
def _exceeding(ctx, b, nutrient, threshold):
    ings = [i for i in _with_nutrition(ctx.kg, b[0]) if i.nutrition.get(nutrient) > float(threshold)]
    if not ings:
        return None
    parts = [f"{i.canonical_name} ({fmt_nutrient(nutrient, i.nutrition.get(nutrient))})" for i in ings]
    return (", ".join(parts), [HAS, nutrient], [])


@op("both", 2, (Kind.INGREDIENT, Kind.INGREDIENT), ingredient_pairs)
def _both(ctx, b):
    titles = _names(ctx.kg, ctx.kg.recipes_with_both(b[0], b[1]))
    return (join_names(titles), [INV, INV], []) if titles else None


@op("co_ingredients", 2, (Kind.INGREDIENT,), each_ingredient)
def _co_ingredients(ctx, b):
    kg = ctx.kg
    names = sorted({
        i.canonical_name
        for r in kg.recipes_with(b[0])
        for i in kg.ingredients_of(r.id)
        if i.id != b[0]
    })
    return (join_names(names), [INV, HAS], []) if names else None


@op("substitution", 2, (Kind.RECIPE, Kind.INGREDIENT, Kind.INGREDIENT), recipe_member_alternative)
def _substitution(ctx, b):
    kg = ctx.kg
    recipe, old, new = b
    if old not in {i.id for i in kg.ingredients_of(recipe)}:
        return None
    a, c = kg.ingredients[old].nutrition, kg.ingredients[new].nutrition
    if a is None or c is None:
        return None
    parts = [fmt_delta(n, c.get(n) - a.get(n)) for n in NUTRIENTS]
    return (", ".join(parts), [HAS, "nutrition"], ["substitutions"])


@op("side_dishes", 2, (Kind.RECIPE,), each_recipe)
def _side_dishes(ctx, b):
    kg = ctx.kg
    parts = []
    for title in ctx.tables.side_dishes.get(kg.recipes[b[0]].title.casefold(), []):
        sid = kg.recipe_by_title(title)
        if sid is None:
            continue
        ings = _names(kg, kg.ingredients_of(sid))
        if ings:
            parts.append(f"{kg.recipes[sid].title}: {join_names(ings)}")
    return ("; ".join(parts), ["side_dish", HAS], ["side_dishes"]) if parts else None


@op("recipe_images_with", 2, (Kind.INGREDIENT,), each_ingredient)
def _recipe_images_with(ctx, b):
    parts = [
        f"{r.title} ({r.image.path})"
        for r in ctx.kg.recipes_with(b[0])
        if r.image is not None and r.image.verified
    ]
    return ("; ".join(parts), [INV, "image"], []) if parts else None


@op("shared_ingredients", 2, (Kind.RECIPE, Kind.RECIPE), recipe_pairs)
def _shared(ctx, b):
    kg = ctx.kg
    a = {i.canonical_name for i in kg.ingredients_of(b[0])}
    c = {i.canonical_name for i in kg.ingredients_of(b[1])}
    common = sorted(a & c)
    return (join_names(common), [HAS, HAS], []) if common else None


@op("vegan_recipes_with", 2, (Kind.INGREDIENT,), each_ingredient)
def _vegan_recipes_with(ctx, b):
    kg = ctx.kg
    titles = [
        r.title
        for r in kg.recipes_with(b[0])
        if not any(is_non_vegan(i.canonical_name, ctx.tables) for i in kg.ingredients_of(r.id))
    ]
    return (join_names(titles), [INV, HAS], []) if titles else None


@op("recipe_alternatives", 2, (Kind.RECIPE,), each_recipe)
def _recipe_alternatives(ctx, b):
    parts = []
    for i in ctx.kg.ingredients_of(b[0]):
        alts = ctx.tables.substitutions.get(i.canonical_name)
        if alts:
            parts.append(f"{i.canonical_name}: {join_names(alts)}")
    return ("; ".join(parts), [HAS, "substitutes"], ["substitutions"]) if parts else None


@op("related_recipes", 2, (Kind.RECIPE,), each_recipe)
def _related(ctx, b):
    kg = ctx.kg
    titles = {
        r.title
        for i in kg.ingredients_of(b[0])
        for r in kg.recipes_with(i.id)
        if r.id != b[0]
    }
    ordered = sorted(titles, key=str.casefold)
    return (join_names(ordered), [HAS, INV], []) if ordered else None


def literal_args(plan: Plan, signature: tuple[str, ...]) -> list[str]:
    return [a for a, kind in zip(plan.args, signature) if kind in ("nutrient", "number")]


def validate_plan(plan: Plan, slot_kinds: dict[str, Kind], hop: int) -> Op:
    """Check that the plan names a known op whose arguments fit the slots."""
    if plan.op not in OPS:
        raise SchemaError(f"unknown plan op {plan.op!r}")
    spec = OPS[plan.op]
    if len(plan.args) != len(spec.signature):
        raise SchemaError(f"{plan}: expected {len(spec.signature)} arguments")
    if spec.hop != hop:
        raise SchemaError(f"{plan}: op takes {spec.hop} hop(s), template declares {hop}")
    for arg, kind in zip(plan.args, spec.signature):
        if kind == "nutrient":
            if arg not in NUTRIENTS:
                raise SchemaError(f"{plan}: unknown nutrient {arg!r}")
        elif kind == "number":
            try:
                float(arg)
            except ValueError:
                raise SchemaError(f"{plan}: {arg!r} is not a number") from None
        else:
            if arg not in slot_kinds:
                raise SchemaError(f"{plan}: slot {arg!r} not declared")
            if slot_kinds[arg] is not kind:
                raise SchemaError(f"{plan}: slot {arg!r} must be {kind.name.title()}")
    return spec


def execute(plan: Plan, ctx: Context, slots: dict[str, EntityId]):
    """Run a plan for one binding; ``None`` means the answer is empty."""
    spec = OPS[plan.op]
    ents = tuple(slots[a] for a, k in zip(plan.args, spec.signature) if isinstance(k, Kind))
    return spec.answer(ctx, ents, *literal_args(plan, spec.signature))


def enumerate_bindings(plan: Plan, ctx: Context) -> Iterator[dict[str, EntityId]]:
    spec = OPS[plan.op]
    slot_args = [a for a, k in zip(plan.args, spec.signature) if isinstance(k, Kind)]
    for ents in spec.bindings(ctx, plan.args):
        yield dict(zip(slot_args, ents))
