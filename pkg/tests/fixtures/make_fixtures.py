"""Regenerate the bundled test fixtures.

Run from the repository root: ``python tests/fixtures/make_fixtures.py``.
Outputs are committed; tests never call this script. Every count the tests
assert on is written to ``bundle/expected.json`` from the tables below, not
from the package under test.
"""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent
BUNDLE = HERE / "bundle"

# canonical name -> raw spellings as they appear in recipe data
RAW = {
    "peas": ["1 cup frozen peas", "2 cups fresh peas", "peas"],
    "shallot": ["1 medium shallot, finely chopped", "2 shallots, minced"],
    "butter": ["2 tablespoons unsalted butter, softened", "4 tbsp butter", "1 stick butter, melted"],
    "lemon zest": ["1 teaspoon finely grated lemon zest", "2 tsp lemon zest"],
    "salt": ["1/2 teaspoon kosher salt", "1 pinch of sea salt", "salt"],
    "chicken": ["500 g chicken", "2 cups cooked chicken, shredded"],
    "bread": ["2 slices bread", "4 slices bread"],
    "salad": ["1 cup salad", "salad"],
    "mayonnaise": ["2 tbsp mayonnaise", "1/4 cup mayo"],
    "cheese": ["2 slices cheese", "1 cup grated cheese"],
    "tomato": ["2 ripe tomatoes, diced", "1 large tomato, sliced", "3 tomatoes"],
    "onion": ["1 onion, chopped", "1 large onion, thinly sliced"],
    "cucumber": ["1 cucumber, sliced", "2 small cucumbers"],
    "ketchup": ["2 tbsp ketchup"],
    "bulgur": ["1 cup bulgur wheat", "200 g bulgur"],
    "parsley": ["2 tbsp chopped fresh parsley", "1 bunch parsley"],
    "mint": ["1/4 cup fresh mint leaves", "2 sprigs mint"],
    "olive oil": ["½ cup extra-virgin olive oil", "2 tablespoons olive oil"],
    "lemon": ["1 lemon, juiced", "2 lemons"],
    "garlic": ["3 cloves garlic, minced", "2 garlic cloves"],
    "basil": ["fresh finely chopped basil leaves", "2 tbsp chopped basil", "1 cup fresh basil leaves"],
    "spaghetti": ["200 g dried spaghetti", "1 lb spaghetti"],
    "egg": ["2 large eggs, lightly beaten", "3 eggs", "1 egg"],
    "egg white": ["2 large egg whites", "Egg Whites (2 pcs)"],
    "flour": ["1 1/2 cups all-purpose flour", "2 cups flour"],
    "milk": ["250 ml whole milk", "1 cup milk"],
    "sugar": ["1/2 cup sugar", "2 tbsp sugar"],
    "chicken breast": ["boneless skinless chicken breasts", "2 chicken breasts"],
    "brown rice": ["1 cup cooked brown rice", "2 cups brown rice"],
    "black pepper": ["1/4 tsp freshly ground black pepper", "black pepper"],
    "carrot": ["2 medium carrots, peeled and grated", "3 carrots, diced"],
    "potato": ["3 large potatoes, peeled and cubed", "4 potatoes"],
    "spinach": ["2 cups baby spinach leaves", "1 bag spinach"],
    "chickpea": ["1 can (15 oz) garbanzo beans, drained", "2 cups chickpeas"],
    "coconut milk": ["1 (14-ounce) can coconut milk", "1 cup coconut milk"],
    "green onion": ["4 scallions, thinly sliced", "2 green onions, chopped"],
    "ground beef": ["1 lb ground beef", "500 g ground beef"],
    "cheddar cheese": ["6 oz cheddar cheese, shredded", "1 cup grated cheddar cheese"],
    "mushroom": ["8 ounces mushrooms, sliced", "2 cups mushrooms"],
    "greek yogurt": ["1 cup plain Greek yogurt", "1/2 cup greek yoghurt"],
    "avocado": ["1 ripe avocado, diced", "2 avocados"],
    "lime": ["2 limes, juiced", "1 lime"],
    "cilantro": ["1 bunch fresh cilantro leaves", "2 tbsp chopped cilantro"],
    "honey": ["2 tbsp honey", "1/4 cup honey"],
    "tofu": ["400 g tofu, cubed", "1 block tofu"],
    "lentil": ["1 cup dried lentils", "2 cups lentils, rinsed"],
    "thyme": ["2 sprigs fresh thyme", "1 tsp dried thyme"],
    "zucchini": ["4 small zucchini, halved lengthwise", "2 zucchini"],
    "cinnamon": ["1 teaspoon ground cinnamon"],
}

# per 100 g: calories (kcal), fat, protein, carbohydrates (g)
NUTRITION = {
    "peas": (81, 0.4, 5.4, 14),
    "shallot": (72, 0.1, 2.5, 17),
    "butter": (717, 81, 0.9, 0.1),
    "lemon zest": (47, 0.3, 1.5, 16),
    "salt": (0, 0, 0, 0),
    "chicken": (239, 14, 27, 0),
    "bread": (265, 3.2, 9, 49),
    "salad": (15, 0.2, 1.4, 2.9),
    "mayonnaise": (680, 75, 1, 0.6),
    "cheese": (402, 33, 25, 1.3),
    "tomato": (18, 0.2, 0.9, 3.9),
    "onion": (40, 0.1, 1.1, 9.3),
    "cucumber": (15, 0.1, 0.7, 3.6),
    "ketchup": (112, 0.1, 1.7, 26),
    "bulgur": (342, 1.3, 12, 76),
    "parsley": (36, 0.8, 3, 6.3),
    "mint": (70, 0.9, 3.8, 15),
    "olive oil": (884, 100, 0, 0),
    "lemon": (29, 0.3, 1.1, 9.3),
    "garlic": (149, 0.5, 6.4, 33),
    "basil": (23, 0.6, 3.2, 2.7),
    "spaghetti": (371, 1.5, 13, 75),
    "egg": (155, 11, 13, 1.1),
    "egg white": (52, 0.2, 11, 0.7),
    "flour": (364, 1, 10, 76),
    "milk": (42, 1, 3.4, 5),
    "sugar": (387, 0, 0, 100),
    "chicken breast": (165, 3.6, 31, 0),
    "brown rice": (111, 0.9, 2.6, 23),
    "black pepper": (251, 3.3, 10, 64),
    "carrot": (41, 0.2, 0.9, 10),
    "potato": (77, 0.1, 2, 17),
    "spinach": (23, 0.4, 2.9, 3.6),
    "chickpea": (164, 2.6, 8.9, 27),
    "coconut milk": (230, 24, 2.3, 6),
    "green onion": (32, 0.2, 1.8, 7.3),
    "ground beef": (254, 20, 17, 0),
    "cheddar cheese": (403, 33, 25, 1.3),
    "mushroom": (22, 0.3, 3.1, 3.3),
    "greek yogurt": (59, 0.4, 10, 3.6),
    "avocado": (160, 15, 2, 9),
    "lime": (30, 0.2, 0.7, 11),
    "cilantro": (23, 0.5, 2.1, 3.7),
    "honey": (304, 0, 0.3, 82),
    "tofu": (76, 4.8, 8, 1.9),
    "lentil": (116, 0.4, 9, 20),
    # thyme, zucchini, cinnamon deliberately have no nutrition row
}
NUTRITION_UNMATCHED = {"saffron": (310, 5.9, 11, 65), "dragon fruit": (60, 0, 1.2, 13)}

RECIPES = [
    ("Spring Pea Butter with Shallot and Lemon", ["peas", "shallot", "butter", "lemon zest", "salt"],
     "Blanch the peas, then blend with softened butter, sweated shallot, lemon zest and salt."),
    ("Chicken Burger", ["chicken", "bread", "salad", "mayonnaise", "cheese", "tomato", "onion", "cucumber", "ketchup"],
     "Grill the chicken patty, toast the bun and layer with salad, cheese, tomato, onion, cucumber, mayonnaise and ketchup."),
    ("Bulgur with Herbs", ["bulgur", "parsley", "mint", "olive oil", "lemon", "salt"],
     "Soak the bulgur, then toss with chopped herbs, olive oil and lemon juice."),
    ("Basil Pesto Spaghetti", ["spaghetti", "basil", "garlic", "olive oil", "cheese", "salt"],
     "Cook the spaghetti and toss with a pesto of basil, garlic, olive oil and cheese."),
    ("Tomato Basil Bruschetta", ["bread", "tomato", "basil", "garlic", "olive oil"],
     "Toast the bread, rub with garlic and top with tomato, basil and olive oil."),
    ("Classic Omelette", ["egg", "butter", "salt", "black pepper"],
     "Whisk the eggs, cook in foaming butter and fold."),
    ("Egg White Frittata", ["egg white", "spinach", "onion", "cheese", "black pepper"],
     "Pour egg whites over sauteed spinach and onion, top with cheese and bake."),
    ("Buttermilk Pancakes", ["flour", "milk", "egg", "sugar", "butter"],
     "Mix the batter and cook ladlefuls on a hot griddle until golden."),
    ("Grilled Chicken Breast", ["chicken breast", "olive oil", "garlic", "lemon", "black pepper"],
     "Marinate the chicken breasts and grill until cooked through."),
    ("Chicken Fried Rice", ["brown rice", "chicken", "egg", "carrot", "peas", "green onion"],
     "Stir-fry the rice with chicken, egg, carrot, peas and green onion."),
    ("Mashed Potatoes", ["potato", "butter", "milk", "salt"],
     "Boil the potatoes and mash with butter and warm milk."),
    ("Spinach Salad", ["spinach", "olive oil", "lemon", "salt"],
     "Dress the spinach with olive oil and lemon."),
    ("Chickpea Curry", ["chickpea", "coconut milk", "onion", "garlic", "tomato", "cilantro"],
     "Simmer the chickpeas in coconut milk with onion, garlic and tomato; finish with cilantro."),
    ("Beef Tacos", ["ground beef", "onion", "tomato", "cheddar cheese", "lime", "cilantro"],
     "Brown the beef with onion and spoon into tortillas with tomato, cheese, lime and cilantro."),
    ("Mushroom Risotto", ["brown rice", "mushroom", "onion", "butter", "cheese"],
     "Toast the rice, add stock gradually, then stir in mushrooms, butter and cheese."),
    ("Greek Yogurt Parfait", ["greek yogurt", "honey"],
     "Layer the yogurt with honey."),
    ("Guacamole", ["avocado", "lime", "onion", "cilantro", "salt", "tomato"],
     "Mash the avocado with lime and fold in onion, cilantro, tomato and salt."),
    ("Avocado Toast", ["bread", "avocado", "lemon", "salt", "black pepper"],
     "Toast the bread and top with smashed avocado, lemon, salt and pepper."),
    ("Tofu Stir Fry", ["tofu", "carrot", "green onion", "garlic", "honey"],
     "Sear the tofu, then stir-fry with carrot, green onion, garlic and a honey glaze."),
    ("Lentil Soup", ["lentil", "carrot", "onion", "garlic", "thyme", "salt"],
     "Simmer the lentils with carrot, onion, garlic and thyme until soft."),
    ("Zucchini Fritters", ["zucchini", "egg", "flour", "cheese", "salt"],
     "Grate the zucchini, squeeze dry, bind with egg and flour and pan-fry."),
    ("Cinnamon Sugar Toast", ["bread", "butter", "sugar", "cinnamon"],
     "Butter the bread, sprinkle with cinnamon sugar and grill."),
    ("Herb Roasted Potatoes", ["potato", "olive oil", "thyme", "garlic", "salt"],
     "Toss the potatoes with olive oil, thyme and garlic and roast until crisp."),
    ("Cucumber Mint Salad", ["cucumber", "mint", "greek yogurt", "lemon", "salt"],
     "Slice the cucumber and dress with yogurt, mint and lemon."),
    ("Lemon Butter Chicken", ["chicken breast", "butter", "lemon", "garlic", "parsley"],
     "Pan-fry the chicken breasts and finish with a lemon butter sauce and parsley."),
    ("Garlic Bread", ["bread", "butter", "garlic", "parsley"],
     "Spread the bread with garlic butter and parsley and bake."),
    ("Caprese Salad", ["tomato", "cheese", "basil", "olive oil", "salt"],
     "Layer tomato, cheese and basil and drizzle with olive oil."),
    ("Vegetable Soup", ["carrot", "potato", "onion", "tomato", "thyme", "salt"],
     "Simmer the vegetables with thyme until tender."),
    ("Shakshuka", ["egg", "tomato", "onion", "garlic", "cilantro"],
     "Poach the eggs in a spiced tomato and onion sauce; scatter cilantro."),
    ("Chicken Salad Sandwich", ["chicken", "mayonnaise", "bread", "salad", "black pepper"],
     "Bind the chicken with mayonnaise and pile onto bread with salad."),
    ("Spaghetti Bolognese", ["spaghetti", "ground beef", "tomato", "onion", "garlic", "carrot"],
     "Simmer the beef with the vegetables and tomato and serve over spaghetti."),
    ("Cheddar Omelette", ["egg", "cheddar cheese", "butter", "green onion"],
     "Cook the eggs in butter and fill with cheddar and green onion."),
    ("Honey Glazed Carrots", ["carrot", "honey", "butter", "thyme"],
     "Roast the carrots with honey, butter and thyme."),
    ("Coconut Rice", ["brown rice", "coconut milk", "salt"],
     "Cook the rice in coconut milk with a pinch of salt."),
    ("Mushroom Spinach Pasta", ["spaghetti", "mushroom", "spinach", "garlic", "olive oil", "cheese"],
     "Toss the pasta with sauteed mushrooms, spinach and garlic; finish with cheese."),
    ("Hummus", ["chickpea", "lemon", "garlic", "olive oil", "salt"],
     "Blend the chickpeas with lemon, garlic and olive oil until smooth."),
    ("Tabbouleh", ["bulgur", "parsley", "tomato", "mint", "lemon", "olive oil"],
     "Mix the soaked bulgur with parsley, tomato, mint, lemon and olive oil."),
    ("Lime Cilantro Rice", ["brown rice", "lime", "cilantro", "salt"],
     "Fold lime juice and cilantro through the cooked rice."),
    ("Pea and Mint Soup", ["peas", "mint", "onion", "butter", "salt"],
     "Sweat the onion in butter, add peas and stock, blend with mint."),
    ("Tofu Scramble", ["tofu", "spinach", "onion", "black pepper"],
     "Crumble the tofu into a pan with spinach and onion."),
    ("Sugar Cookies", ["flour", "butter", "sugar", "egg"],
     "Cream the butter and sugar, add egg and flour, shape and bake."),
    ("Baked Zucchini", ["zucchini", "olive oil", "garlic", "cheese"],
     "Halve the zucchini, brush with garlic oil, top with cheese and bake."),
    ("Lemon Honey Yogurt", ["greek yogurt", "honey", "lemon zest"],
     "Stir honey and lemon zest into the yogurt."),
    ("Potato Salad", ["potato", "mayonnaise", "green onion", "egg", "salt"],
     "Toss boiled potatoes with mayonnaise, green onion and chopped egg."),
    ("Beef and Mushroom Stew", ["ground beef", "mushroom", "carrot", "potato", "onion", "thyme"],
     "Brown the beef, add vegetables and stock and stew slowly."),
    ("Chickpea Salad", ["chickpea", "cucumber", "tomato", "onion", "parsley", "lemon", "olive oil"],
     "Combine chickpeas with chopped cucumber, tomato, onion and parsley; dress with lemon and oil."),
    ("Cinnamon Pancakes", ["flour", "milk", "egg", "cinnamon", "sugar"],
     "Whisk cinnamon into the batter and cook on a griddle."),
    ("Avocado Lime Salad", ["avocado", "lime", "cucumber", "cilantro", "salt"],
     "Dice avocado and cucumber and dress with lime and cilantro."),
    ("Lentil Curry", ["lentil", "coconut milk", "onion", "garlic", "tomato"],
     "Simmer the lentils in coconut milk with onion, garlic and tomato."),
    ("Steamed Rice", ["brown rice", "salt"],
     "Rinse the rice and steam until tender."),
    ("French Fries", ["potato", "olive oil", "salt"],
     "Cut the potatoes into batons and fry until crisp."),
    ("Coleslaw", ["carrot", "mayonnaise", "onion", "salt"],
     "Shred the carrot and onion and bind with mayonnaise."),
]

# recipe titles whose manifest entry points at a file that is not shipped
MISSING_IMAGE = {"Steamed Rice", "Coconut Rice"}
# recipes with no manifest entry at all
NO_IMAGE = {"Lime Cilantro Rice", "Tofu Scramble"}
INGREDIENT_IMAGES = ["avocado", "basil", "butter", "chicken", "garlic", "lemon", "peas", "shallot", "tomato", "egg white"]


def slug(title: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", title.lower()).strip("-")


def _fake_jpeg(payload: str) -> bytes:
    return b"\xff\xd8\xff\xe0" + payload.encode("utf-8") + b"\xff\xd9"


def make_bundle() -> dict:
    BUNDLE.mkdir(exist_ok=True)
    img_dir = BUNDLE / "images"
    img_dir.mkdir(exist_ok=True)
    for old in img_dir.iterdir():
        old.unlink()

    used: dict[str, int] = {}
    rows = []
    for r_idx, (title, ings, steps) in enumerate(RECIPES):
        raws = []
        for j, name in enumerate(ings):
            variants = RAW[name]
            raws.append(variants[(r_idx + j) % len(variants)])
            used[name] = used.get(name, 0) + 1
        rows.append({"title": title, "ingredients": repr(raws), "instructions": steps, "image": ""})
    # a bad row and an empty-title row go to the rejects report
    rows.append({"title": "", "ingredients": "['1 cup sugar']", "instructions": "", "image": ""})
    rows.append({"title": "Mystery Dish", "ingredients": "", "instructions": "", "image": ""})
    # a duplicate title that differs only in case merges into the first recipe
    rows.append({"title": "chicken burger", "ingredients": "['2 slices cheese']", "instructions": "", "image": ""})
    with open(BUNDLE / "recipes.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["title", "ingredients", "instructions", "image"])
        w.writeheader()
        w.writerows(rows)

    with open(BUNDLE / "nutrition.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["ingredient", "calories", "fat", "protein", "carbohydrates"])
        for name, vals in NUTRITION.items():
            w.writerow([name, *vals])
        for name, vals in NUTRITION_UNMATCHED.items():
            w.writerow([name, *vals])
        w.writerow(["avocado", 999, 99, 99, 99])  # duplicate: first row wins
        w.writerow(["kale", -5, 0.9, 4.3, 9])  # negative value: rejected

    manifest = []
    recipe_images = 0
    for idx, (title, ings, _steps) in enumerate(RECIPES):
        if title in NO_IMAGE:
            continue
        fname = f"{slug(title)}-{354978 + idx * 7919 if title != 'Bulgur with Herbs' else 354978}.jpg"
        if title == "Spring Pea Butter with Shallot and Lemon":
            fname = "spring-pea-butter.jpg"
        manifest.append((title, f"images/{fname}"))
        if title in MISSING_IMAGE:
            continue
        (img_dir / fname).write_bytes(_fake_jpeg(title))
        caption = f"A plated dish of {title.lower()} made with {', '.join(ings)}."
        (img_dir / (fname + ".caption")).write_text(caption + "\n", encoding="utf-8")
        recipe_images += 1
    for name in INGREDIENT_IMAGES:
        fname = f"{slug(name)}.jpg"
        manifest.append((name, f"images/{fname}"))
        (img_dir / fname).write_bytes(_fake_jpeg(name))
        (img_dir / (fname + ".caption")).write_text(f"Raw {name} on a cutting board.\n", encoding="utf-8")
    manifest.append(("Unknown Dish", "images/unknown.jpg"))
    with open(BUNDLE / "images.tsv", "w", encoding="utf-8") as fh:
        fh.write("# entity_name\tpath\n")
        for name, path in manifest:
            fh.write(f"{name}\t{path}\n")

    canon = sorted(used)
    expected = {
        "recipes": len(RECIPES),
        "ingredients": len(canon),
        "relations": sum(len(set(i)) for _, i, _ in RECIPES),
        "recipe_images": recipe_images,
        "ingredient_images": len(INGREDIENT_IMAGES),
        "nutrition_attached": sum(1 for n in canon if n in NUTRITION),
        "nutrition_unmatched": sorted(NUTRITION_UNMATCHED),
        "rejects": 2,
        "ingredients_by_recipe": {t: sorted(set(i)) for t, i, _ in RECIPES},
        "nutrition": {n: list(NUTRITION[n]) for n in canon if n in NUTRITION},
    }
    (BUNDLE / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")
    (BUNDLE / "queries.jsonl").write_text(_queries(), encoding="utf-8")
    return expected


def _queries() -> str:
    """Routing queries: half name an indexed dish, half describe dishes not in the graph."""
    lines = []
    for title, ings, _ in RECIPES[:10]:
        if title in MISSING_IMAGE or title in NO_IMAGE:
            continue
        lines.append({"question": f"What does {title} look like?",
                      "answer": f"A plated dish of {title.lower()} made with {', '.join(ings)}."})
    for dish in ["sushi platter", "beef wellington", "ramen bowl", "paella", "apple strudel",
                 "pad thai", "croissant", "falafel wrap"]:
        lines.append({"question": f"What does {dish} look like?",
                      "answer": f"A serving of {dish} freshly prepared."})
    return "".join(json.dumps(x, sort_keys=True) + "\n" for x in lines)


# -- mismatch fixture ------------------------------------------------------------

MISMATCH = HERE / "mismatch"
MISMATCH_TOTAL = 1000
MISMATCH_PLANTED = 352

# vocabulary shares no token with any recipe title, ingredient or caption word
UNRELATED = [
    "vintage bicycle parked beside brick wall",
    "snowy mountain ridge under clear sky",
    "sailboat drifting across calm harbor",
    "child flying kite over windy meadow",
    "old typewriter resting near stack newspapers",
    "subway train arriving busy platform",
    "lighthouse standing tall during stormy night",
    "golden retriever chasing tennis ball",
    "rusty anchor lying beach sand",
    "violin case open wooden floor",
    "hot air balloon rising above valley",
    "stone bridge crossing narrow river",
]


def make_mismatch() -> dict:
    """1000 text/image pairs; exactly 352 texts describe something else.

    Matched texts repeat their image's title and ingredients; planted texts
    come from ``UNRELATED`` and share no token with any image.
    """
    import random

    img_dir = MISMATCH / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    for old in img_dir.iterdir():
        old.unlink()
    food_words = set()
    images = []
    for title, ings, _ in RECIPES:
        fname = f"{slug(title)}.jpg"
        (img_dir / fname).write_bytes(_fake_jpeg(title))
        caption = f"{title}, made with {', '.join(ings)}"
        (img_dir / (fname + ".caption")).write_text(caption + "\n", encoding="utf-8")
        images.append((fname, title, ings))
        food_words |= set(re.findall(r"[a-z0-9]+", (slug(title) + " " + caption).lower()))
    for text in UNRELATED:
        assert not set(text.split()) & food_words, text
    rng = random.Random(352)
    planted = set(rng.sample(range(MISMATCH_TOTAL), MISMATCH_PLANTED))
    lines = []
    for i in range(MISMATCH_TOTAL):
        fname, title, ings = images[i % len(images)]
        if i in planted:
            text = UNRELATED[i % len(UNRELATED)]
        else:
            text = f"{title} with {', '.join(ings[:3])}"
        lines.append({"text": text, "image": f"images/{fname}"})
    (MISMATCH / "pairs.jsonl").write_text(
        "".join(json.dumps(x, sort_keys=True) + "\n" for x in lines), encoding="utf-8")
    expected = {"total": MISMATCH_TOTAL, "planted": sorted(planted), "threshold": 0.5}
    (MISMATCH / "expected.json").write_text(json.dumps(expected) + "\n", encoding="utf-8")
    return expected


# -- hallucination fixture ----------------------------------------------------------

HALLUC = HERE / "hallucination"

# (questions with ground-truth answers, answers read off the generated image)
_FAITHFUL = [
    ("What dish is shown?", "Tomato basil bruschetta"),
    ("What is on the plate?", "Grilled salmon with asparagus"),
    ("What kind of bread is this?", "Sourdough loaf"),
    ("What fruit is visible?", "Sliced mango"),
    ("What is in the bowl?", "Creamy pumpkin soup"),
    ("What topping is on the pizza?", "Mushrooms and olives"),
    ("What drink is shown?", "Iced lemon tea"),
    ("What dessert is this?", "Chocolate lava cake"),
    ("What is served on the skewer?", "Chicken satay"),
    ("What noodles are these?", "Stir fried rice noodles"),
    ("What salad is pictured?", "Greek salad with feta"),
    ("What is in the pan?", "Scrambled eggs"),
    ("Which pastry is shown?", "Butter croissant"),
    ("What sauce is on the pasta?", "Tomato sauce"),
    ("What meat is on the grill?", "Beef steak"),
    ("What is in the glass?", "Fresh orange juice"),
]
_HALLUCINATED = [
    ("What is on the plate?", "Grilled salmon with asparagus", "A bowl of ramen"),
    ("What dessert is this?", "Strawberry cheesecake slice", "Roast turkey legs"),
    ("What is in the basket?", "Assorted dinner rolls", "Blueberries"),
]


def make_hallucination() -> dict:
    """20 ground-truth/generated image pairs for the mock vision-QA client.

    Case 01 is the fried-chicken example (answer drops a detail), cases
    02-04 answer about a different dish, the rest answer faithfully.
    """
    HALLUC.mkdir(exist_ok=True)
    gen, ans, dataset, verdicts = {}, {}, [], {}

    def add(case_id, qa, answers):
        gt, out = f"{case_id}-gt.jpg", f"{case_id}-gen.jpg"
        gen[gt] = [{"question": q, "answer": a} for q, a in qa]
        ans[out] = dict(zip((q for q, _ in qa), answers))
        dataset.append({"id": case_id, "gt_image": gt, "gen_image": out})

    add("case-01", [("What is served on the plate?", "Fried chicken and lemon wedges")], ["Fried chicken"])
    verdicts["case-01"] = "PartialMatch"
    for n, (q, truth, wrong) in enumerate(_HALLUCINATED, start=2):
        add(f"case-{n:02d}", [(q, truth)], [wrong])
        verdicts[f"case-{n:02d}"] = "Hallucination"
    for n, (q, truth) in enumerate(_FAITHFUL, start=5):
        # every third case asks two questions to vary the per-case count
        qa = [(q, truth)] + ([("Is it served hot?", "Yes")] if n % 3 == 0 else [])
        add(f"case-{n:02d}", qa, [a for _, a in qa])
        verdicts[f"case-{n:02d}"] = "Match"
    (HALLUC / "vqa.json").write_text(json.dumps({"generate": gen, "answer": ans}, indent=1, sort_keys=True) + "\n")
    (HALLUC / "dataset.jsonl").write_text("".join(json.dumps(d, sort_keys=True) + "\n" for d in dataset))
    expected = {"total": len(dataset), "hallucinations": 3, "verdicts": verdicts}
    (HALLUC / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")
    return expected


# -- diversity corpora ---------------------------------------------------------------

DIVERSITY = HERE / "diversity"

# one scaffold per template; entities fill the slot
_SCAFFOLDS = [
    "What are the main ingredients in {r}?",
    "What are the ingredients of {r}?",
    "How many ingredients does {r} need?",
    "What does {r} look like?",
]
# paraphrase families, each with its own wording
_PARAPHRASES = [
    ["Can I substitute {i} in this recipe?", "Is there a swap for {i} here?", "What replaces {i} if I run out?"],
    ["How long does {i} keep in the fridge?", "Best way to store leftover {i}?", "Does {i} freeze well?"],
    ["Is {i} good for weight loss?", "Does {i} pack much protein?", "Is {i} heavy on calories?"],
    ["Show me a photo of plated {r}.", "Picture of finished {r} please.", "Image of {r} served up?"],
    ["Which wine pairs nicely with {r}?", "Suggest a drink alongside {r}.", "What beverage suits {r}?"],
    ["Can kids help cook {r}?", "Is {r} easy for beginner cooks?", "Could a novice make {r}?"],
    ["Is {r} gluten free?", "Does {r} suit a celiac guest?", "Any wheat hidden inside {r}?"],
    ["What side goes with {r}?", "Recommend an accompaniment for {r}.", "Serve {r} alongside what?"],
]


def make_diversity() -> dict:
    """Template-only and paraphrase-augmented question corpora of equal size."""
    import random

    DIVERSITY.mkdir(exist_ok=True)
    rng = random.Random(5)
    titles = [t for t, _, _ in RECIPES]
    ings = sorted({i for _, xs, _ in RECIPES for i in xs})
    template = []
    for scaffold in _SCAFFOLDS:
        for t in titles[:40]:
            template.append(scaffold.format(r=t))
    augmented = []
    per_family = len(template) // len(_PARAPHRASES)
    for family in _PARAPHRASES:
        for n in range(per_family):
            phr = family[n % len(family)]
            augmented.append(phr.format(r=rng.choice(titles), i=rng.choice(ings)))

    def dump(name, questions, source):
        rows = [{"question": q, "answer": "-", "source": source} for q in questions]
        (DIVERSITY / name).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))

    dump("template.jsonl", template, "Template")
    dump("augmented.jsonl", augmented, "Augmented")
    return {"template": len(template), "augmented": len(augmented)}


# -- augmented ingest fixture -----------------------------------------------------------


def make_augmented() -> None:
    rows = [
        {"question": "Can I substitute shallots in this recipe?", "answer": "Yes, use onion.",
         "entities": ["R:1", "I:2"]},
        {"question": "Which cheese suits a chicken burger?", "answer": "cheese", "entities": ["R:2"]},
        {"question": "Is bulgur salad filling?", "answer": "Yes, bulgur is rich in fibre.", "entities": ["R:3"]},
        {"question": "What gives pesto its colour?", "answer": "basil", "entities": ["R:4", "I:999"]},
        {"question": "How do I keep bruschetta crisp?", "answer": "Top the bread just before serving."},
    ]
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    (HERE / "augmented.jsonl").write_text(text, encoding="utf-8")



if __name__ == "__main__":
    exp = make_bundle()
    print({k: v for k, v in exp.items() if not isinstance(v, dict)})
    print({"mismatch_planted": len(make_mismatch()["planted"])})
    print(make_hallucination()["total"], make_diversity())
    make_augmented()
