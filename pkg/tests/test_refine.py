import copy
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmkgqa.embeddings import HashingEmbedder, embed_texts
from mmkgqa.errors import ParseError, ValidationError
from mmkgqa.qa import QAPair, Source
from mmkgqa.refine import (
    RefineConfig, apply_curation, balance, dedupe_exact, dedupe_semantic, normalize_text,
    parse_blocklist, refine,
)

from oracles import greedy_dedupe_ref


def qa(q, a="x", tid="T01"):
    return QAPair(q, a, tid)


def test_normalize_text():
    assert normalize_text("  What IS  in Soup?! ") == "what is in soup"
    assert normalize_text("ﬁne") == "fine"


def test_dedupe_exact():
    corpus = [qa("What is in soup?"), qa("what is in   SOUP"), qa("What is in stew?"), qa("What is in soup?", "y")]
    out = dedupe_exact(corpus)
    assert [p.question for p in out] == ["What is in soup?", "What is in stew?", "What is in soup?"]
    assert out[0] is corpus[0]
    assert dedupe_exact(out) == out
    unique = [qa("a"), qa("b")]
    assert dedupe_exact(unique) == unique
    assert len(dedupe_exact(unique + [qa("a")])) == 2


def test_dedupe_semantic_basics(embedder):
    assert len(dedupe_semantic([qa("same"), qa("same")], embedder, 0.99)) == 1
    assert dedupe_semantic([], embedder, 0.5) == []
    for bad in (0.0, 1.0, 1.0 + 1e-9, -0.1):
        with pytest.raises(ValidationError):
            dedupe_semantic([qa("a")], embedder, bad)


def planted_corpus(seed=11):
    rng = random.Random(seed)
    words = "salt pepper basil tomato rice oil lime mint egg flour peas kale tofu corn".split()
    base = [" ".join(rng.sample(words, 5)) for _ in range(40)]
    out = []
    for q in base:
        out.append(qa(q))
        if rng.random() < 0.5:
            toks = q.split()
            toks[rng.randrange(5)] = rng.choice(words)
            out.append(qa(" ".join(toks) + " today"))
    return out


@pytest.mark.parametrize("threshold", [0.5, 0.8, 0.9, 0.95])
def test_dedupe_semantic_matches_greedy_oracle(embedder, backend, threshold):
    corpus = planted_corpus()
    V = embed_texts(embedder, [p.question for p in corpus])
    kept = dedupe_semantic(corpus, embedder, threshold)
    assert [corpus.index(p) for p in kept] == greedy_dedupe_ref(V, threshold)
    W = embed_texts(embedder, [p.question for p in kept])
    sims = W @ W.T - np.eye(len(kept)) * 2
    assert (sims < threshold).all()
    assert dedupe_semantic(kept, embedder, threshold) == kept


def test_balance_cap_above_sizes_is_identity(embedder):
    corpus = planted_corpus()
    assert balance(corpus, embedder, k=4, per_cluster_cap=len(corpus)) == corpus


def test_balance_global_cap_with_one_cluster(embedder):
    corpus = planted_corpus()
    assert balance(corpus, embedder, k=1, per_cluster_cap=7) == corpus[:7]


def test_balance_dominant_cluster():
    e = HashingEmbedder(baseline=0.0)
    big = [qa(f"what is in the chicken soup variant {w}") for w in "abcdefghijklmnopqrst"]
    small = [qa("how long to store basil"), qa("how long to store basil leaves"), qa("how long to store fresh basil")]
    corpus = big[:10] + small + big[10:]
    out = balance(corpus, e, k=2, per_cluster_cap=5)
    assert out == big[:5] + small
    assert balance(out, e, k=2, per_cluster_cap=5) == out


def test_balance_validation(embedder):
    with pytest.raises(ValidationError):
        balance([qa("a")], embedder, k=0)
    with pytest.raises(ValidationError):
        balance([qa("a")], embedder, per_cluster_cap=0)
    assert balance([], embedder) == []


def test_curation(tmp_path):
    corpus = [qa(q) for q in ("Is tofu vegan?", "Is kale vegan?", "Is egg vegan?", "What is in soup?")]
    assert apply_curation(corpus, []) == (corpus, [])
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n\n")
    assert apply_curation(corpus, empty)[0] == corpus

    ids = tmp_path / "ids.txt"
    ids.write_text(f"id:{corpus[0].id}\nid:{corpus[3].id}\nid:nope\n")
    kept, log = apply_curation(corpus, ids)
    assert kept == corpus[1:3]
    assert [r["id"] for r in log] == [corpus[0].id, corpus[3].id]

    pat = tmp_path / "pat.txt"
    pat.write_text("re:vegan\\?$\n")
    kept, log = apply_curation(corpus, str(pat))
    oracle = [p for p in corpus if not p.question.endswith("vegan?")]
    assert kept == oracle and len(log) == 3
    assert log[0] == {"id": corpus[0].id, "question": "Is tofu vegan?", "rule": "re:vegan\\?$"}
    assert apply_curation(kept, str(pat))[0] == kept


@pytest.mark.parametrize("text", ["vegan", "id:", "xx:abc", "re:("])
def test_blocklist_parse_errors(text):
    with pytest.raises(ParseError) as err:
        parse_blocklist("# header\n" + text, "b.txt")
    assert err.value.line == 2


def test_refine_pipeline_report(embedder, tmp_path):
    corpus = planted_corpus()
    aug = [QAPair(corpus[0].question, corpus[0].answer, source=Source.AUGMENTED), qa("brand new question here")]
    block = tmp_path / "b.txt"
    block.write_text("re:^brand\n")
    snapshot = copy.deepcopy(corpus)
    out, rep = refine(corpus, embedder, RefineConfig(0.9, k=3, per_cluster_cap=100), block, aug)
    assert corpus == snapshot
    assert rep["input"] == len(corpus) + 2
    assert rep["exact_removed"] == 1 and rep["balance_removed"] == 0
    assert rep["input"] - rep["exact_removed"] - rep["semantic_removed"] - rep["balance_removed"] \
        - rep["curation_removed"] == rep["output"] == len(out)
    assert [r["question"] for r in rep["curation_log"]] == ["brand new question here"]
    again, rep2 = refine(out, embedder, RefineConfig(0.9, k=3, per_cluster_cap=100), block)
    assert again == out and rep2["output"] == rep["output"]
    capped, rep3 = refine(corpus, embedder, RefineConfig(0.9, k=3, per_cluster_cap=10))
    assert rep3["balance_removed"] > 0 and len(capped) <= 30


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["Is tofu vegan?", "is TOFU vegan", "What is kale?", "what is rice",
                                 "Store basil how?", "store basil how"]), max_size=12))
def test_refinement_is_idempotent_subsequence(qs):
    e = HashingEmbedder()
    corpus = [qa(q) for q in qs]
    once = dedupe_semantic(dedupe_exact(corpus), e, 0.9)
    assert dedupe_semantic(dedupe_exact(once), e, 0.9) == once
    it = iter(corpus)
    assert all(any(p is c for c in it) for p in once)
