import random
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hashtag_dynamics.lexicon import (ConceptVector, Grounder, build_profile, class_fingerprint,
                                      concept_counts, identify_language, porter_stem, preprocess,
                                      rollup_depth4, select_top_concepts, top_words)
from hashtag_dynamics.lexicon.semantics import default_profiles
from hashtag_dynamics.lexicon.wordnet import Taxonomy, TaxonomyError, parse_data_line
from oracles import PathOracle

DATA = Path(__file__).parent / "data"


# -- preprocessing -----------------------------------------------------------

def test_preprocess_examples():
    assert preprocess("RT @bob check http://x.io #oscars tonight") == ["check", "tonight"]
    assert preprocess("@a @b #c") == []
    assert preprocess("The the THE") == []
    assert preprocess("see www.example.com/now, great-show!") == ["see", "great", "show"]


@given(st.text())
def test_preprocess_idempotent(text):
    once = preprocess(text)
    assert preprocess(" ".join(once)) == once


# -- stemming ----------------------------------------------------------------

@pytest.mark.parametrize("word,stem", [
    ("caresses", "caress"), ("ponies", "poni"), ("sky", "sky"), ("relational", "relat"),
    ("hopping", "hop"), ("generalizations", "gener"), ("controll", "control"), ("is", "is"),
])
def test_porter_examples(word, stem):
    assert porter_stem(word) == stem


# -- lemmatization and lookup ---------------------------------------------------

@pytest.mark.parametrize("word,pos,lemmas", [
    ("children", "noun", ["child"]),
    ("dogs", "n", ["dog"]),
    ("dog", "n", ["dog"]),
    ("running", "verb", ["run"]),
    ("zzzqx", "n", []),
])
def test_lemmatize(taxonomy, word, pos, lemmas):
    assert taxonomy.lemmatize(word, pos) == lemmas


def test_grounding(taxonomy):
    g = Grounder(taxonomy, default_profiles())
    assert [taxonomy.name(k) for k in g.ground("love movies")] == ["love.n.01", "movie.n.01"]
    assert g.ground("the and of") == []
    assert g.ground("el perro come la comida en la casa con mis amigos") == []


# -- language identification -------------------------------------------------------

def test_english_paragraph_ranks_first():
    text = ("The committee met on Tuesday afternoon to discuss the new budget for the city "
            "library, and after a long debate the members agreed that the reading rooms should "
            "stay open later during the winter months.")
    assert len(text) >= 200
    assert identify_language(text, default_profiles())[0][0] == "english"


def test_self_match_and_order_invariance():
    profiles = default_profiles()
    corpus = (Path(__file__).parents[1] / "src/hashtag_dynamics/data/corpora/german.txt").read_text(encoding="utf-8")
    ranking = identify_language(corpus, profiles)
    assert ranking[0][0] == "german"
    shuffled = list(profiles.values())
    random.Random(3).shuffle(shuffled)
    assert identify_language("bonjour tout le monde", shuffled) == \
        identify_language("bonjour tout le monde", profiles)


def test_tie_break_by_name():
    a = build_profile("zulu", "q")
    b = build_profile("alpha", "q")
    assert [lang for lang, _ in identify_language("q", [a, b])] == ["alpha", "zulu"]
    with pytest.raises(ValueError):
        identify_language("1234 @x #y", [a])
    with pytest.raises(ValueError):
        identify_language("text", [])


# -- taxonomy -------------------------------------------------------------------

def test_root_and_reachability(taxonomy):
    assert taxonomy.name(taxonomy.root) == "entity.n.01"
    assert taxonomy.depth[taxonomy.root] == 0
    assert all(k in taxonomy.depth for k in taxonomy.noun_synsets())
    assert rollup_depth4(taxonomy.root, taxonomy) == frozenset()


def test_rollup_of_depth4_synset_is_itself(taxonomy):
    k = next(k for k in taxonomy.noun_synsets() if taxonomy.depth[k] == 4)
    assert rollup_depth4(k, taxonomy) == {k}


def test_dog_rollup_against_path_oracle(taxonomy):
    oracle = PathOracle(taxonomy.parents, taxonomy.root)
    dog = taxonomy.lookup("dog", "n")[0]
    assert rollup_depth4(dog, taxonomy) == oracle.rollup(dog)
    assert taxonomy.depth[dog] == oracle.depth(dog)


def test_rollup_unknown_synset(taxonomy):
    with pytest.raises(KeyError):
        taxonomy.rollup(("n", 999999999))


def _line(offset, word, pointers=()):
    ptr = " ".join(f"@ {t:08d} n 0000" for t in pointers)
    return f"{offset:08d} 03 n 01 {word} 0 {len(pointers):03d} {ptr} | gloss"


def test_virtual_root_and_cycle_detection():
    a = parse_data_line(_line(1, "alpha"), "n")
    b = parse_data_line(_line(2, "beta"), "n")
    c = parse_data_line(_line(3, "gamma", [1]), "n")
    tx = Taxonomy({s.key: s for s in (a, b, c)}, {}, {})
    assert tx.root == ("n", 0)
    assert tx.depth[c.key] == 2
    x = parse_data_line(_line(1, "x", [2]), "n")
    y = parse_data_line(_line(2, "y", [1]), "n")
    z = parse_data_line(_line(3, "z"), "n")
    with pytest.raises(TaxonomyError):
        Taxonomy({s.key: s for s in (x, y, z)}, {}, {})


# -- concepts and fingerprints ----------------------------------------------------

def test_concept_counts_and_vectors(taxonomy):
    dog = taxonomy.lookup("dog", "n")[0]
    counts = concept_counts([[dog], [dog, dog]], taxonomy)
    assert set(counts.values()) == {3}
    v = ConceptVector.from_counts("h", {"a": 3, "b": 1})
    assert sum(v.frequencies.values()) == pytest.approx(1.0)
    assert ConceptVector.from_counts("h", {"a": 3}, ["b"]).frequencies == {}


def test_select_top_concepts():
    counts = {"h1": {"a": 10, "b": 9}, "h2": {"c": 8, "d": 8, "e": 1}}
    chosen, short = select_top_concepts(counts, k=3)
    assert chosen == ["a", "b", "c"] and not short
    chosen, short = select_top_concepts({"h": {"only": 2}}, k=15)
    assert chosen == ["only"] and short


def test_class_fingerprint_means():
    concepts = ["a", "b"]
    vecs = {"h1": ConceptVector("h1", {"a": 1.0}), "h2": ConceptVector("h2", {"a": 0.5, "b": 0.5}),
            "h3": ConceptVector("h3", {"b": 1.0})}
    fps, empty = class_fingerprint({"h1": "X", "h2": "X", "h3": "Y"}, vecs, concepts, ["X", "Y", "Z"])
    assert np.allclose(fps["X"], [0.75, 0.25])
    assert np.allclose(fps["Y"], [0.0, 1.0])
    assert empty == ["Z"] and len(fps["Z"]) == 0


def test_top_words():
    assert top_words([]) == []
    assert top_words([["a", "b", "b", "c", "c", "c"]]) == [("c", 3), ("b", 2), ("a", 1)]
    assert top_words([["z", "y"]], k=1) == [("y", 1)]
