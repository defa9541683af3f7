"""Semantic grounding of tweet text in WordNet and per-class fingerprints."""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .porter import porter_stem
from .textcat import identify_language, load_profiles
from .wordnet import Taxonomy

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_WORDNET_DIR = DATA_DIR / "wordnet"
DEFAULT_PROFILE_DIR = DATA_DIR / "profiles"
DEFAULT_STOPWORDS = DATA_DIR / "stopwords_en.txt"

POS_ORDER = ("n", "v", "a", "r")

_MENTION_RE = re.compile(r"@\w+")
_TAG_RE = re.compile(r"#\w*")
_URL_RE = re.compile(r"(?:\b[a-z][a-z0-9+.-]*://|\bwww\.)\S*", re.IGNORECASE)
_TOKEN_RE = re.compile(r"[^\W_]+")


def load_stopwords(path=None):
    path = Path(path) if path else DEFAULT_STOPWORDS
    words = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


@lru_cache(maxsize=1)
def _default_stopwords():
    return load_stopwords()


@lru_cache(maxsize=1)
def default_taxonomy():
    return Taxonomy.load(DEFAULT_WORDNET_DIR)


@lru_cache(maxsize=1)
def default_profiles():
    return load_profiles(DEFAULT_PROFILE_DIR)


def preprocess(text, stopwords=None):
    """Tokenize tweet text for lexicon lookup.

    Mentions, hashtags and URLs are removed first, then everything that is
    not a letter or digit acts as a separator.  Tokens are lowercased and
    stop words dropped.
    """
    if stopwords is None:
        stopwords = _default_stopwords()
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = _TAG_RE.sub(" ", text)
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in stopwords]


@dataclass
class Grounder:
    """Maps tweet text to WordNet synsets.

    Each token is lemmatized under every part of speech (nouns first) and the
    first sense of the first lemma found is kept.  The Porter stem is tried
    only when the raw token does not resolve.  When fewer than
    ``resolve_fraction`` of the tokens resolve, the tweet is kept only if
    English ranks within the top ``top_languages`` languages.
    """

    taxonomy: Taxonomy
    profiles: dict
    stopwords: frozenset = None
    resolve_fraction: float = 0.5
    top_languages: int = 10
    language: str = "english"
    stem_fallback: bool = True
    pos_order: tuple = POS_ORDER
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.stopwords is None:
            self.stopwords = _default_stopwords()
        if not 0.0 <= self.resolve_fraction <= 1.0:
            raise ValueError("resolve_fraction must lie in [0, 1]")

    def _first_sense(self, word):
        for pos in self.pos_order:
            for lemma in self.taxonomy.lemmatize(word, pos):
                senses = self.taxonomy.lookup(lemma, pos)
                if senses:
                    return senses[0]
        return None

    def resolve(self, token):
        try:
            return self._cache[token]
        except KeyError:
            pass
        key = self._first_sense(token)
        if key is None and self.stem_fallback:
            stem = porter_stem(token)
            if stem != token:
                key = self._first_sense(stem)
        self._cache[token] = key
        return key

    def passes_language_gate(self, text):
        try:
            ranking = identify_language(text, self.profiles)
        except ValueError:
            return False
        top = [lang for lang, _ in ranking[: self.top_languages]]
        return self.language in top

    def ground(self, text):
        tokens = preprocess(text, self.stopwords)
        if not tokens:
            return []
        keys = [self.resolve(t) for t in tokens]
        resolved = [k for k in keys if k is not None]
        if len(resolved) < self.resolve_fraction * len(tokens):
            if not self.passes_language_gate(text):
                return []
        return resolved


def ground_tweet(text, taxonomy, profiles, stopwords=None, **options):
    return Grounder(taxonomy, profiles, stopwords, **options).ground(text)


def concept_counts(synset_lists, taxonomy, depth=4):
    """Count depth-``depth`` concepts over grounded tweets.

    Every resolved token adds one to each distinct concept it rolls up to.
    """
    counts = Counter()
    for keys in synset_lists:
        for key in keys:
            for concept in taxonomy.rollup(key, depth):
                counts[concept] += 1
    return counts


@dataclass
class ConceptVector:
    hashtag: str
    frequencies: dict

    @classmethod
    def from_counts(cls, hashtag, counts, concepts=None):
        """Normalize counts, optionally restricted to ``concepts`` first."""
        if concepts is not None:
            counts = {c: counts.get(c, 0) for c in concepts}
        total = sum(counts.values())
        if total <= 0:
            return cls(hashtag, {})
        return cls(hashtag, {c: v / total for c, v in counts.items() if v > 0})

    def as_array(self, concepts):
        return np.array([self.frequencies.get(c, 0.0) for c in concepts])


def select_top_concepts(counts_by_hashtag, k=15, name=None):
    """The ``k`` concepts with the largest total count over all hashtags.

    Ties are broken by ``name(concept)`` (the concept itself by default).
    Returns ``(concepts, short)`` where ``short`` is True when fewer than
    ``k`` distinct concepts were observed.
    """
    total = Counter()
    for counts in counts_by_hashtag.values():
        total.update(counts)
    key_name = name or (lambda c: c)
    ordered = sorted(total.items(), key=lambda kv: (-kv[1], key_name(kv[0])))
    chosen = [c for c, v in ordered if v > 0][:k]
    short = len(chosen) < k
    if short:
        logger.warning("only %d concepts observed, %d requested", len(chosen), k)
    return chosen, short


def class_fingerprint(labels, vectors, concepts, classes=None):
    """Unweighted mean of member concept vectors for each class.

    ``vectors`` must already be restricted and renormalized to ``concepts``.
    Hashtags whose restricted vector is empty are left out of the mean.
    Returns ``(fingerprints, empty)``; classes without usable members map to
    an empty array and are listed in ``empty``.
    """
    if classes is None:
        classes = sorted(set(labels.values()))
    fingerprints = {}
    empty = []
    for cls in classes:
        members = [vectors[h].as_array(concepts) for h, lab in labels.items()
                   if lab == cls and h in vectors and vectors[h].frequencies]
        if not members:
            fingerprints[cls] = np.zeros(0)
            empty.append(cls)
            continue
        fingerprints[cls] = np.mean(members, axis=0)
    return fingerprints, empty


def top_words(token_lists, k=50):
    counts = Counter()
    for tokens in token_lists:
        counts.update(tokens)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[:k]
