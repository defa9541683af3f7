"""N-gram language identification with the out-of-place rank distance.

Profiles follow Cavnar & Trenkle: words are padded with ``_``, every
character n-gram with n = 1..5 is counted, and the ``N`` most frequent
n-grams are kept in rank order.  A text is compared with each language
profile by summing, over the text's own ranked n-grams, the absolute rank
difference in the language profile, or ``N`` when the n-gram is absent.
"""

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

DEFAULT_PROFILE_SIZE = 400
MAX_NGRAM = 5

_MENTION_RE = re.compile(r"@\w+")
_URL_RE = re.compile(r"(?:\b[a-z][a-z0-9+.-]*://|\bwww\.)\S*", re.IGNORECASE)
_TAG_RE = re.compile(r"#\w*")
# letters only: digits and punctuation carry no language signal
_WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)*")


@dataclass(frozen=True)
class LanguageProfile:
    language: str
    ngrams: tuple

    def __post_init__(self):
        if len(set(self.ngrams)) != len(self.ngrams):
            raise ValueError(f"profile {self.language!r} has repeated n-grams")

    @property
    def ranks(self):
        # built lazily; frozen dataclass so stash via object.__setattr__
        try:
            return self._ranks
        except AttributeError:
            ranks = {g: i for i, g in enumerate(self.ngrams)}
            object.__setattr__(self, "_ranks", ranks)
            return ranks


def _words(text):
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = _TAG_RE.sub(" ", text)
    return _WORD_RE.findall(text.lower())


def ngram_counts(text, max_n=MAX_NGRAM):
    counts = Counter()
    for word in _words(text):
        padded = f"_{word}_"
        for n in range(1, max_n + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i:i + n]
                if gram != "_":
                    counts[gram] += 1
    return counts


def rank_ngrams(counts, size=DEFAULT_PROFILE_SIZE):
    """Most frequent n-grams first; ties broken by the n-gram string."""
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(g for g, _ in ordered[:size])


def build_profile(language, text, size=DEFAULT_PROFILE_SIZE):
    counts = ngram_counts(text)
    if not counts:
        raise ValueError(f"no n-grams in training text for {language!r}")
    return LanguageProfile(language, rank_ngrams(counts, size))


def out_of_place(doc_ngrams, profile, penalty):
    ranks = profile.ranks
    total = 0
    for i, gram in enumerate(doc_ngrams):
        j = ranks.get(gram)
        total += penalty if j is None else abs(i - j)
    return total


def identify_language(text, profiles, size=DEFAULT_PROFILE_SIZE):
    """Rank languages by ascending out-of-place distance to ``text``.

    Returns a list of ``(language, distance)`` pairs.  Ties are ordered by
    language name, so the result does not depend on the order in which the
    profiles were loaded.

    Raises:
        ValueError: if no profiles are given or the text has no letters left
            after mentions, URLs and hashtags are stripped.
    """
    profiles = list(profiles.values()) if isinstance(profiles, dict) else list(profiles)
    if not profiles:
        raise ValueError("at least one language profile is required")
    counts = ngram_counts(text)
    if not counts:
        raise ValueError("text has no usable characters for language identification")
    doc = rank_ngrams(counts, size)
    scored = [(p.language, out_of_place(doc, p, size)) for p in profiles]
    scored.sort(key=lambda x: (x[1], x[0]))
    return scored


def write_profile(profile, path):
    Path(path).write_text("\n".join(profile.ngrams) + "\n", encoding="utf-8")


def read_profile(path, language=None):
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    ngrams = tuple(line for line in lines if line)
    return LanguageProfile(language or path.stem, ngrams)


def load_profiles(directory):
    """Load every ``*.txt`` profile in a directory, keyed by language name."""
    directory = Path(directory)
    profiles = {}
    for path in sorted(directory.glob("*.txt")):
        prof = read_profile(path)
        profiles[prof.language] = prof
    if not profiles:
        raise FileNotFoundError(f"no language profiles found in {directory}")
    return profiles
