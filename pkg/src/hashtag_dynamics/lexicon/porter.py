"""Porter suffix-stripping stemmer.

Follows the reference ANSI C release by Martin Porter, which is the program
that produced the published ``voc.txt``/``output.txt`` vocabulary.  That
release differs from the 1980 article in three places, all reproduced here:

* words of one or two letters are returned unchanged;
* step 2 maps ``-bli`` to ``-ble`` (the article has ``-abli`` to ``-able``);
* step 2 maps ``-logi`` to ``-log``.

Only lowercase ASCII input is meaningful; other characters are treated as
consonants, as in the reference code.
"""

from functools import lru_cache

_VOWELS = frozenset("aeiou")


def _is_consonant(word, i):
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(word, end):
    """Number of VC sequences in ``word[:end]``."""
    n = 0
    prev_vowel = False
    for i in range(end):
        cons = _is_consonant(word, i)
        if cons and prev_vowel:
            n += 1
        prev_vowel = not cons
    return n


def _has_vowel(word, end):
    return any(not _is_consonant(word, i) for i in range(end))


def _double_consonant(word, end):
    # word[end-2] == word[end-1], both consonants
    return end >= 2 and word[end - 1] == word[end - 2] and _is_consonant(word, end - 1)


def _cvc(word, end):
    i = end - 1
    if i < 2:
        return False
    if not _is_consonant(word, i) or _is_consonant(word, i - 1) or not _is_consonant(word, i - 2):
        return False
    return word[i] not in "wxy"


def _step1ab(w):
    if w.endswith("s"):
        if w.endswith("sses"):
            w = w[:-2]
        elif w.endswith("ies"):
            w = w[:-3] + "i"
        elif w[-2:-1] != "s":
            w = w[:-1]

    if w.endswith("eed"):
        if _measure(w, len(w) - 3) > 0:
            w = w[:-1]
        return w

    for suffix in ("ed", "ing"):
        if w.endswith(suffix):
            stem_end = len(w) - len(suffix)
            if not _has_vowel(w, stem_end):
                return w
            w = w[:stem_end]
            if w.endswith(("at", "bl", "iz")):
                return w + "e"
            if _double_consonant(w, len(w)):
                if w[-1] not in "lsz":
                    w = w[:-1]
            elif _measure(w, len(w)) == 1 and _cvc(w, len(w)):
                w += "e"
            return w
    return w


def _step1c(w):
    if w.endswith("y") and _has_vowel(w, len(w) - 1):
        return w[:-1] + "i"
    return w


# Rules are tried in order; the first suffix that matches is final even when
# the measure condition then blocks the replacement.
_STEP2 = (
    ("ational", "ate"), ("tional", "tion"),
    ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"),
    ("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous"),
    ("ization", "ize"), ("ation", "ate"), ("ator", "ate"),
    ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous"),
    ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
    ("logi", "log"),
)

_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""),
    ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible",
    "ant", "ement", "ment", "ent", "ion", "ou",
    "ism", "ate", "iti", "ous", "ive", "ize",
)


def _replace_first(w, rules, min_measure):
    for suffix, repl in rules:
        if w.endswith(suffix):
            stem_end = len(w) - len(suffix)
            if _measure(w, stem_end) > min_measure:
                return w[:stem_end] + repl
            return w
    return w


def _step4(w):
    for suffix in _STEP4:
        if not w.endswith(suffix):
            continue
        stem_end = len(w) - len(suffix)
        if suffix == "ion" and (stem_end == 0 or w[stem_end - 1] not in "st"):
            # "-ion" without s/t does not stop the scan, but nothing later matches
            continue
        if _measure(w, stem_end) > 1:
            return w[:stem_end]
        return w
    return w


def _step5(w):
    if w.endswith("e"):
        m = _measure(w, len(w) - 1)
        if m > 1 or (m == 1 and not _cvc(w, len(w) - 1)):
            w = w[:-1]
    if w.endswith("ll") and _measure(w, len(w)) > 1:
        w = w[:-1]
    return w


@lru_cache(maxsize=65536)
def porter_stem(word):
    """Return the Porter stem of a lowercase word.

    >>> porter_stem("caresses"), porter_stem("ponies"), porter_stem("sky")
    ('caress', 'poni', 'sky')
    """
    if len(word) <= 2:
        return word
    w = _step1ab(word)
    if len(w) > 1:
        w = _step1c(w)
        w = _replace_first(w, _STEP2, 0)
        w = _replace_first(w, _STEP3, 0)
        w = _step4(w)
        w = _step5(w)
    return w
