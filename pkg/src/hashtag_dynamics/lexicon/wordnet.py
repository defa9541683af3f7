"""Reader for WordNet 3.0 database files and the noun is-a taxonomy.

Only the parts needed for semantic grounding are modelled: synsets with their
words and pointers, the lemma index, the morphological exception lists, and
the noun hypernym DAG hung under a single "entity" root.
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

POS_FILES = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}
POS_ALIASES = {
    "n": "n", "noun": "n",
    "v": "v", "verb": "v",
    "a": "a", "s": "a", "adj": "a", "adjective": "a",
    "r": "r", "adv": "r", "adverb": "r",
}
HYPERNYM_SYMBOLS = ("@", "@i")
DERIVATION_SYMBOL = "+"

# WordNet's morphy detachment rules
_SUFFIX_RULES = {
    "n": [("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"),
          ("ches", "ch"), ("shes", "sh"), ("men", "man"), ("ies", "y")],
    "v": [("s", ""), ("ies", "y"), ("es", "e"), ("es", ""),
          ("ed", "e"), ("ed", ""), ("ing", "e"), ("ing", "")],
    "a": [("er", ""), ("est", ""), ("er", "e"), ("est", "e")],
    "r": [],
}

VIRTUAL_ROOT = ("n", 0)


class TaxonomyError(ValueError):
    """The lexicon files are malformed or violate the DAG invariants."""


@dataclass(frozen=True)
class Pointer:
    symbol: str
    pos: str
    offset: int

    @property
    def target(self):
        return (self.pos, self.offset)


@dataclass(frozen=True)
class Synset:
    pos: str
    offset: int
    ss_type: str
    lex_filenum: int
    words: tuple
    pointers: tuple
    gloss: str = ""

    @property
    def key(self):
        return (self.pos, self.offset)


def normalize_pos(pos):
    try:
        return POS_ALIASES[pos]
    except KeyError:
        raise ValueError(f"unknown part of speech {pos!r}") from None


def _strip_adj_marker(word):
    # adjective positions are marked like "galore(ip)"
    i = word.find("(")
    return word[:i] if i > 0 else word


def parse_data_line(line, file_pos):
    """Parse one synset line of a ``data.*`` file."""
    fields, _, gloss = line.partition("|")
    tok = fields.split()
    offset = int(tok[0])
    lex_filenum = int(tok[1])
    ss_type = tok[2]
    w_cnt = int(tok[3], 16)
    words = tuple(_strip_adj_marker(tok[4 + 2 * i]).lower() for i in range(w_cnt))
    i = 4 + 2 * w_cnt
    p_cnt = int(tok[i])
    i += 1
    pointers = []
    for _ in range(p_cnt):
        symbol, target_off, target_pos = tok[i], int(tok[i + 1]), tok[i + 2]
        pointers.append(Pointer(symbol, normalize_pos(target_pos), target_off))
        i += 4
    return Synset(file_pos, offset, ss_type, lex_filenum, words, tuple(pointers), gloss.strip())


def parse_index_line(line):
    tok = line.split()
    lemma = tok[0]
    synset_cnt = int(tok[2])
    p_cnt = int(tok[3])
    offsets = [int(x) for x in tok[6 + p_cnt: 6 + p_cnt + synset_cnt]]
    return lemma, offsets


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            # license header lines start with two spaces
            if line.startswith("  ") or not line.strip():
                continue
            yield line.rstrip("\n")


class Taxonomy:
    """WordNet lexicon with the noun hypernym DAG rooted at "entity".

    Every parentless noun synset is attached to the root.  When the lexicon
    already has exactly one parentless noun synset and it is lexicalised as
    ``entity`` (WordNet 2.1 and later), that synset is the root itself;
    otherwise a virtual root keyed ``("n", 0)`` is added.
    """

    def __init__(self, synsets, lemma_index, exceptions):
        self.synsets = dict(synsets)
        self.lemma_index = dict(lemma_index)
        self.exceptions = exceptions
        self._rollup_cache = {}
        self._build_dag()

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"WordNet directory not found: {directory}")
        synsets = {}
        lemma_index = {}
        exceptions = {}
        for pos, name in POS_FILES.items():
            data_path = directory / f"data.{name}"
            index_path = directory / f"index.{name}"
            if not data_path.exists() or not index_path.exists():
                if pos == "n":
                    raise FileNotFoundError(f"missing data.noun/index.noun in {directory}")
                logger.warning("no %s files in %s", name, directory)
                continue
            for line in _content_lines(data_path):
                ss = parse_data_line(line, pos)
                synsets[ss.key] = ss
            for line in _content_lines(index_path):
                lemma, offsets = parse_index_line(line)
                lemma_index[(lemma, pos)] = tuple((pos, off) for off in offsets)
            exc = {}
            exc_path = directory / f"{name}.exc"
            if exc_path.exists():
                for line in _content_lines(exc_path):
                    tok = line.split()
                    if len(tok) >= 2:
                        exc[tok[0]] = tuple(tok[1:])
            exceptions[pos] = exc
        return cls(synsets, lemma_index, exceptions)

    # -- hypernym DAG ----------------------------------------------------

    def _build_dag(self):
        parents = {}
        for key, ss in self.synsets.items():
            if ss.pos != "n":
                continue
            ps = []
            for p in ss.pointers:
                if p.symbol in HYPERNYM_SYMBOLS and p.pos == "n":
                    if p.target not in self.synsets:
                        raise TaxonomyError(f"hypernym {p.target} of {key} missing from lexicon")
                    if p.target not in ps:
                        ps.append(p.target)
            parents[key] = ps

        tops = [k for k, ps in parents.items() if not ps]
        if len(tops) == 1 and "entity" in self.synsets[tops[0]].words:
            self.root = tops[0]
        else:
            self.root = VIRTUAL_ROOT
            self.synsets[VIRTUAL_ROOT] = Synset("n", 0, "n", 3, ("entity",), (), "virtual root")
            parents[VIRTUAL_ROOT] = []
            for k in tops:
                parents[k] = [VIRTUAL_ROOT]
        self.parents = {k: tuple(v) for k, v in parents.items()}

        children = defaultdict(list)
        for k, ps in self.parents.items():
            for p in ps:
                children[p].append(k)
        self.children = {k: tuple(sorted(v)) for k, v in children.items()}

        # Kahn's algorithm doubles as the cycle check
        indeg = {k: len(ps) for k, ps in self.parents.items()}
        queue = deque(k for k, d in indeg.items() if d == 0)
        seen = 0
        while queue:
            k = queue.popleft()
            seen += 1
            for c in self.children.get(k, ()):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if seen != len(self.parents):
            raise TaxonomyError("noun hypernym graph contains a cycle")

        depth = {self.root: 0}
        queue = deque([self.root])
        while queue:
            k = queue.popleft()
            for c in self.children.get(k, ()):
                if c not in depth:
                    depth[c] = depth[k] + 1
                    queue.append(c)
        unreachable = [k for k in self.parents if k not in depth]
        if unreachable:
            raise TaxonomyError(f"{len(unreachable)} noun synsets do not reach the root")
        self.depth = depth

    def noun_synsets(self):
        return [k for k in self.parents if k != VIRTUAL_ROOT]

    # -- lookup ------------------------------------------------------------

    def lookup(self, lemma, pos):
        return self.lemma_index.get((lemma, normalize_pos(pos)), ())

    def lemmatize(self, word, pos):
        """Candidate base forms of ``word`` that exist in the lemma index.

        Exception lists are consulted first, then the word itself, then the
        suffix detachment rules.  Order is preserved, duplicates dropped.
        """
        pos = normalize_pos(pos)
        candidates = list(self.exceptions.get(pos, {}).get(word, ()))
        candidates.append(word)
        for suffix, repl in _SUFFIX_RULES[pos]:
            if word.endswith(suffix) and len(word) > len(suffix):
                candidates.append(word[: len(word) - len(suffix)] + repl)
        out = []
        for c in candidates:
            if c not in out and (c, pos) in self.lemma_index:
                out.append(c)
        return out

    def name(self, key):
        """Readable identifier such as ``social_event.n.01``."""
        ss = self.synsets[key]
        lemma = ss.words[0]
        senses = self.lemma_index.get((lemma, ss.pos), ())
        sense = senses.index(key) + 1 if key in senses else 0
        return f"{lemma}.{ss.pos}.{sense:02d}"

    # -- roll-up -----------------------------------------------------------

    def _ancestors_at(self, key, level):
        cache = self._rollup_cache.setdefault(level, {})
        hit = cache.get(key)
        if hit is not None:
            return hit
        found = set()
        if self.depth[key] == level:
            found.add(key)
        for p in self.parents[key]:
            found |= self._ancestors_at(p, level)
        result = frozenset(found)
        cache[key] = result
        return result

    def rollup(self, key, level=4):
        """Distinct ancestors (or the synset itself) at shortest-path ``level``.

        Non-noun synsets are mapped through their derivationally related noun
        synsets; without such a link they roll up to nothing.
        """
        if key not in self.synsets:
            raise KeyError(f"synset {key} not in taxonomy")
        if key[0] == "n":
            return self._ancestors_at(key, level)
        found = set()
        for p in self.synsets[key].pointers:
            if p.symbol == DERIVATION_SYMBOL and p.pos == "n" and p.target in self.parents:
                found |= self._ancestors_at(p.target, level)
        return frozenset(found)


def rollup_depth4(key, taxonomy):
    return taxonomy.rollup(key, 4)
