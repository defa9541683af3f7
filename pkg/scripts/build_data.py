"""Regenerate the lexicon data shipped in ``hashtag_dynamics/data``.

Usage::

    python scripts/build_data.py --wordnet-dir /path/to/wordnet-3.0 \
        --udhr-dir /path/to/udhr/declaration

The WordNet subset keeps every synset of a frequent-word vocabulary (SemCor
counts from ``cntlist.rev`` plus a list of words common in microblog text),
the nouns those synsets link to by derivation, and the full hypernym closure.
Synset offsets are rewritten so the output is a valid WordNet database.

Language corpora are plain-text extracts of the Universal Declaration of
Human Rights; profiles are trained from them with ``textcat.build_profile``.
"""

import argparse
import html
import re
import sys
from collections import Counter, defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hashtag_dynamics.lexicon import textcat  # noqa: E402

POS_FILES = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}
MIN_SEMCOR_COUNT = 10

EXTRA_WORDS = """
party festival concert celebration ceremony parade holiday wedding birthday
anniversary show premiere release launch event match game tournament final
championship race season episode series award awards oscar oscars prize
winner nominee vote election campaign debate speech address president senate
congress government protest rally march strike shooting attack crash accident
earthquake fire flood storm hurricane outbreak flu virus pandemic disease
hospital emergency victim police school news report story headline media
radio television tv channel broadcast stream video movie film cinema theater
music song album band singer dance art book author poem photo picture camera
phone mobile app apps software computer internet web site blog post tweet
twitter message email account login password sign signup register download
upload update version beta bug outage error server network service google
free deal sale offer discount coupon price cost money dollar contest giveaway
win prize ticket tickets code link click follow follower friend fan fans
people crowd audience community team player coach captain goal score point
league club stadium golf tennis soccer football baseball basketball hockey
olympics medal record day night week weekend month year today tonight
tomorrow yesterday morning evening hour minute time date calendar schedule
countdown deadline moment christmas easter halloween valentine thanksgiving
spring summer autumn winter sunday monday tuesday wednesday thursday friday
saturday january february march april may june july august september
october november december love hate hope fear joy fun happy sad angry excited
proud sorry thanks thank congratulations luck wish prayer peace war soldier
army earth planet climate energy light power water food drink coffee beer
wine dinner lunch breakfast pizza chocolate cake candy gift present card
flower tree garden city town country world nation flag symbol sign evidence
proof trial court judge law crime charge arrest jail bank market economy
stock business company brand product customer marketing advertising ad
promotion publicity sponsor idea question answer problem solution reason
truth fact rumor secret mystery watch read write listen talk tell share
join help support start stop finish end begin open close buy sell pay save
lose miss wait need want like enjoy celebrate remember forget believe
""".split()

UDHR_LANGUAGES = {
    "afrikaans": "afr", "albanian": "als", "asturian": "ast", "basque": "eus",
    "breton": "bre", "catalan": "cat", "corsican": "cos", "croatian": "hrv",
    "czech": "ces", "danish": "dan", "dutch": "nld", "english": "eng",
    "esperanto": "epo", "estonian": None, "faroese": "fao", "finnish": "fin",
    "french": "fra", "friulian": "fur", "frisian": "fri", "galician": "glg",
    "german": "deu_1996", "greek": "ell_monotonic", "hungarian": "hun",
    "icelandic": "isl", "indonesian": "ind", "irish": "gle", "italian": "ita",
    "javanese": "jav", "ladin": "lld", "ladino": "lad", "latin": "lat",
    "latvian": "lav", "ligurian": "lij", "lithuanian": "lit",
    "luxembourgish": "ltz", "maltese": "mlt", "norwegian": "nob",
    "occitan": "prv", "picard": "pcd", "polish": "pol", "portuguese": "por_PT",
    "romanian": "ron_2006", "romansh": "roh", "russian": "rus",
    "sardinian": "src", "scottish_gaelic": "gla",
    "slovak": "slk", "slovenian": "slv", "spanish": "spa", "swahili": "swh",
    "swedish": "swe", "tagalog": "tgl", "turkish": "tur", "venetian": "vec",
    "vietnamese": "vie", "walloon": "wln", "welsh": "cym",
}

# Scots is left out: its UDHR text shares so much vocabulary with the English
# one that its profile outranks English on ordinary English tweets.

LICENSE_HEADER = [
    "  WordNet Release 3.0 (subset) This software and database is being provided to",
    "  you, the LICENSEE, by Princeton University under the following license.",
    "  See the LICENSE file in this directory for the full terms.",
]


def content_lines(path):
    for line in open(path, encoding="utf-8"):
        if line.startswith("  ") or not line.strip():
            continue
        yield line.rstrip("\n")


def semcor_vocabulary(wn_dir):
    counts = Counter()
    for line in content_lines(wn_dir / "cntlist.rev"):
        key, _, cnt = line.split()
        counts[key.split("%")[0]] += int(cnt)
    return {w for w, c in counts.items() if c >= MIN_SEMCOR_COUNT}


def read_index(path):
    entries = {}
    for line in content_lines(path):
        tok = line.split()
        lemma, synset_cnt, p_cnt = tok[0], int(tok[2]), int(tok[3])
        tagsense = int(tok[5 + p_cnt])
        offsets = [int(x) for x in tok[6 + p_cnt: 6 + p_cnt + synset_cnt]]
        entries[lemma] = (offsets, tagsense)
    return entries


def split_data_line(line):
    """Return (offset, head tokens, pointers, tail tokens, gloss)."""
    fields, _, gloss = line.partition("|")
    tok = fields.split()
    w_cnt = int(tok[3], 16)
    i = 4 + 2 * w_cnt
    head = tok[1:i]
    p_cnt = int(tok[i])
    i += 1
    pointers = [tok[i + 4 * k: i + 4 * k + 4] for k in range(p_cnt)]
    tail = tok[i + 4 * p_cnt:]
    return int(tok[0]), head, pointers, tail, gloss.strip()


def build_wordnet_subset(wn_dir, out_dir, vocabulary):
    index = {pos: read_index(wn_dir / f"index.{name}") for pos, name in POS_FILES.items()}
    data = {}
    for pos, name in POS_FILES.items():
        data[pos] = {}
        for line in content_lines(wn_dir / f"data.{name}"):
            off, head, ptrs, tail, gloss = split_data_line(line)
            data[pos][off] = (head, ptrs, tail, gloss)

    keep = set()
    for pos in POS_FILES:
        for lemma in vocabulary:
            for off in index[pos].get(lemma, ([], 0))[0]:
                keep.add((pos, off))

    def ptr_pos(p):
        return "a" if p == "s" else p

    # derivationally linked nouns of kept non-noun synsets
    for pos, off in list(keep):
        if pos == "n":
            continue
        for sym, toff, tpos, _ in data[pos][off][1]:
            if sym == "+" and ptr_pos(tpos) == "n":
                keep.add(("n", int(toff)))

    stack = list(keep)
    while stack:
        pos, off = stack.pop()
        for sym, toff, tpos, _ in data[pos][off][1]:
            if sym in ("@", "@i"):
                tgt = (ptr_pos(tpos), int(toff))
                if tgt not in keep:
                    keep.add(tgt)
                    stack.append(tgt)

    new_offset = {}
    out_dir.mkdir(parents=True, exist_ok=True)
    header = "\n".join(LICENSE_HEADER) + "\n"
    for pos, name in POS_FILES.items():
        offsets = sorted(off for p, off in keep if p == pos)
        pos_at = len(header.encode("utf-8"))
        lines = []
        for off in offsets:
            head, ptrs, tail, gloss = data[pos][off]
            kept_ptrs = [p for p in ptrs if (ptr_pos(p[2]), int(p[1])) in keep]
            lines.append((off, head, kept_ptrs, tail, gloss))
            new_offset[(pos, off)] = pos_at
            text = format_data_line(0, head, kept_ptrs, tail, gloss, {}, placeholder=True)
            pos_at += len(text.encode("utf-8"))
        data[pos]["_lines"] = lines

    for pos, name in POS_FILES.items():
        with open(out_dir / f"data.{name}", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header)
            for off, head, ptrs, tail, gloss in data[pos]["_lines"]:
                fh.write(format_data_line(new_offset[(pos, off)], head, ptrs, tail, gloss, new_offset))

    # index files list every lemma of every kept synset
    lemma_synsets = defaultdict(set)
    for pos, off in keep:
        head = data[pos][off][0]
        w_cnt = int(head[2], 16)
        for k in range(w_cnt):
            word = re.sub(r"\(.*\)$", "", head[3 + 2 * k]).lower()
            lemma_synsets[(word, pos)].add(off)

    for pos, name in POS_FILES.items():
        rows = []
        for (lemma, p), offs in lemma_synsets.items():
            if p != pos:
                continue
            orig_offsets, tagsense = index[pos].get(lemma, ([], 0))
            ordered = [o for o in orig_offsets if o in offs]
            if not ordered:
                continue
            tagged = sum(1 for o in orig_offsets[:tagsense] if o in offs)
            symbols = sorted({ptr[0] for o in ordered for ptr in data[pos][o][1]
                              if (ptr_pos(ptr[2]), int(ptr[1])) in keep})
            parts = [lemma, pos, str(len(ordered)), str(len(symbols)), *symbols,
                     str(len(ordered)), str(tagged)]
            parts += [f"{new_offset[(pos, o)]:08d}" for o in ordered]
            rows.append(" ".join(parts) + "  \n")
        rows.sort()
        with open(out_dir / f"index.{name}", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header)
            fh.writelines(rows)

        exc_rows = []
        for line in content_lines(wn_dir / f"{name}.exc"):
            tok = line.split()
            if any((b, pos) in lemma_synsets for b in tok[1:]):
                exc_rows.append(line.strip() + "\n")
        with open(out_dir / f"{name}.exc", "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(exc_rows)

    (out_dir / "LICENSE").write_text((wn_dir / "LICENSE").read_text(encoding="utf-8"), encoding="utf-8")
    counts = Counter(p for p, _ in keep)
    print(f"wordnet subset: {dict(counts)} synsets, {len(lemma_synsets)} lemma/pos pairs")


def format_data_line(offset, head, ptrs, tail, gloss, new_offset, placeholder=False):
    parts = [f"{offset:08d}", *head, f"{len(ptrs):03d}"]
    for sym, toff, tpos, st in ptrs:
        p = "a" if tpos == "s" else tpos
        tgt = 0 if placeholder else new_offset[(p, int(toff))]
        parts += [sym, f"{tgt:08d}", tpos, st]
    parts += tail
    return " ".join(parts) + " | " + gloss + "  \n"


def udhr_text(path):
    raw = path.read_text(encoding="utf-8")
    body = raw.split("<body>", 1)[-1]
    paras = re.findall(r"<(?:p|li|h\d)[^>]*>(.*?)</(?:p|li|h\d)>", body, flags=re.S)
    text = "\n".join(html.unescape(re.sub(r"<[^>]+>", "", p)).strip() for p in paras)
    return re.sub(r"[ \t]+", " ", text).strip() + "\n"


def build_language_data(udhr_dir, out_dir):
    corp_dir = out_dir / "corpora"
    prof_dir = out_dir / "profiles"
    corp_dir.mkdir(parents=True, exist_ok=True)
    prof_dir.mkdir(parents=True, exist_ok=True)
    n = 0
    for language, code in sorted(UDHR_LANGUAGES.items()):
        if code is None or not (udhr_dir / f"{code}.html").exists():
            continue
        text = udhr_text(udhr_dir / f"{code}.html")
        (corp_dir / f"{language}.txt").write_text(text, encoding="utf-8")
        textcat.write_profile(textcat.build_profile(language, text), prof_dir / f"{language}.txt")
        n += 1
    print(f"language profiles: {n}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wordnet-dir", type=Path, required=True)
    ap.add_argument("--udhr-dir", type=Path, required=True)
    ap.add_argument("--out", type=Path,
                    default=Path(__file__).resolve().parents[1] / "src" / "hashtag_dynamics" / "data")
    args = ap.parse_args(argv)
    vocab = semcor_vocabulary(args.wordnet_dir) | set(EXTRA_WORDS)
    build_wordnet_subset(args.wordnet_dir, args.out / "wordnet", vocab)
    build_language_data(args.udhr_dir, args.out)


if __name__ == "__main__":
    main()
