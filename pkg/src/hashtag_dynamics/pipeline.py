"""Staged end-to-end run: ingest, peaks, features, classify, semantics, diffusion.

Each stage reads the files written by earlier stages and writes its own
into the output directory, so any stage can be rerun on its own.  A
``manifest.json`` records parameters and content digests; it carries no
timestamps or absolute paths, so two runs over the same inputs with the
same seed produce identical manifests.
"""

import csv
import dataclasses
import hashlib
import json
import logging
import zlib
from collections import Counter, defaultdict
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .diffusion import (AdoptionLog, class_summary, estimate, quartile_rows, read_edges_csv,
                        write_estimates, write_summary)
from .errors import DataError, InvariantError
from .features import (compute_triple, min_peak_fraction, read_features, simplex_coordinates,
                       write_features)
from .ingest import (SECONDS_PER_DAY, build_daily_series, day_start, filter_popular, occurrences,
                     read_series, read_tweets, tweets_by_hashtag, write_series)
from .lexicon import (ConceptVector, Grounder, Taxonomy, class_fingerprint, concept_counts,
                      default_profiles, default_taxonomy, load_profiles, load_stopwords,
                      preprocess, select_top_concepts, top_words)
from .mixture import (ClassLabel, LabelRule, bic, classify_points, cross_validate,
                      label_components, read_assignments, select_model,
                      write_assignments, write_model)
from .peaks import PeakParams, find_peak, read_peaks, write_peaks

logger = logging.getLogger(__name__)

STAGES = ("ingest", "peaks", "features", "classify", "semantics", "diffusion")
CLASS_ORDER = [str(c) for c in (ClassLabel.BEFORE, ClassLabel.AFTER, ClassLabel.SYMMETRIC,
                                ClassLabel.PEAK_DAY)]


@dataclass
class PipelineConfig:
    tweets: Optional[str] = None
    graph: Optional[str] = None
    out_dir: str = "out"
    start: Optional[str] = None
    window_days: Optional[int] = None
    min_users: int = 500
    L: int = 30
    n_min: float = 10
    p_t: float = 10
    isolation_days: int = 7
    half_span: int = 7
    edges: str = "strict"
    kmin: int = 1
    kmax: int = 8
    restarts: int = 20
    cv_folds: int = 10
    cv_restarts: int = 5
    tol: float = 1e-6
    peak_sum: float = 0.25
    ratio: float = 2.0
    seed: int = 0
    depth: int = 4
    top_k: int = 15
    top_words: int = 50
    resolve_fraction: float = 0.5
    top_languages: int = 10
    wordnet_dir: Optional[str] = None
    profile_dir: Optional[str] = None
    stopwords: Optional[str] = None
    attribution: str = "all"

    def __post_init__(self):
        PeakParams(self.L, self.n_min, self.p_t, self.isolation_days)
        if self.edges not in ("strict", "truncated"):
            raise ValueError("edges must be 'strict' or 'truncated'")
        if not 1 <= self.kmin <= self.kmax:
            raise ValueError("need 1 <= kmin <= kmax")
        if self.restarts < 1 or self.cv_restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.cv_folds < 2 and self.cv_folds != 0:
            raise ValueError("cv_folds must be >= 2, or 0 to skip cross-validation")
        if self.min_users < 1 or self.top_k < 1 or self.half_span < 1:
            raise ValueError("min_users, top_k and half_span must be positive")
        if self.attribution not in ("all", "first"):
            raise ValueError("attribution must be 'all' or 'first'")

    @property
    def peak_params(self):
        return PeakParams(self.L, self.n_min, self.p_t, self.isolation_days)

    @classmethod
    def from_mapping(cls, values):
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise ValueError(f"unknown configuration key {key!r}")
            kwargs[key] = _coerce(known[key], raw)
        return cls(**kwargs)

    def replace(self, **changes):
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def parameters(self):
        """Settings that shape the results (paths reduced to file names)."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "out_dir":
                continue
            if f.name in ("tweets", "graph", "wordnet_dir", "profile_dir", "stopwords") and v:
                v = Path(v).name
            out[f.name] = v
        return out


def _coerce(f, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    kind = str(f.type)  # e.g. "<class 'int'>" or "typing.Optional[int]"
    if raw.lower() in ("", "none") and "Optional" in kind:
        return None
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def read_config(path):
    """Parse a ``key = value`` text file; ``#`` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path, **overrides):
    cfg = PipelineConfig.from_mapping(read_config(path)) if path else PipelineConfig()
    return cfg.replace(**overrides)


def stage_seed(seed, stage):
    """Independent integer seed for one stage, derived from the run seed."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(stage.encode())])
    return int(ss.generate_state(1)[0])


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt(x):
    return repr(float(x))


# --------------------------------------------------------------------- stages

def run_ingest(cfg, out):
    tweets, skipped = read_tweets(cfg.tweets)
    if cfg.start:
        start = day_start(cfg.start)
    else:
        first = min(t.timestamp for t in tweets)
        start = first - first % SECONDS_PER_DAY
    days = cfg.window_days
    if days is None:
        last = max(t.timestamp for t in tweets)
        days = (last - start) // SECONDS_PER_DAY + 1
    series, rejected = build_daily_series(occurrences(tweets, start), days)
    popular = filter_popular(series, cfg.min_users)
    start_date = datetime.fromtimestamp(start, tz=timezone.utc).date().isoformat()
    write_series(out / "series.csv", popular, days, start=start_date,
                 n_tweets=len(tweets), n_skipped=skipped, n_rejected=rejected,
                 n_hashtags=len(series))
    logger.info("ingest: %d tweets, %d hashtags, %d popular", len(tweets), len(series), len(popular))
    return {"n_tweets": len(tweets), "n_hashtags": len(series), "n_popular": len(popular)}


def run_peaks(cfg, out):
    series, _ = read_series(out / "series.csv")
    records = []
    for tag in sorted(series):
        rec = find_peak(series[tag], cfg.peak_params, cfg.edges, cfg.half_span)
        if rec is not None:
            records.append(rec)
    write_peaks(out / "peaks.csv", records)
    logger.info("peaks: %d of %d hashtags have an isolated peak", len(records), len(series))
    return {"n_peaks": len(records)}


def run_features(cfg, out):
    records = read_peaks(out / "peaks.csv")
    triples = []
    for rec in records:
        t = compute_triple(rec)
        if abs(t.f_b + t.f_p + t.f_a - 1.0) > 1e-12:
            raise InvariantError(f"{t.hashtag}: fractions sum to {t.f_b + t.f_p + t.f_a!r}")
        if t.f_p <= min_peak_fraction(rec, cfg.peak_params):
            raise InvariantError(f"{t.hashtag}: triple falls in the excluded region")
        triples.append(t)
    write_features(out / "features.csv", triples)
    return {"n_features": len(triples)}


def run_classify(cfg, out):
    triples = read_features(out / "features.csv")
    if not triples:
        raise DataError("no feature triples to classify")
    X = np.array([[t.f_b, t.f_a] for t in triples])
    kmax = min(cfg.kmax, len(X))
    seed = stage_seed(cfg.seed, "classify")
    model, table = select_model(X, range(cfg.kmin, kmax + 1), cfg.restarts, seed, tol=cfg.tol)
    model = model.sorted()
    labels, flags = label_components(model, LabelRule(cfg.peak_sum, cfg.ratio))
    assignments = classify_points(model, labels, X, [t.hashtag for t in triples])
    for a in assignments:
        if abs(a.posteriors.sum() - 1.0) > 1e-9:
            raise InvariantError(f"{a.hashtag}: posteriors do not sum to one")
    write_model(out / "model.json", model, labels, {"flags": flags, "bic": bic(model)})
    write_assignments(out / "assignments.csv", assignments, X)
    _write_csv(out / "bic.csv", ["K", "log_likelihood", "n_params", "bic"],
               [(r["K"], _fmt(r["log_likelihood"]), r["n_params"], _fmt(r["bic"])) for r in table])
    cv_best = None
    if cfg.cv_folds and len(X) >= cfg.cv_folds:
        cv = cross_validate(X, range(cfg.kmin, kmax + 1), cfg.cv_folds, seed, cfg.cv_restarts,
                            tol=cfg.tol)
        _write_csv(out / "cv.csv", ["K", "heldout_loglik"], [(k, _fmt(v)) for k, v in cv.items()])
        cv_best = max(cv, key=cv.get)
    unc = np.array([a.uncertainty for a in assignments])
    return {"K": model.K, "K_cv": cv_best, "labels": [str(l) for l in labels], "flags": flags,
            "share_uncertainty_below_0.05": float(np.mean(unc < 0.05))}


def _grounder(cfg):
    taxonomy = Taxonomy.load(cfg.wordnet_dir) if cfg.wordnet_dir else default_taxonomy()
    profiles = load_profiles(cfg.profile_dir) if cfg.profile_dir else default_profiles()
    stopwords = load_stopwords(cfg.stopwords) if cfg.stopwords else None
    return Grounder(taxonomy, profiles, stopwords, cfg.resolve_fraction, cfg.top_languages)


def semantic_analysis(cfg, tweets, labels, out):
    """Concept counts, top concepts, class fingerprints and top words."""
    grounder = _grounder(cfg)
    tx = grounder.taxonomy
    groups = tweets_by_hashtag(tweets, labels)
    counts_by_tag, words_by_class = {}, defaultdict(Counter)
    for tag in sorted(labels):
        grounded = [grounder.ground(t.text) for t in groups.get(tag, [])]
        counts_by_tag[tag] = concept_counts(grounded, tx, cfg.depth)
        for t in groups.get(tag, []):
            words_by_class[labels[tag]].update(preprocess(t.text, grounder.stopwords))
    concepts, short = select_top_concepts(counts_by_tag, cfg.top_k, name=tx.name)
    vectors = {tag: ConceptVector.from_counts(tag, c, concepts) for tag, c in counts_by_tag.items()}
    classes = [c for c in CLASS_ORDER if c in set(labels.values())]
    fingerprints, empty = class_fingerprint(labels, vectors, concepts, classes)
    names = [tx.name(c) for c in concepts]
    _write_csv(out / "concepts.csv", ["hashtag", "concept", "count"],
               [(tag, tx.name(c), n) for tag in sorted(counts_by_tag)
                for c, n in sorted(counts_by_tag[tag].items(), key=lambda kv: (-kv[1], tx.name(kv[0])))])
    _write_csv(out / "fingerprints.csv", ["class", "concept", "frequency"],
               [(cls, name, _fmt(v)) for cls in classes if len(fingerprints[cls])
                for name, v in zip(names, fingerprints[cls])])
    _write_csv(out / "top_words.csv", ["class", "word", "count"],
               [(cls, w, n) for cls in classes for w, n in top_words([words_by_class[cls]], cfg.top_words)])
    dominant = {cls: names[int(np.argmax(fp))] for cls, fp in fingerprints.items() if len(fp)}
    _dump_json(out / "fingerprints.json", {
        "concepts": names,
        "fingerprints": {cls: [float(v) for v in fp] for cls, fp in fingerprints.items()},
        "empty": empty,
        "short": short,
    })
    return {"concepts": names, "short": short, "empty_classes": empty, "dominant": dominant}


def run_semantics(cfg, out):
    tweets, _ = read_tweets(cfg.tweets)
    labels = {tag: str(lab) for tag, (lab, _) in read_assignments(out / "assignments.csv").items()}
    return semantic_analysis(cfg, tweets, labels, out)


def diffusion_analysis(cfg, graph, tweets, labels, out):
    groups = tweets_by_hashtag(tweets, labels)
    estimates = [estimate(graph, groups[tag], tag, labels[tag], cfg.attribution)
                 for tag in sorted(labels) if tag in groups]
    write_estimates(out / "estimates.csv", estimates)
    classes = [c for c in CLASS_ORDER if c in set(labels.values())]
    summary, empty = class_summary(estimates, classes)
    write_summary(out / "quartiles.json", summary, empty)
    return {"n_estimates": len(estimates),
            "median_beta": {c: s["beta"]["median"] for c, s in summary.items()}}


def run_diffusion(cfg, out):
    if not cfg.graph:
        logger.warning("diffusion: no follower graph configured, stage skipped")
        return {"skipped": True}
    graph, stats = read_edges_csv(cfg.graph)
    tweets, _ = read_tweets(cfg.tweets)
    labels = {tag: str(lab) for tag, (lab, _) in read_assignments(out / "assignments.csv").items()}
    result = diffusion_analysis(cfg, graph, tweets, labels, out)
    result["graph_edges"] = stats.edges
    return result


STAGE_FUNCS = {
    "ingest": run_ingest,
    "peaks": run_peaks,
    "features": run_features,
    "classify": run_classify,
    "semantics": run_semantics,
    "diffusion": run_diffusion,
}


# ------------------------------------------------------------------ plot data

def emit_plotdata(cfg, out):
    """Plot-ready CSVs under ``<out>/plotdata``; missing inputs are skipped."""
    out = Path(out)
    pd = out / "plotdata"
    pd.mkdir(exist_ok=True)
    written, skipped = [], []

    def have(*names):
        missing = [n for n in names if not (out / n).exists()]
        if missing:
            logger.warning("plotdata: %s missing, artifact skipped", ", ".join(missing))
        return not missing

    labels = {}
    if (out / "assignments.csv").exists():
        labels = {t: str(l) for t, (l, _) in read_assignments(out / "assignments.csv").items()}

    if have("series.csv", "peaks.csv"):
        series, info = read_series(out / "series.csv")
        peaks = {r.hashtag: r for r in read_peaks(out / "peaks.csv")}
        rows = [(tag, d, int(c), d - peaks[tag].peak_day)
                for tag in sorted(peaks) for d, c in enumerate(series[tag].counts)]
        _write_csv(pd / "activity.csv", ["hashtag", "day", "count", "rel_day"], rows)
        written.append("activity.csv")
        if cfg.tweets and Path(cfg.tweets).exists():
            tweets, _ = read_tweets(cfg.tweets)
            start = day_start(info["start"]) if info.get("start") else 0
            groups = tweets_by_hashtag(tweets, peaks)
            rows = []
            for tag in sorted(peaks):
                p0 = peaks[tag].peak_day
                log = AdoptionLog.from_tweets(groups.get(tag, []))
                ranked = sorted(log.users.items(), key=lambda kv: (kv[1].first, kv[0]))
                rank = {u: i + 1 for i, (u, _) in enumerate(ranked)}
                for t in sorted(groups.get(tag, []), key=lambda t: (rank[t.user_id], t.timestamp)):
                    first = log.users[t.user_id].first
                    rows.append((tag, t.user_id, rank[t.user_id],
                                 (first - start) // SECONDS_PER_DAY - p0,
                                 (t.timestamp - start) // SECONDS_PER_DAY - p0))
            _write_csv(pd / "raster.csv", ["hashtag", "user", "rank", "first_day", "post_day"], rows)
            written.append("raster.csv")
        else:
            skipped.append("raster.csv")
    else:
        skipped += ["activity.csv", "raster.csv"]

    if have("features.csv", "peaks.csv"):
        triples = read_features(out / "features.csv")
        peaks = {r.hashtag: r for r in read_peaks(out / "peaks.csv")}
        rows = [(tag, _fmt(fb), _fmt(fp), _fmt(fa), _fmt(x), _fmt(y),
                 _fmt(min_peak_fraction(peaks[tag], cfg.peak_params)), labels.get(tag, ""))
                for tag, fb, fp, fa, x, y in simplex_coordinates(triples)]
        _write_csv(pd / "simplex.csv", ["hashtag", "fb", "fp", "fa", "x", "y", "fp_min", "label"], rows)
        written.append("simplex.csv")
    else:
        skipped.append("simplex.csv")

    if have("fingerprints.csv"):
        matrix = defaultdict(dict)
        concepts = []
        with open(out / "fingerprints.csv", newline="", encoding="utf-8") as fh:
            for r in csv.DictReader(fh):
                matrix[r["class"]][r["concept"]] = r["frequency"]
                if r["concept"] not in concepts:
                    concepts.append(r["concept"])
        _write_csv(pd / "fingerprint_matrix.csv", ["class"] + concepts,
                   [[cls] + [matrix[cls].get(c, "0.0") for c in concepts] for cls in matrix])
        written.append("fingerprint_matrix.csv")
    else:
        skipped.append("fingerprint_matrix.csv")

    if have("quartiles.json"):
        summary = json.loads((out / "quartiles.json").read_text(encoding="utf-8"))["classes"]
        _write_csv(pd / "quartiles.csv", ["class", "quantity", "min", "q1", "median", "q3", "max"],
                   [(c, q, *(_fmt(v) for v in vals)) for c, q, *vals in quartile_rows(summary)])
        written.append("quartiles.csv")
    else:
        skipped.append("quartiles.csv")

    if have("top_words.csv"):
        (pd / "top_words.csv").write_bytes((out / "top_words.csv").read_bytes())
        written.append("top_words.csv")
    else:
        skipped.append("top_words.csv")
    return {"written": written, "skipped": skipped}


# ------------------------------------------------------------------- run all

def write_manifest(cfg, out, stages_done):
    out = Path(out)
    inputs = {}
    for key in ("tweets", "graph"):
        p = getattr(cfg, key)
        if p:
            inputs[key] = {"name": Path(p).name, "sha256": sha256(p)}
    outputs = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name not in ("manifest.json", "FAILED"):
            outputs[p.relative_to(out).as_posix()] = sha256(p)
    manifest = {
        "package": "hashtag_dynamics",
        "version": __version__,
        "numpy": np.__version__,
        "parameters": cfg.parameters(),
        "inputs": inputs,
        "stages": list(stages_done),
        "outputs": outputs,
    }
    _dump_json(out / "manifest.json", manifest)
    return manifest


def run_stage(name, cfg, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return STAGE_FUNCS[name](cfg, out)
    except Exception as exc:
        (out / "FAILED").write_text(f"{name}: {type(exc).__name__}: {exc}\n", encoding="utf-8")
        raise StageError(name, exc) from exc


def run_pipeline(cfg, stages=STAGES):
    """Run the stages in order and write ``report.json``, plot data and manifest.

    Raises:
        StageError: a stage failed; its cause is attached and a ``FAILED``
            marker is left in the output directory next to the partial
            outputs.
    """
    if not cfg.tweets:
        raise DataError("no tweet file configured")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failed = out / "FAILED"
    if failed.exists():
        failed.unlink()
    report, done = {}, []
    for name in stages:
        report[name] = run_stage(name, cfg, out)
        done.append(name)
    _dump_json(out / "report.json", report)
    report["plotdata"] = emit_plotdata(cfg, out)
    manifest = write_manifest(cfg, out, done)
    return {"report": report, "manifest": manifest, "out_dir": str(out)}


def manifest_digest(out_dir):
    return sha256(Path(out_dir) / "manifest.json")


def format_report(out_dir):
    """Human-readable summary of a finished run."""
    out = Path(out_dir)
    path = out / "report.json"
    if not path.exists():
        raise DataError(f"no report in {out}; run the pipeline first")
    r = json.loads(path.read_text(encoding="utf-8"))
    lines = []
    ing = r.get("ingest", {})
    lines.append(f"tweets: {ing.get('n_tweets')}  hashtags: {ing.get('n_hashtags')}  "
                 f"popular: {ing.get('n_popular')}")
    lines.append(f"isolated peaks: {r.get('peaks', {}).get('n_peaks')}")
    cl = r.get("classify", {})
    if cl:
        lines.append(f"components: {cl.get('K')} (cross-validation: {cl.get('K_cv')})  "
                     f"labels: {', '.join(cl.get('labels', []))}")
        lines.append(f"hashtags with uncertainty < 0.05: {cl.get('share_uncertainty_below_0.05'):.1%}")
    sem = r.get("semantics", {})
    for cls, concept in sorted(sem.get("dominant", {}).items()):
        lines.append(f"  {cls}: dominant concept {concept}")
    dif = r.get("diffusion", {})
    for cls, b in sorted(dif.get("median_beta", {}).items()):
        lines.append(f"  {cls}: median beta {b:.4f}")
    if (out / "quartiles.json").exists():
        summary = json.loads((out / "quartiles.json").read_text(encoding="utf-8"))["classes"]
        for cls, per_q in summary.items():
            g = per_q["gamma"]["median"]
            tau = per_q["tau_hours"]["median"]
            rt = per_q["retweet_fraction"]["median"]
            lines.append(f"  {cls}: median gamma {g:.3f}, tau {tau:.1f} h, retweets {rt:.2f}")
    return "\n".join(lines)
