"""Synthetic follower graphs, hashtag cascades and labeled feature clouds.

Everything here exists so the estimators and the classifier can be checked
against known ground truth.
"""

import heapq
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diffusion import FollowerGraph
from .ingest import SECONDS_PER_DAY, TweetRecord
from .mixture import ClassLabel

logger = logging.getLogger(__name__)

HALF_SPAN = 7
DEFAULT_ARCHETYPES = {
    ClassLabel.BEFORE: (0.45, 0.08),
    ClassLabel.AFTER: (0.08, 0.45),
    ClassLabel.SYMMETRIC: (0.30, 0.30),
    ClassLabel.PEAK_DAY: (0.04, 0.04),
}

# Words planted in the text of each class; each group rolls up to a
# different depth-4 concept in the shipped lexicon.
CLASS_VOCABULARY = {
    ClassLabel.BEFORE: ("vote", "ballot", "election", "voting"),
    ClassLabel.AFTER: ("earthquake", "flood", "storm", "hurricane", "tornado"),
    ClassLabel.SYMMETRIC: ("concert", "celebration", "tournament", "ceremony"),
    ClassLabel.PEAK_DAY: ("stadium", "ball", "car", "camera"),
}
FILLER_VOCABULARY = ("today", "news", "people", "morning")


def gen_graph(n_nodes, mean_out_degree, seed=0, prefix="u"):
    """Random follower graph with Poisson out-degrees and uniform targets.

    Node ``i`` is named ``f"{prefix}{i}"``.  Out-degrees are capped at
    ``n_nodes - 1``; targets are drawn without replacement and never equal
    the source, so the graph has no self-loops or duplicate edges.
    """
    if n_nodes < 0:
        raise ValueError("n_nodes must be >= 0")
    if mean_out_degree < 0:
        raise ValueError("mean_out_degree must be >= 0")
    if n_nodes and mean_out_degree >= n_nodes:
        raise ValueError(f"mean out-degree {mean_out_degree} impossible with {n_nodes} nodes")
    rng = np.random.default_rng(seed)
    nodes = [f"{prefix}{i}" for i in range(n_nodes)]
    if n_nodes < 2:
        return FollowerGraph(nodes, [], [])
    degrees = np.minimum(rng.poisson(mean_out_degree, n_nodes), n_nodes - 1)
    src = np.repeat(np.arange(n_nodes), degrees)
    dst = np.empty(len(src), dtype=np.int64)
    pos = 0
    for i, d in enumerate(degrees):
        if d:
            t = rng.choice(n_nodes - 1, size=d, replace=False)
            t[t >= i] += 1
            dst[pos:pos + d] = t
            pos += d
    return FollowerGraph(nodes, src, dst)


def class_profile(label, peak, ratio=0.3, decay=0.8):
    """Daily seeding counts over relative days -7..+7 for a class.

    Before rises linearly to ``ratio * peak`` on day -1 and jumps to
    ``peak`` on day 0; After mirrors it with a geometric decay; Symmetric
    has the linear ramp on both sides; PeakDay is a lone impulse.  Keeping
    the neighbouring days well below the peak lets the day-0 spike stand
    out as an isolated peak.
    """
    label = ClassLabel(label)
    counts = np.zeros(2 * HALF_SPAN + 1)
    counts[HALF_SPAN] = peak
    ramp = ratio * peak * np.arange(1, HALF_SPAN + 1) / HALF_SPAN
    tail = ratio * peak * decay ** np.arange(HALF_SPAN)
    if label is ClassLabel.BEFORE:
        counts[:HALF_SPAN] = ramp
    elif label is ClassLabel.AFTER:
        counts[HALF_SPAN + 1:] = tail
    elif label is ClassLabel.SYMMETRIC:
        counts[:HALF_SPAN] = ramp
        counts[HALF_SPAN + 1:] = ramp[::-1]
    return np.rint(counts).astype(np.int64)


@dataclass
class CascadeConfig:
    """Parameters for one synthetic hashtag.

    ``seeding`` gives the exogenous first posts per day over relative days
    -7..+7; ``peak_offset`` places relative day 0 on that day of a window
    of ``n_days`` days starting at epoch ``start``.
    """

    hashtag: str
    label: ClassLabel = ClassLabel.PEAK_DAY
    seeding: tuple = ()
    beta: float = 0.0
    repeat_rate: float = 0.0
    jitter_hours: float = 24.0
    n_days: int = 2 * HALF_SPAN + 1
    peak_offset: int = HALF_SPAN
    start: int = 1_300_000_000 - 1_300_000_000 % SECONDS_PER_DAY
    background_per_day: float = 0.0
    background_users: int = 200
    vocabulary: tuple = ()

    def __post_init__(self):
        self.label = ClassLabel(self.label)
        seeding = np.asarray(self.seeding if len(self.seeding) else class_profile(self.label, 100))
        if seeding.shape != (2 * HALF_SPAN + 1,):
            raise ValueError("seeding must give 15 daily counts (relative days -7..+7)")
        if np.any(seeding < 0) or seeding.sum() <= 0:
            raise ValueError("seeding counts must be non-negative with a positive total")
        self.seeding = tuple(int(c) for c in seeding)
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.repeat_rate < 0 or self.jitter_hours < 0 or self.background_per_day < 0:
            raise ValueError("rates must be non-negative")
        if not HALF_SPAN <= self.peak_offset < self.n_days - HALF_SPAN:
            raise ValueError("peak_offset leaves no room for the 15-day span inside the window")
        if not self.vocabulary:
            self.vocabulary = CLASS_VOCABULARY[self.label]


@dataclass
class GroundTruth:
    hashtag: str
    label: ClassLabel
    beta: float
    seeders: set = field(default_factory=set)
    adoption_times: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)
    peak_day: int = 0

    @property
    def adopters(self):
        return set(self.adoption_times)

    @property
    def seeder_fraction(self):
        return len(self.seeders) / len(self.adoption_times) if self.adoption_times else float("nan")

    def to_json(self):
        return {
            "hashtag": self.hashtag,
            "label": str(self.label),
            "beta": self.beta,
            "peak_day": self.peak_day,
            "seeders": sorted(self.seeders),
            "adoption_times": dict(sorted(self.adoption_times.items())),
            "sources": dict(sorted(self.sources.items())),
        }


def _texts(rng, hashtag, vocabulary, sources):
    """Tweet bodies: three class words, one filler word and the tag."""
    m = len(sources)
    words = rng.integers(len(vocabulary), size=(m, 3))
    fill = rng.integers(len(FILLER_VOCABULARY), size=m)
    out = []
    for (a, b, c), f, src in zip(words.tolist(), fill.tolist(), sources):
        body = (f"{vocabulary[a]} {vocabulary[b]} {vocabulary[c]} "
                f"{FILLER_VOCABULARY[f]} #{hashtag}")
        out.append(body if src is None else f"RT @{src}: {body}")
    return out


def gen_cascade(graph, config, seed=0, id_prefix=None):
    """Simulate one hashtag over ``graph``.

    Seeders are drawn uniformly among users that have not adopted, are not
    about to adopt and have no followee who has already posted.  When a
    user first posts, each follower that has not adopted converts with
    probability ``beta`` and posts a retweet between one second and 24 hours
    later.  Adopters add Poisson(``repeat_rate``) repeat posts within
    ``jitter_hours`` of their first post; repeats do not expose anyone.

    Returns:
        (tweets sorted by time, GroundTruth)
    """
    rng = np.random.default_rng(seed)
    cfg = config
    n = len(graph)
    total_seeds = sum(cfg.seeding)
    if total_seeds > n:
        raise ValueError(f"seeding needs {total_seeds} users but the graph has {n}")
    day0 = cfg.start + (cfg.peak_offset - HALF_SPAN) * SECONDS_PER_DAY
    events = []  # (time, order, kind, node, source)
    order = 0
    for d, c in enumerate(cfg.seeding):
        for t in np.sort(rng.integers(0, SECONDS_PER_DAY, size=c)):
            heapq.heappush(events, (int(day0 + d * SECONDS_PER_DAY + t), order, 0, -1, -1))
            order += 1

    adopted = np.zeros(n, dtype=bool)
    exposed = np.zeros(n, dtype=bool)
    pending = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    truth = GroundTruth(cfg.hashtag, cfg.label, cfg.beta, peak_day=cfg.peak_offset)
    posts = []  # (time, node, source)

    while events:
        t, _, kind, node, source = heapq.heappop(events)
        if kind == 0:
            for _ in range(100 * n):
                cand = int(rng.integers(n))
                if not (adopted[cand] or exposed[cand] or pending[cand] < np.iinfo(np.int64).max):
                    break
            else:
                raise ValueError("no eligible seeder left; seeding is too dense for this graph")
            node, source = cand, -1
            truth.seeders.add(graph.nodes[node])
        else:
            if adopted[node] or pending[node] != t:
                continue  # superseded by an earlier adoption
        adopted[node] = True
        truth.adoption_times[graph.nodes[node]] = t
        if source >= 0:
            truth.sources[graph.nodes[node]] = graph.nodes[source]
        posts.append((t, node, source))
        followers = graph.followers(node)
        exposed[followers] = True
        if cfg.beta > 0 and len(followers):
            hits = followers[rng.random(len(followers)) < cfg.beta]
            delays = rng.integers(1, SECONDS_PER_DAY + 1, size=len(hits))
            for f, dl in zip(hits, delays):
                when = t + int(dl)
                if not adopted[f] and when < pending[f]:
                    pending[f] = when
                    heapq.heappush(events, (when, order, 1, int(f), node))
                    order += 1

    first_posts = list(posts)
    if cfg.repeat_rate > 0:
        reps = rng.poisson(cfg.repeat_rate, size=len(first_posts))
        span = max(int(cfg.jitter_hours * 3600), 1)
        for (t, node, _), k in zip(first_posts, reps):
            for off in rng.integers(1, span + 1, size=k):
                posts.append((t + int(off), node, -1))

    prefix = id_prefix if id_prefix is not None else cfg.hashtag
    tweets = []
    for t, node, source in posts:
        src = graph.nodes[source] if source >= 0 else None
        tweets.append((t, graph.nodes[node], src))
    if cfg.background_per_day > 0:
        for d in range(cfg.n_days):
            for t in rng.integers(0, SECONDS_PER_DAY, size=rng.poisson(cfg.background_per_day)):
                user = f"bg{int(rng.integers(cfg.background_users))}"
                tweets.append((cfg.start + d * SECONDS_PER_DAY + int(t), user, None))
    tweets.sort(key=lambda x: (x[0], x[1]))
    texts = _texts(rng, cfg.hashtag, cfg.vocabulary, [src for _, _, src in tweets])
    out = []
    for k, ((t, user, src), text) in enumerate(zip(tweets, texts)):
        out.append(TweetRecord(
            tweet_id=f"{prefix}-{k}",
            user_id=user,
            timestamp=t,
            text=text,
            is_retweet=src is not None,
            retweet_source_user=src,
        ))
    return out, truth


def gen_triple_dataset(archetypes=None, per_class=100, spread=0.04, seed=0):
    """Labeled (f_b, f_a) clouds around class archetypes.

    Points are Gaussian around each mean and restricted to the feasible
    triangle ``f_b, f_a >= 0, f_b + f_a <= 1`` by redrawing infeasible
    samples, so no probability mass piles up on the boundary.

    Returns:
        (points of shape (n, 2), list of labels)
    """
    archetypes = DEFAULT_ARCHETYPES if archetypes is None else archetypes
    rng = np.random.default_rng(seed)
    points, labels = [], []
    for label, mean in archetypes.items():
        mean = np.asarray(mean, dtype=float)
        if mean.min() < 0 or mean.sum() > 1:
            raise ValueError(f"archetype {label} mean {tuple(mean)} outside the simplex")
        if spread == 0:
            block = np.tile(mean, (per_class, 1))
        else:
            block = np.empty((0, 2))
            while len(block) < per_class:
                draw = rng.normal(mean, spread, size=(2 * per_class, 2))
                ok = (draw.min(axis=1) >= 0) & (draw.sum(axis=1) <= 1)
                block = np.vstack([block, draw[ok]])
            block = block[:per_class]
        points.append(block)
        labels.extend([label] * per_class)
    return np.vstack(points), labels


@dataclass
class SyntheticCorpus:
    graph: FollowerGraph
    tweets: list
    truths: list
    start: int
    n_days: int


def gen_corpus(n_per_class=25, n_nodes=20000, mean_out_degree=10, n_days=75, beta=0.01,
               peak_range=(120, 250), repeat_rate=0.2, seed=0, classes=None):
    """Multi-hashtag corpus with every class represented.

    Each hashtag gets its own cascade on a shared graph, with a peak day
    drawn near the middle of the window and a peak height drawn uniformly
    from ``peak_range``.  The shape ratio also varies per hashtag so the
    feature points form clouds rather than single spots.
    """
    ss = np.random.SeedSequence(seed)
    graph_seed, plan_seed, *cascade_seeds = ss.spawn(2 + n_per_class * 4)
    graph = gen_graph(n_nodes, mean_out_degree, graph_seed)
    rng = np.random.default_rng(plan_seed)
    classes = list(classes or DEFAULT_ARCHETYPES)
    start = CascadeConfig("x").start
    tweets, truths = [], []
    k = 0
    for label in classes:
        for i in range(n_per_class):
            peak = int(rng.integers(peak_range[0], peak_range[1] + 1))
            ratio = float(rng.uniform(0.12, 0.2))
            offset = int(rng.integers(30, n_days - 30))
            tag = f"{str(label).lower()}{i:02d}"
            cfg = CascadeConfig(tag, label, class_profile(label, peak, ratio), beta=beta,
                                repeat_rate=repeat_rate, jitter_hours=12.0, n_days=n_days,
                                peak_offset=offset, start=start)
            tw, truth = gen_cascade(graph, cfg, cascade_seeds[k])
            tweets.extend(tw)
            truths.append(truth)
            k += 1
    tweets.sort(key=lambda t: (t.timestamp, t.tweet_id))
    return SyntheticCorpus(graph, tweets, truths, start, n_days)


def write_truth(path, truths):
    payload = [t.to_json() for t in truths]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_truth(path):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    out = []
    for d in data:
        out.append(GroundTruth(d["hashtag"], ClassLabel(d["label"]), d["beta"], set(d["seeders"]),
                               dict(d["adoption_times"]), dict(d["sources"]), d["peak_day"]))
    return out
