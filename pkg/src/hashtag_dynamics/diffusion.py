"""Follower graph and per-hashtag epidemic estimates.

Edges point along the flow of information: when ``a`` follows ``b`` the
graph stores ``b -> a``, so a user's out-neighbours are its followers.
"""

import csv
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .ingest import extract_hashtags

logger = logging.getLogger(__name__)

QUANTITIES = ("retweet_fraction", "gamma", "beta", "tau_hours")


@dataclass
class GraphLoadStats:
    edges: int = 0
    duplicates: int = 0
    self_loops: int = 0
    malformed: int = 0


class FollowerGraph:
    """Immutable directed graph stored as two CSR adjacency structures."""

    def __init__(self, nodes, src, dst):
        self.nodes = list(nodes)
        self.index = {u: i for i, u in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ValueError("duplicate node identifiers")
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if np.any(src == dst):
            raise ValueError("self-loops are not allowed")
        n = len(self.nodes)
        key = src * max(n, 1) + dst
        if len(np.unique(key)) != len(key):
            raise ValueError("duplicate edges are not allowed")
        self._out_ptr, self._out = _csr(src, dst, n)
        self._in_ptr, self._in = _csr(dst, src, n)

    @classmethod
    def from_pairs(cls, pairs, nodes=None):
        """Build from ``(follower, followee)`` pairs.

        Self-loops are dropped and duplicates collapsed; both are counted.

        Returns:
            (graph, GraphLoadStats)
        """
        stats = GraphLoadStats()
        index = {}
        order = []
        if nodes is not None:
            for u in nodes:
                if u not in index:
                    index[u] = len(order)
                    order.append(u)
        seen = set()
        src, dst = [], []
        for pair in pairs:
            try:
                follower, followee = pair
            except (TypeError, ValueError):
                stats.malformed += 1
                continue
            follower, followee = str(follower), str(followee)
            if follower == followee:
                stats.self_loops += 1
                continue
            for u in (followee, follower):
                if u not in index:
                    index[u] = len(order)
                    order.append(u)
            e = (index[followee], index[follower])
            if e in seen:
                stats.duplicates += 1
                continue
            seen.add(e)
            src.append(e[0])
            dst.append(e[1])
        stats.edges = len(src)
        if stats.self_loops or stats.duplicates:
            logger.info("graph: dropped %d self-loops and %d duplicate edges",
                        stats.self_loops, stats.duplicates)
        return cls(order, src, dst), stats

    def __len__(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self._out)

    def followers(self, i):
        """Indices of the users following node ``i``."""
        return self._out[self._out_ptr[i]:self._out_ptr[i + 1]]

    def followees(self, i):
        return self._in[self._in_ptr[i]:self._in_ptr[i + 1]]

    def out_degrees(self):
        return np.diff(self._out_ptr)

    def edge_arrays(self):
        """``(src, dst)`` index arrays, sorted by source then target."""
        src = np.repeat(np.arange(len(self.nodes)), self.out_degrees())
        return src, self._out.copy()

    def edges(self):
        """Yield ``(followee, follower)`` identifier pairs."""
        src, dst = self.edge_arrays()
        for s, d in zip(src, dst):
            yield self.nodes[s], self.nodes[d]

    def has_edge(self, followee, follower):
        i, j = self.index.get(followee), self.index.get(follower)
        if i is None or j is None:
            return False
        return bool(np.any(self.followers(i) == j))

    def subsample(self, keep_fraction, rng):
        """Copy keeping each edge independently with probability ``keep_fraction``."""
        src, dst = self.edge_arrays()
        mask = rng.random(len(src)) < keep_fraction
        return FollowerGraph(self.nodes, src[mask], dst[mask])

    def relabel(self, mapping):
        src, dst = self.edge_arrays()
        return FollowerGraph([mapping[u] for u in self.nodes], src, dst)


def _csr(a, b, n):
    order = np.lexsort((b, a))
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(a, minlength=n), out=ptr[1:])
    return ptr, b[order]


def load_graph(pairs, nodes=None):
    return FollowerGraph.from_pairs(pairs, nodes)


def read_edges_csv(path):
    """Load a ``follower,followee`` CSV (header optional).

    Returns:
        (graph, GraphLoadStats)
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"edge file not found: {path}")
    malformed = 0

    def pairs():
        nonlocal malformed
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                parts = [p.strip() for p in line.split(",")]
                if len(parts) != 2 or not all(parts):
                    malformed += 1
                    continue
                if lineno == 1 and parts == ["follower", "followee"]:
                    continue
                yield parts[0], parts[1]

    graph, stats = FollowerGraph.from_pairs(pairs())
    stats.malformed = malformed
    if malformed:
        logger.warning("%s: skipped %d malformed lines", path, malformed)
    return graph, stats


def write_edges_csv(path, graph):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["follower", "followee"])
        for followee, follower in graph.edges():
            w.writerow([follower, followee])


@dataclass
class UserUsage:
    first: int
    last: int
    count: int


@dataclass
class AdoptionLog:
    hashtag: str
    users: dict = field(default_factory=dict)

    @classmethod
    def from_tweets(cls, tweets, hashtag=None):
        """First use, last use and use count per user.

        With ``hashtag`` given only tweets carrying it are considered.
        """
        log = cls(hashtag or "")
        for t in tweets:
            if hashtag is not None and hashtag not in extract_hashtags(t.text):
                continue
            log.add(t.user_id, t.timestamp)
        return log

    def add(self, user, ts):
        u = self.users.get(user)
        if u is None:
            self.users[user] = UserUsage(ts, ts, 1)
        else:
            u.first = min(u.first, ts)
            u.last = max(u.last, ts)
            u.count += 1

    def __len__(self):
        return len(self.users)

    def first_times(self, graph):
        """First-use array aligned to graph nodes (inf for absent users)."""
        first = np.full(len(graph), np.inf)
        for user, usage in self.users.items():
            i = graph.index.get(user)
            if i is not None:
                first[i] = usage.first
        return first

    def missing_from(self, graph):
        return sorted(u for u in self.users if u not in graph.index)


def is_retweet(tweet):
    head = tweet.text[:3].upper()
    return bool(tweet.is_retweet) or head == "RT " or head == "RT@"


def retweet_fraction(tweets):
    tweets = list(tweets)
    if not tweets:
        raise ValueError("retweet fraction of zero tweets is undefined")
    return sum(is_retweet(t) for t in tweets) / len(tweets)


def seeder_fraction(graph, log):
    """Fraction of users none of whose followees used the hashtag earlier.

    Followees that used it at the same instant do not disqualify.  Users
    absent from the graph have no known followees and count as seeders.
    """
    if not len(log):
        raise ValueError("empty adoption log")
    first = log.first_times(graph)
    seeders = 0
    for user, usage in log.users.items():
        i = graph.index.get(user)
        if i is None:
            seeders += 1
            continue
        # absent followees carry inf and never disqualify
        if not np.any(first[graph.followees(i)] < usage.first):
            seeders += 1
    return seeders / len(log)


def seeders(graph, log):
    first = log.first_times(graph)
    out = set()
    for user, usage in log.users.items():
        i = graph.index.get(user)
        if i is None or not np.any(first[graph.followees(i)] < usage.first):
            out.add(user)
    return out


def follower_adoption(graph, log, attribution="all"):
    """Per-adopter share of followers who adopt strictly later.

    Args:
        attribution: ``"all"`` credits a later-adopting follower to every
            followee that used the tag before it; ``"first"`` credits it only
            to the followee whose first use came earliest.

    Returns:
        (dict user -> share for adopters with at least one follower,
        number of adopters left out for having none or being absent)
    """
    if attribution not in ("all", "first"):
        raise ValueError("attribution must be 'all' or 'first'")
    if not len(log):
        raise ValueError("empty adoption log")
    first = log.first_times(graph)
    deg = graph.out_degrees()
    credited = None
    if attribution == "first":
        credited = {}
        for user, usage in log.users.items():
            i = graph.index.get(user)
            if i is None:
                continue
            fe = graph.followees(i)
            earlier = fe[first[fe] < usage.first]
            if len(earlier):
                # earliest exposer; ties by node index for determinism
                credited[i] = int(earlier[np.lexsort((earlier, first[earlier]))[0]])
    shares = {}
    zero_degree = 0
    for user, usage in log.users.items():
        i = graph.index.get(user)
        if i is None or deg[i] == 0:
            zero_degree += 1
            continue
        f = graph.followers(i)
        later = f[np.isfinite(first[f]) & (first[f] > usage.first)]
        if credited is not None:
            later = [x for x in later if credited.get(int(x)) == i]
        shares[user] = len(later) / deg[i]
    return shares, zero_degree


def adoption_fraction(graph, log, attribution="all", return_counts=False):
    """Mean over adopters with followers of the share of followers adopting later.

    Args:
        attribution: see :func:`follower_adoption`.
        return_counts: also return ``(n_users_in_mean, n_zero_degree)``.

    Raises:
        ValueError: no adopter in the graph has any follower.
    """
    shares, zero_degree = follower_adoption(graph, log, attribution)
    if not shares:
        raise ValueError(f"{log.hashtag or 'log'}: no adopter has followers, beta undefined")
    beta = float(np.mean(list(shares.values())))
    if return_counts:
        return beta, (len(shares), zero_degree)
    return beta


def activity_span(log):
    """Mean over users of the hours between first and last use."""
    if not len(log):
        raise ValueError("empty adoption log")
    spans = [(u.last - u.first) / 3600.0 for u in log.users.values()]
    return float(np.mean(spans))


@dataclass
class EpidemicEstimates:
    hashtag: str
    retweet_fraction: float
    gamma: float
    beta: float
    tau_hours: float
    label: str = ""
    n_users: int = 0
    n_missing: int = 0
    n_zero_degree: int = 0

    def check(self):
        for name in ("retweet_fraction", "gamma", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{self.hashtag}: {name}={v} outside [0, 1]")
        if self.tau_hours < 0:
            raise ValueError(f"{self.hashtag}: negative tau")
        return self


def estimate(graph, tweets, hashtag, label="", attribution="all"):
    """All four estimates for the tweets of one hashtag."""
    tweets = list(tweets)
    log = AdoptionLog.from_tweets(tweets, hashtag)
    if not len(log):
        raise ValueError(f"no tweets carry #{hashtag}")
    tagged = [t for t in tweets if hashtag in extract_hashtags(t.text)]
    beta, (_, zero_degree) = adoption_fraction(graph, log, attribution, return_counts=True)
    missing = log.missing_from(graph)
    if missing:
        logger.info("#%s: %d users absent from the graph", hashtag, len(missing))
    return EpidemicEstimates(
        hashtag=hashtag,
        retweet_fraction=retweet_fraction(tagged),
        gamma=seeder_fraction(graph, log),
        beta=beta,
        tau_hours=activity_span(log),
        label=str(label),
        n_users=len(log),
        n_missing=len(missing),
        n_zero_degree=zero_degree,
    ).check()


def five_numbers(values):
    v = np.asarray(values, dtype=float)
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return dict(zip(("min", "q1", "median", "q3", "max"), (float(x) for x in q)))


def class_summary(estimates, classes=None, quantities=QUANTITIES):
    """Five-number summary per class and quantity.

    Returns:
        (summary, empty) where ``summary[cls][quantity]`` is a dict with keys
        min, q1, median, q3, max, and ``empty`` lists requested classes
        without members.
    """
    groups = defaultdict(list)
    for e in estimates:
        groups[e.label].append(e)
    if classes is None:
        classes = sorted(groups)
    summary, empty = {}, []
    for cls in classes:
        members = groups.get(str(cls), [])
        if not members:
            empty.append(str(cls))
            logger.warning("class %s has no members, omitted from summary", cls)
            continue
        summary[str(cls)] = {q: five_numbers([getattr(e, q) for e in members]) for q in quantities}
    return summary, empty


def quartile_rows(summary):
    rows = []
    for cls, per_q in summary.items():
        for q, stats in per_q.items():
            rows.append((cls, q, stats["min"], stats["q1"], stats["median"], stats["q3"], stats["max"]))
    return rows


def sampling_sensitivity(graph, logs, removed=(0.1, 0.3, 0.5, 0.7, 0.9), seed=0):
    """Re-estimate mean beta and gamma after removing a share of edges.

    Returns:
        list of dicts with ``removed``, ``beta``, ``gamma`` (means over the
        logs whose beta is defined), ``beta_drift`` and ``gamma_drift``
        relative to the full graph, in increasing order of ``removed``.
    """
    removed = sorted(float(r) for r in removed)
    if any(not 0.0 <= r < 1.0 for r in removed):
        raise ValueError("removal fractions must lie in [0, 1)")
    rng = np.random.default_rng(seed)

    def means(g):
        betas, gammas = [], []
        for log in logs:
            gammas.append(seeder_fraction(g, log))
            try:
                betas.append(adoption_fraction(g, log))
            except ValueError:
                pass
        return (float(np.mean(betas)) if betas else float("nan"), float(np.mean(gammas)))

    b0, g0 = means(graph)
    rows = []
    for r in removed:
        b, g = means(graph.subsample(1.0 - r, rng))
        rows.append({"removed": r, "beta": b, "gamma": g, "beta_drift": b - b0, "gamma_drift": g - g0})
    return rows


def write_estimates(path, estimates):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hashtag", "label", "retweet_fraction", "gamma", "beta", "tau_hours",
                    "n_users", "n_missing", "n_zero_degree"])
        for e in estimates:
            w.writerow([e.hashtag, e.label, repr(e.retweet_fraction), repr(e.gamma), repr(e.beta),
                        repr(e.tau_hours), e.n_users, e.n_missing, e.n_zero_degree])


def read_estimates(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"estimates file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return [EpidemicEstimates(r["hashtag"], float(r["retweet_fraction"]), float(r["gamma"]),
                                  float(r["beta"]), float(r["tau_hours"]), r["label"],
                                  int(r["n_users"]), int(r["n_missing"]), int(r["n_zero_degree"]))
                for r in csv.DictReader(fh)]


def write_summary(path, summary, empty=()):
    payload = {"classes": summary, "empty": list(empty)}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
