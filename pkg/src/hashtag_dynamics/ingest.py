"""Tweet parsing, hashtag extraction and daily activity series."""

import csv
import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400
HASHTAG_RE = re.compile(r"#([A-Za-z0-9_]*)")


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    user_id: str
    timestamp: int  # UTC epoch seconds
    text: str
    is_retweet: bool = False
    retweet_source_user: Optional[str] = None
    reply_to: Optional[str] = None

    def to_json(self):
        obj = {"id": self.tweet_id, "user": self.user_id, "ts": self.timestamp, "text": self.text}
        if self.retweet_source_user is not None:
            obj["rt_user"] = self.retweet_source_user
        if self.reply_to is not None:
            obj["reply_to"] = self.reply_to
        return obj


@dataclass(frozen=True)
class HashtagOccurrence:
    hashtag: str
    tweet_id: str
    user_id: str
    day_index: int


@dataclass
class ActivitySeries:
    hashtag: str
    counts: np.ndarray
    distinct_users: int

    @property
    def total(self):
        return int(self.counts.sum())

    def __len__(self):
        return len(self.counts)


def extract_hashtags(text):
    """Hashtags in order of appearance, lowercased and without ``#``.

    A bare ``#`` (no tag characters after it) yields nothing.

    >>> extract_hashtags("Watching #Oscars with #oscars!")
    ['oscars', 'oscars']
    """
    return [m.lower() for m in HASHTAG_RE.findall(text) if m]


def parse_timestamp(value):
    """Epoch seconds from an integer or an ISO-8601 string (naive means UTC)."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        s = value.strip()
        if s.lstrip("-").isdigit():
            return int(s)
        if s.endswith("Z"):
            s = s[:-1] + "+00:00"
        dt = datetime.fromisoformat(s)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"unsupported timestamp {value!r}")


def day_start(day):
    """Epoch seconds of UTC midnight for a date or ``YYYY-MM-DD`` string."""
    if isinstance(day, str):
        day = date.fromisoformat(day)
    if isinstance(day, datetime):
        day = day.date()
    return int(datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp())


def parse_tweet(obj):
    rt_user = obj.get("rt_user")
    reply_to = obj.get("reply_to")
    text = obj["text"]
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    return TweetRecord(
        tweet_id=str(obj["id"]),
        user_id=str(obj["user"]),
        timestamp=parse_timestamp(obj["ts"]),
        text=text,
        is_retweet=rt_user is not None,
        retweet_source_user=None if rt_user is None else str(rt_user),
        reply_to=None if reply_to is None else str(reply_to),
    )


def read_tweets(path):
    """Read a JSON-Lines tweet file.

    Malformed lines and repeated tweet ids are skipped and counted.

    Returns:
        (tweets, n_skipped)

    Raises:
        DataError: the file does not exist or holds no valid tweet.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"tweet file not found: {path}")
    tweets = []
    seen = set()
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = parse_tweet(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                skipped += 1
                logger.debug("%s:%d skipped: %s", path, lineno, exc)
                continue
            if rec.tweet_id in seen:
                skipped += 1
                continue
            seen.add(rec.tweet_id)
            tweets.append(rec)
    if skipped:
        logger.warning("%s: skipped %d malformed or duplicate lines", path, skipped)
    if not tweets:
        raise DataError(f"no valid tweets in {path}")
    return tweets, skipped


def write_tweets(path, tweets):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in tweets:
            fh.write(json.dumps(t.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def occurrences(tweets, start):
    """One occurrence per (tweet, distinct hashtag), binned by UTC day.

    ``start`` is the epoch second of the first day's midnight.  A tweet that
    repeats a tag still counts once, since activity is the number of tweets
    containing the tag.
    """
    for t in tweets:
        tags = dict.fromkeys(extract_hashtags(t.text))
        if not tags:
            continue
        day = (t.timestamp - start) // SECONDS_PER_DAY
        for tag in tags:
            yield HashtagOccurrence(tag, t.tweet_id, t.user_id, int(day))


def build_daily_series(occs, window_days):
    """Daily counts and distinct-user totals per hashtag.

    Returns:
        (series by hashtag, number of occurrences rejected for falling
        outside ``[0, window_days)``)
    """
    if window_days <= 0:
        raise ValueError("window_days must be positive")
    counts = defaultdict(lambda: np.zeros(window_days, dtype=np.int64))
    users = defaultdict(set)
    rejected = 0
    for occ in occs:
        if not 0 <= occ.day_index < window_days:
            rejected += 1
            continue
        counts[occ.hashtag][occ.day_index] += 1
        users[occ.hashtag].add(occ.user_id)
    if rejected:
        logger.info("rejected %d occurrences outside the %d-day window", rejected, window_days)
    series = {tag: ActivitySeries(tag, counts[tag], len(users[tag])) for tag in sorted(counts)}
    return series, rejected


def filter_popular(series_map, min_users=500):
    """Keep hashtags used by at least ``min_users`` distinct users."""
    if min_users < 1:
        raise ValueError("min_users must be positive")
    return {tag: s for tag, s in series_map.items() if s.distinct_users >= min_users}


def tweets_by_hashtag(tweets, hashtags=None):
    wanted = None if hashtags is None else set(hashtags)
    groups = defaultdict(list)
    for t in tweets:
        for tag in dict.fromkeys(extract_hashtags(t.text)):
            if wanted is None or tag in wanted:
                groups[tag].append(t)
    return dict(groups)


def write_series(path, series_map, window_days, start=None, **summary):
    """Write ``hashtag,day,count`` rows (non-zero days) plus a JSON summary.

    The summary lands next to the CSV with a ``.json`` suffix and carries
    the window length, so zero days can be restored on read.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hashtag", "day", "count"])
        for tag in sorted(series_map):
            s = series_map[tag]
            for day in np.flatnonzero(s.counts):
                w.writerow([tag, int(day), int(s.counts[day])])
    info = {
        "window_days": int(window_days),
        "start": start,
        "hashtags": {
            tag: {"distinct_users": s.distinct_users, "total": s.total}
            for tag, s in sorted(series_map.items())
        },
        **summary,
    }
    path.with_suffix(".json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_series(path):
    path = Path(path)
    summary_path = path.with_suffix(".json")
    if not path.exists() or not summary_path.exists():
        raise DataError(f"series file or summary missing: {path}")
    info = json.loads(summary_path.read_text(encoding="utf-8"))
    n = info["window_days"]
    series = {
        tag: ActivitySeries(tag, np.zeros(n, dtype=np.int64), meta["distinct_users"])
        for tag, meta in info["hashtags"].items()
    }
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            series[row["hashtag"]].counts[int(row["day"])] = int(row["count"])
    return series, info
