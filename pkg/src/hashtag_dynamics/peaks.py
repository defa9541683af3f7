"""Isolated activity-peak detection on daily series.

A day ``i0`` is a peak when its outlier fraction

    p(i0) = (n(i0) - n_b) / max(n_b, n_min)

exceeds ``p_t``, with ``n_b`` the median activity over the ``2L+1`` days
centred on ``i0`` (centre included).  Peaks closer than ``isolation_days``
to another peak are dropped, and the strongest survivor is re-indexed so
the peak falls on relative day 0.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DataError

logger = logging.getLogger(__name__)

EDGE_POLICIES = ("strict", "truncated")


@dataclass(frozen=True)
class PeakParams:
    L: int = 30
    n_min: float = 10
    p_t: float = 10
    isolation_days: int = 7

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.n_min < 1:
            raise ValueError("n_min must be >= 1")
        if self.p_t <= 0:
            raise ValueError("p_t must be > 0")
        if self.isolation_days < 1:
            raise ValueError("isolation_days must be >= 1")

    @property
    def window(self):
        return 2 * self.L + 1


class Peak(NamedTuple):
    day: int
    p: float
    baseline: float
    truncated: bool = False


@dataclass
class PeakRecord:
    hashtag: str
    peak_day: int
    outlier_fraction: float
    baseline: float
    aligned_counts: np.ndarray
    half_span: int = 7
    truncated: bool = False
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def relative_days(self):
        return np.arange(-self.half_span, self.half_span + 1)

    def at(self, rel_day):
        return int(self.aligned_counts[rel_day + self.half_span])


def _as_counts(series):
    counts = getattr(series, "counts", series)
    return np.asarray(counts, dtype=float)


def _check_edges(edges):
    if edges not in EDGE_POLICIES:
        raise ValueError(f"edges must be one of {EDGE_POLICIES}, got {edges!r}")


def outlier_stats(series, i0, params=PeakParams(), edges="strict"):
    """``(p, baseline, truncated)`` for day ``i0``."""
    _check_edges(edges)
    n = _as_counts(series)
    if not 0 <= i0 < len(n):
        raise IndexError(f"day {i0} outside series of length {len(n)}")
    lo, hi = i0 - params.L, i0 + params.L + 1
    truncated = lo < 0 or hi > len(n)
    if truncated and edges == "strict":
        raise ValueError(
            f"window [{lo}, {hi - 1}] around day {i0} leaves the series [0, {len(n) - 1}]")
    baseline = float(np.median(n[max(lo, 0):min(hi, len(n))]))
    p = (n[i0] - baseline) / max(baseline, params.n_min)
    return float(p), baseline, truncated


def outlier_fraction(series, i0, params=PeakParams(), edges="strict"):
    return outlier_stats(series, i0, params, edges)[0]


def outlier_profile(series, params=PeakParams(), edges="strict"):
    """Outlier fraction for every evaluable day.

    Returns:
        days, p, baselines, truncated -- four aligned arrays.
    """
    _check_edges(edges)
    n = _as_counts(series)
    size = len(n)
    w = params.window
    if edges == "strict" and size < w:
        raise ValueError(
            f"series has {size} days but the {w}-day window (2L+1, L={params.L}) needs at least {w}")
    days, base, trunc = [], [], []
    if size >= w:
        med = np.median(sliding_window_view(n, w), axis=1)
        days.append(np.arange(params.L, size - params.L))
        base.append(med)
        trunc.append(np.zeros(len(med), dtype=bool))
    if edges == "truncated":
        edge_days = [i for i in range(size) if i < params.L or i >= size - params.L]
        if edge_days:
            days.append(np.array(edge_days))
            base.append(np.array([
                np.median(n[max(i - params.L, 0):min(i + params.L + 1, size)]) for i in edge_days]))
            trunc.append(np.ones(len(edge_days), dtype=bool))
    if not days:
        return (np.zeros(0, dtype=int), np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool))
    days = np.concatenate(days)
    base = np.concatenate(base)
    trunc = np.concatenate(trunc)
    order = np.argsort(days, kind="stable")
    days, base, trunc = days[order], base[order], trunc[order]
    p = (n[days] - base) / np.maximum(base, params.n_min)
    return days, p, base, trunc


def detect_peaks(series, params=PeakParams(), edges="strict"):
    """All days with ``p > p_t``, sorted by day."""
    days, p, base, trunc = outlier_profile(series, params, edges)
    hit = p > params.p_t
    return [Peak(int(d), float(v), float(b), bool(t))
            for d, v, b, t in zip(days[hit], p[hit], base[hit], trunc[hit])]


def isolate_and_select(peaks, params=PeakParams(), include_flagged=False):
    """Drop peaks within ``isolation_days`` of another, return the strongest.

    Peaks exactly ``isolation_days`` apart both survive.  Flagged
    (truncated-window) peaks take part in the isolation test but are only
    eligible for selection when ``include_flagged`` is set.  Ties on ``p``
    go to the earliest day.
    """
    days = [pk.day for pk in peaks]
    if days != sorted(days):
        raise ValueError("peaks must be sorted by day")
    survivors = []
    for i, pk in enumerate(peaks):
        near_prev = i > 0 and pk.day - peaks[i - 1].day < params.isolation_days
        near_next = i + 1 < len(peaks) and peaks[i + 1].day - pk.day < params.isolation_days
        if not (near_prev or near_next):
            survivors.append(pk)
    if not include_flagged:
        survivors = [pk for pk in survivors if not pk.truncated]
    if not survivors:
        return None
    return max(survivors, key=lambda pk: (pk.p, -pk.day))


def align_to_peak(series, peak, half_span=7, hashtag=None, params=PeakParams()):
    """Re-index counts so the peak sits at relative day 0.

    ``peak`` is a :class:`Peak` or a bare day index; for a bare index the
    outlier fraction and baseline are computed with a truncated window if
    needed.
    """
    n = np.asarray(getattr(series, "counts", series))
    if hashtag is None:
        hashtag = getattr(series, "hashtag", "")
    if not isinstance(peak, Peak):
        p, base, trunc = outlier_stats(n, int(peak), params, edges="truncated")
        peak = Peak(int(peak), p, base, trunc)
    lo, hi = peak.day - half_span, peak.day + half_span + 1
    if lo < 0 or hi > len(n):
        raise ValueError(
            f"span of {half_span} days around day {peak.day} exceeds series of length {len(n)}")
    return PeakRecord(hashtag, peak.day, peak.p, peak.baseline,
                      np.array(n[lo:hi], dtype=np.int64), half_span, peak.truncated)


def find_peak(series, params=PeakParams(), edges="strict", half_span=7, include_flagged=False):
    """Detect, isolate, select and align; None when no usable peak exists."""
    chosen = isolate_and_select(detect_peaks(series, params, edges), params, include_flagged)
    if chosen is None:
        return None
    try:
        return align_to_peak(series, chosen, half_span)
    except ValueError as exc:
        logger.info("%s: %s", getattr(series, "hashtag", "?"), exc)
        return None


def write_peaks(path, records):
    """``hashtag,peak_day,p,baseline`` plus aligned counts in ``<stem>.aligned.csv``."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hashtag", "peak_day", "p", "baseline", "truncated"])
        for r in records:
            w.writerow([r.hashtag, r.peak_day, repr(float(r.outlier_fraction)),
                        repr(float(r.baseline)), int(r.truncated)])
    with open(aligned_path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hashtag", "rel_day", "count"])
        for r in records:
            for d, c in zip(r.relative_days, r.aligned_counts):
                w.writerow([r.hashtag, int(d), int(c)])


def aligned_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".aligned.csv")


def read_peaks(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"peaks file not found: {path}")
    rows = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows[row["hashtag"]] = row
    aligned = {tag: {} for tag in rows}
    with open(aligned_path(path), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            aligned[row["hashtag"]][int(row["rel_day"])] = int(row["count"])
    records = []
    for tag, row in rows.items():
        days = aligned[tag]
        half = max(days) if days else 0
        counts = np.array([days.get(d, 0) for d in range(-half, half + 1)], dtype=np.int64)
        records.append(PeakRecord(tag, int(row["peak_day"]), float(row["p"]), float(row["baseline"]),
                                  counts, half, bool(int(row.get("truncated", 0)))))
    return records
