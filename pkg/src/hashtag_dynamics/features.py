"""Before/peak/after activity fractions and their ternary projection."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .peaks import PeakParams

SQRT3_2 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class FeatureTriple:
    hashtag: str
    f_b: float
    f_p: float
    f_a: float

    def as_tuple(self):
        return (self.f_b, self.f_p, self.f_a)


def compute_triple(peak, hashtag=None):
    """Fractions of the window's tweets before, on and after the peak day.

    ``peak`` is a PeakRecord or a bare array of 15 aligned counts
    (relative days -7..+7).  ``f_p`` is computed as the remainder so the
    three fractions sum to one up to a single rounding.

    Raises:
        ValueError: the window total is zero or the window is malformed.
    """
    counts = np.asarray(getattr(peak, "aligned_counts", peak), dtype=float)
    if hashtag is None:
        hashtag = getattr(peak, "hashtag", "")
    if counts.ndim != 1 or len(counts) % 2 != 1:
        raise ValueError("aligned window must be a 1-D array of odd length")
    if np.any(counts < 0) or not np.all(np.isfinite(counts)):
        raise ValueError("aligned counts must be finite and non-negative")
    mid = len(counts) // 2
    total = counts.sum()
    if total <= 0:
        raise ValueError(f"{hashtag or 'window'}: zero total activity, cannot normalize")
    f_b = counts[:mid].sum() / total
    f_a = counts[mid + 1:].sum() / total
    f_p = counts[mid] / total
    return FeatureTriple(hashtag, float(f_b), float(f_p), float(f_a))


def ternary_xy(f_b, f_p, f_a):
    """Project a simplex point onto the plane: Before at (0, 0), After at (1, 0)."""
    return f_a + f_p / 2.0, SQRT3_2 * f_p


def simplex_coordinates(triples):
    """Rows ``(hashtag, f_b, f_p, f_a, x, y)`` for ternary plotting."""
    rows = []
    for t in triples:
        x, y = ternary_xy(t.f_b, t.f_p, t.f_a)
        rows.append((t.hashtag, t.f_b, t.f_p, t.f_a, x, y))
    return rows


def min_peak_fraction(peak, params=PeakParams()):
    """Smallest ``f_p`` compatible with the peak having passed the detector.

    Passing requires ``n(0) > n_b + p_t * max(n_b, n_min)``; dividing by the
    window total gives a floor on ``f_p``.  Triples with ``f_p`` at or below
    the floor lie in the region the detector excludes.
    """
    total = float(np.sum(peak.aligned_counts))
    if total <= 0:
        raise ValueError("zero window total")
    threshold = peak.baseline + params.p_t * max(peak.baseline, params.n_min)
    return threshold / total


def in_excluded_region(triple, peak, params=PeakParams()):
    return triple.f_p <= min_peak_fraction(peak, params)


def write_features(path, triples):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hashtag", "fb", "fp", "fa"])
        for t in triples:
            w.writerow([t.hashtag, repr(t.f_b), repr(t.f_p), repr(t.f_a)])


def read_features(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"features file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return [FeatureTriple(r["hashtag"], float(r["fb"]), float(r["fp"]), float(r["fa"]))
                for r in csv.DictReader(fh)]
