"""Activity peaks, dynamical classes, semantics and spreading of hashtags."""

__version__ = "0.1.0"

from .errors import DataError, InvariantError  # noqa: E402
from .features import FeatureTriple, compute_triple, simplex_coordinates  # noqa: E402
from .ingest import ActivitySeries, TweetRecord, extract_hashtags, read_tweets  # noqa: E402
from .mixture import ClassLabel, MixtureModel, em_fit, select_model  # noqa: E402
from .peaks import PeakParams, PeakRecord, detect_peaks, find_peak  # noqa: E402

__all__ = [
    "ActivitySeries",
    "ClassLabel",
    "DataError",
    "FeatureTriple",
    "InvariantError",
    "MixtureModel",
    "PeakParams",
    "PeakRecord",
    "TweetRecord",
    "compute_triple",
    "detect_peaks",
    "em_fit",
    "extract_hashtags",
    "find_peak",
    "read_tweets",
    "select_model",
    "simplex_coordinates",
]
