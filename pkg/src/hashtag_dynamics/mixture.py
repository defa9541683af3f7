"""Diagonal-covariance Gaussian mixtures fitted by EM, with BIC selection.

All random restarts of one fit run together as stacked arrays of shape
``(restarts, n, K)``; each restart stops on its own convergence test and
the restart with the best final log-likelihood is kept.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-6
EMPTY_COMPONENT = 1e-8
# tolerated rounding in the summed log-likelihood before switching E-step form
EXPANSION_BOUND = 1e-11
_EPS = np.finfo(float).eps
LOG_2PI = math.log(2.0 * math.pi)


class ClassLabel(str, Enum):
    BEFORE = "Before"
    AFTER = "After"
    SYMMETRIC = "Symmetric"
    PEAK_DAY = "PeakDay"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: tuple
    variances: tuple


@dataclass
class MixtureModel:
    weights: np.ndarray      # (K,)
    means: np.ndarray        # (K, D)
    variances: np.ndarray    # (K, D)
    log_likelihood: float
    n_points: int
    history: list = field(default_factory=list, repr=False)
    rescues: list = field(default_factory=list, repr=False)
    converged: bool = True

    @property
    def K(self):
        return len(self.weights)

    @property
    def n_params(self):
        # means + variances per axis, plus K-1 free weights
        return self.K * (2 * self.means.shape[1] + 1) - 1

    @property
    def components(self):
        return [GaussianComponent(float(w), tuple(m), tuple(v))
                for w, m, v in zip(self.weights, self.means, self.variances)]

    def component_log_densities(self, points):
        """``log(w_k) + log N(x | mu_k, diag(var_k))`` as an (n, K) array."""
        X = _check_points(points)
        return _log_joint(X, self.weights[None], self.means[None], self.variances[None])[0]

    def log_density(self, points):
        return _logsumexp(self.component_log_densities(points), axis=-1)

    def posteriors(self, points):
        lj = self.component_log_densities(points)
        post = np.exp(lj - _logsumexp(lj, axis=-1)[:, None])
        return post / post.sum(axis=1, keepdims=True)

    def sorted(self):
        """Components reordered by ``m_b + m_a`` (then ``m_b``)."""
        order = np.lexsort((self.means[:, 0], self.means.sum(axis=1)))
        return MixtureModel(self.weights[order], self.means[order], self.variances[order],
                            self.log_likelihood, self.n_points, self.history, self.rescues,
                            self.converged)

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_likelihood": self.log_likelihood,
            "n_points": self.n_points,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["weights"], float), np.array(d["means"], float),
                   np.array(d["variances"], float), float(d["log_likelihood"]),
                   int(d["n_points"]), converged=bool(d.get("converged", True)))


def _check_points(points):
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, D) array")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")
    return X


def _logsumexp(a, axis):
    m = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - m), axis=axis)) + np.squeeze(m, axis=axis)
    return out


def _e_step(lj):
    """Per-point log-likelihood (R, n) and responsibilities (R, n, K).

    K is small, so the max over components is taken column by column and
    the sum as a matmul; both are much faster than axis reductions here.
    """
    K = lj.shape[-1]
    m = lj[..., 0].copy()
    for k in range(1, K):
        np.maximum(m, lj[..., k], out=m)
    e = np.exp(lj - m[..., None])
    s = e @ np.ones(K)
    resp = e / s[..., None]
    return np.log(s) + m, resp


def _log_joint(X, weights, means, variances):
    """Stacked ``log w + log N`` of shape (R, n, K).

    The quadratic form is normally expanded so that one matmul against the
    design ``[x^2, x]`` evaluates every (restart, point, component).  The
    expansion subtracts terms of size ``x^2 / v``, so its rounding grows as
    variances shrink; once the bound on the summed error could reach
    ``EXPANSION_BOUND`` the squared distances are formed directly instead.
    """
    inv = 1.0 / variances                                   # (R, K, D)
    const = np.log(weights) - 0.5 * np.sum(np.log(variances) + LOG_2PI, axis=2)  # (R, K)
    scale = np.max(X * X) + np.max(means * means)
    if _EPS * X.size * scale * inv.max() < EXPANSION_BOUND:
        design = np.concatenate([X * X, X], axis=1)            # (n, 2D)
        coef = np.concatenate([-0.5 * inv, means * inv], axis=2)  # (R, K, 2D)
        const = const - 0.5 * np.sum(means * means * inv, axis=2)
        return design @ coef.transpose(0, 2, 1) + const[:, None, :]
    z = np.zeros((means.shape[0], X.shape[0], means.shape[1]))
    for d in range(X.shape[1]):
        diff = X[None, :, d, None] - means[:, None, :, d]   # (R, n, K)
        z += diff * diff * inv[:, None, :, d]
    return const[:, None, :] - 0.5 * z


def _kmeanspp(X, K, rng):
    n = len(X)
    idx = [int(rng.integers(n))]
    d2 = np.sum((X - X[idx[0]]) ** 2, axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[idx].copy()


def _m_step(X, resp, floor):
    nk = resp.sum(axis=1)                                   # (R, K)
    safe = np.maximum(nk, np.finfo(float).tiny)[..., None]
    rt = resp.transpose(0, 2, 1)                            # (R, K, n)
    means = (rt @ X) / safe
    second = (rt @ (X * X)) / safe
    variances = np.maximum(second - means * means, floor)
    weights = nk / nk.sum(axis=1, keepdims=True)
    return weights, means, variances, nk


def em_fit(points, K, seed=0, tol=1e-6, max_iter=1000, restarts=1,
           variance_floor=VARIANCE_FLOOR, return_all=False):
    """Fit a K-component diagonal Gaussian mixture by EM.

    Args:
        points: (n, D) array.
        K: number of components, at most n.
        seed: int or ``numpy.random.Generator``.
        tol: stop once the log-likelihood, averaged per point, improves by
            less than this between iterations.
        max_iter: hard cap on EM iterations.
        restarts: independent k-means++ initializations; the best final
            log-likelihood wins (ties go to the earliest restart).
        return_all: also return the list of every restart's model.

    Returns:
        MixtureModel (and the per-restart list if ``return_all``).
    """
    X = _check_points(points)
    n, D = X.shape
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > n:
        raise ValueError(f"K={K} exceeds the number of points ({n})")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    R = restarts
    init_var = np.maximum(X.var(axis=0), variance_floor)
    means = np.stack([_kmeanspp(X, K, rng) for _ in range(R)])
    variances = np.broadcast_to(init_var, (R, K, D)).copy()
    weights = np.full((R, K), 1.0 / K)

    active = np.arange(R)
    history = np.full((R, max_iter + 1), np.nan)
    n_iter = np.zeros(R, dtype=int)
    rescues = [[] for _ in range(R)]
    just_rescued = np.zeros(R, dtype=bool)
    converged = np.zeros(R, dtype=bool)
    tol_total = tol * n

    for it in range(max_iter + 1):
        lj = _log_joint(X, weights[active], means[active], variances[active])
        point_ll, resp = _e_step(lj)
        total = point_ll.sum(axis=1)
        history[active, it] = total
        n_iter[active] = it + 1
        if it > 0:
            done = (total - history[active, it - 1] < tol_total) & ~just_rescued[active]
            converged[active[done]] = True
        else:
            done = np.zeros(len(active), dtype=bool)
        if it == max_iter:
            break
        keep = ~done
        active = active[keep]
        if len(active) == 0:
            break
        point_ll, resp = point_ll[keep], resp[keep]
        w, m, v, nk = _m_step(X, resp, variance_floor)
        just_rescued[active] = False
        for j, k in zip(*np.nonzero(nk < EMPTY_COMPONENT)):
            # move a starved component onto the worst-explained point
            worst = int(np.argmin(point_ll[j]))
            m[j, k] = X[worst]
            v[j, k] = init_var
            w[j, k] = 1.0 / n
            w[j] /= w[j].sum()
            if not rescues[active[j]] or rescues[active[j]][-1] != it:
                rescues[active[j]].append(it)
            just_rescued[active[j]] = True
        weights[active], means[active], variances[active] = w, m, v

    final_ll = history[np.arange(R), n_iter - 1]
    models = [MixtureModel(weights[r].copy(), means[r].copy(), variances[r].copy(),
                           float(final_ll[r]), n, history[r, :n_iter[r]].tolist(), rescues[r],
                           bool(converged[r]))
              for r in range(R)]
    best = models[int(np.argmax(final_ll))]
    if not best.converged:
        logger.warning("EM did not converge within %d iterations (K=%d)", max_iter, K)
    return (best, models) if return_all else best


def is_monotone(model, tol=1e-9):
    """True when the log-likelihood never drops by more than ``tol``.

    Steps that follow a starved-component rescue are exempt.
    """
    h = model.history
    return all(h[i + 1] >= h[i] - tol for i in range(len(h) - 1) if i not in model.rescues)


def bic(model):
    """``2 logL - p ln n``; larger is better."""
    return 2.0 * model.log_likelihood - model.n_params * math.log(model.n_points)


def _seed_for(seed, *keys):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def select_model(points, K_range=range(1, 9), restarts=20, seed=0, **em_options):
    """Fit every K and keep the one with the largest BIC.

    Returns:
        (best model, table) where table rows are dicts with keys
        ``K``, ``log_likelihood``, ``n_params``, ``bic``.  Equal BIC
        values resolve to the smaller K.
    """
    K_range = list(K_range)
    if not K_range:
        raise ValueError("K_range is empty")
    table, best, best_score = [], None, -np.inf
    for K in K_range:
        model = em_fit(points, K, seed=_seed_for(seed, K), restarts=restarts, **em_options)
        score = bic(model)
        table.append({"K": K, "log_likelihood": model.log_likelihood,
                      "n_params": model.n_params, "bic": score})
        if score > best_score:
            best, best_score = model, score
    return best, table


def cross_validate(points, K_range=range(1, 9), folds=10, seed=0, restarts=5, **em_options):
    """Mean held-out log density per point, for each K.

    Points are shuffled once by ``seed`` and cut into ``folds`` nearly equal
    parts; the per-fold means are averaged.

    Returns:
        dict mapping K to the averaged held-out log density.
    """
    X = _check_points(points)
    n = len(X)
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if n < folds:
        raise ValueError(f"{n} points cannot be split into {folds} folds")
    perm = np.random.default_rng(np.random.SeedSequence([int(seed), 0xCF])).permutation(n)
    parts = np.array_split(perm, folds)
    scores = {}
    for K in K_range:
        fold_scores = []
        for f, test in enumerate(parts):
            train = np.concatenate([p for g, p in enumerate(parts) if g != f])
            if K > len(train):
                raise ValueError(f"K={K} exceeds training fold size {len(train)}")
            model = em_fit(X[train], K, seed=_seed_for(seed, K, f + 1), restarts=restarts, **em_options)
            fold_scores.append(float(model.log_density(X[test]).mean()))
        scores[K] = float(np.mean(fold_scores))
    return scores


@dataclass(frozen=True)
class LabelRule:
    """Thresholds mapping a component mean ``(m_b, m_a)`` to a class."""

    peak_sum: float = 0.25
    ratio: float = 2.0

    def __call__(self, m_b, m_a):
        if m_b + m_a < self.peak_sum:
            return ClassLabel.PEAK_DAY
        if m_b > self.ratio * m_a:
            return ClassLabel.BEFORE
        if m_a > self.ratio * m_b:
            return ClassLabel.AFTER
        return ClassLabel.SYMMETRIC


def label_components(model, rule=LabelRule()):
    """Label per component, plus a list of warnings.

    Canonical labeling expects four components with four distinct labels;
    anything else is still labeled by the same rule but flagged.
    """
    labels = [rule(float(m[0]), float(m[1])) for m in model.means]
    flags = []
    if model.K != 4:
        flags.append(f"model has {model.K} components, expected 4")
    dupes = sorted({str(l) for l in labels if labels.count(l) > 1})
    if dupes:
        flags.append("duplicate labels: " + ", ".join(dupes))
    for msg in flags:
        logger.warning(msg)
    return labels, flags


@dataclass
class Assignment:
    hashtag: str
    posteriors: np.ndarray
    label: ClassLabel
    uncertainty: float

    @property
    def component(self):
        return int(np.argmax(self.posteriors))


def classify(model, labels, point, hashtag=""):
    return classify_points(model, labels, [point], [hashtag])[0]


def classify_points(model, labels, points, hashtags=None):
    """Posterior assignment of each point; ties go to the lowest index."""
    X = _check_points(points)
    post = model.posteriors(X)
    if hashtags is None:
        hashtags = [""] * len(X)
    out = []
    for tag, row in zip(hashtags, post):
        k = int(np.argmax(row))
        out.append(Assignment(tag, row, labels[k], float(1.0 - row[k])))
    return out


def adjusted_rand_index(a, b):
    """Adjusted Rand index between two labelings of the same items."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("labelings differ in length")
    n = len(a)
    if n < 2:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def pairs(x):
        return float(np.sum(x * (x - 1)) / 2.0)

    index = pairs(table)
    sa, sb = pairs(table.sum(axis=1)), pairs(table.sum(axis=0))
    total = n * (n - 1) / 2.0
    expected = sa * sb / total
    maximum = (sa + sb) / 2.0
    if maximum == expected:
        return 1.0
    return (index - expected) / (maximum - expected)


def write_model(path, model, labels, extra=None):
    d = model.to_dict()
    d["labels"] = [str(l) for l in labels]
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_model(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"model file not found: {path}")
    d = json.loads(path.read_text(encoding="utf-8"))
    return MixtureModel.from_dict(d), [ClassLabel(l) for l in d["labels"]]


def write_assignments(path, assignments, points):
    K = len(assignments[0].posteriors) if assignments else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hashtag", "fb", "fa", "label", "uncertainty"]
                   + [f"posterior_{k + 1}" for k in range(K)])
        for a, p in zip(assignments, points):
            w.writerow([a.hashtag, repr(float(p[0])), repr(float(p[1])), str(a.label),
                        repr(a.uncertainty)] + [repr(float(x)) for x in a.posteriors])


def read_assignments(path):
    """``{hashtag: (label, uncertainty)}`` from an assignment CSV."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"assignment file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return {r["hashtag"]: (ClassLabel(r["label"]), float(r["uncertainty"]))
                for r in csv.DictReader(fh)}
