"""Vector-level classifiers: Gaussian Bayes, k-nearest neighbours, nearest mean."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ArgumentError

__all__ = [
    "GaussianClassModel",
    "BayesResult",
    "bayes_fit",
    "bayes_log_densities",
    "bayes_classify",
    "knn_classify",
    "mahalanobis_distance",
    "bhattacharyya_distance",
    "nearest_mean_classify",
    "misclassification_rate",
]

REGULARIZATION = 1e-6


@dataclass(frozen=True)
class GaussianClassModel:
    labels: tuple
    means: np.ndarray  # (C, D)
    covariances: np.ndarray  # (C, D, D), regularized
    priors: np.ndarray  # (C,)
    regularization: float = REGULARIZATION

    @property
    def num_classes(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def bayes_fit(data, labels, regularization: float = REGULARIZATION) -> GaussianClassModel:
    """Per-class sample mean and covariance (N - 1 denominator) plus ``regularization * I``."""
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ArgumentError("data must be N x D with one label per row")
    classes = sorted(set(y.tolist()))
    if not classes:
        raise ArgumentError("bayes_fit needs training data")
    d = x.shape[1]
    means, covs = [], []
    for c in classes:
        rows = x[y == c]
        if rows.shape[0] < 2:
            raise ArgumentError(f"class {c!r} has fewer than 2 samples")
        means.append(rows.mean(axis=0))
        covs.append(np.cov(rows, rowvar=False).reshape(d, d) + regularization * np.eye(d))
    return GaussianClassModel(
        labels=tuple(classes),
        means=np.array(means),
        covariances=np.array(covs),
        priors=np.full(len(classes), 1.0 / len(classes)),
        regularization=regularization,
    )


def _vector(model: GaussianClassModel, x) -> np.ndarray:
    v = np.asarray(x, dtype=float).ravel()
    if v.size != model.dim:
        raise ArgumentError(f"expected a {model.dim}-vector, got {v.size} values")
    return v


def bayes_log_densities(model: GaussianClassModel, x) -> np.ndarray:
    """Log of each class-conditional Gaussian density at ``x``."""
    v = _vector(model, x)
    out = np.empty(model.num_classes)
    for k in range(model.num_classes):
        factor = cho_factor(model.covariances[k], lower=True)
        diff = v - model.means[k]
        maha = float(diff @ cho_solve(factor, diff))
        logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
        out[k] = -0.5 * (maha + logdet + model.dim * math.log(2 * math.pi))
    return out


@dataclass(frozen=True)
class BayesResult:
    label: object
    scores: np.ndarray


def bayes_classify(
    model: GaussianClassModel,
    x,
    output: Literal["probability", "possibility"] = "probability",
) -> BayesResult:
    """Score every class at ``x``.

    ``probability`` returns the class-conditional densities.  ``possibility``
    divides them by their maximum, so the winning class scores exactly 1.
    With uniform priors the argmax is the same in both modes.
    """
    logs = bayes_log_densities(model, x)
    best = int(np.argmax(logs))
    if output == "probability":
        scores = np.exp(logs)
    elif output == "possibility":
        scores = np.exp(logs - logs[best])
    else:
        raise ArgumentError(f"unknown output mode {output!r}")
    return BayesResult(model.labels[best], scores)


def _distances(train: np.ndarray, x: np.ndarray, metric: str) -> np.ndarray:
    diff = train - x
    if metric == "euclidean":
        return np.sqrt((diff**2).sum(axis=1))
    if metric == "manhattan":
        return np.abs(diff).sum(axis=1)
    raise ArgumentError(f"unknown metric {metric!r}")


def knn_classify(train, labels, x, k: int = 1, metric: str = "euclidean"):
    """Majority label among the ``k`` nearest training rows.

    Distance ties keep the lower training index; vote ties go to the
    smallest label.
    """
    t = np.asarray(train, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    y = list(labels)
    if len(y) != t.shape[0]:
        raise ArgumentError("one label per training row is required")
    if not 1 <= k <= t.shape[0]:
        raise ArgumentError(f"k must be in [1, {t.shape[0]}], got {k}")
    v = np.asarray(x, dtype=float).ravel()
    if v.size != t.shape[1]:
        raise ArgumentError("query dimension does not match training data")
    order = np.argsort(_distances(t, v, metric), kind="stable")[:k]
    votes: dict = {}
    for i in order:
        votes[y[i]] = votes.get(y[i], 0) + 1
    top = max(votes.values())
    return min(label for label, n in votes.items() if n == top)


def mahalanobis_distance(x, mean, cov) -> float:
    diff = np.asarray(x, float).ravel() - np.asarray(mean, float).ravel()
    return float(math.sqrt(max(diff @ np.linalg.solve(np.asarray(cov, float), diff), 0.0)))


def bhattacharyya_distance(mean1, cov1, mean2, cov2) -> float:
    """Bhattacharyya distance between two Gaussians."""
    m1, m2 = np.asarray(mean1, float).ravel(), np.asarray(mean2, float).ravel()
    s1, s2 = np.atleast_2d(np.asarray(cov1, float)), np.atleast_2d(np.asarray(cov2, float))
    s = (s1 + s2) / 2
    diff = m1 - m2
    term1 = diff @ np.linalg.solve(s, diff) / 8
    _, ld = np.linalg.slogdet(s)
    _, ld1 = np.linalg.slogdet(s1)
    _, ld2 = np.linalg.slogdet(s2)
    return float(term1 + 0.5 * (ld - 0.5 * (ld1 + ld2)))


def nearest_mean_classify(model: GaussianClassModel, x, metric: str = "euclidean"):
    """Label of the class mean closest to ``x``; ties keep the first class."""
    v = _vector(model, x)
    if metric == "mahalanobis":
        d = [mahalanobis_distance(v, model.means[k], model.covariances[k]) for k in range(model.num_classes)]
    else:
        d = _distances(model.means, v, metric)
    return model.labels[int(np.argmin(d))]


def misclassification_rate(predicted, actual) -> float:
    """Fraction of mismatched labels."""
    p, a = list(predicted), list(actual)
    if len(p) != len(a) or not p:
        raise ArgumentError("need two equal-length, nonempty label sequences")
    return sum(x != y for x, y in zip(p, a)) / len(p)
