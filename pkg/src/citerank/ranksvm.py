"""Linear ranking SVM: pairwise hinge training, pointwise scoring, and
gap-style tie-aware rankings.

Training minimizes the convex objective

    J(w) = 0.5 ||w||^2 + C * sum over within-group pairs (i, j) with
           grade_i > grade_j of max(0, 1 - w . (x_i - x_j))

by seeded stochastic subgradient descent in the Pegasos style: pairs are
shuffled each epoch, the step at global step t is 1/(lambda * t) with
lambda = 1 / (C * n_pairs), the iterate starts at zero, and the returned
weight vector is the running average of all iterates. Identical inputs
and hyperparameters give bit-identical weights.

Only pairs within one query group and with strictly different grades
generate constraints; grades are never compared across documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .features import FEATURE_NAMES, FeatureVector, QueryGroup


@dataclass(frozen=True)
class Hyperparams:
    """Training configuration; ``feature_mask`` names the active features."""

    c: float = 1.0
    epochs: int = 200
    seed: int = 0
    feature_mask: tuple[str, ...] = tuple(FEATURE_NAMES)

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("regularization tradeoff C must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.feature_mask:
            raise ValueError("feature mask must be non-empty")
        unknown = [n for n in self.feature_mask if n not in FEATURE_NAMES]
        if unknown:
            raise ValueError(f"unknown features in mask: {unknown}")
        object.__setattr__(self, "feature_mask", tuple(self.feature_mask))

    def to_dict(self) -> dict:
        return {"c": self.c, "epochs": self.epochs, "seed": self.seed,
                "feature_mask": list(self.feature_mask)}

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(c=d["c"], epochs=d["epochs"], seed=d["seed"],
                   feature_mask=tuple(d["feature_mask"]))


@dataclass(frozen=True, eq=False)
class RankingModel:
    """Learned weights over the masked features, plus provenance."""

    weights: np.ndarray
    hyperparams: Hyperparams
    training_objective: float

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.shape != (len(self.hyperparams.feature_mask),):
            raise ValueError("one weight per masked feature required")
        if not np.isfinite(weights).all():
            raise ValueError("model weights must be finite")
        object.__setattr__(self, "weights", weights)
        weights.setflags(write=False)

    def save(self, stream: TextIO) -> None:
        record = {
            "feature_mask": list(self.hyperparams.feature_mask),
            "weights": [float(w) for w in self.weights],
            "hyperparams": self.hyperparams.to_dict(),
            "training_objective": float(self.training_objective),
        }
        stream.write(json.dumps(record, indent=2) + "\n")

    @classmethod
    def load(cls, stream: TextIO) -> "RankingModel":
        record = json.load(stream)
        hp = Hyperparams.from_dict(record["hyperparams"])
        if tuple(record["feature_mask"]) != hp.feature_mask:
            raise ValueError("model file mask disagrees with hyperparameters")
        return cls(weights=np.array(record["weights"], dtype=np.float64),
                   hyperparams=hp,
                   training_objective=float(record["training_objective"]))


def _pair_differences(groups: Sequence[QueryGroup],
                      feature_mask: Sequence[str]) -> np.ndarray:
    """Stack x_i - x_j over all within-group pairs with grade_i > grade_j."""
    rows = []
    for group in groups:
        if not group.has_grades:
            raise ValueError(f"query group {group.doc_id!r} has no grades; "
                             "training needs graded groups")
        X = group.matrix(feature_mask)
        grades = group.grades()
        n = len(grades)
        for i in range(n):
            for j in range(n):
                if grades[i] > grades[j]:
                    rows.append(X[i] - X[j])
    if not rows:
        raise ValueError("no trainable pairs: no group has two distinct grades")
    D = np.stack(rows)
    if not np.isfinite(D).all():
        raise ValueError("non-finite feature values in training data")
    return D


def _objective_at(w: np.ndarray, D: np.ndarray, c: float) -> float:
    margins = D @ w
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def train(groups: Sequence[QueryGroup], hp: Hyperparams) -> RankingModel:
    """Fit the pairwise objective; deterministic given (groups, hp)."""
    D = _pair_differences(groups, hp.feature_mask)
    m, dim = D.shape
    rng = np.random.default_rng(hp.seed)
    w = np.zeros(dim)
    w_avg = np.zeros(dim)
    step_scale = hp.c * m  # eta_t = 1/(lambda t) with lambda = 1/(C m)
    t = 0
    for _ in range(hp.epochs):
        for idx in rng.permutation(m):
            t += 1
            d = D[idx]
            margin = float(w @ d)
            w *= 1.0 - 1.0 / t
            if margin < 1.0:
                w += (step_scale / t) * d
            w_avg += (w - w_avg) / t
    return RankingModel(weights=w_avg, hyperparams=hp,
                        training_objective=_objective_at(w_avg, D, hp.c))


def objective(model: RankingModel, groups: Sequence[QueryGroup]) -> float:
    """Evaluate the training objective at the model's weights."""
    D = _pair_differences(groups, model.hyperparams.feature_mask)
    return _objective_at(model.weights, D, model.hyperparams.c)


def score(model: RankingModel, fv: FeatureVector) -> float:
    """Dot product of the weights with the masked features. Callers are
    expected to pass normalized vectors, matching how models are trained."""
    cols = [FEATURE_NAMES.index(n) for n in model.hyperparams.feature_mask]
    return float(model.weights @ fv.values[cols])


def score_group(model: RankingModel, group: QueryGroup) -> list[float]:
    X = group.matrix(model.hyperparams.feature_mask)
    return [float(s) for s in X @ model.weights]


def rank_with_ties(scores: Sequence[float]) -> list[int]:
    """Gap ranking: the best score gets rank n; tied candidates share the
    rank of the lowest position they jointly occupy and the ranks above
    are skipped, e.g. scores [.9, .5, .5, .3, .1] -> [5, 3, 3, 2, 1].

    Equality is exact value comparison.
    """
    n = len(scores)
    if n == 0:
        raise ValueError("cannot rank an empty score list")
    order = sorted(range(n), key=lambda i: (-scores[i], i))
    ranks = [0] * n
    pos = 0
    while pos < n:
        end = pos
        while end + 1 < n and scores[order[end + 1]] == scores[order[pos]]:
            end += 1
        for k in range(pos, end + 1):
            ranks[order[k]] = n - end
        pos = end + 1
    return ranks


def rank_group(model: RankingModel, group: QueryGroup) -> list[int]:
    """Score a group and apply the gap-ranking rule."""
    return rank_with_ties(score_group(model, group))
