"""Shared helpers: tiny ranking instances and the grid-search oracle used
to check the trainer. Everything here is deliberately independent of the
trainer's own pair/objective code paths."""

import numpy as np

from citerank.features import FEATURE_NAMES, Candidate, FeatureVector, QueryGroup


def group_from_matrix(doc_id, matrix, feature_names, grades=None):
    """Build a QueryGroup whose named features take the given column values;
    all other features are zero."""
    matrix = np.asarray(matrix, dtype=float)
    candidates = []
    for i, row in enumerate(matrix):
        mapping = {name: 0.0 for name in FEATURE_NAMES}
        for name, value in zip(feature_names, row):
            mapping[name] = float(value)
        candidates.append(Candidate(
            ref_id=f"r{i}",
            features=FeatureVector.from_dict(mapping, normalized=True),
            grade=None if grades is None else int(grades[i])))
    return QueryGroup(doc_id=doc_id, candidates=candidates)


def random_tiny_instance(rng, feature_names, n_groups=3, n_candidates=3):
    """Random graded groups over the named features, values in [0, 1]."""
    groups = []
    for g in range(n_groups):
        matrix = rng.uniform(0.0, 1.0, size=(n_candidates, len(feature_names)))
        grades = rng.permutation(n_candidates) + 1
        groups.append(group_from_matrix(f"g{g}", matrix, feature_names, grades))
    return groups


def enumerate_pair_differences(groups, feature_names):
    """Independent pair enumeration: x_i - x_j for grade_i > grade_j."""
    rows = []
    for group in groups:
        X = group.matrix(feature_names)
        grades = group.grades()
        for i in range(len(grades)):
            for j in range(len(grades)):
                if grades[i] > grades[j]:
                    rows.append(X[i] - X[j])
    return np.stack(rows)


def hinge_objective(w, D, c):
    margins = D @ w
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def grid_search_min(D, c, coarse=321, fine=201, refinements=3):
    """Dense 2-d grid search for the pairwise hinge objective.

    A coarse global grid over the ball that must contain the optimum
    (J(w*) <= J(0) = c*m bounds ||w*||), then box refinements around the
    incumbent; valid because the objective is convex.
    """
    if D.shape[1] != 2:
        raise ValueError("grid oracle handles exactly 2 features")
    lim = float(np.sqrt(2.0 * c * len(D))) + 1.0

    def evaluate(xs, ys):
        W = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
        J = (0.5 * (W ** 2).sum(axis=1)
             + c * np.maximum(0.0, 1.0 - D @ W.T).sum(axis=0))
        k = int(np.argmin(J))
        return float(J[k]), W[k]

    xs = np.linspace(-lim, lim, coarse)
    best_j, best_w = evaluate(xs, xs)
    step = xs[1] - xs[0]
    for _ in range(refinements):
        xs = np.linspace(best_w[0] - 2 * step, best_w[0] + 2 * step, fine)
        ys = np.linspace(best_w[1] - 2 * step, best_w[1] + 2 * step, fine)
        j, w = evaluate(xs, ys)
        if j < best_j:
            best_j, best_w = j, w
        step = xs[1] - xs[0]
    return best_j
