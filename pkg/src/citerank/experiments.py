"""Experiment harness: baselines, randomized sub-sampling evaluation,
forward feature selection, cross-training comparisons, and paired
significance testing.

The central operation is :func:`run_subsampling`: repeatedly split the
query groups at the document level (70/30 by default), train a ranking
model on the training side (or apply a frozen ranker), rank the held-out
test groups, and score every test ranking with NDCG, Kendall's tau, and
tau_ap against the author grades. Per-repeat seeds derive from the plan
seed through a fixed mixing function, so a whole run is reproducible from
one integer while repeats stay independent. Results aggregate both ways:
per-split means (average the per-query values inside each repeat first)
and pooled per-query values across all repeats.
"""

from __future__ import annotations

import dataclasses
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

import numpy as np

from . import metrics
from .corpus import ExternalRanking, external_to_relevance
from .features import FEATURE_NAMES, Candidate, QueryGroup
from .ranksvm import Hyperparams, RankingModel, rank_group, rank_with_ties, train

GroupRanker = Callable[[QueryGroup], Sequence[int]]

# Published reference rows (NDCG, tau, tau_ap) from the original study's
# dataset, for side-by-side report output. They are dataset-dependent and
# are never used as test oracles.
PUBLISHED_REFERENCE = {
    "random": (0.74, -0.001, 0.08),
    "feature:mention_full": (0.77, 0.18, 0.27),
    "feature:citation_impact": (0.70, -0.10, -0.01),
    "ranksvm[text]": (0.74, 0.10, 0.23),
    "ranksvm[all]": (0.79, 0.27, 0.35),
    "train:external->author": (0.77, 0.16, 0.27),
    "train:author->author": (0.79, 0.27, 0.35),
}


@dataclass(frozen=True)
class SplitPlan:
    """Randomized sub-sampling configuration."""

    repeats: int = 100
    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self) -> dict:
        return {"repeats": self.repeats, "train_fraction": self.train_fraction,
                "seed": self.seed}


@dataclass
class MetricSummary:
    """Per-split and pooled per-query metric values for one model."""

    model: str
    plan: SplitPlan
    dcg_mode: str
    per_split_ndcg: list[float]
    per_split_tau: list[float]
    per_split_tau_ap: list[float]
    pooled_ndcg: list[float]
    pooled_tau: list[float]
    pooled_tau_ap: list[float]
    split_records: list[dict]
    notes: list[str] = field(default_factory=list)

    @property
    def mean_ndcg(self) -> float:
        return float(np.mean(self.per_split_ndcg))

    @property
    def mean_tau(self) -> float:
        return float(np.mean(self.per_split_tau))

    @property
    def mean_tau_ap(self) -> float:
        return float(np.mean(self.per_split_tau_ap))

    @property
    def pooled_mean_ndcg(self) -> float:
        return float(np.mean(self.pooled_ndcg))

    @property
    def pooled_mean_tau(self) -> float:
        return float(np.mean(self.pooled_tau))

    @property
    def pooled_mean_tau_ap(self) -> float:
        return float(np.mean(self.pooled_tau_ap))

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "plan": self.plan.to_dict(),
            "dcg_mode": self.dcg_mode,
            "means": {"ndcg": self.mean_ndcg, "tau": self.mean_tau,
                      "tau_ap": self.mean_tau_ap},
            "pooled_means": {"ndcg": self.pooled_mean_ndcg,
                             "tau": self.pooled_mean_tau,
                             "tau_ap": self.pooled_mean_tau_ap},
            "per_split": {"ndcg": self.per_split_ndcg, "tau": self.per_split_tau,
                          "tau_ap": self.per_split_tau_ap},
            "notes": self.notes,
        }


@dataclass(frozen=True)
class FeatureBaseline:
    """Rank a group by one raw feature, highest value first.

    Rank-normalization is strictly monotone, so applying this to
    normalized groups yields the same rankings as on raw vectors.
    """

    feature_name: str
    direction: str = "desc"

    def __post_init__(self):
        if self.feature_name not in FEATURE_NAMES:
            raise ValueError(f"unknown feature {self.feature_name!r}")
        if self.direction not in ("desc", "asc"):
            raise ValueError("direction must be 'desc' or 'asc'")

    @property
    def label(self) -> str:
        return f"feature:{self.feature_name}"

    def __call__(self, group: QueryGroup) -> list[int]:
        values = group.feature_values(self.feature_name)
        if self.direction == "asc":
            values = -values
        return rank_with_ties([float(v) for v in values])


@dataclass(frozen=True)
class RandomBaseline:
    """A uniformly random (tie-free) ranking per group.

    The ranking is a fixed function of (seed, doc_id), so the same group
    always receives the same permutation regardless of evaluation order.
    """

    seed: int

    @property
    def label(self) -> str:
        return "random"

    def __call__(self, group: QueryGroup) -> list[int]:
        entropy = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(zlib.crc32(group.doc_id.encode("utf-8")),))
        rng = np.random.default_rng(entropy)
        return [int(r) for r in rng.permutation(len(group.candidates)) + 1]


@dataclass(frozen=True)
class ModelRanker:
    """A frozen, already-trained model used as a ranker."""

    model: RankingModel
    name: str = "model"

    @property
    def label(self) -> str:
        return self.name

    def __call__(self, group: QueryGroup) -> list[int]:
        return rank_group(self.model, group)


def baseline_rank_by_feature(groups: Sequence[QueryGroup], feature_name: str,
                             direction: str = "desc") -> list[list[int]]:
    """Gap rankings of each group by one raw feature value."""
    baseline = FeatureBaseline(feature_name, direction)
    return [baseline(g) for g in groups]


def random_baseline(groups: Sequence[QueryGroup], seed: int) -> list[list[int]]:
    """One uniform random permutation per group, deterministic given seed."""
    baseline = RandomBaseline(seed)
    return [baseline(g) for g in groups]


def evaluate_rankings(groups: Sequence[QueryGroup],
                      rankings: Sequence[Sequence[int]],
                      dcg_mode: str = "standard") -> list[dict]:
    """Per-query metric records for externally produced rankings."""
    records = []
    for group, ranks in zip(groups, rankings):
        records.append(_query_record(group, list(ranks), dcg_mode))
    return records


def _query_record(group: QueryGroup, ranks: list[int], dcg_mode: str) -> dict:
    truth = group.grades()
    nd = metrics.ndcg(truth, ranks, mode=dcg_mode)
    tau = metrics.kendall_tau(truth, ranks)
    try:
        tau_ap = metrics.tau_ap(truth, ranks)
    except ValueError:
        tau_ap = None  # tied author grades (flagged at load time)
    return {"doc_id": group.doc_id, "ndcg": nd, "tau": tau, "tau_ap": tau_ap}


def _model_label(model) -> str:
    if isinstance(model, Hyperparams):
        mask = model.feature_mask
        if tuple(mask) == tuple(FEATURE_NAMES):
            return "ranksvm[all]"
        if len(mask) <= 4:
            return "ranksvm[" + "+".join(mask) + "]"
        return f"ranksvm[{len(mask)} features]"
    return getattr(model, "label", getattr(model, "__name__", "ranker"))


def _split_indices(n_groups: int, plan: SplitPlan, repeat: int
                   ) -> tuple[list[int], list[int], int]:
    # fixed mixing: the repeat index enters the seed sequence spawn key
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=plan.seed, spawn_key=(repeat,)))
    perm = rng.permutation(n_groups)
    n_train = int(plan.train_fraction * n_groups + 0.5)
    if not 1 <= n_train <= n_groups - 1:
        raise ValueError(
            f"degenerate split: {n_groups} groups at fraction "
            f"{plan.train_fraction} leaves an empty side")
    train_idx = sorted(int(i) for i in perm[:n_train])
    test_idx = sorted(int(i) for i in perm[n_train:])
    train_seed = int(rng.integers(0, 2 ** 31))
    return train_idx, test_idx, train_seed


def _repeat_worker(payload) -> dict:
    repeat, train_groups, test_groups, model, train_seed, dcg_mode = payload
    if isinstance(model, Hyperparams):
        fitted = train(train_groups, dataclasses.replace(model, seed=train_seed))
        per_query = [_query_record(g, rank_group(fitted, g), dcg_mode)
                     for g in test_groups]
    else:
        per_query = [_query_record(g, list(model(g)), dcg_mode)
                     for g in test_groups]
    record = {"repeat": repeat,
              "train_docs": [g.doc_id for g in train_groups],
              "test_docs": [g.doc_id for g in test_groups],
              "per_query": per_query}
    for name in ("ndcg", "tau", "tau_ap"):
        values = [q[name] for q in per_query if q[name] is not None]
        if not values:
            raise ValueError(f"metric {name} undefined for every test group "
                             f"in repeat {repeat}")
        record[f"mean_{name}"] = float(np.mean(values))
    return record


def _subsample(train_view: Sequence[QueryGroup], test_view: Sequence[QueryGroup],
               plan: SplitPlan, model, dcg_mode: str, jobs: int,
               label: str, notes: list[str]) -> MetricSummary:
    if len(train_view) != len(test_view):
        raise ValueError("train and test label views must align")
    for g in test_view:
        if not g.has_grades:
            raise ValueError(f"group {g.doc_id!r} has no grades; "
                             "sub-sampling evaluation needs annotated groups")
    n = len(test_view)
    payloads = []
    for repeat in range(plan.repeats):
        train_idx, test_idx, train_seed = _split_indices(n, plan, repeat)
        payloads.append((repeat,
                         [train_view[i] for i in train_idx],
                         [test_view[i] for i in test_idx],
                         model, train_seed, dcg_mode))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_repeat_worker, payloads))
    else:
        records = [_repeat_worker(p) for p in payloads]
    # records arrive in repeat order either way
    pooled = {"ndcg": [], "tau": [], "tau_ap": []}
    for record in records:
        for q in record["per_query"]:
            for name in pooled:
                if q[name] is not None:
                    pooled[name].append(q[name])
    return MetricSummary(
        model=label, plan=plan, dcg_mode=dcg_mode,
        per_split_ndcg=[r["mean_ndcg"] for r in records],
        per_split_tau=[r["mean_tau"] for r in records],
        per_split_tau_ap=[r["mean_tau_ap"] for r in records],
        pooled_ndcg=pooled["ndcg"], pooled_tau=pooled["tau"],
        pooled_tau_ap=pooled["tau_ap"],
        split_records=records, notes=notes)


def run_subsampling(groups: Sequence[QueryGroup], model, plan: SplitPlan,
                    dcg_mode: str = "standard", jobs: int = 1) -> MetricSummary:
    """Randomized sub-sampling evaluation of a trainable or frozen model.

    ``model`` is either a :class:`Hyperparams` (a fresh model is trained on
    every split, with a per-repeat seed derived from the plan) or a frozen
    group ranker such as :class:`FeatureBaseline`, :class:`RandomBaseline`,
    or :class:`ModelRanker`.
    """
    groups = list(groups)
    return _subsample(groups, groups, plan, model, dcg_mode, jobs,
                      _model_label(model), notes=[])


def relabel_groups(groups: Sequence[QueryGroup], source: str,
                   external: dict[str, ExternalRanking] | None = None
                   ) -> tuple[list[QueryGroup], list[str]]:
    """Replace grades with an alternative label source for training.

    ``author`` keeps the stored grades. ``text_similarity`` grades by the
    gap-rank of the abstract-abstract similarity (most similar gets the
    highest grade), mirroring how annotation candidates were chosen.
    ``external`` converts an external related-articles ranking into grades;
    documents whose candidates never appear in the external list get
    uniform grade 1 (and a note).
    """
    notes: list[str] = []
    if source == "author":
        return list(groups), notes
    if source not in ("external", "text_similarity"):
        raise ValueError(f"unknown label source {source!r}")
    if source == "external" and external is None:
        raise ValueError("external label source requires external rankings")

    relabeled = []
    for group in groups:
        if source == "text_similarity":
            grades = rank_with_ties([float(v) for v in
                                     group.feature_values("sim_aa")])
        else:
            ref_ids = [c.ref_id for c in group.candidates]
            ext = external.get(group.doc_id)
            if ext is None:
                ext = ExternalRanking(doc_id=group.doc_id,
                                      ordered_ref_positions={}, list_length=0)
            relevance = external_to_relevance(ref_ids, ext)
            if len(set(relevance.values())) == 1:
                notes.append(f"document {group.doc_id!r}: no candidate found in "
                             "the external ranking; uniform relevance 1")
            grades = [relevance[r] for r in ref_ids]
        relabeled.append(QueryGroup(
            doc_id=group.doc_id,
            candidates=[Candidate(ref_id=c.ref_id, features=c.features,
                                  grade=int(g))
                        for c, g in zip(group.candidates, grades)]))
    return relabeled, notes


def cross_train_eval(groups: Sequence[QueryGroup], train_source: str,
                     plan: SplitPlan, hp: Hyperparams,
                     external: dict[str, ExternalRanking] | None = None,
                     dcg_mode: str = "standard", jobs: int = 1) -> MetricSummary:
    """Sub-sampling evaluation with training grades from another source.

    Test metrics always use the author grades; only the training side is
    relabeled. ``train_source='author'`` reproduces :func:`run_subsampling`
    exactly.
    """
    groups = list(groups)
    train_view, notes = relabel_groups(groups, train_source, external)
    label = f"train:{train_source}->author"
    try:
        return _subsample(train_view, groups, plan, hp, dcg_mode, jobs, label,
                          notes)
    except ValueError as exc:
        if notes and "no trainable pairs" in str(exc):
            raise ValueError(f"{exc} ({notes[0]}; {len(notes)} such documents)"
                             ) from None
        raise


@dataclass
class FeatureSelectionResult:
    """Greedy forward-selection trajectory and the best greedy prefix."""

    trajectory: list[tuple[str, float]]
    best_prefix: list[str]
    best_value: float

    def to_dict(self) -> dict:
        return {"trajectory": [{"feature": f, "mean_ndcg": v}
                               for f, v in self.trajectory],
                "best_prefix": self.best_prefix,
                "best_value": self.best_value}


def forward_feature_selection(groups: Sequence[QueryGroup], plan: SplitPlan,
                              hp: Hyperparams, dcg_mode: str = "standard",
                              jobs: int = 1,
                              max_rounds: int | None = None
                              ) -> FeatureSelectionResult:
    """Greedy wrapper selection optimizing mean NDCG across splits.

    Each round trains one model per unselected feature (added to the
    current prefix) through :func:`run_subsampling` and keeps the best by
    mean NDCG; ties break toward the canonical feature order. All features
    are eventually selected (or the first ``max_rounds``, when given); the
    reported best prefix is the shortest prefix attaining the maximum
    objective along the trajectory.
    """
    groups = list(groups)
    selected: list[str] = []
    trajectory: list[tuple[str, float]] = []
    remaining = list(FEATURE_NAMES)
    rounds_left = len(remaining) if max_rounds is None else max_rounds
    while remaining and rounds_left > 0:
        rounds_left -= 1
        best_feature = None
        best_value = -np.inf
        for name in remaining:  # canonical order makes ties deterministic
            candidate_hp = dataclasses.replace(
                hp, feature_mask=tuple(selected + [name]))
            summary = run_subsampling(groups, candidate_hp, plan,
                                      dcg_mode=dcg_mode, jobs=jobs)
            if summary.mean_ndcg > best_value:
                best_value = summary.mean_ndcg
                best_feature = name
        selected.append(best_feature)
        remaining.remove(best_feature)
        trajectory.append((best_feature, float(best_value)))
    values = [v for _, v in trajectory]
    best_len = int(np.argmax(values)) + 1
    return FeatureSelectionResult(
        trajectory=trajectory,
        best_prefix=[f for f, _ in trajectory[:best_len]],
        best_value=values[best_len - 1])


def significance_test(per_split_a: Sequence[float], per_split_b: Sequence[float],
                      resamples: int = 10000, seed: int = 0) -> float:
    """Two-sided paired sign-flip permutation test on per-split differences.

    Returns the Monte-Carlo p-value (with the +1 correction) for the null
    that the paired differences are symmetric around zero.
    """
    a = np.asarray(per_split_a, dtype=np.float64)
    b = np.asarray(per_split_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise ValueError("need two equal-length series of >= 2 paired values")
    diff = a - b
    observed = abs(float(diff.mean()))
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(resamples, len(diff))) * 2 - 1
    flipped_means = np.abs((signs * diff).mean(axis=1))
    exceed = int((flipped_means >= observed).sum())
    return (exceed + 1) / (resamples + 1)


def compare_summaries(summaries: Sequence[MetricSummary],
                      metric: str = "tau_ap",
                      resamples: int = 10000, seed: int = 0
                      ) -> dict[tuple[str, str], float]:
    """Pairwise sign-flip p-values between models on one per-split metric."""
    attr = {"ndcg": "per_split_ndcg", "tau": "per_split_tau",
            "tau_ap": "per_split_tau_ap"}[metric]
    pvalues = {}
    for i, first in enumerate(summaries):
        for second in summaries[i + 1:]:
            pvalues[(first.model, second.model)] = significance_test(
                getattr(first, attr), getattr(second, attr),
                resamples=resamples, seed=seed)
    return pvalues


def render_report(summaries: Sequence[MetricSummary],
                  pvalues: dict[tuple[str, str], float] | None = None,
                  show_published: bool = False) -> str:
    """Human-readable table (one row per model) plus optional significance
    block and published reference rows."""
    lines = []
    header = f"{'Model':<34} {'NDCG':>8} {'tau':>8} {'tau_ap':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for s in summaries:
        lines.append(f"{s.model:<34} {s.mean_ndcg:>8.4f} {s.mean_tau:>8.4f} "
                     f"{s.mean_tau_ap:>8.4f}")
        if show_published and s.model in PUBLISHED_REFERENCE:
            nd, tau, ta = PUBLISHED_REFERENCE[s.model]
            lines.append(f"{'  (published, original dataset)':<34} "
                         f"{nd:>8.2f} {tau:>8.3f} {ta:>8.2f}")
    pooled = [f"{s.model}: pooled NDCG {s.pooled_mean_ndcg:.4f}, "
              f"tau {s.pooled_mean_tau:.4f}, tau_ap {s.pooled_mean_tau_ap:.4f}"
              for s in summaries]
    lines.append("")
    lines.extend(pooled)
    if pvalues:
        lines.append("")
        lines.append("pairwise sign-flip p-values (per-split means):")
        for (a, b), p in pvalues.items():
            lines.append(f"  {a} vs {b}: p = {p:.4f}")
    notes = [n for s in summaries for n in s.notes]
    if notes:
        lines.append("")
        lines.append("notes:")
        lines.extend(f"  {n}" for n in notes)
    return "\n".join(lines) + "\n"


def write_split_records(summary: MetricSummary, stream: TextIO) -> None:
    """Machine-readable per-split record stream, one JSON line per repeat."""
    for record in summary.split_records:
        stream.write(json.dumps({"model": summary.model, **record},
                                sort_keys=True) + "\n")
