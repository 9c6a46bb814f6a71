"""Ranking evaluation measures: NDCG, Kendall's tau, and tau_ap.

All three compare an author-given list of integer relevance grades
(``truth``) against a system ranking (``system``), index-aligned: entry i
of both lists refers to the same candidate. ``system`` may hold gap-style
integer ranks or raw scores; only its ordering matters.

Tie conventions, fixed here:

* ``ndcg`` orders candidates by descending system value, breaking ties by
  ascending original index (stable and deterministic).
* ``kendall_tau`` uses the tau-a denominator ``n(n-1)/2``; pairs tied in
  either list count toward neither C nor D.
* ``tau_ap`` requires strictly ordered truth grades. Candidates tied in
  the system ranking contribute 0.5 per affected pair, the expected count
  under random tie-breaking.

DCG has two modes. ``standard`` is the usual exponential form
``sum_i (2^rel_i - 1) / log2(i + 1)``. ``literal`` additionally adds a
leading ``rel_1`` term, double-weighting the top position; it exists
because some formulations print the formula that way, and NDCG is
internally consistent under either mode as long as DCG and IDCG use the
same one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

DCG_MODES = ("standard", "literal")


@dataclass(frozen=True)
class RankedPair:
    """An index-aligned (truth grades, system ranking) pair."""

    truth: tuple[int, ...]
    system: tuple[float, ...]

    def __post_init__(self):
        if len(self.truth) != len(self.system):
            raise ValueError("truth and system must have equal length")
        if len(self.truth) < 2:
            raise ValueError("correlation measures need at least 2 candidates")
        if any(g <= 0 for g in self.truth):
            raise ValueError("relevance grades must be positive")


def dcg(rels_in_system_order: Sequence[int], mode: str = "standard") -> float:
    """Discounted cumulative gain of relevance grades in ranked order.

    ``standard``: sum of ``(2^rel_i - 1) / log2(i + 1)`` for i = 1..N.
    ``literal``: the same sum plus a leading ``rel_1`` term.
    """
    if mode not in DCG_MODES:
        raise ValueError(f"unknown DCG mode {mode!r}")
    if len(rels_in_system_order) == 0:
        raise ValueError("dcg of an empty ranking is undefined")
    total = 0.0
    for i, rel in enumerate(rels_in_system_order, start=1):
        total += (2.0 ** rel - 1.0) / math.log2(i + 1)
    if mode == "literal":
        total += rels_in_system_order[0]
    return total


def ndcg(truth: Sequence[int], system: Sequence[float],
         mode: str = "standard") -> float | None:
    """NDCG = DCG / IDCG in [0, 1], or None when IDCG is 0.

    Candidates are ordered by descending system value (ties broken by
    ascending original index); DCG of the truth grades in that order is
    divided by the DCG of the truth grades sorted descending.
    """
    if len(truth) != len(system):
        raise ValueError("truth and system must have equal length")
    if len(truth) == 0:
        raise ValueError("ndcg of an empty ranking is undefined")
    order = sorted(range(len(system)), key=lambda i: (-system[i], i))
    gains = dcg([truth[i] for i in order], mode=mode)
    ideal = dcg(sorted(truth, reverse=True), mode=mode)
    if ideal == 0.0:
        return None
    return gains / ideal


def kendall_tau(truth: Sequence[int], system: Sequence[float]) -> float:
    """Kendall's tau-a: (C - D) / (n(n-1)/2).

    C and D count concordant and discordant unordered index pairs; pairs
    tied in either list count toward neither. The denominator stays fixed
    at the total number of pairs.
    """
    n = len(truth)
    if n != len(system):
        raise ValueError("truth and system must have equal length")
    if n < 2:
        raise ValueError("kendall_tau needs at least 2 candidates")
    concordant = 0
    discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            dt = truth[i] - truth[j]
            ds = system[i] - system[j]
            if dt == 0 or ds == 0:
                continue
            if (dt > 0) == (ds > 0):
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / (n * (n - 1) / 2)


def tau_ap(truth: Sequence[int], system: Sequence[float]) -> float:
    """Average-precision rank correlation, top-weighted.

    Candidates are sorted by descending system value. With C(i) the number
    of candidates above sorted position i that truth also places above the
    candidate at i, the measure is ``(2/(N-1)) * sum_{i=2..N} C(i)/(i-1) - 1``.
    Errors near the top therefore cost more than errors near the bottom.

    Truth grades must be strictly ordered (no ties). System ties add 0.5
    to C(i) per tied pair, the expectation under random tie-breaking.
    """
    n = len(truth)
    if n != len(system):
        raise ValueError("truth and system must have equal length")
    if n < 2:
        raise ValueError("tau_ap needs at least 2 candidates")
    if len(set(truth)) != n:
        raise ValueError("tau_ap is undefined for tied truth grades")
    order = sorted(range(n), key=lambda i: (-system[i], i))
    total = 0.0
    for pos in range(1, n):  # sorted position i = pos + 1, 1-based
        i = order[pos]
        c = 0.0
        for prev in range(pos):
            j = order[prev]
            if system[j] == system[i]:
                c += 0.5
            elif truth[j] > truth[i]:
                c += 1.0
        total += c / pos
    return (2.0 / (n - 1)) * total - 1.0
