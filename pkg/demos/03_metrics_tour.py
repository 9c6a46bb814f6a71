"""
Ranking metrics: NDCG, Kendall's tau, tau_ap
============================================

Three measures compare a system ranking against author grades, each with
a different sensitivity. NDCG rewards putting high grades early but is
generous when everything is somewhat relevant; tau counts pairwise
agreement uniformly; tau_ap weights errors near the top more heavily.
"""

from citerank import dcg, kendall_tau, ndcg, rank_with_ties, tau_ap

############################################################
# Tie-aware gap ranking: tied scores share the lower rank and the ranks
# above are skipped.

scores = [0.9, 0.5, 0.5, 0.3, 0.1]
print(f"scores {scores} -> ranks {rank_with_ties(scores)}")   # [5, 3, 3, 2, 1]

############################################################
# DCG and NDCG. Grades 1..5 in the best and worst presentation order.

best = dcg([5, 4, 3, 2, 1])
print(f"\nDCG of perfect order:  {best:.4f}")
print(f"DCG of reversed order: {dcg([1, 2, 3, 4, 5]):.4f}")
print(f"NDCG, perfect:  {ndcg([1, 2, 3, 4, 5], [1, 2, 3, 4, 5]):.4f}")
print(f"NDCG, reversed: {ndcg([1, 2, 3, 4, 5], [5, 4, 3, 2, 1]):.4f}")
# Even the worst order scores ~0.54: with only relevant documents in the
# list, NDCG has a high floor. The correlation measures discriminate more.

############################################################
# Both correlations, and why tau_ap exists: the same single swap costs
# more at the top of the list than at the bottom.

truth = [5, 4, 3, 2, 1]
top_swap = [4, 5, 3, 2, 1]       # two closest references exchanged
bottom_swap = [5, 4, 3, 1, 2]    # two farthest references exchanged
print(f"\n{'ranking':<14} {'tau':>7} {'tau_ap':>7}")
for label, system in (("perfect", truth), ("top swap", top_swap),
                      ("bottom swap", bottom_swap),
                      ("reversed", truth[::-1])):
    print(f"{label:<14} {kendall_tau(truth, system):>7.3f} "
          f"{tau_ap(truth, system):>7.3f}")
# tau treats both swaps identically (0.9); tau_ap penalizes the top swap
# (0.5) far more than the bottom one (0.875).

############################################################
# Ties: pairs tied in either list are neutral for tau; for tau_ap a
# system tie contributes the 0.5 expected under random tie-breaking.

print(f"\ntau with one system tie:   {kendall_tau(truth, [5, 3, 3, 2, 1]):.3f}")
print(f"tau_ap, all scores tied:   {tau_ap(truth, [1, 1, 1, 1, 1]):.3f}")
