"""citerank: query-by-document citation ranking.

Rank the references of a citing article by closeness to it: extract
section-similarity and citation features per (document, reference) pair,
train a linear ranking SVM on graded judgments, and evaluate rankings
with NDCG, Kendall's tau, and tau_ap against baselines.
"""

from .corpus import (
    CitationContexts,
    Corpus,
    CorpusError,
    Document,
    ExternalRanking,
    Reference,
    build_corpus_vocabulary,
    external_to_relevance,
    extract_citation_contexts,
    parse_corpus,
    parse_corpus_file,
    parse_external_rankings,
    parse_external_rankings_file,
    select_candidates,
    serialize_corpus,
)
from .experiments import (
    FeatureBaseline,
    FeatureSelectionResult,
    MetricSummary,
    ModelRanker,
    RandomBaseline,
    SplitPlan,
    baseline_rank_by_feature,
    compare_summaries,
    cross_train_eval,
    evaluate_rankings,
    forward_feature_selection,
    random_baseline,
    render_report,
    run_subsampling,
    significance_test,
)
from .features import (
    CITATION_FEATURES,
    FEATURE_NAMES,
    SIMILARITY_FEATURES,
    Candidate,
    FeatureVector,
    QueryGroup,
    extract_features,
    featurize_corpus,
    normalize_group,
    read_feature_records,
    read_feature_records_file,
    write_feature_records,
)
from .metrics import RankedPair, dcg, kendall_tau, ndcg, tau_ap
from .ranksvm import (
    Hyperparams,
    RankingModel,
    objective,
    rank_group,
    rank_with_ties,
    score,
    score_group,
    train,
)
from .synth import SynthConfig, generate_synthetic_corpus
from .textsim import (
    TermVector,
    Vocabulary,
    build_vocabulary,
    cosine,
    idf,
    tfidf_from_tokens,
    tfidf_vector,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "CITATION_FEATURES",
    "Candidate",
    "CitationContexts",
    "Corpus",
    "CorpusError",
    "Document",
    "ExternalRanking",
    "FEATURE_NAMES",
    "FeatureBaseline",
    "FeatureSelectionResult",
    "FeatureVector",
    "Hyperparams",
    "MetricSummary",
    "ModelRanker",
    "QueryGroup",
    "RandomBaseline",
    "RankedPair",
    "RankingModel",
    "Reference",
    "SIMILARITY_FEATURES",
    "SplitPlan",
    "SynthConfig",
    "TermVector",
    "Vocabulary",
    "baseline_rank_by_feature",
    "build_corpus_vocabulary",
    "build_vocabulary",
    "compare_summaries",
    "cosine",
    "cross_train_eval",
    "dcg",
    "evaluate_rankings",
    "external_to_relevance",
    "extract_citation_contexts",
    "extract_features",
    "featurize_corpus",
    "forward_feature_selection",
    "generate_synthetic_corpus",
    "idf",
    "kendall_tau",
    "ndcg",
    "normalize_group",
    "objective",
    "parse_corpus",
    "parse_corpus_file",
    "parse_external_rankings",
    "parse_external_rankings_file",
    "random_baseline",
    "rank_group",
    "rank_with_ties",
    "read_feature_records",
    "read_feature_records_file",
    "render_report",
    "run_subsampling",
    "score",
    "score_group",
    "select_candidates",
    "serialize_corpus",
    "significance_test",
    "tau_ap",
    "tfidf_from_tokens",
    "tfidf_vector",
    "tokenize",
    "train",
    "write_feature_records",
]
