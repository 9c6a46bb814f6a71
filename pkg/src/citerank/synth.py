"""Synthetic corpora with planted ranking structure.

The generator fabricates citing documents whose annotation grades are, by
construction, the rank order of a planted linear score over the
(normalized) feature vectors of their references. That gives desk-scale
datasets with a known-optimal ranking: a planted weight vector that any
correct trainer should be able to emulate.

Documents are assembled from a synthetic vocabulary: each document gets a
topic term set, references share the topic to varying degrees (driving
the similarity features apart), and mention counts, ages, and citation
impacts are drawn from configurable ranges (driving the citation
features). Everything is deterministic given the seed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document, Reference, build_corpus_vocabulary
from .features import FEATURE_NAMES, QueryGroup, featurize_corpus


@dataclass(frozen=True)
class SynthConfig:
    """Shape and planted structure of a synthetic corpus.

    ``planted_weights`` maps feature names to weights (missing names mean
    0). ``min_score_gap`` > 0 makes the generator re-draw documents until
    every group's planted scores are separated by at least that much,
    yielding cleanly separable data; at 0, exact score ties are broken by
    ascending ref_id.
    """

    planted_weights: dict[str, float]
    n_documents: int = 90
    refs_per_document: int = 5
    vocab_size: int = 300
    min_score_gap: float = 0.0
    doc_year_range: tuple[int, int] = (2010, 2016)
    max_age: int = 15
    impact_range: tuple[int, int] = (0, 300)
    mention_full_range: tuple[int, int] = (1, 6)
    mention_discussion_range: tuple[int, int] = (0, 3)

    def __post_init__(self):
        if self.n_documents < 1:
            raise ValueError("need at least one document")
        if self.vocab_size < 10:
            raise ValueError("need a vocabulary of at least 10 terms")
        if self.refs_per_document < 1:
            raise ValueError("need at least one reference per document")
        unknown = [n for n in self.planted_weights if n not in FEATURE_NAMES]
        if unknown:
            raise ValueError(f"unknown features in planted weights: {unknown}")
        if self.min_score_gap < 0:
            raise ValueError("min_score_gap must be >= 0")

    def weight_vector(self) -> np.ndarray:
        return np.array([self.planted_weights.get(n, 0.0) for n in FEATURE_NAMES])


def _terms(config: SynthConfig) -> list[str]:
    width = len(str(config.vocab_size - 1))
    return [f"w{i:0{width}d}" for i in range(config.vocab_size)]


def _draw_tokens(rng, topic: list[str], background: list[str],
                 size: int, topic_share: float) -> list[str]:
    picks = []
    for take_topic in rng.random(size) < topic_share:
        pool = topic if take_topic else background
        picks.append(pool[int(rng.integers(len(pool)))])
    return picks


def _sentence_with_marker(rng, topic, background, ref_id: str) -> str:
    words = _draw_tokens(rng, topic, background, 10, 0.5)
    slot = int(rng.integers(len(words) + 1))
    words.insert(slot, f"[[cite:{ref_id}]]")
    return " ".join(words)


def _generate_document(config: SynthConfig, seed: int, doc_index: int,
                       attempt: int) -> Document:
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(doc_index, attempt)))
    terms = _terms(config)
    topic_idx = rng.choice(config.vocab_size, size=min(24, config.vocab_size),
                           replace=False)
    topic = [terms[i] for i in topic_idx]

    doc_year = int(rng.integers(config.doc_year_range[0],
                                config.doc_year_range[1] + 1))
    title = " ".join(_draw_tokens(rng, topic, terms, 6, 0.8))
    abstract = " ".join(_draw_tokens(rng, topic, terms, 30, 0.7))

    references = []
    mentions_full: dict[str, int] = {}
    mentions_disc: dict[str, int] = {}
    for r in range(config.refs_per_document):
        ref_id = f"d{doc_index:03d}r{r}"
        share = float(rng.uniform(0.05, 0.95))
        references.append(Reference(
            ref_id=ref_id,
            title=" ".join(_draw_tokens(rng, topic, terms, 6, share)),
            abstract=" ".join(_draw_tokens(rng, topic, terms, 30, share)),
            year=doc_year - int(rng.integers(0, config.max_age + 1)),
            citation_impact=int(rng.integers(config.impact_range[0],
                                             config.impact_range[1] + 1)),
        ))
        mentions_full[ref_id] = int(rng.integers(config.mention_full_range[0],
                                                 config.mention_full_range[1] + 1))
        mentions_disc[ref_id] = int(rng.integers(
            config.mention_discussion_range[0],
            config.mention_discussion_range[1] + 1))

    def build_section(lead_tokens: int, mentions: dict[str, int]) -> str:
        pieces = [" ".join(_draw_tokens(rng, topic, terms, lead_tokens, 0.6))]
        slots = [ref_id for ref_id, k in mentions.items() for _ in range(k)]
        rng.shuffle(slots)
        for ref_id in slots:
            pieces.append(_sentence_with_marker(rng, topic, terms, ref_id))
        return ". ".join(pieces)

    full_text = title + ". " + abstract + ". " + build_section(20, mentions_full)
    discussion = build_section(20, mentions_disc)
    return Document(doc_id=f"doc{doc_index:03d}", title=title, abstract=abstract,
                    full_text=full_text, discussion=discussion, year=doc_year,
                    references=tuple(references), annotations=None)


def _planted_scores(groups: list[QueryGroup], w: np.ndarray) -> list[np.ndarray]:
    return [group.matrix() @ w for group in groups]


def _grade_documents(documents: list[Document], groups: list[QueryGroup],
                     w: np.ndarray) -> list[Document]:
    graded = []
    for doc, group in zip(documents, groups):
        scores = group.matrix() @ w
        order = sorted(range(len(scores)),
                       key=lambda i: (scores[i], group.candidates[i].ref_id))
        annotations = {group.candidates[idx].ref_id: grade
                       for grade, idx in enumerate(order, start=1)}
        graded.append(dataclasses.replace(doc, annotations=annotations))
    return graded


def generate_synthetic_corpus(config: SynthConfig, seed: int) -> Corpus:
    """Deterministically build a corpus whose grades follow the planted
    weights.

    Grades per document are the rank order (1 = lowest, n = highest) of
    the planted score over the document's normalized feature vectors.
    With ``min_score_gap`` > 0, documents are re-drawn until all adjacent
    planted scores in each group differ by at least the gap.
    """
    w = config.weight_vector()
    attempts = [0] * config.n_documents
    documents = [_generate_document(config, seed, i, 0)
                 for i in range(config.n_documents)]
    for round_no in range(100):
        corpus = Corpus(documents=list(documents))
        vocab = build_corpus_vocabulary(corpus)
        groups = featurize_corpus(corpus, vocab, candidate_selection="all")
        offenders = []
        if config.min_score_gap > 0:
            for i, scores in enumerate(_planted_scores(groups, w)):
                gaps = np.diff(np.sort(scores))
                if len(gaps) and gaps.min() < config.min_score_gap:
                    offenders.append(i)
        if not offenders:
            return Corpus(documents=_grade_documents(documents, groups, w))
        for i in offenders:
            attempts[i] += 1
            documents[i] = _generate_document(config, seed, i, attempts[i])
    raise RuntimeError(
        "could not satisfy min_score_gap after 100 rounds; lower the gap or "
        "widen the feature ranges")
