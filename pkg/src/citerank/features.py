"""Per-(document, reference) feature vectors and per-query normalization.

Sixteen features relate a citing document to one of its references:
twelve section-to-section TF*IDF cosine similarities (citing side:
abstract / title / full text / citation contexts / discussion /
discussion contexts, cited side: abstract / title), the citation's age in
years, its mention counts in the full text and in the discussion (each as
a fraction of all citation mentions in that section), and its citation
impact.

The four non-similarity features are unbounded or differently scaled, so
before training they are rank-normalized within each query group onto an
evenly spaced 0..1 grid; the similarity features are already bounded and
pass through unchanged. Raw and normalized vectors are distinct states
and never mix inside one vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.stats import rankdata

from . import textsim
from .corpus import (
    CitationContexts,
    Corpus,
    Document,
    MARKER_RE,
    extract_citation_contexts,
    select_candidates,
    strip_citation_markers,
)
from .textsim import TermVector, Vocabulary

FEATURE_NAMES = (
    "sim_aa", "sim_at", "sim_ta", "sim_tt", "sim_fa", "sim_ft",
    "sim_ca", "sim_ct", "sim_da", "sim_dt", "sim_cda", "sim_cdt",
    "age_years", "mention_full", "mention_discussion", "citation_impact",
)
SIMILARITY_FEATURES = FEATURE_NAMES[:12]
CITATION_FEATURES = FEATURE_NAMES[12:]
_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """The 16 features for one (document, reference) pair.

    ``normalized`` marks whether the four citation features have been
    rank-normalized within their query group.
    """

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(FEATURE_NAMES),):
            raise ValueError(f"expected {len(FEATURE_NAMES)} features, "
                             f"got shape {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)
        values.setflags(write=False)

    def __getitem__(self, name: str) -> float:
        return float(self.values[_INDEX[name]])

    def as_dict(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(FEATURE_NAMES, self.values)}

    @classmethod
    def from_dict(cls, mapping: dict[str, float], normalized: bool = False
                  ) -> "FeatureVector":
        missing = [n for n in FEATURE_NAMES if n not in mapping]
        if missing:
            raise ValueError(f"missing features {missing}")
        return cls(values=np.array([mapping[n] for n in FEATURE_NAMES]),
                   normalized=normalized)


@dataclass
class Candidate:
    """One reference inside a query group, with its features and optional
    author grade."""

    ref_id: str
    features: FeatureVector
    grade: int | None = None


@dataclass
class QueryGroup:
    """All candidates of one citing document; grades are all present or
    all absent."""

    doc_id: str
    candidates: list[Candidate]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError(f"query group {self.doc_id!r} has no candidates")
        graded = [c.grade is not None for c in self.candidates]
        if any(graded) and not all(graded):
            raise ValueError(
                f"query group {self.doc_id!r} mixes graded and ungraded candidates")

    @property
    def has_grades(self) -> bool:
        return self.candidates[0].grade is not None

    @property
    def normalized(self) -> bool:
        return all(c.features.normalized for c in self.candidates)

    def grades(self) -> list[int]:
        if not self.has_grades:
            raise ValueError(f"query group {self.doc_id!r} has no grades")
        return [c.grade for c in self.candidates]

    def feature_values(self, name: str) -> np.ndarray:
        return np.array([c.features[name] for c in self.candidates])

    def matrix(self, feature_names: Sequence[str] = FEATURE_NAMES) -> np.ndarray:
        cols = [_INDEX[n] for n in feature_names]
        return np.stack([c.features.values[cols] for c in self.candidates])


class _DocVectors:
    """Per-document TF*IDF vectors for the four marker-free sections."""

    def __init__(self, doc: Document, vocab: Vocabulary):
        self.doc = doc
        self.abstract = textsim.tfidf_vector(doc.abstract, vocab)
        self.title = textsim.tfidf_vector(doc.title, vocab)
        self.full_text = textsim.tfidf_vector(
            strip_citation_markers(doc.full_text), vocab)
        self.discussion = textsim.tfidf_vector(
            strip_citation_markers(doc.discussion), vocab)
        self.total_mentions_full = len(MARKER_RE.findall(doc.full_text))
        self.total_mentions_discussion = len(MARKER_RE.findall(doc.discussion))


def _pooled_context_vector(windows: Iterable[tuple[str, ...]],
                           vocab: Vocabulary) -> TermVector:
    # all windows of one (reference, section) form a single pseudo-document
    tokens: list[str] = []
    for window in windows:
        tokens.extend(window)
    return textsim.tfidf_from_tokens(tokens, vocab)


def _extract(doc_vectors: _DocVectors, ref_id: str, contexts: CitationContexts,
             vocab: Vocabulary) -> FeatureVector:
    doc = doc_vectors.doc
    ref = doc.reference(ref_id)
    ref_abstract = textsim.tfidf_vector(ref.abstract, vocab)
    ref_title = textsim.tfidf_vector(ref.title, vocab)
    context_full = _pooled_context_vector(contexts.contexts_full, vocab)
    context_disc = _pooled_context_vector(contexts.contexts_discussion, vocab)

    doc_sections = (doc_vectors.abstract, doc_vectors.title, doc_vectors.full_text,
                    context_full, doc_vectors.discussion, context_disc)
    values = []
    for doc_vec in doc_sections:
        values.append(textsim.cosine(doc_vec, ref_abstract))
        values.append(textsim.cosine(doc_vec, ref_title))
    # similarity order above is (a,t,f,c,d,cd) x (a,t); reorder to FEATURE_NAMES
    sims = {name: values[i] for i, name in enumerate(
        ("sim_aa", "sim_at", "sim_ta", "sim_tt", "sim_fa", "sim_ft",
         "sim_ca", "sim_ct", "sim_da", "sim_dt", "sim_cda", "sim_cdt"))}

    total_full = doc_vectors.total_mentions_full
    total_disc = doc_vectors.total_mentions_discussion
    sims.update({
        "age_years": float(doc.year - ref.year),
        "mention_full": (contexts.mention_count_full / total_full
                         if total_full else 0.0),
        "mention_discussion": (contexts.mention_count_discussion / total_disc
                               if total_disc else 0.0),
        "citation_impact": float(ref.citation_impact),
    })
    return FeatureVector.from_dict(sims)


def extract_features(doc: Document, ref_id: str, contexts: CitationContexts,
                     vocab: Vocabulary) -> FeatureVector:
    """Raw feature vector for one (document, reference) pair.

    ``contexts`` must be the citation contexts of ``ref_id`` within
    ``doc``. References never mentioned get zero context similarities and
    zero mention fractions.
    """
    if contexts.ref_id != ref_id:
        raise ValueError(f"contexts belong to {contexts.ref_id!r}, not {ref_id!r}")
    return _extract(_DocVectors(doc, vocab), ref_id, contexts, vocab)


def normalize_group(group: QueryGroup) -> QueryGroup:
    """Rank-normalize the four citation features within the group.

    Sorted ascending, the candidate at 0-based position k receives
    k/(n-1); tied raw values share the mean of their positions' values; a
    single-candidate group gets 0.5. Similarity features pass through.
    """
    n = len(group.candidates)
    normalized_columns: dict[str, np.ndarray] = {}
    for name in CITATION_FEATURES:
        raw = group.feature_values(name)
        if n == 1:
            normalized_columns[name] = np.array([0.5])
        else:
            normalized_columns[name] = (rankdata(raw, method="average") - 1.0) / (n - 1)
    new_candidates = []
    for i, cand in enumerate(group.candidates):
        mapping = cand.features.as_dict()
        for name in CITATION_FEATURES:
            mapping[name] = float(normalized_columns[name][i])
        new_candidates.append(Candidate(
            ref_id=cand.ref_id,
            features=FeatureVector.from_dict(mapping, normalized=True),
            grade=cand.grade))
    return QueryGroup(doc_id=group.doc_id, candidates=new_candidates)


def featurize_corpus(corpus: Corpus, vocab: Vocabulary,
                     candidate_selection: str = "all",
                     normalize: bool = True) -> list[QueryGroup]:
    """One query group per document, candidates featurized and (by
    default) normalized.

    ``candidate_selection`` is ``all`` (every reference, in document
    order) or ``top5`` (the abstract-similarity top five). Author grades
    are attached when the document's annotations cover every candidate.
    """
    if candidate_selection not in ("all", "top5"):
        raise ValueError(f"unknown candidate selection {candidate_selection!r}")
    groups = []
    for doc in corpus:
        contexts = extract_citation_contexts(doc)
        if candidate_selection == "top5":
            candidate_ids = select_candidates(doc, vocab, k=5)
        else:
            candidate_ids = doc.reference_ids()
        doc_vectors = _DocVectors(doc, vocab)
        annotations = doc.annotations or {}
        attach_grades = all(r in annotations for r in candidate_ids)
        candidates = [
            Candidate(
                ref_id=ref_id,
                features=_extract(doc_vectors, ref_id, contexts[ref_id], vocab),
                grade=annotations[ref_id] if attach_grades else None)
            for ref_id in candidate_ids
        ]
        group = QueryGroup(doc_id=doc.doc_id, candidates=candidates)
        groups.append(normalize_group(group) if normalize else group)
    return groups


def write_feature_records(groups: Iterable[QueryGroup], stream: TextIO) -> None:
    """Line-delimited export: one record per candidate, features in the
    fixed FEATURE_NAMES order."""
    for group in groups:
        for cand in group.candidates:
            record = {"doc_id": group.doc_id, "ref_id": cand.ref_id}
            if cand.grade is not None:
                record["grade"] = cand.grade
            record["features"] = cand.features.as_dict()
            stream.write(json.dumps(record) + "\n")


def read_feature_records(lines: Iterable[str], normalized: bool = True
                         ) -> list[QueryGroup]:
    """Rebuild query groups from a feature export. Records of one document
    must be contiguous; ``normalized`` declares the stored state."""
    groups: list[QueryGroup] = []
    current_doc: str | None = None
    current: list[Candidate] = []
    seen: set[str] = set()

    def flush():
        if current_doc is not None:
            groups.append(QueryGroup(doc_id=current_doc, candidates=list(current)))

    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        doc_id = record["doc_id"]
        if doc_id != current_doc:
            if doc_id in seen:
                raise ValueError(
                    f"line {line_no}: records for doc {doc_id!r} are not contiguous")
            flush()
            seen.add(doc_id)
            current_doc = doc_id
            current = []
        current.append(Candidate(
            ref_id=record["ref_id"],
            features=FeatureVector.from_dict(record["features"],
                                             normalized=normalized),
            grade=record.get("grade")))
    flush()
    return groups


def read_feature_records_file(path, normalized: bool = True) -> list[QueryGroup]:
    with open(path, encoding="utf-8") as fh:
        return read_feature_records(fh, normalized=normalized)
