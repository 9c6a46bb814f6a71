"""Citing-document corpora: parsing, validation, citation contexts, and
candidate selection.

A corpus is a line-delimited stream of JSON document records (one citing
article per line). In-text citations are explicit inline markers of the
form ``[[cite:<ref_id>]]``; every marker must resolve to a reference of
the same document. Annotated documents carry a relevance grade per
reference (5 = closest); the canonical dataset shape is 5 graded
references per document, grades a permutation of 1..5, and the loader
flags (but accepts) deviations from that shape.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from . import textsim
from .textsim import Vocabulary, tokenize

MARKER_RE = re.compile(r"\[\[cite:(.*?)\]\]")

_DOC_FIELDS = ("doc_id", "title", "abstract", "full_text", "discussion",
               "year", "references", "annotations")
_REF_FIELDS = ("ref_id", "title", "abstract", "year", "citation_impact")


class CorpusError(ValueError):
    """A corpus record failed validation; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Reference:
    """A cited work as seen from one citing document."""

    ref_id: str
    title: str
    abstract: str
    year: int
    citation_impact: int


@dataclass(frozen=True)
class Document:
    """A citing article with sectioned text and its reference list.

    ``discussion`` is the pre-combined discussion/conclusion text.
    ``annotations`` maps ref_id to a relevance grade (higher = closer).
    """

    doc_id: str
    title: str
    abstract: str
    full_text: str
    discussion: str
    year: int
    references: tuple[Reference, ...]
    annotations: dict[str, int] | None = None

    def reference_ids(self) -> list[str]:
        return [r.ref_id for r in self.references]

    def reference(self, ref_id: str) -> Reference:
        for r in self.references:
            if r.ref_id == ref_id:
                return r
        raise KeyError(f"document {self.doc_id!r} has no reference {ref_id!r}")


@dataclass(frozen=True)
class CitationContexts:
    """Token windows around each in-text mention of one reference."""

    ref_id: str
    contexts_full: tuple[tuple[str, ...], ...]
    contexts_discussion: tuple[tuple[str, ...], ...]

    @property
    def mention_count_full(self) -> int:
        return len(self.contexts_full)

    @property
    def mention_count_discussion(self) -> int:
        return len(self.contexts_discussion)


@dataclass(frozen=True)
class ExternalRanking:
    """Positions of known ref_ids inside an external related-articles list."""

    doc_id: str
    ordered_ref_positions: dict[str, int]
    list_length: int

    def __post_init__(self):
        positions = list(self.ordered_ref_positions.values())
        if any(p < 1 for p in positions):
            raise ValueError("external positions must be >= 1")
        if len(set(positions)) != len(positions):
            raise ValueError("external positions must be distinct")


@dataclass
class Corpus:
    """A list of documents plus any non-fatal loader warnings."""

    documents: list[Document]
    warnings: list[str] = field(default_factory=list)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)

    def __getitem__(self, i):
        return self.documents[i]


def strip_citation_markers(text: str) -> str:
    """Remove ``[[cite:...]]`` markers, leaving a single space in place."""
    return MARKER_RE.sub(" ", text)


def _require_fields(record: dict, fields: tuple[str, ...], optional: set[str],
                    what: str, line: int) -> None:
    missing = [f for f in fields if f not in record and f not in optional]
    if missing:
        raise CorpusError(f"{what} missing fields {missing}", line)
    unknown = [k for k in record if k not in fields]
    if unknown:
        raise CorpusError(f"{what} has unknown fields {unknown}", line)


def _parse_reference(raw: dict, line: int) -> Reference:
    if not isinstance(raw, dict):
        raise CorpusError("reference record is not an object", line)
    _require_fields(raw, _REF_FIELDS, set(), "reference", line)
    try:
        ref = Reference(
            ref_id=str(raw["ref_id"]),
            title=str(raw["title"]),
            abstract=str(raw["abstract"]),
            year=int(raw["year"]),
            citation_impact=int(raw["citation_impact"]),
        )
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"bad reference field types: {exc}", line) from None
    if ref.year <= 0:
        raise CorpusError(f"reference {ref.ref_id!r} has non-positive year", line)
    if ref.citation_impact < 0:
        raise CorpusError(f"reference {ref.ref_id!r} has negative citation impact", line)
    return ref


def _parse_document(record: dict, line: int, warnings: list[str]) -> Document:
    _require_fields(record, _DOC_FIELDS, {"annotations"}, "document", line)
    if not isinstance(record["references"], list):
        raise CorpusError("references must be an array", line)
    references = tuple(_parse_reference(r, line) for r in record["references"])
    ref_ids = [r.ref_id for r in references]
    if len(set(ref_ids)) != len(ref_ids):
        raise CorpusError("duplicate ref_id within document", line)

    try:
        doc_id = str(record["doc_id"])
        year = int(record["year"])
        texts = {f: str(record[f]) for f in
                 ("title", "abstract", "full_text", "discussion")}
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"bad document field types: {exc}", line) from None
    if year <= 0:
        raise CorpusError(f"document {doc_id!r} has non-positive year", line)

    known = set(ref_ids)
    for section in ("full_text", "discussion"):
        for marker in MARKER_RE.findall(texts[section]):
            if marker not in known:
                raise CorpusError(
                    f"document {doc_id!r} cites unknown reference {marker!r} "
                    f"in {section}", line)

    annotations = None
    if record.get("annotations") is not None:
        raw_ann = record["annotations"]
        if not isinstance(raw_ann, dict):
            raise CorpusError("annotations must be an object", line)
        annotations = {}
        for ref_id, grade in raw_ann.items():
            if ref_id not in known:
                raise CorpusError(
                    f"document {doc_id!r} annotates unknown reference {ref_id!r}", line)
            if not isinstance(grade, int) or isinstance(grade, bool):
                raise CorpusError(
                    f"document {doc_id!r} has a non-integer grade for {ref_id!r}", line)
            annotations[ref_id] = grade
        if sorted(annotations.values()) != [1, 2, 3, 4, 5]:
            warnings.append(
                f"document {doc_id!r}: annotation grades "
                f"{sorted(annotations.values())} are not a permutation of 1..5")

    return Document(doc_id=doc_id, year=year, references=references,
                    annotations=annotations, **texts)


def parse_corpus(lines: Iterable[str]) -> Corpus:
    """Parse a line-delimited corpus stream into a validated :class:`Corpus`.

    Raises :class:`CorpusError` (with the offending line number) on
    malformed records, duplicate doc_ids, or unresolvable citation markers.
    Non-canonical annotation shapes are accepted and recorded in
    ``Corpus.warnings``.
    """
    documents: list[Document] = []
    warnings: list[str] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON: {exc.msg}", line_no) from None
        if not isinstance(record, dict):
            raise CorpusError("record is not a JSON object", line_no)
        doc = _parse_document(record, line_no, warnings)
        if doc.doc_id in seen:
            raise CorpusError(f"duplicate doc_id {doc.doc_id!r}", line_no)
        seen.add(doc.doc_id)
        documents.append(doc)
    return Corpus(documents=documents, warnings=warnings)


def parse_corpus_file(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh)


def document_to_record(doc: Document) -> dict:
    record = {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "abstract": doc.abstract,
        "full_text": doc.full_text,
        "discussion": doc.discussion,
        "year": doc.year,
        "references": [
            {"ref_id": r.ref_id, "title": r.title, "abstract": r.abstract,
             "year": r.year, "citation_impact": r.citation_impact}
            for r in doc.references
        ],
    }
    if doc.annotations is not None:
        record["annotations"] = dict(doc.annotations)
    return record


def serialize_corpus(corpus: Corpus, stream: TextIO) -> None:
    """Write one JSON record per document, in the canonical field order."""
    for doc in corpus:
        stream.write(json.dumps(document_to_record(doc)) + "\n")


def _tokens_and_marker_positions(text: str) -> tuple[list[str], list[tuple[str, int]]]:
    """Tokenize text with markers removed; report each marker's position in
    the token stream (markers themselves are not tokens)."""
    tokens: list[str] = []
    positions: list[tuple[str, int]] = []
    last = 0
    for m in MARKER_RE.finditer(text):
        tokens.extend(tokenize(text[last:m.start()]))
        positions.append((m.group(1), len(tokens)))
        last = m.end()
    tokens.extend(tokenize(text[last:]))
    return tokens, positions


def extract_citation_contexts(doc: Document, window: int = 10) -> dict[str, CitationContexts]:
    """Collect the token window around every mention of every reference.

    Each mention yields one window of up to ``window`` tokens before plus up
    to ``window`` after the marker (fewer at text boundaries). References
    never mentioned get empty contexts and zero counts.
    """
    per_section: dict[str, dict[str, list[tuple[str, ...]]]] = {
        "full_text": {r.ref_id: [] for r in doc.references},
        "discussion": {r.ref_id: [] for r in doc.references},
    }
    for section, store in per_section.items():
        tokens, positions = _tokens_and_marker_positions(getattr(doc, section))
        for ref_id, pos in positions:
            ctx = tuple(tokens[max(0, pos - window):pos] + tokens[pos:pos + window])
            store[ref_id].append(ctx)
    return {
        r.ref_id: CitationContexts(
            ref_id=r.ref_id,
            contexts_full=tuple(per_section["full_text"][r.ref_id]),
            contexts_discussion=tuple(per_section["discussion"][r.ref_id]),
        )
        for r in doc.references
    }


def build_corpus_vocabulary(corpus: Corpus) -> Vocabulary:
    """Vocabulary over all ingested text units: each citing document's full
    text (markers stripped) and each reference's title + abstract, one df
    unit apiece."""
    units: list[list[str]] = []
    for doc in corpus:
        units.append(tokenize(strip_citation_markers(doc.full_text)))
        for ref in doc.references:
            units.append(tokenize(ref.title + " " + ref.abstract))
    if not units:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    return textsim.build_vocabulary(units)


def select_candidates(doc: Document, vocab: Vocabulary, k: int = 5) -> list[str]:
    """The k references whose abstracts are most TF*IDF-cosine-similar to
    the document's abstract, best first; ties broken by ascending ref_id.

    References with empty abstracts are ineligible; raises ValueError when
    fewer than k references are eligible.
    """
    eligible = [r for r in doc.references if tokenize(r.abstract)]
    if len(eligible) < k:
        raise ValueError(
            f"document {doc.doc_id!r} has {len(eligible)} references with "
            f"non-empty abstracts; need {k}")
    doc_vec = textsim.tfidf_vector(doc.abstract, vocab)
    scored = [(textsim.cosine(doc_vec, textsim.tfidf_vector(r.abstract, vocab)),
               r.ref_id) for r in eligible]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [ref_id for _, ref_id in scored[:k]]


def external_to_relevance(candidates: list[str], ext: ExternalRanking) -> dict[str, int]:
    """Turn an external related-articles list into relevance grades.

    Candidates found in the external list are sorted by ascending position
    and assigned n, n-1, ... (best external position gets the highest
    relevance); every absent candidate gets one below the lowest assigned
    relevance. When no candidate is found at all, every candidate gets
    relevance 1.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    n = len(candidates)
    found = sorted(
        (c for c in candidates if c in ext.ordered_ref_positions),
        key=lambda c: ext.ordered_ref_positions[c])
    relevance = {c: n - i for i, c in enumerate(found)}
    floor = (n - len(found) + 1) - 1 if found else 1
    for c in candidates:
        relevance.setdefault(c, floor)
    return relevance


def parse_external_rankings(lines: Iterable[str]) -> dict[str, ExternalRanking]:
    """Parse the external-ranking stream: one ``{doc_id, ranked_list}``
    record per line. A ref's position is its first 1-based index."""
    rankings: dict[str, ExternalRanking] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON: {exc.msg}", line_no) from None
        if not isinstance(record, dict) or set(record) != {"doc_id", "ranked_list"}:
            raise CorpusError("external record needs exactly doc_id and ranked_list",
                              line_no)
        doc_id = str(record["doc_id"])
        if doc_id in rankings:
            raise CorpusError(f"duplicate doc_id {doc_id!r}", line_no)
        ranked_list = record["ranked_list"]
        if not isinstance(ranked_list, list):
            raise CorpusError("ranked_list must be an array", line_no)
        positions: dict[str, int] = {}
        for pos, entry in enumerate(ranked_list, start=1):
            positions.setdefault(str(entry), pos)
        rankings[doc_id] = ExternalRanking(
            doc_id=doc_id, ordered_ref_positions=positions,
            list_length=len(ranked_list))
    return rankings


def parse_external_rankings_file(path) -> dict[str, ExternalRanking]:
    with open(path, encoding="utf-8") as fh:
        return parse_external_rankings(fh)


def write_external_rankings(rankings: Iterable[tuple[str, list[str]]],
                            stream: TextIO) -> None:
    for doc_id, ranked_list in rankings:
        stream.write(json.dumps({"doc_id": doc_id, "ranked_list": ranked_list}) + "\n")
