"""Tokenization, TF*IDF weighting, and cosine similarity.

This is the text kernel behind every similarity feature: documents are
tokenized, turned into sparse TF*IDF term vectors against a corpus-wide
vocabulary, and compared with cosine similarity.

Conventions, fixed here so every caller agrees:

* ``idf(t) = ln(N / (1 + df(t)))`` with natural log. A term occurring in
  every document gets a *negative* idf (``N/(1+N) < 1``); that is kept as
  defined rather than clamped, so cosine values may leave ``[0, 1]`` when
  negative weights mix. ``|cosine| <= 1`` always holds.
* ``tf`` is the raw occurrence count, not length-normalized.
* Tokens the vocabulary has never seen carry no index and are dropped from
  term vectors.
* A zero-norm vector is similar to nothing: ``cosine`` returns 0.0.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

# Sparse term vector: dense vocabulary index -> TF*IDF weight.
TermVector = dict[int, float]

# A token is a maximal run of alphanumeric characters (underscore excluded).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character.

    Empty tokens are dropped. No stemming and no stop-word removal; idf
    already down-weights ubiquitous words.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocabulary:
    """Immutable term index with document frequencies.

    ``terms`` maps each term to ``(dense_index, document_frequency)``;
    indices are dense in ``[0, len(terms))`` and assigned in sorted term
    order so construction is order-independent. ``n_docs`` is the corpus
    size N.
    """

    terms: dict[str, tuple[int, int]]
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def df(self, term: str) -> int:
        """Document frequency; 0 for unseen terms."""
        entry = self.terms.get(term)
        return 0 if entry is None else entry[1]

    def dump(self, stream: TextIO) -> None:
        """Write the line-delimited dump: header ``N=<corpus_size>``, then
        one ``term<TAB>index<TAB>df`` line per term in index order."""
        stream.write(f"N={self.n_docs}\n")
        for term, (idx, df) in sorted(self.terms.items(), key=lambda kv: kv[1][0]):
            stream.write(f"{term}\t{idx}\t{df}\n")

    @classmethod
    def load(cls, stream: TextIO) -> "Vocabulary":
        header = stream.readline().strip()
        if not header.startswith("N="):
            raise ValueError(f"bad vocabulary header: {header!r}")
        n_docs = int(header[2:])
        terms: dict[str, tuple[int, int]] = {}
        for line in stream:
            if not line.strip():
                continue
            term, idx, df = line.rstrip("\n").split("\t")
            terms[term] = (int(idx), int(df))
        vocab = cls(terms=terms, n_docs=n_docs)
        vocab._validate()
        return vocab

    def _validate(self) -> None:
        if self.n_docs < 1:
            raise ValueError("corpus size N must be >= 1")
        indices = sorted(idx for idx, _ in self.terms.values())
        if indices != list(range(len(self.terms))):
            raise ValueError("term indices are not dense in [0, len(terms))")
        for term, (_, df) in self.terms.items():
            if not 1 <= df <= self.n_docs:
                raise ValueError(f"df out of range for term {term!r}: {df}")


def build_vocabulary(docs: Sequence[Iterable[str]]) -> Vocabulary:
    """Build a :class:`Vocabulary` from tokenized documents.

    ``df(t)`` counts the documents containing ``t`` at least once;
    repetitions within one document do not increase df. N = ``len(docs)``.
    """
    if len(docs) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    df: Counter[str] = Counter()
    for tokens in docs:
        df.update(set(tokens))
    terms = {term: (idx, df[term]) for idx, term in enumerate(sorted(df))}
    vocab = Vocabulary(terms=terms, n_docs=len(docs))
    vocab._validate()
    return vocab


def idf(term: str, vocab: Vocabulary) -> float:
    """Inverse document frequency: ``ln(N / (1 + df))``.

    Unseen terms use df = 0, giving ``ln(N)``. When df = N the value is
    negative; see the module docstring.
    """
    return math.log(vocab.n_docs / (1 + vocab.df(term)))


def tfidf_from_tokens(tokens: Iterable[str], vocab: Vocabulary) -> TermVector:
    """TF*IDF vector of a token stream. Out-of-vocabulary tokens have no
    index and are dropped; zero weights are never stored."""
    vec: TermVector = {}
    for term, tf in Counter(tokens).items():
        entry = vocab.terms.get(term)
        if entry is None:
            continue
        weight = tf * math.log(vocab.n_docs / (1 + entry[1]))
        if weight != 0.0:
            vec[entry[0]] = weight
    return vec


def tfidf_vector(text: str, vocab: Vocabulary) -> TermVector:
    """TF*IDF vector of raw text: ``tokenize`` then weight each term by
    ``tf * idf``. Terms with tf = 0 are absent."""
    return tfidf_from_tokens(tokenize(text), vocab)


def cosine(a: TermVector, b: TermVector) -> float:
    """Cosine similarity ``a.b / (||a|| ||b||)`` over shared indices.

    Returns 0.0 if either vector has zero norm.
    """
    if not a or not b:
        return 0.0
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    # accumulate in sorted index order so cosine(a, b) == cosine(b, a) exactly
    shared = sorted(idx for idx in small if idx in large)
    dot = 0.0
    for idx in shared:
        dot += a[idx] * b[idx]
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)
