"""
Generate a synthetic corpus
===========================

Builds a desk-scale corpus of 90 citing documents (5 graded references
each, the canonical dataset shape) whose annotation grades follow a known
planted weight vector, plus a matching external related-articles file.
Later demos and the CLI consume the two files written here.
"""

import json
from pathlib import Path

import numpy as np

from citerank import SynthConfig, generate_synthetic_corpus, serialize_corpus

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

############################################################
# Plant a ranking rule: text similarity matters, but mention
# counts, recency, and (negatively) citation impact matter more.

config = SynthConfig(
    planted_weights={
        "sim_aa": 0.6,
        "mention_full": 1.0,
        "age_years": -0.8,
        "citation_impact": -1.2,
    },
    n_documents=90,
    min_score_gap=0.15,  # keeps groups cleanly separable
)
corpus = generate_synthetic_corpus(config, seed=2024)

doc = corpus[0]
print(f"documents: {len(corpus)}")
print(f"first doc: {doc.doc_id}, year {doc.year}, "
      f"{len(doc.references)} references")
print(f"grades:    {doc.annotations}")
print(f"abstract:  {doc.abstract[:60]}...")

corpus_path = OUT / "corpus.jsonl"
with open(corpus_path, "w", encoding="utf-8") as fh:
    serialize_corpus(corpus, fh)
print(f"\nwrote {corpus_path}")

############################################################
# A noisy external "related articles" list per document: mostly
# grade-ordered, with occasional foreign entries and dropped refs.

rng = np.random.default_rng(7)
external_path = OUT / "external.jsonl"
with open(external_path, "w", encoding="utf-8") as fh:
    for doc in corpus:
        by_grade = sorted(doc.annotations, key=doc.annotations.get, reverse=True)
        ranked = []
        for ref_id in by_grade:
            if rng.random() < 0.15:        # ref missing from the external list
                continue
            if rng.random() < 0.3:         # unrelated article ranked in between
                ranked.append(f"ext{rng.integers(1000)}")
            ranked.append(ref_id)
        fh.write(json.dumps({"doc_id": doc.doc_id, "ranked_list": ranked}) + "\n")
print(f"wrote {external_path}")

print("\nnext: python demos/01_text_similarity.py, or run the CLI:")
print(f"  citerank ingest --corpus {corpus_path} --out demos/out/ingest")
