"""
From documents to feature vectors
=================================

For each (citing document, reference) pair the toolkit computes sixteen
features: twelve section-to-section similarities, the citation's age, two
mention-count fractions, and the citation impact. Citation mentions are
located through inline ``[[cite:<ref_id>]]`` markers, and the 10-token
windows around them become their own "context" text sections.

Requires demos/out/corpus.jsonl (run 00_generate_corpus.py first).
"""

from pathlib import Path

from citerank import (
    CITATION_FEATURES,
    build_corpus_vocabulary,
    extract_citation_contexts,
    featurize_corpus,
    parse_corpus_file,
)

corpus = parse_corpus_file(Path(__file__).parent / "out" / "corpus.jsonl")
doc = corpus[0]

############################################################
# Citation contexts: where and how often each reference is mentioned.

contexts = extract_citation_contexts(doc)
print(f"{doc.doc_id}: mention counts per reference")
for ref in doc.references:
    ctx = contexts[ref.ref_id]
    print(f"  {ref.ref_id}: full text x{ctx.mention_count_full}, "
          f"discussion x{ctx.mention_count_discussion}")
first_window = contexts[doc.references[0].ref_id].contexts_full[0]
print(f"one context window ({len(first_window)} tokens): "
      f"{' '.join(first_window[:8])} ...")

############################################################
# Raw feature vectors, then per-document rank normalization. The four
# citation features are unbounded across documents, so within each group
# they are mapped onto an evenly spaced 0..1 grid; similarities pass
# through untouched.

vocab = build_corpus_vocabulary(corpus)
raw_groups = featurize_corpus(corpus, vocab, normalize=False)
norm_groups = featurize_corpus(corpus, vocab)

raw = raw_groups[0]
norm = norm_groups[0]
print(f"\n{'feature':<20} {'raw[0..4]':<32} normalized[0..4]")
for name in ("sim_aa", "sim_fa") + tuple(CITATION_FEATURES):
    raw_vals = " ".join(f"{v:6.2f}" for v in raw.feature_values(name))
    norm_vals = " ".join(f"{v:5.2f}" for v in norm.feature_values(name))
    print(f"{name:<20} {raw_vals:<32} {norm_vals}")

print(f"\nauthor grades for {norm.doc_id}: {norm.grades()}")
print("(grade 5 = the reference the author would call closest)")
