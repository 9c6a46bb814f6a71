"""
The text kernel: tokens, TF*IDF, cosine
=======================================

Every similarity feature reduces to one primitive: tokenize two pieces of
text, weight terms by TF*IDF against a shared vocabulary, and take the
cosine. This walkthrough shows the moving parts on a toy corpus.
"""

import math

from citerank import (
    build_vocabulary,
    cosine,
    idf,
    tfidf_vector,
    tokenize,
)

############################################################
# Tokenization: lowercase, split on anything non-alphanumeric.
# No stemming, no stop-word list; IDF handles ubiquitous words.

print(tokenize("Neurogenesis, the study."))   # ['neurogenesis', 'the', 'study']
print(tokenize("p53-mediated apoptosis"))     # ['p53', 'mediated', 'apoptosis']

############################################################
# Document frequencies over a tiny corpus. "the" appears everywhere,
# "neurogenesis" in one document only.

texts = [
    "the study of neurogenesis in the adult brain",
    "the dynamics of protein folding",
    "the role of the immune system in the brain",
    "statistical methods for the biologist",
]
vocab = build_vocabulary([tokenize(t) for t in texts])
print(f"\nN = {vocab.n_docs}, vocabulary of {len(vocab)} terms")
for term in ("the", "brain", "neurogenesis", "unseen"):
    print(f"  df({term!r}) = {vocab.df(term)}, idf = {idf(term, vocab):+.4f}")

# Note: a term occurring in every document gets NEGATIVE idf, because
# idf = ln(N / (1 + df)) and N/(1+N) < 1. That is the defined behavior;
# such terms actively signal nothing.
assert idf("the", vocab) == math.log(4 / 5)

############################################################
# TF*IDF vectors and cosine similarity. The two brain-related texts
# land closer to each other than to the protein-folding one.

vectors = [tfidf_vector(t, vocab) for t in texts]
print("\npairwise cosine similarities:")
for i in range(len(texts)):
    row = " ".join(f"{cosine(vectors[i], vectors[j]):+.3f}"
                   for j in range(len(texts)))
    print(f"  [{row}]  {texts[i][:40]}")

sim_brain = cosine(vectors[0], vectors[2])
sim_protein = cosine(vectors[0], vectors[1])
print(f"\nbrain vs brain text:   {sim_brain:.3f}")
print(f"brain vs protein text: {sim_protein:.3f}")
