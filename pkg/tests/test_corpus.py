"""Corpus parsing, citation contexts, candidate selection, external
rankings, and the synthetic generator."""

import io
import json
import math
from collections import Counter

import numpy as np
import pytest

from citerank.corpus import (
    CorpusError,
    Corpus,
    Document,
    ExternalRanking,
    Reference,
    build_corpus_vocabulary,
    external_to_relevance,
    extract_citation_contexts,
    parse_corpus,
    parse_external_rankings,
    select_candidates,
    serialize_corpus,
    strip_citation_markers,
    write_external_rankings,
)
from citerank.synth import SynthConfig, generate_synthetic_corpus
from citerank.textsim import build_vocabulary, tokenize


def make_doc(doc_id="d1", full_text="", discussion="", n_refs=5,
             annotations=None, abstracts=None, abstract="about things"):
    refs = tuple(
        Reference(ref_id=f"R{i+1}", title=f"title {i+1}",
                  abstract=(abstracts[i] if abstracts else f"abstract text {i+1}"),
                  year=2010 + i, citation_impact=10 * i)
        for i in range(n_refs))
    return Document(doc_id=doc_id, title="a study", abstract=abstract,
                    full_text=full_text, discussion=discussion, year=2016,
                    references=refs, annotations=annotations)


def doc_record(doc_id="d1", refs=5, annotations=None, full_text="x [[cite:R1]] y"):
    return {
        "doc_id": doc_id,
        "title": "a study of things",
        "abstract": "we study things",
        "full_text": full_text,
        "discussion": "things were studied",
        "year": 2016,
        "references": [
            {"ref_id": f"R{i+1}", "title": f"ref {i+1}",
             "abstract": f"reference abstract {i+1}", "year": 2010 + i,
             "citation_impact": i}
            for i in range(refs)
        ],
        **({"annotations": annotations} if annotations is not None else {}),
    }


class TestParseCorpus:
    def test_empty_stream(self):
        corpus = parse_corpus([])
        assert len(corpus) == 0
        assert corpus.warnings == []

    def test_minimal_well_formed(self):
        line = json.dumps(doc_record(annotations={f"R{i+1}": i + 1 for i in range(5)}))
        corpus = parse_corpus([line])
        assert len(corpus) == 1
        assert corpus[0].doc_id == "d1"
        assert corpus[0].annotations == {"R1": 1, "R2": 2, "R3": 3, "R4": 4, "R5": 5}
        assert corpus.warnings == []

    def test_unknown_marker_names_doc_and_ref(self):
        line = json.dumps(doc_record(full_text="see [[cite:X9]]"))
        with pytest.raises(CorpusError) as err:
            parse_corpus([line])
        assert "d1" in str(err.value) and "X9" in str(err.value)

    def test_malformed_json_reports_line(self):
        good = json.dumps(doc_record())
        with pytest.raises(CorpusError) as err:
            parse_corpus([good, "{not json"])
        assert err.value.line == 2

    def test_duplicate_doc_id(self):
        line = json.dumps(doc_record())
        with pytest.raises(CorpusError, match="duplicate doc_id"):
            parse_corpus([line, line])

    def test_duplicate_ref_id(self):
        record = doc_record()
        record["references"].append(dict(record["references"][0]))
        with pytest.raises(CorpusError, match="duplicate ref_id"):
            parse_corpus([json.dumps(record)])

    def test_non_permutation_grades_warn_but_load(self):
        line = json.dumps(doc_record(annotations={"R1": 3, "R2": 3, "R3": 1,
                                                  "R4": 2, "R5": 5}))
        corpus = parse_corpus([line])
        assert len(corpus) == 1
        assert len(corpus.warnings) == 1
        assert "permutation" in corpus.warnings[0]

    def test_wrong_annotation_count_warns(self):
        line = json.dumps(doc_record(annotations={"R1": 1, "R2": 2}))
        corpus = parse_corpus([line])
        assert len(corpus.warnings) == 1

    def test_annotating_unknown_ref_is_an_error(self):
        line = json.dumps(doc_record(annotations={"NOPE": 1}))
        with pytest.raises(CorpusError, match="NOPE"):
            parse_corpus([line])

    def test_negative_impact_and_year_rejected(self):
        record = doc_record()
        record["references"][0]["citation_impact"] = -1
        with pytest.raises(CorpusError, match="negative citation impact"):
            parse_corpus([json.dumps(record)])
        record = doc_record()
        record["year"] = 0
        with pytest.raises(CorpusError, match="non-positive year"):
            parse_corpus([json.dumps(record)])

    def test_unknown_field_rejected(self):
        record = doc_record()
        record["surprise"] = 1
        with pytest.raises(CorpusError, match="unknown fields"):
            parse_corpus([json.dumps(record)])

    def test_roundtrip_structural_equality(self):
        cfg = SynthConfig(planted_weights={"mention_full": 1.0}, n_documents=6,
                          vocab_size=60)
        corpus = generate_synthetic_corpus(cfg, seed=5)
        buf = io.StringIO()
        serialize_corpus(corpus, buf)
        buf.seek(0)
        reparsed = parse_corpus(buf)
        assert reparsed.documents == corpus.documents
        buf2 = io.StringIO()
        serialize_corpus(reparsed, buf2)
        assert buf.getvalue() == buf2.getvalue()


class TestCitationContexts:
    def test_boundary_truncated_window(self):
        doc = make_doc(full_text="a b c [[cite:R1]] d e")
        contexts = extract_citation_contexts(doc)
        assert contexts["R1"].contexts_full == (("a", "b", "c", "d", "e"),)
        assert contexts["R1"].mention_count_full == 1

    def test_counts_per_section(self):
        doc = make_doc(full_text="x [[cite:R1]] y [[cite:R1]] z",
                       discussion="w [[cite:R1]]")
        contexts = extract_citation_contexts(doc)
        assert contexts["R1"].mention_count_full == 2
        assert contexts["R1"].mention_count_discussion == 1

    def test_unmentioned_reference_is_zero(self):
        doc = make_doc(full_text="x [[cite:R1]] y")
        contexts = extract_citation_contexts(doc)
        assert contexts["R2"].mention_count_full == 0
        assert contexts["R2"].mention_count_discussion == 0
        assert contexts["R2"].contexts_full == ()

    def test_window_limit_ten_each_side(self):
        left = " ".join(f"l{i}" for i in range(15))
        right = " ".join(f"r{i}" for i in range(15))
        doc = make_doc(full_text=f"{left} [[cite:R1]] {right}")
        (window,) = extract_citation_contexts(doc)["R1"].contexts_full
        assert len(window) == 20
        assert window[0] == "l5" and window[9] == "l14"
        assert window[10] == "r0" and window[-1] == "r9"

    def test_custom_window_size(self):
        doc = make_doc(full_text="a b c [[cite:R1]] d e f")
        (window,) = extract_citation_contexts(doc, window=2)["R1"].contexts_full
        assert window == ("b", "c", "d", "e")

    def test_marker_tokens_never_leak(self):
        doc = make_doc(full_text="alpha [[cite:R1]] beta [[cite:R2]] gamma")
        contexts = extract_citation_contexts(doc)
        for ctx in contexts.values():
            for window in ctx.contexts_full:
                assert "cite" not in window
                assert "r1" not in window and "r2" not in window
        (w1,) = contexts["R1"].contexts_full
        assert w1 == ("alpha", "beta", "gamma")
        (w2,) = contexts["R2"].contexts_full
        assert w2 == ("alpha", "beta", "gamma")

    def test_counts_invariant_under_whitespace(self):
        doc_a = make_doc(full_text="a  b\tc [[cite:R1]]\n d")
        doc_b = make_doc(full_text="a b c [[cite:R1]] d")
        ca = extract_citation_contexts(doc_a)
        cb = extract_citation_contexts(doc_b)
        for ref_id in ca:
            assert ca[ref_id].contexts_full == cb[ref_id].contexts_full
            assert ca[ref_id].mention_count_full == cb[ref_id].mention_count_full

    def test_strip_markers(self):
        assert tokenize(strip_citation_markers("a [[cite:R1]] b")) == ["a", "b"]


def brute_cosine_order(doc_abstract, ref_abstracts, vocab):
    """Independent dense TF*IDF cosine: raw counts, ln(N/(1+df))."""
    terms = sorted(vocab.terms)
    idf = np.array([math.log(vocab.n_docs / (1 + vocab.terms[t][1])) for t in terms])

    def dense(text):
        counts = Counter(tokenize(text))
        return np.array([counts.get(t, 0) for t in terms], dtype=float) * idf

    q = dense(doc_abstract)
    sims = []
    for ref_id, abstract in ref_abstracts:
        v = dense(abstract)
        denom = np.linalg.norm(q) * np.linalg.norm(v)
        sims.append(((q @ v) / denom if denom else 0.0, ref_id))
    sims.sort(key=lambda pair: (-pair[0], pair[1]))
    return [ref_id for _, ref_id in sims]


class TestSelectCandidates:
    def setup_method(self):
        self.abstracts = [
            "gene expression in neurons",
            "neurons and gene regulation",
            "protein folding dynamics",
            "expression of proteins in cells",
            "unrelated astronomy topic entirely",
            "gene expression in cells and neurons",
        ]
        self.query = "gene expression in neurons and cells"
        self.doc = make_doc(n_refs=6, abstracts=self.abstracts, abstract=self.query)
        units = [tokenize(self.query)] + [tokenize(a) for a in self.abstracts]
        self.vocab = build_vocabulary(units)

    def test_top5_matches_brute_force(self):
        expected = brute_cosine_order(
            self.doc.abstract,
            [(r.ref_id, r.abstract) for r in self.doc.references],
            self.vocab)[:5]
        assert select_candidates(self.doc, self.vocab, k=5) == expected

    def test_k_equals_all_is_total_order(self):
        got = select_candidates(self.doc, self.vocab, k=6)
        expected = brute_cosine_order(
            self.doc.abstract,
            [(r.ref_id, r.abstract) for r in self.doc.references],
            self.vocab)
        assert got == expected

    def test_identical_abstract_ranks_first(self):
        abstracts = list(self.abstracts)
        abstracts[3] = self.query
        doc = make_doc(n_refs=6, abstracts=abstracts, abstract=self.query)
        got = select_candidates(doc, self.vocab, k=6)
        assert got[0] == "R4"

    def test_too_few_eligible(self):
        doc = make_doc(n_refs=5, abstracts=["a topic", "", "", "", ""])
        vocab = build_vocabulary([["a", "topic"]])
        with pytest.raises(ValueError, match="non-empty abstracts"):
            select_candidates(doc, vocab, k=5)


class TestExternalToRelevance:
    def test_quoted_rule_example(self):
        ext = ExternalRanking(doc_id="d", ordered_ref_positions={"A": 3, "B": 10, "C": 57},
                              list_length=100)
        got = external_to_relevance(["A", "B", "C", "D", "E"], ext)
        assert got == {"A": 5, "B": 4, "C": 3, "D": 2, "E": 2}

    def test_all_present_is_permutation(self):
        ext = ExternalRanking(doc_id="d",
                              ordered_ref_positions={"A": 9, "B": 2, "C": 31, "D": 1, "E": 70},
                              list_length=100)
        got = external_to_relevance(["A", "B", "C", "D", "E"], ext)
        assert sorted(got.values()) == [1, 2, 3, 4, 5]
        assert got["D"] == 5 and got["E"] == 1

    def test_none_found_all_one(self):
        ext = ExternalRanking(doc_id="d", ordered_ref_positions={}, list_length=0)
        got = external_to_relevance(["A", "B", "C"], ext)
        assert got == {"A": 1, "B": 1, "C": 1}

    def test_contiguous_descending_range_and_inverted_order(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(2, 8))
            candidates = [f"c{i}" for i in range(n)]
            found = [c for c in candidates if rng.random() < 0.6]
            positions = {c: int(p) for c, p in
                         zip(found, rng.choice(200, size=len(found), replace=False) + 1)}
            ext = ExternalRanking(doc_id="d", ordered_ref_positions=positions,
                                  list_length=200)
            got = external_to_relevance(candidates, ext)
            values = sorted(set(got.values()), reverse=True)
            assert values == list(range(max(values), min(values) - 1, -1))
            ordered = sorted(found, key=lambda c: positions[c])
            assert [got[c] for c in ordered] == sorted(
                [got[c] for c in ordered], reverse=True)

    def test_rejects_bad_positions(self):
        with pytest.raises(ValueError):
            ExternalRanking(doc_id="d", ordered_ref_positions={"A": 0}, list_length=5)
        with pytest.raises(ValueError):
            ExternalRanking(doc_id="d", ordered_ref_positions={"A": 1, "B": 1},
                            list_length=5)


class TestExternalRankingIO:
    def test_roundtrip_and_first_occurrence_wins(self):
        buf = io.StringIO()
        write_external_rankings([("d1", ["x", "R2", "R1", "R2"])], buf)
        buf.seek(0)
        rankings = parse_external_rankings(buf)
        assert rankings["d1"].ordered_ref_positions == {"x": 1, "R2": 2, "R1": 3}
        assert rankings["d1"].list_length == 4

    def test_duplicate_doc_rejected(self):
        line = json.dumps({"doc_id": "d1", "ranked_list": []})
        with pytest.raises(CorpusError, match="duplicate"):
            parse_external_rankings([line, line])


class TestSyntheticCorpus:
    def test_same_seed_byte_identical(self):
        cfg = SynthConfig(planted_weights={"sim_aa": 1.0}, n_documents=4,
                          vocab_size=50)
        a, b = io.StringIO(), io.StringIO()
        serialize_corpus(generate_synthetic_corpus(cfg, seed=3), a)
        serialize_corpus(generate_synthetic_corpus(cfg, seed=3), b)
        assert a.getvalue() == b.getvalue()

    def test_different_seed_differs(self):
        cfg = SynthConfig(planted_weights={"sim_aa": 1.0}, n_documents=4,
                          vocab_size=50)
        a, b = io.StringIO(), io.StringIO()
        serialize_corpus(generate_synthetic_corpus(cfg, seed=3), a)
        serialize_corpus(generate_synthetic_corpus(cfg, seed=4), b)
        assert a.getvalue() != b.getvalue()

    def test_mention_count_planting_orders_annotations(self):
        cfg = SynthConfig(planted_weights={"mention_full": 1.0}, n_documents=8,
                          vocab_size=80, mention_full_range=(1, 9),
                          min_score_gap=1e-9)
        corpus = generate_synthetic_corpus(cfg, seed=7)
        for doc in corpus:
            contexts = extract_citation_contexts(doc)
            counts = {r.ref_id: contexts[r.ref_id].mention_count_full
                      for r in doc.references}
            by_grade = sorted(doc.annotations, key=doc.annotations.get)
            assert [counts[r] for r in by_grade] == sorted(counts.values())

    def test_dataset_shape_450_annotations(self):
        cfg = SynthConfig(planted_weights={"sim_aa": 1.0, "mention_full": 0.5},
                          n_documents=90)
        corpus = generate_synthetic_corpus(cfg, seed=1)
        assert len(corpus) == 90
        total = sum(len(doc.annotations) for doc in corpus)
        assert total == 450
        for doc in corpus:
            assert sorted(doc.annotations.values()) == [1, 2, 3, 4, 5]

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            SynthConfig(planted_weights={}, n_documents=0)
        with pytest.raises(ValueError):
            SynthConfig(planted_weights={}, vocab_size=0)
        with pytest.raises(ValueError):
            SynthConfig(planted_weights={"nope": 1.0})

    def test_vocabulary_covers_both_unit_kinds(self):
        cfg = SynthConfig(planted_weights={"sim_aa": 1.0}, n_documents=3,
                          vocab_size=40)
        corpus = generate_synthetic_corpus(cfg, seed=2)
        vocab = build_corpus_vocabulary(corpus)
        n_refs = sum(len(d.references) for d in corpus)
        assert vocab.n_docs == len(corpus) + n_refs
