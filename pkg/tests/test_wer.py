import itertools
import random

import pytest

from corpusforge.corpus import DomainTermSet
from corpusforge.errors import UndefinedMetricError
from corpusforge.wer import PairingError, align, evaluate, write_alignments_tsv

from oracles import enum_edit_distance, enumerate_best_alignment, wf_edit_distance


def _corpus_with_ids(pairs):
    from corpusforge.corpus import Corpus, Sentence
    return Corpus(tuple(Sentence.from_text(sid, text) for sid, text in pairs))


class TestAlign:
    def test_identity_all_matches(self):
        ref = ["contact", "tower", "on", "final"]
        alignment = align(ref, ref)
        assert alignment.cost == 0
        assert all(op.kind == "match" for op in alignment.ops)

    def test_empty_hypothesis_two_deletions(self):
        alignment = align(["a", "b"], [])
        assert [op.kind for op in alignment.ops] == ["del", "del"]
        assert alignment.cost == 2

    def test_empty_reference_insertions(self):
        alignment = align([], ["x", "y", "z"])
        assert [op.kind for op in alignment.ops] == ["ins", "ins", "ins"]

    def test_worked_example_prefers_insert_delete(self):
        ref = ["contact", "tower", "on", "final"]
        hyp = ["contact", "the", "tower", "final"]
        alignment = align(ref, hyp)
        assert alignment.cost == 2
        assert [op.kind for op in alignment.ops] == ["match", "ins", "match", "del", "match"]
        assert alignment.ops[1].hyp == "the"
        assert alignment.ops[3].ref == "on"

    def test_sides_reproduce_inputs(self):
        rng = random.Random(17)
        for _ in range(40):
            ref = [rng.choice("abc") for _ in range(rng.randint(0, 7))]
            hyp = [rng.choice("abc") for _ in range(rng.randint(0, 7))]
            alignment = align(ref, hyp)
            assert [op.ref for op in alignment.ops if op.ref is not None] == ref
            assert [op.hyp for op in alignment.ops if op.hyp is not None] == hyp

    def test_cost_matches_independent_dp(self):
        rng = random.Random(29)
        for _ in range(150):
            ref = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
            hyp = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
            assert align(ref, hyp).cost == wf_edit_distance(ref, hyp)

    def test_tie_break_matches_exhaustive_enumeration(self):
        rng = random.Random(31)
        for _ in range(80):
            ref = [rng.choice("ab") for _ in range(rng.randint(0, 5))]
            hyp = [rng.choice("ab") for _ in range(rng.randint(0, 5))]
            expected = enumerate_best_alignment(ref, hyp)
            got = [op.kind for op in align(ref, hyp).ops]
            assert got == expected, (ref, hyp)

    def test_enumeration_oracle_agrees_with_dp_small(self):
        symbols = "ab"
        seqs = [
            list(c)
            for n in range(0, 4)
            for c in itertools.product(symbols, repeat=n)
        ]
        for ref in seqs:
            for hyp in seqs:
                assert enum_edit_distance(ref, hyp) == wf_edit_distance(ref, hyp)

    def test_deterministic(self):
        ref = ["a", "b", "a", "c"]
        hyp = ["b", "a", "c", "a"]
        assert align(ref, hyp) == align(ref, hyp)


class TestEvaluate:
    def test_worked_example_attribution(self):
        ref = _corpus_with_ids([("u1", "contact tower on final")])
        hyp = _corpus_with_ids([("u1", "contact the tower final")])
        terms = DomainTermSet({"tower": 2})
        report = evaluate(ref, hyp, terms)
        assert report.wer == 0.5
        assert report.b_wer == 0.0
        assert report.u_wer == pytest.approx(2 / 3)
        assert report.n_ref_biased == 1
        assert report.n_ref_unbiased == 3

    def test_identical_corpora_zero_error(self):
        ref = _corpus_with_ids([("a", "hold short runway two"), ("b", "wilco")])
        report = evaluate(ref, ref, DomainTermSet({"wilco": 2}))
        assert report.wer == 0.0
        assert report.b_wer == 0.0
        assert report.u_wer == 0.0

    def test_empty_term_set_degenerates(self):
        ref = _corpus_with_ids([("a", "alpha bravo charlie")])
        hyp = _corpus_with_ids([("a", "alpha delta charlie")])
        report = evaluate(ref, hyp, DomainTermSet({}))
        assert report.b_wer is None
        assert report.u_wer == report.wer

    def test_unpaired_ids_error(self):
        ref = _corpus_with_ids([("a", "one two")])
        hyp = _corpus_with_ids([("b", "one two")])
        with pytest.raises(PairingError):
            evaluate(ref, hyp, DomainTermSet({}))

    def test_empty_reference_corpus_error(self):
        from corpusforge.corpus import Corpus
        hyp = _corpus_with_ids([("a", "one two")])
        with pytest.raises(UndefinedMetricError):
            evaluate(Corpus(()), hyp, DomainTermSet({}))

    def test_wer_invariant_to_utterance_order(self):
        pairs_ref = [("a", "alpha bravo"), ("b", "charlie delta echo")]
        pairs_hyp = [("a", "alpha foxtrot"), ("b", "charlie echo")]
        terms = DomainTermSet({"charlie": 2})
        fwd = evaluate(_corpus_with_ids(pairs_ref), _corpus_with_ids(pairs_hyp), terms)
        rev = evaluate(_corpus_with_ids(list(reversed(pairs_ref))),
                       _corpus_with_ids(list(reversed(pairs_hyp))), terms)
        assert fwd == rev

    def test_error_combination_identity(self):
        rng = random.Random(41)
        words = ["tower", "wilco", "on", "final", "taxi", "go"]
        terms = DomainTermSet({"tower": 2, "wilco": 2})
        for _ in range(20):
            n = rng.randint(1, 4)
            ref_pairs = []
            hyp_pairs = []
            for i in range(n):
                ref_pairs.append((f"u{i}", " ".join(
                    rng.choice(words) for _ in range(rng.randint(1, 6)))))
                hyp_pairs.append((f"u{i}", " ".join(
                    rng.choice(words) for _ in range(rng.randint(1, 6)))))
            report = evaluate(_corpus_with_ids(ref_pairs), _corpus_with_ids(hyp_pairs), terms)
            assert report.biased.errors + report.unbiased.errors == report.overall.errors
            assert report.n_ref_biased + report.n_ref_unbiased == report.n_ref
            assert report.overall.substitutions == (
                report.biased.substitutions + report.unbiased.substitutions
            )

    def test_insertion_attribution_switch(self):
        ref = _corpus_with_ids([("a", "contact on final")])
        hyp = _corpus_with_ids([("a", "contact tower on final")])
        terms = DomainTermSet({"tower": 2})
        by_hyp = evaluate(ref, hyp, terms, insertion_attribution="hypothesis")
        assert by_hyp.biased.insertions == 1
        assert by_hyp.b_wer is None  # no biased reference words
        to_unbiased = evaluate(ref, hyp, terms, insertion_attribution="unbiased")
        assert to_unbiased.biased.insertions == 0
        assert to_unbiased.unbiased.insertions == 1
        assert to_unbiased.u_wer == pytest.approx(1 / 3)

    def test_normalization_applied_symmetrically(self):
        ref = _corpus_with_ids([("a", "Contact TOWER, on final.")])
        hyp = _corpus_with_ids([("a", "contact tower on final")])
        report = evaluate(ref, hyp, DomainTermSet({"tower": 2}))
        assert report.wer == 0.0

    def test_report_serializes_null_for_undefined(self, tmp_path):
        ref = _corpus_with_ids([("a", "alpha bravo")])
        report = evaluate(ref, ref, DomainTermSet({}))
        path = tmp_path / "report.json"
        report.save(path)
        import json
        record = json.loads(path.read_text())
        assert record["b_wer"] is None
        assert record["wer"] == 0.0

    def test_alignments_tsv(self, tmp_path):
        ref = _corpus_with_ids([("a", "alpha bravo")])
        hyp = _corpus_with_ids([("a", "alpha charlie")])
        collected = []
        evaluate(ref, hyp, DomainTermSet({}), alignments_out=collected)
        path = tmp_path / "alignments.tsv"
        write_alignments_tsv(collected, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "utterance_id\top\tref\thyp"
        assert "a\tsub\tbravo\tcharlie" in lines
