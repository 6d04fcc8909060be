from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afmeta.data import (
    AlignMode,
    ErrorAnnotation,
    EvaluationSet,
    Orientation,
    ScoreMatrix,
    Severity,
    SystemPair,
    align,
    parse_mqm_file,
    parse_score_file,
)
from afmeta.errors import (
    DuplicateCell,
    EmptyFile,
    MalformedSeverity,
    MissingColumn,
    NonNumericScore,
    UnalignedIds,
)
from conftest import MQM_HEADER, mqm_tsv


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestParseMqm:
    def test_minimal_two_by_one(self, tmp_path):
        rows = [
            "sysA\td1\tseg1\tr1\ts\tout a\tNo-error\tNo-error",
            "sysA\td1\tseg1\tr2\ts\tout a\tNo-error\tNo-error",
            "sysB\td1\tseg1\tr1\ts\tout b\tAccuracy/Omission\tMajor",
            "sysB\td1\tseg1\tr2\ts\tout b\tFluency/Grammar\tMinor",
        ]
        es = parse_mqm_file(write(tmp_path, "x.tsv", mqm_tsv(rows)))
        assert es.n_systems == 2
        assert es.n_segments == 1
        assert es.systems == ("sysA", "sysB")
        assert es.candidates[("sysA", "seg1")] == "out a"
        assert len(es.annotations) == 4

    def test_lowercase_severity_accepted(self, tmp_path):
        rows = [
            "a\td\tg\tr\ts\tt\tAccuracy/Omission\tmajor",
            "b\td\tg\tr\ts\tt\tFluency/Grammar\tMINOR",
        ]
        es = parse_mqm_file(write(tmp_path, "x.tsv", mqm_tsv(rows)))
        severities = {a.system_id: a.severity for a in es.annotations}
        assert severities == {"a": Severity.MAJOR, "b": Severity.MINOR}

    def test_unknown_severity_rejected(self, tmp_path):
        rows = ["a\td\tg\tr\ts\tt\tAccuracy/Omission\tcatastrophic"]
        with pytest.raises(MalformedSeverity):
            parse_mqm_file(write(tmp_path, "x.tsv", mqm_tsv(rows)))

    def test_missing_column(self, tmp_path):
        text = "system\tdoc\tseg_id\trater\tsource\ttarget\tcategory\n" + "a\td\tg\tr\ts\tt\tOther\n"
        with pytest.raises(MissingColumn):
            parse_mqm_file(write(tmp_path, "x.tsv", text))

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyFile):
            parse_mqm_file(write(tmp_path, "x.tsv", ""))
        with pytest.raises(EmptyFile):
            parse_mqm_file(write(tmp_path, "y.tsv", MQM_HEADER + "\n"))

    def test_no_error_rows_forced_neutral(self, tmp_path):
        rows = [
            "a\td\tg\tr\ts\tt\tno-error\tNo-error",
            "b\td\tg\tr\ts\tt\tNo-error\tNeutral",
        ]
        es = parse_mqm_file(write(tmp_path, "x.tsv", mqm_tsv(rows)))
        assert all(a.severity is Severity.NEUTRAL for a in es.annotations)

    def test_span_markers(self, tmp_path):
        rows = [
            "a\td\tg\tr\ts\tfoo <v>bar</v> baz\tAccuracy/Omission\tMajor",
            "b\td\tg\tr\ts\tplain\tNo-error\tno-error",
        ]
        es = parse_mqm_file(write(tmp_path, "x.tsv", mqm_tsv(rows)))
        assert es.candidates[("a", "g")] == "foo bar baz"
        spans = {a.system_id: a.span for a in es.annotations}
        assert spans["a"] == (4, 7)
        assert spans["b"] is None

    def test_language_pair_sniffed(self, tmp_path):
        rows = [
            "a\td\tg\tr\ts\tt\tOther\tMajor",
            "b\td\tg\tr\ts\tt\tOther\tMajor",
        ]
        es = parse_mqm_file(write(tmp_path, "wmt.en-es.2024.tsv", mqm_tsv(rows)))
        assert es.language_pair == "en-es"

    def test_row_order_insensitive(self, tmp_path):
        rows = [
            "sysB\td\tseg2\tr1\ts\tb2\tAccuracy/Omission\tMajor",
            "sysA\td\tseg1\tr1\ts\ta1\tNo-error\tNo-error",
            "sysA\td\tseg2\tr2\ts\ta2\tFluency/Grammar\tMinor",
            "sysB\td\tseg1\tr1\ts\tb1\tNo-error\tNo-error",
            "sysA\td\tseg2\tr1\ts\ta2\tFluency/Spelling\tMinor",
        ]
        path1 = write(tmp_path, "a.tsv", mqm_tsv(rows))
        shuffled = rows[:]
        random.Random(3).shuffle(shuffled)
        path2 = write(tmp_path, "b.tsv", mqm_tsv(shuffled))
        es1 = parse_mqm_file(path1, name="same")
        es2 = parse_mqm_file(path2, name="same")
        assert es1 == es2

    def test_round_trip(self, tmp_path):
        rows = [
            "sysA\td1\tseg1\tr1\tsrc\thello <v>there</v>\tAccuracy/Omission\tMajor",
            "sysA\td1\tseg1\tr2\tsrc\thello there\tNo-error\tNo-error",
            "sysA\td1\tseg2\tr1\tsrc\tsecond\tFluency/Punctuation\tMinor",
            "sysB\td1\tseg1\tr1\tsrc\tother\tNon-translation!\tMajor",
            "sysB\td1\tseg2\tr1\tsrc\t<v>x</v> y\tStyle/Unnatural or awkward\tMinor",
        ]
        es = parse_mqm_file(write(tmp_path, "x.tsv", mqm_tsv(rows)), name="rt")
        back = write(tmp_path, "rt.tsv", es.to_tsv_string())
        assert parse_mqm_file(back, name="rt", language_pair=es.language_pair) == es

    @settings(max_examples=30, deadline=None)
    @given(st.data())
    def test_round_trip_property(self, tmp_path_factory, data):
        systems = data.draw(st.lists(st.sampled_from(["s1", "s2", "s3"]), min_size=2, max_size=3, unique=True))
        segments = data.draw(st.lists(st.sampled_from(["g1", "g2", "g3"]), min_size=1, max_size=3, unique=True))
        categories = ["Accuracy/Omission", "Fluency/Grammar", "Other", "No-error"]
        severities = ["Major", "Minor", "Neutral"]
        rows = []
        for s in sorted(systems):
            for g in sorted(segments):
                n_rows = data.draw(st.integers(1, 2))
                for r in range(n_rows):
                    cat = data.draw(st.sampled_from(categories))
                    sev = "No-error" if cat == "No-error" else data.draw(st.sampled_from(severities))
                    rows.append(f"{s}\td\t{g}\trater{r}\tsrc\tcand {s} {g}\t{cat}\t{sev}")
        path = tmp_path_factory.mktemp("rt") / "p.tsv"
        path.write_text(mqm_tsv(rows), encoding="utf-8")
        es = parse_mqm_file(path, name="p", language_pair="en-de")
        back = path.with_name("q.tsv")
        back.write_text(es.to_tsv_string(), encoding="utf-8")
        assert parse_mqm_file(back, name="p", language_pair="en-de") == es


class TestScoreMatrix:
    def test_lower_better_negated_and_raw(self):
        raw = np.array([[1.0, 2.0], [3.0, 4.0]])
        m = ScoreMatrix.from_raw("m", raw, Orientation.LOWER_BETTER, ("a", "b"), ("g1", "g2"))
        assert np.array_equal(m.values, -raw)
        assert np.array_equal(m.raw, raw)
        h = ScoreMatrix.from_raw("h", raw, Orientation.HIGHER_BETTER, ("a", "b"), ("g1", "g2"))
        assert np.array_equal(h.values, raw)

    def test_shape_and_finiteness_validated(self):
        with pytest.raises(ValueError):
            ScoreMatrix("m", np.zeros((2, 2)), Orientation.HIGHER_BETTER, ("a",), ("g1", "g2"))
        with pytest.raises(NonNumericScore):
            ScoreMatrix("m", np.array([[np.nan, 1.0]]), Orientation.HIGHER_BETTER, ("a",), ("g1", "g2"))

    def test_values_immutable(self):
        m = ScoreMatrix("m", np.zeros((2, 1)), Orientation.HIGHER_BETTER, ("a", "b"), ("g",))
        with pytest.raises(ValueError):
            m.values[0, 0] = 1.0

    def test_reindex_missing_raises(self):
        m = ScoreMatrix("m", np.zeros((2, 2)), Orientation.HIGHER_BETTER, ("a", "b"), ("g1", "g2"))
        with pytest.raises(UnalignedIds):
            m.reindex(("a", "c"), ("g1", "g2"))
        with pytest.raises(UnalignedIds):
            m.reindex(("a", "b"), ("g1", "g3"))

    def test_system_pair_invariant(self):
        with pytest.raises(ValueError):
            SystemPair(2, 1)
        with pytest.raises(ValueError):
            SystemPair(1, 1)


class TestParseScores:
    def test_tsv_two_by_two(self, tmp_path):
        text = "system\tseg_id\tscore\nb\tg1\t1\nb\tg2\t2\na\tg1\t3\na\tg2\t4\n"
        m = parse_score_file(write(tmp_path, "s.tsv", text), Orientation.HIGHER_BETTER)
        assert m.systems == ("a", "b")
        assert m.segments == ("g1", "g2")
        assert np.array_equal(m.values, [[3.0, 4.0], [1.0, 2.0]])

    def test_json(self, tmp_path):
        text = '[{"system": "a", "seg_id": "g", "score": 1.5}, {"system": "b", "seg_id": "g", "score": 2.5}]'
        m = parse_score_file(write(tmp_path, "s.json", text), Orientation.LOWER_BETTER)
        assert np.array_equal(m.raw, [[1.5], [2.5]])

    def test_duplicate_cell(self, tmp_path):
        text = "system\tseg_id\tscore\na\tg1\t1\na\tg1\t2\n"
        with pytest.raises(DuplicateCell):
            parse_score_file(write(tmp_path, "s.tsv", text), Orientation.HIGHER_BETTER)

    def test_non_numeric(self, tmp_path):
        for bad in ("NaN", "inf", "abc"):
            text = f"system\tseg_id\tscore\na\tg1\t{bad}\n"
            with pytest.raises(NonNumericScore):
                parse_score_file(write(tmp_path, "s.tsv", text), Orientation.HIGHER_BETTER)

    def test_missing_cell_in_grid(self, tmp_path):
        text = "system\tseg_id\tscore\na\tg1\t1\na\tg2\t2\nb\tg1\t3\n"
        with pytest.raises(UnalignedIds):
            parse_score_file(write(tmp_path, "s.tsv", text), Orientation.HIGHER_BETTER)


class TestAlign:
    def make_set(self, tmp_path, rows):
        return parse_mqm_file(write(tmp_path, "e.tsv", mqm_tsv(rows)))

    def complete_set(self, tmp_path):
        rows = [
            "a\td\tg1\tr\ts\tt\tNo-error\tNo-error",
            "a\td\tg2\tr\ts\tt\tNo-error\tNo-error",
            "b\td\tg1\tr\ts\tt\tNo-error\tNo-error",
            "b\td\tg2\tr\ts\tt\tNo-error\tNo-error",
        ]
        return self.make_set(tmp_path, rows)

    def test_identity_when_complete(self, tmp_path):
        es = self.complete_set(tmp_path)
        scores = ScoreMatrix("m", np.arange(4.0).reshape(2, 2), Orientation.HIGHER_BETTER, es.systems, es.segments)
        es2, [m2] = align(es, [scores], AlignMode.STRICT)
        assert es2 == es
        assert m2 == scores

    def test_drop_incomplete_segment(self, tmp_path):
        es = self.complete_set(tmp_path)
        partial = ScoreMatrix("m", np.array([[1.0], [2.0]]), Orientation.HIGHER_BETTER, es.systems, ("g1",))
        es2, [m2] = align(es, [partial], AlignMode.DROP_INCOMPLETE)
        assert es2.segments == ("g1",)
        assert m2.segments == ("g1",)
        with pytest.raises(UnalignedIds):
            align(es, [partial], AlignMode.STRICT)

    def test_missing_system_always_raises(self, tmp_path):
        es = self.complete_set(tmp_path)
        one_sys = ScoreMatrix("m", np.array([[1.0, 2.0]]), Orientation.HIGHER_BETTER, ("a",), es.segments)
        for mode in (AlignMode.STRICT, AlignMode.DROP_INCOMPLETE):
            with pytest.raises(UnalignedIds):
                align(es, [one_sys], mode)

    def test_incomplete_eval_set_cells(self, tmp_path):
        rows = [
            "a\td\tg1\tr\ts\tt\tNo-error\tNo-error",
            "a\td\tg2\tr\ts\tt\tNo-error\tNo-error",
            "b\td\tg1\tr\ts\tt\tNo-error\tNo-error",
        ]
        es = self.make_set(tmp_path, rows)
        with pytest.raises(UnalignedIds):
            align(es, [], AlignMode.STRICT)
        es2, _ = align(es, [], AlignMode.DROP_INCOMPLETE)
        assert es2.segments == ("g1",)

    def test_matrices_share_shape_after_align(self, tmp_path):
        es = self.complete_set(tmp_path)
        extra = ScoreMatrix(
            "m",
            np.arange(6.0).reshape(2, 3),
            Orientation.HIGHER_BETTER,
            es.systems,
            ("g1", "g2", "g3"),
        )
        es2, [m2] = align(es, [extra], AlignMode.STRICT)
        assert m2.values.shape == (es2.n_systems, es2.n_segments)


class TestEvaluationSet:
    def test_needs_two_systems(self):
        with pytest.raises(ValueError):
            EvaluationSet("x", "", ("a",), ("g",), {("a", "g"): ""}, ())

    def test_candidates_immutable(self):
        es = EvaluationSet(
            "x", "", ("a", "b"), ("g",), {("a", "g"): "t1", ("b", "g"): "t2"}, ()
        )
        with pytest.raises(TypeError):
            es.candidates[("a", "g")] = "mutated"

    def test_annotation_validation(self):
        with pytest.raises(ValueError):
            ErrorAnnotation("s", "d", "g", "r", "", Severity.MAJOR)
        with pytest.raises(ValueError):
            ErrorAnnotation("s", "d", "g", "r", "No-error", Severity.MAJOR)
        with pytest.raises(ValueError):
            ErrorAnnotation("s", "d", "g", "r", "Other", Severity.MAJOR, span=(3, 1))
