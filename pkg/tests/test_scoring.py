from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afmeta.data import ErrorAnnotation, EvaluationSet, Orientation, Severity, parse_mqm_file
from afmeta.scoring import (
    AspectClass,
    Taxonomy,
    WeightScheme,
    classify_error,
    error_penalty,
    mqm_matrices,
    system_means,
)
from conftest import mqm_tsv, oriented_matrix

DEFAULT = Taxonomy.builtin("default")
ENES = Taxonomy.builtin("enes")


def ann(category, severity, system="a", segment="g", rater="r"):
    return ErrorAnnotation(system, "d", segment, rater, category, severity)


class TestTaxonomy:
    @pytest.mark.parametrize(
        "category,expected",
        [
            ("Accuracy/Omission", AspectClass.ADEQUACY),
            ("Style/Unnatural or awkward", AspectClass.FLUENCY),
            ("Source issue", AspectClass.OTHER),
            ("Non-translation!", AspectClass.ADEQUACY),
            ("Terminology/Inconsistent", AspectClass.FLUENCY),
            ("Locale convention/Time format", AspectClass.FLUENCY),
        ],
    )
    def test_default_membership(self, category, expected):
        assert classify_error(category, DEFAULT) is expected

    def test_lookup_normalizes_case_and_whitespace(self):
        assert classify_error("accuracy/omission", DEFAULT) is AspectClass.ADEQUACY
        assert classify_error("  Accuracy/Omission ", DEFAULT) is AspectClass.ADEQUACY
        assert classify_error("STYLE/UNNATURAL  OR AWKWARD", DEFAULT) is AspectClass.FLUENCY

    def test_unknown_is_other(self):
        assert classify_error("Made/Up", DEFAULT) is AspectClass.OTHER

    @pytest.mark.parametrize(
        "category,expected",
        [
            ("Mistranslation", AspectClass.ADEQUACY),
            ("Punctuation", AspectClass.FLUENCY),
            ("MT hallucination", AspectClass.ADEQUACY),
            ("Source issue", AspectClass.OTHER),
        ],
    )
    def test_enes_membership(self, category, expected):
        assert classify_error(category, ENES) is expected

    def test_language_pair_selection(self):
        assert Taxonomy.for_language_pair("en-es").name == "enes"
        assert Taxonomy.for_language_pair("En_Es").name == "enes"
        assert Taxonomy.for_language_pair("en-de").name == "default"
        assert Taxonomy.for_language_pair("").name == "default"

    def test_disjointness_enforced(self):
        with pytest.raises(ValueError):
            Taxonomy("bad", frozenset({"x"}), frozenset({"x"}), frozenset())

    def test_user_taxonomy_file(self, tmp_path):
        path = tmp_path / "custom.txt"
        path.write_text("# mine\nADEQUACY\nAlpha\nFLUENCY\nBeta\nOTHER\nGamma\n", encoding="utf-8")
        tax = Taxonomy.load(path)
        assert tax.name == "custom"
        assert classify_error("alpha", tax) is AspectClass.ADEQUACY
        assert classify_error("beta", tax) is AspectClass.FLUENCY
        assert classify_error("delta", tax) is AspectClass.OTHER

    def test_every_category_maps_to_exactly_one_aspect(self):
        for tax in (DEFAULT, ENES):
            for cat in tax.adequacy_categories | tax.fluency_categories | tax.other_categories:
                hits = [
                    cat in tax.adequacy_categories,
                    cat in tax.fluency_categories,
                    cat in tax.other_categories,
                ]
                assert sum(hits) == 1


class TestWeights:
    def test_defaults(self):
        w = WeightScheme()
        assert (w.major, w.minor, w.neutral, w.non_translation, w.minor_punctuation) == (5.0, 1.0, 0.0, 25.0, 0.1)

    def test_validation(self):
        with pytest.raises(ValueError):
            WeightScheme(major=1.0, minor=2.0)
        with pytest.raises(ValueError):
            WeightScheme(minor=-1.0)

    def test_from_file(self, tmp_path):
        path = tmp_path / "w.cfg"
        path.write_text("major = 10\nminor-punctuation = 0.25 # tweak\n", encoding="utf-8")
        w = WeightScheme.from_file(path)
        assert w.major == 10.0
        assert w.minor_punctuation == 0.25
        assert w.minor == 1.0

    def test_from_file_unknown_key(self, tmp_path):
        path = tmp_path / "w.cfg"
        path.write_text("catastrophic = 9\n", encoding="utf-8")
        with pytest.raises(ValueError):
            WeightScheme.from_file(path)


class TestErrorPenalty:
    W = WeightScheme()

    @pytest.mark.parametrize(
        "category,severity,expected",
        [
            ("Accuracy/Mistranslation", Severity.MAJOR, 5.0),
            ("Accuracy/Mistranslation", Severity.MINOR, 1.0),
            ("Whatever", Severity.NEUTRAL, 0.0),
            ("Fluency/Punctuation", Severity.MINOR, 0.1),
            ("Fluency/Punctuation", Severity.MAJOR, 5.0),
            ("Punctuation", Severity.MINOR, 0.1),
            ("Non-translation!", Severity.MAJOR, 25.0),
            ("Non-translation!", Severity.MINOR, 25.0),
            ("Non-translation!", Severity.NEUTRAL, 25.0),
            ("No-error", Severity.NEUTRAL, 0.0),
        ],
    )
    def test_penalties(self, category, severity, expected):
        assert error_penalty(ann(category, severity), self.W) == expected


class TestMqmMatrices:
    def build(self, rows, systems=("a", "b"), segments=None):
        segments = tuple(segments) if segments else tuple(sorted({r[1] for r in rows}))
        candidates = {(s, g): "c" for s in systems for g in segments}
        annotations = tuple(ann(cat, sev, system=s, segment=g, rater=r) for s, g, r, cat, sev in rows)
        return EvaluationSet("t", "en-de", tuple(systems), segments, candidates, annotations)

    def test_no_errors_is_zero(self):
        es = self.build(
            [
                ("a", "g", "r", "No-error", Severity.NEUTRAL),
                ("b", "g", "r", "No-error", Severity.NEUTRAL),
            ]
        )
        m = mqm_matrices(es)
        for matrix in m:
            assert np.array_equal(matrix.raw, np.zeros((2, 1)))
            assert matrix.orientation is Orientation.LOWER_BETTER

    def test_hand_summed_cell(self):
        es = self.build(
            [
                ("a", "g", "r", "Accuracy/Omission", Severity.MAJOR),
                ("a", "g", "r", "Fluency/Grammar", Severity.MINOR),
                ("b", "g", "r", "No-error", Severity.NEUTRAL),
            ]
        )
        m = mqm_matrices(es)
        assert m.all.raw[0, 0] == 6.0
        assert m.adequacy.raw[0, 0] == 5.0
        assert m.fluency.raw[0, 0] == 1.0
        assert m.other.raw[0, 0] == 0.0

    def test_rater_mean(self):
        es = self.build(
            [
                ("a", "g", "r1", "Accuracy/Omission", Severity.MAJOR),  # 5 + 1 from next row
                ("a", "g", "r1", "Fluency/Grammar", Severity.MINOR),  # wait: two annotations same rater sum
                ("a", "g", "r2", "Accuracy/Mistranslation", Severity.MINOR),  # 1 + 1 next
                ("a", "g", "r2", "Fluency/Spelling", Severity.MINOR),
                ("b", "g", "r1", "No-error", Severity.NEUTRAL),
            ]
        )
        m = mqm_matrices(es)
        # rater1 sums to 6.0, rater2 to 2.0; the cell is their mean
        assert m.all.raw[0, 0] == pytest.approx(4.0)

    def test_unknown_category_goes_to_other(self):
        es = self.build(
            [
                ("a", "g", "r", "Mystery/Label", Severity.MAJOR),
                ("b", "g", "r", "No-error", Severity.NEUTRAL),
            ]
        )
        m = mqm_matrices(es)
        assert m.other.raw[0, 0] == 5.0
        assert m.adequacy.raw[0, 0] == 0.0

    def test_cells_without_annotations_are_zero(self):
        systems = ("a", "b")
        segments = ("g1", "g2")
        candidates = {(s, g): "c" for s in systems for g in segments}
        annotations = (ann("Accuracy/Omission", Severity.MAJOR, system="a", segment="g1"),)
        es = EvaluationSet("t", "en-de", systems, segments, candidates, annotations)
        m = mqm_matrices(es)
        assert m.all.raw[0, 1] == 0.0
        assert m.all.raw[1, 0] == 0.0

    def test_enes_taxonomy_autoselected(self, tmp_path):
        rows = [
            "a\td\tg\tr\ts\tt\tMistranslation\tMajor",
            "b\td\tg\tr\ts\tt\tNo-error\tNo-error",
        ]
        path = tmp_path / "x.en-es.tsv"
        path.write_text(mqm_tsv(rows), encoding="utf-8")
        es = parse_mqm_file(path)
        m = mqm_matrices(es)
        assert m.adequacy.raw[0, 0] == 5.0

    @settings(max_examples=25, deadline=None)
    @given(st.data())
    def test_decomposition_and_monotonicity(self, data):
        categories = [
            "Accuracy/Omission",
            "Fluency/Grammar",
            "Source issue",
            "Unknown/Thing",
            "Non-translation!",
            "Fluency/Punctuation",
        ]
        severities = [Severity.MAJOR, Severity.MINOR, Severity.NEUTRAL]
        systems = ("a", "b")
        segments = ("g1", "g2")
        rows = []
        n = data.draw(st.integers(1, 10))
        for _ in range(n):
            rows.append(
                (
                    data.draw(st.sampled_from(systems)),
                    data.draw(st.sampled_from(segments)),
                    data.draw(st.sampled_from(["r1", "r2"])),
                    data.draw(st.sampled_from(categories)),
                    data.draw(st.sampled_from(severities)),
                )
            )
        es = self.build(rows, segments=segments)
        m = mqm_matrices(es)
        np.testing.assert_allclose(
            m.all.raw, m.adequacy.raw + m.fluency.raw + m.other.raw, atol=1e-12
        )
        # Monotonicity holds when the added error belongs to a rater already
        # covering the cell (a new rater changes the rater-mean denominator).
        cell_raters = sorted({r[2] for r in rows if (r[0], r[1]) == ("a", "g1")})
        rater = cell_raters[0] if cell_raters else "r1"
        extra = rows + [("a", "g1", rater, "Accuracy/Omission", Severity.MAJOR)]
        m2 = mqm_matrices(self.build(extra, segments=segments))
        assert np.all(m2.all.raw >= m.all.raw - 1e-12)


class TestSystemMeans:
    def test_simple(self):
        m = oriented_matrix("m", [[1.0, 3.0], [2.0, 4.0]])
        assert np.array_equal(system_means(m), [2.0, 3.0])

    def test_constant_row(self):
        m = oriented_matrix("m", [[7.0, 7.0, 7.0], [1.0, 2.0, 3.0]])
        assert system_means(m)[0] == 7.0

    def test_column_permutation_invariant(self):
        rng = np.random.default_rng(0)
        vals = rng.standard_normal((3, 8))
        m1 = oriented_matrix("m", vals)
        m2 = oriented_matrix("m", vals[:, ::-1])
        np.testing.assert_allclose(system_means(m1), system_means(m2))
