"""Turn MQM error annotations into All/Adequacy/Fluency/Other score matrices.

Each error contributes a severity-dependent penalty; penalties are summed per
rater within a (system, segment) cell and then averaged across the raters who
inspected that cell. The category taxonomy splits the total into adequacy,
fluency, and other components, so that all = adequacy + fluency + other holds
elementwise.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

from .data import (
    ErrorAnnotation,
    EvaluationSet,
    Orientation,
    ScoreMatrix,
    Severity,
    is_no_error_category,
)

logger = logging.getLogger(__name__)

ALL_MQM = "all_mqm"
ADEQUACY_MQM = "adequacy_mqm"
FLUENCY_MQM = "fluency_mqm"
OTHER_MQM = "other_mqm"

NON_TRANSLATION_TOKENS = frozenset({"non-translation!", "non-translation"})


class AspectClass(Enum):
    ADEQUACY = "adequacy"
    FLUENCY = "fluency"
    OTHER = "other"


@dataclass(frozen=True)
class WeightScheme:
    """Penalty points per severity, with the two standard special cases."""

    major: float = 5.0
    minor: float = 1.0
    neutral: float = 0.0
    non_translation: float = 25.0
    minor_punctuation: float = 0.1

    def __post_init__(self) -> None:
        for name in ("major", "minor", "neutral", "non_translation", "minor_punctuation"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be >= 0")
        if not self.major >= self.minor >= self.neutral:
            raise ValueError("weights must satisfy major >= minor >= neutral")

    @classmethod
    def from_file(cls, path: str | Path) -> "WeightScheme":
        """Load from a plain key=value file; unset keys keep their defaults."""
        kwargs: dict[str, float] = {}
        known = {"major", "minor", "neutral", "non_translation", "minor_punctuation"}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown weight {key!r}")
            kwargs[key] = float(value)
        return cls(**kwargs)

    def describe(self) -> str:
        return (
            f"major={self.major:g},minor={self.minor:g},neutral={self.neutral:g},"
            f"non_translation={self.non_translation:g},minor_punctuation={self.minor_punctuation:g}"
        )


def _normalize_category(category: str) -> str:
    return " ".join(category.split()).casefold()


@dataclass(frozen=True)
class Taxonomy:
    """Disjoint adequacy/fluency/other category sets (normalized keys)."""

    name: str
    adequacy_categories: frozenset[str]
    fluency_categories: frozenset[str]
    other_categories: frozenset[str]

    def __post_init__(self) -> None:
        a, f, o = self.adequacy_categories, self.fluency_categories, self.other_categories
        if (a & f) or (a & o) or (f & o):
            raise ValueError("taxonomy aspect sets must be pairwise disjoint")

    def lookup(self, category: str) -> AspectClass | None:
        """Exact membership lookup after case/whitespace normalization; None if unknown."""
        key = _normalize_category(category)
        if key in self.adequacy_categories:
            return AspectClass.ADEQUACY
        if key in self.fluency_categories:
            return AspectClass.FLUENCY
        if key in self.other_categories:
            return AspectClass.OTHER
        return None

    @classmethod
    def from_lines(cls, name: str, lines) -> "Taxonomy":
        sections: dict[str, set[str]] = {"ADEQUACY": set(), "FLUENCY": set(), "OTHER": set()}
        current: set[str] | None = None
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.upper() in sections:
                current = sections[line.upper()]
                continue
            if current is None:
                raise ValueError(f"category {line!r} appears before any ADEQUACY/FLUENCY/OTHER header")
            current.add(_normalize_category(line))
        return cls(
            name=name,
            adequacy_categories=frozenset(sections["ADEQUACY"]),
            fluency_categories=frozenset(sections["FLUENCY"]),
            other_categories=frozenset(sections["OTHER"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Taxonomy":
        path = Path(path)
        return cls.from_lines(path.stem, path.read_text(encoding="utf-8").splitlines())

    @classmethod
    def builtin(cls, name: str) -> "Taxonomy":
        if name not in ("default", "enes"):
            raise ValueError(f"no builtin taxonomy {name!r}; use 'default' or 'enes'")
        text = resources.files("afmeta.taxonomies").joinpath(f"{name}.txt").read_text(encoding="utf-8")
        return cls.from_lines(name, text.splitlines())

    @classmethod
    def for_language_pair(cls, language_pair: str) -> "Taxonomy":
        lp = language_pair.strip().lower().replace("_", "-")
        return cls.builtin("enes" if lp == "en-es" else "default")


def classify_error(category: str, taxonomy: Taxonomy) -> AspectClass:
    """Aspect class of a category; unknown categories fall into OTHER."""
    cls = taxonomy.lookup(category)
    return cls if cls is not None else AspectClass.OTHER


def _is_non_translation(category: str) -> bool:
    return _normalize_category(category) in NON_TRANSLATION_TOKENS


def _is_punctuation(category: str) -> bool:
    return _normalize_category(category).split("/")[-1].strip() == "punctuation"


def error_penalty(annotation: ErrorAnnotation, weights: WeightScheme) -> float:
    """Penalty points for one annotation.

    Non-translation carries its own weight regardless of the annotated
    severity; minor punctuation errors carry the reduced punctuation weight.
    """
    if is_no_error_category(annotation.category):
        return 0.0
    if _is_non_translation(annotation.category):
        return weights.non_translation
    if annotation.severity is Severity.NEUTRAL:
        return weights.neutral
    if annotation.severity is Severity.MINOR:
        if _is_punctuation(annotation.category):
            return weights.minor_punctuation
        return weights.minor
    return weights.major


class MqmMatrices(NamedTuple):
    all: ScoreMatrix
    adequacy: ScoreMatrix
    fluency: ScoreMatrix
    other: ScoreMatrix

    def as_dict(self) -> Mapping[str, ScoreMatrix]:
        return {ALL_MQM: self.all, ADEQUACY_MQM: self.adequacy, FLUENCY_MQM: self.fluency, OTHER_MQM: self.other}


def mqm_matrices(
    eval_set: EvaluationSet,
    weights: WeightScheme | None = None,
    taxonomy: Taxonomy | None = None,
) -> MqmMatrices:
    """All/Adequacy/Fluency/Other MQM matrices for an evaluation set.

    Cell value: per-rater penalty sums averaged over the raters that
    inspected the cell; cells with no annotations at all score 0. All four
    matrices are penalty-valued (lower is better).
    """
    if weights is None:
        weights = WeightScheme()
    if taxonomy is None:
        taxonomy = Taxonomy.for_language_pair(eval_set.language_pair)

    sys_index = {s: k for k, s in enumerate(eval_set.systems)}
    seg_index = {g: k for k, g in enumerate(eval_set.segments)}
    k, n = eval_set.n_systems, eval_set.n_segments

    # (cell, rater) -> [all, adequacy, fluency, other] penalty sums
    per_rater: dict[tuple[int, int, str], np.ndarray] = {}
    unknown: Counter[str] = Counter()
    for a in eval_set.annotations:
        key = (sys_index[a.system_id], seg_index[a.segment_id], a.rater_id)
        sums = per_rater.get(key)
        if sums is None:
            sums = np.zeros(4)
            per_rater[key] = sums
        if is_no_error_category(a.category):
            continue
        aspect = taxonomy.lookup(a.category)
        if aspect is None:
            unknown[a.category] += 1
            aspect = AspectClass.OTHER
        penalty = error_penalty(a, weights)
        sums[0] += penalty
        sums[1 + (AspectClass.ADEQUACY, AspectClass.FLUENCY, AspectClass.OTHER).index(aspect)] += penalty

    if unknown:
        logger.warning(
            "unknown_categories=%d distinct=%d taxonomy=%s most_common=%r",
            sum(unknown.values()),
            len(unknown),
            taxonomy.name,
            unknown.most_common(3),
        )

    totals = np.zeros((k, n, 4))
    raters = np.zeros((k, n))
    for (si, gi, _), sums in per_rater.items():
        totals[si, gi] += sums
        raters[si, gi] += 1
    raters = np.maximum(raters, 1.0)
    cells = totals / raters[:, :, None]

    def matrix(name: str, idx: int) -> ScoreMatrix:
        return ScoreMatrix.from_raw(
            name, cells[:, :, idx], Orientation.LOWER_BETTER, eval_set.systems, eval_set.segments
        )

    return MqmMatrices(
        all=matrix(ALL_MQM, 0),
        adequacy=matrix(ADEQUACY_MQM, 1),
        fluency=matrix(FLUENCY_MQM, 2),
        other=matrix(OTHER_MQM, 3),
    )


def system_means(matrix: ScoreMatrix) -> np.ndarray:
    """Per-system mean of the oriented scores (averaged over segments)."""
    return matrix.values.mean(axis=1)
