from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from afmeta.data import Orientation, ScoreMatrix
from afmeta.scoring import ADEQUACY_MQM, FLUENCY_MQM

MQM_HEADER = "system\tdoc\tseg_id\trater\tsource\ttarget\tcategory\tseverity"


def mqm_tsv(rows: list[str]) -> str:
    return MQM_HEADER + "\n" + "\n".join(rows) + "\n"


@pytest.fixture
def tiny_mqm_path(tmp_path: Path) -> Path:
    """Two systems x two segments, one rater, a few plain errors."""
    rows = [
        "sysA\td1\tseg1\tr1\tsrc\thello there\tAccuracy/Omission\tMajor",
        "sysA\td1\tseg2\tr1\tsrc\tsecond one\tNo-error\tNo-error",
        "sysB\td1\tseg1\tr1\tsrc\thallo <v>their</v>\tFluency/Grammar\tMinor",
        "sysB\td1\tseg2\tr1\tsrc\tzweite\tAccuracy/Mistranslation\tMajor",
    ]
    path = tmp_path / "tiny.en-de.tsv"
    path.write_text(mqm_tsv(rows), encoding="utf-8")
    return path


def oriented_matrix(name: str, oriented: np.ndarray, systems=None, segments=None) -> ScoreMatrix:
    oriented = np.asarray(oriented, dtype=np.float64)
    k, n = oriented.shape
    systems = tuple(systems) if systems else tuple(f"s{i:02d}" for i in range(k))
    segments = tuple(segments) if segments else tuple(f"g{j:03d}" for j in range(n))
    return ScoreMatrix(name, oriented, Orientation.HIGHER_BETTER, systems, segments)


def penalty_matrix(name: str, penalties: np.ndarray, systems=None, segments=None) -> ScoreMatrix:
    penalties = np.asarray(penalties, dtype=np.float64)
    k, n = penalties.shape
    systems = tuple(systems) if systems else tuple(f"s{i:02d}" for i in range(k))
    segments = tuple(segments) if segments else tuple(f"g{j:03d}" for j in range(n))
    return ScoreMatrix.from_raw(name, penalties, Orientation.LOWER_BETTER, systems, segments)


def disagreement_fixture():
    """Two-system segment-level data where the metric's mean difference sign
    matches adequacy while its significance is closer to fluency's.

    The adequacy gap is large and clean (every segment favors system 2), the
    fluency gap is small and noisy in the opposite direction, and the metric
    gap is small and noisy in adequacy's direction. With exhaustive sign-flip
    p-values this makes PA prefer adequacy while SPA scores the metric closer
    to fluency.
    """
    n = 12
    half = n // 2
    d_adequacy = np.full(n, 2.0)
    d_fluency = np.array([2.6, -3.4] * half)
    d_metric = np.array([3.2, -2.8] * half)
    systems = ("sys1", "sys2")
    segments = tuple(f"g{j:02d}" for j in range(n))

    def two_rows(d):
        return np.vstack([np.zeros(n), d])

    adequacy = oriented_matrix(ADEQUACY_MQM, two_rows(d_adequacy), systems, segments)
    fluency = oriented_matrix(FLUENCY_MQM, two_rows(d_fluency), systems, segments)
    metric = oriented_matrix("toy-metric", two_rows(d_metric), systems, segments)
    return metric, adequacy, fluency


@pytest.fixture
def disagreement_data():
    return disagreement_fixture()


def random_oriented(rng: np.random.Generator, k: int, n: int, name: str = "m") -> ScoreMatrix:
    return oriented_matrix(name, rng.standard_normal((k, n)))
