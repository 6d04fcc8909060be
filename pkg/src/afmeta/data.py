"""Domain types and file ingestion for MQM annotations and metric score files.

The MQM input format is the WMT-style TSV: a header row with at least the
columns ``system, doc, seg_id, rater, source, target, category, severity``,
one row per annotated error. Error spans may be marked inside the ``target``
column with ``<v>...</v>``. A row whose category is the no-error sentinel
("No-error") records that a rater inspected the candidate and found nothing.

Score files carry (system, seg_id, score) triples, either as a TSV with that
header or as a JSON array of objects with those keys.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateCell,
    EmptyFile,
    MalformedSeverity,
    MissingColumn,
    NonNumericScore,
    UnalignedIds,
)

logger = logging.getLogger(__name__)

MQM_COLUMNS = ("system", "doc", "seg_id", "rater", "source", "target", "category", "severity")
SCORE_COLUMNS = ("system", "seg_id", "score")

NO_ERROR_CATEGORY = "No-error"

_SPAN_RE = re.compile(r"<v>(.*?)</v>", re.DOTALL)
_LP_RE = re.compile(r"([a-z]{2})[-_]([a-z]{2})", re.IGNORECASE)


class Severity(Enum):
    MAJOR = "Major"
    MINOR = "Minor"
    NEUTRAL = "Neutral"

    @classmethod
    def from_token(cls, token: str) -> "Severity":
        """Map a raw severity token, case-insensitively.

        WMT files mark no-error rows with a "No-error" severity; those map to
        NEUTRAL. Anything else raises MalformedSeverity.
        """
        t = token.strip().lower()
        if t == "major":
            return cls.MAJOR
        if t == "minor":
            return cls.MINOR
        if t in ("neutral", "no-error", "noerror"):
            return cls.NEUTRAL
        raise MalformedSeverity(f"unknown severity token: {token!r}")


class Orientation(Enum):
    HIGHER_BETTER = "higher"
    LOWER_BETTER = "lower"


class MqmFormat(Enum):
    AUTO = "auto"
    WMT_TSV = "wmt-tsv"


class ScoreFormat(Enum):
    AUTO = "auto"
    TSV = "tsv"
    JSON = "json"


class AlignMode(Enum):
    STRICT = "strict"
    DROP_INCOMPLETE = "drop"


def is_no_error_category(category: str) -> bool:
    return category.strip().lower() in ("no-error", "no error", "noerror")


@dataclass(frozen=True)
class ErrorAnnotation:
    """One MQM error span: category plus severity, attributed to a rater."""

    system_id: str
    doc_id: str
    segment_id: str
    rater_id: str
    category: str
    severity: Severity
    span: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not self.category:
            raise ValueError("category must be non-empty")
        if is_no_error_category(self.category) and self.severity is not Severity.NEUTRAL:
            raise ValueError("no-error rows carry severity Neutral")
        if self.span is not None:
            start, end = self.span
            if start < 0 or end < start:
                raise ValueError(f"invalid span {self.span}")

    def sort_key(self):
        span = self.span if self.span is not None else (-1, -1)
        return (self.system_id, self.segment_id, self.rater_id, self.category, self.severity.value, span)


@dataclass(frozen=True)
class SystemPair:
    """An unordered system pair, stored with i < j (indices into a system list)."""

    i: int
    j: int

    def __post_init__(self) -> None:
        if not 0 <= self.i < self.j:
            raise ValueError(f"need 0 <= i < j, got ({self.i}, {self.j})")


def all_pairs(k: int) -> list[SystemPair]:
    return [SystemPair(i, j) for i in range(k) for j in range(i + 1, k)]


@dataclass(frozen=True)
class EvaluationSet:
    """Aligned systems x segments grid of candidate translations and annotations."""

    name: str
    language_pair: str
    systems: tuple[str, ...]
    segments: tuple[str, ...]
    candidates: Mapping[tuple[str, str], str]
    annotations: tuple[ErrorAnnotation, ...]

    def __post_init__(self) -> None:
        if len(set(self.systems)) != len(self.systems):
            raise ValueError("duplicate system ids")
        if len(set(self.segments)) != len(self.segments):
            raise ValueError("duplicate segment ids")
        if len(self.systems) < 2:
            raise ValueError("an evaluation set needs at least 2 systems")
        if len(self.segments) < 1:
            raise ValueError("an evaluation set needs at least 1 segment")
        cells = set(self.candidates)
        valid = {(s, g) for s in self.systems for g in self.segments}
        if not cells <= valid:
            raise ValueError("candidate cell outside the systems x segments grid")
        for a in self.annotations:
            if (a.system_id, a.segment_id) not in valid:
                raise ValueError(f"annotation for unknown cell ({a.system_id}, {a.segment_id})")
        object.__setattr__(self, "candidates", MappingProxyType(dict(self.candidates)))

    @property
    def n_systems(self) -> int:
        return len(self.systems)

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    def missing_cells(self) -> list[tuple[str, str]]:
        return [
            (s, g)
            for s in self.systems
            for g in self.segments
            if (s, g) not in self.candidates
        ]

    def subset_segments(self, keep: Sequence[str]) -> "EvaluationSet":
        """Restrict to the given segments, preserving their current order."""
        keep_set = set(keep)
        segments = tuple(g for g in self.segments if g in keep_set)
        candidates = {cell: text for cell, text in self.candidates.items() if cell[1] in keep_set}
        annotations = tuple(a for a in self.annotations if a.segment_id in keep_set)
        return EvaluationSet(self.name, self.language_pair, self.systems, segments, candidates, annotations)

    def to_tsv_string(self) -> str:
        """Canonical TSV serialization; re-parsing yields an equal set.

        Cells without any annotation are written as explicit no-error rows
        (rater "unrated"), so sets built programmatically without per-rater
        coverage gain those markers on a round trip.
        """
        out = io.StringIO()
        writer = csv.writer(out, delimiter="\t", lineterminator="\n")
        writer.writerow(MQM_COLUMNS)
        by_cell: dict[tuple[str, str], list[ErrorAnnotation]] = {}
        for a in sorted(self.annotations, key=ErrorAnnotation.sort_key):
            by_cell.setdefault((a.system_id, a.segment_id), []).append(a)
        for system in self.systems:
            for segment in self.segments:
                if (system, segment) not in self.candidates:
                    continue
                text = self.candidates[(system, segment)]
                rows = by_cell.get((system, segment))
                if not rows:
                    writer.writerow([system, "", segment, "unrated", "", text, NO_ERROR_CATEGORY, Severity.NEUTRAL.value])
                    continue
                for a in rows:
                    target = text
                    if a.span is not None:
                        start, end = a.span
                        target = f"{text[:start]}<v>{text[start:end]}</v>{text[end:]}"
                    writer.writerow(
                        [a.system_id, a.doc_id, a.segment_id, a.rater_id, "", target, a.category, a.severity.value]
                    )
        return out.getvalue()

    def to_tsv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_tsv_string(), encoding="utf-8")


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Dense per-(system, segment) scores for one named scoring.

    ``values`` always stores the internally oriented scores (higher = better);
    matrices loaded or built from lower-is-better data are negated on entry
    and keep ``orientation`` so that ``raw`` can recover the display values.
    """

    name: str
    values: np.ndarray
    orientation: Orientation
    systems: tuple[str, ...]
    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"score matrix must be 2-D, got shape {values.shape}")
        if values.shape != (len(self.systems), len(self.segments)):
            raise ValueError(
                f"shape {values.shape} does not match {len(self.systems)} systems x {len(self.segments)} segments"
            )
        if not np.all(np.isfinite(values)):
            raise NonNumericScore(f"matrix {self.name!r} contains non-finite entries")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_raw(
        cls,
        name: str,
        raw: np.ndarray,
        orientation: Orientation,
        systems: Sequence[str],
        segments: Sequence[str],
    ) -> "ScoreMatrix":
        raw = np.asarray(raw, dtype=np.float64)
        values = -raw if orientation is Orientation.LOWER_BETTER else raw
        return cls(name, values, orientation, tuple(systems), tuple(segments))

    @property
    def raw(self) -> np.ndarray:
        """Scores in their original orientation (e.g. MQM penalties)."""
        if self.orientation is Orientation.LOWER_BETTER:
            return -self.values
        return self.values

    @property
    def n_systems(self) -> int:
        return len(self.systems)

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    def rename(self, name: str) -> "ScoreMatrix":
        return ScoreMatrix(name, self.values, self.orientation, self.systems, self.segments)

    def reindex(self, systems: Sequence[str], segments: Sequence[str]) -> "ScoreMatrix":
        """Reorder/select rows and columns by id; raise UnalignedIds on gaps."""
        sys_pos = {s: k for k, s in enumerate(self.systems)}
        seg_pos = {g: k for k, g in enumerate(self.segments)}
        missing_sys = [s for s in systems if s not in sys_pos]
        if missing_sys:
            raise UnalignedIds(f"matrix {self.name!r} has no scores for systems {missing_sys[:5]}")
        missing_seg = [g for g in segments if g not in seg_pos]
        if missing_seg:
            raise UnalignedIds(f"matrix {self.name!r} has no scores for segments {missing_seg[:5]}")
        rows = [sys_pos[s] for s in systems]
        cols = [seg_pos[g] for g in segments]
        values = self.values[np.ix_(rows, cols)]
        return ScoreMatrix(self.name, values, self.orientation, tuple(systems), tuple(segments))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScoreMatrix):
            return NotImplemented
        return (
            self.name == other.name
            and self.orientation == other.orientation
            and self.systems == other.systems
            and self.segments == other.segments
            and np.array_equal(self.values, other.values)
        )


def _sniff_language_pair(name: str) -> str:
    m = _LP_RE.search(name)
    if m:
        return f"{m.group(1).lower()}-{m.group(2).lower()}"
    return ""


def _strip_span_markers(target: str) -> tuple[str, tuple[int, int] | None]:
    """Remove <v>...</v> markers; return plain text and the first span's range."""
    m = _SPAN_RE.search(target)
    if m is None:
        return target, None
    plain = _SPAN_RE.sub(lambda g: g.group(1), target)
    start = m.start()
    end = start + len(m.group(1))
    return plain, (start, end)


def parse_mqm_file(
    path: str | Path,
    format_hint: MqmFormat = MqmFormat.AUTO,
    name: str | None = None,
    language_pair: str | None = None,
) -> EvaluationSet:
    """Parse a WMT-style MQM TSV into a validated EvaluationSet.

    Systems and segments are ordered lexicographically so the result does not
    depend on input row order. Rows sharing (system, segment, rater)
    accumulate as multiple annotations of the same cell.
    """
    del format_hint  # only the WMT TSV layout exists today; AUTO == WMT_TSV
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmptyFile(f"{path} is empty")
    reader = csv.reader(lines, delimiter="\t")
    header = [h.strip().lower() for h in next(reader)]
    missing = [c for c in MQM_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"{path} is missing columns {missing}")
    col = {c: header.index(c) for c in MQM_COLUMNS}

    annotations: list[ErrorAnnotation] = []
    cell_texts: dict[tuple[str, str], set[str]] = {}
    n_rows = 0
    for row in reader:
        if not row or all(not c for c in row):
            continue
        n_rows += 1
        system = row[col["system"]].strip()
        doc = row[col["doc"]].strip()
        segment = row[col["seg_id"]].strip()
        rater = row[col["rater"]].strip()
        target = row[col["target"]]
        category = row[col["category"]].strip()
        severity = Severity.from_token(row[col["severity"]])
        if is_no_error_category(category):
            severity = Severity.NEUTRAL
        plain, span = _strip_span_markers(target)
        annotations.append(
            ErrorAnnotation(system, doc, segment, rater, category, severity, span)
        )
        cell_texts.setdefault((system, segment), set()).add(plain)
    if n_rows == 0:
        raise EmptyFile(f"{path} has a header but no data rows")

    conflicting = sum(1 for texts in cell_texts.values() if len(texts) > 1)
    if conflicting:
        logger.warning("conflicting_candidate_texts=%d file=%s (kept lexicographic minimum)", conflicting, path)
    candidates = {cell: min(texts) for cell, texts in cell_texts.items()}
    systems = tuple(sorted({s for s, _ in candidates}))
    segments = tuple(sorted({g for _, g in candidates}))
    set_name = name if name is not None else path.stem
    lp = language_pair if language_pair is not None else _sniff_language_pair(set_name)
    return EvaluationSet(
        name=set_name,
        language_pair=lp,
        systems=systems,
        segments=segments,
        candidates=candidates,
        annotations=tuple(sorted(annotations, key=ErrorAnnotation.sort_key)),
    )


def _parse_score(token: str, where: str) -> float:
    try:
        value = float(token)
    except (TypeError, ValueError):
        raise NonNumericScore(f"non-numeric score {token!r} at {where}") from None
    if not math.isfinite(value):
        raise NonNumericScore(f"non-finite score {token!r} at {where}")
    return value


def parse_score_file(
    path: str | Path,
    orientation: Orientation,
    name: str | None = None,
    format_hint: ScoreFormat = ScoreFormat.AUTO,
) -> ScoreMatrix:
    """Parse (system, seg_id, score) triples into a dense ScoreMatrix.

    The matrix carries its own lexicographic system/segment index; use
    :func:`align` (or ``reindex``) to bring it onto an evaluation set's grid.
    """
    path = Path(path)
    fmt = format_hint
    if fmt is ScoreFormat.AUTO:
        fmt = ScoreFormat.JSON if path.suffix.lower() == ".json" else ScoreFormat.TSV

    triples: list[tuple[str, str, float]] = []
    if fmt is ScoreFormat.JSON:
        try:
            records = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise NonNumericScore(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(records, list):
            raise MissingColumn(f"{path}: expected a JSON array of objects")
        for idx, rec in enumerate(records):
            missing = [c for c in SCORE_COLUMNS if c not in rec]
            if missing:
                raise MissingColumn(f"{path}: record {idx} is missing {missing}")
            triples.append(
                (str(rec["system"]), str(rec["seg_id"]), _parse_score(rec["score"], f"{path}:{idx}"))
            )
    else:
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
        if not lines:
            raise EmptyFile(f"{path} is empty")
        reader = csv.reader(lines, delimiter="\t")
        header = [h.strip().lower() for h in next(reader)]
        missing = [c for c in SCORE_COLUMNS if c not in header]
        if missing:
            raise MissingColumn(f"{path} is missing columns {missing}")
        col = {c: header.index(c) for c in SCORE_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c for c in row):
                continue
            triples.append(
                (
                    row[col["system"]].strip(),
                    row[col["seg_id"]].strip(),
                    _parse_score(row[col["score"]], f"{path}:{lineno}"),
                )
            )
    if not triples:
        raise EmptyFile(f"{path} has no score rows")

    seen: dict[tuple[str, str], float] = {}
    for system, segment, score in triples:
        if (system, segment) in seen:
            raise DuplicateCell(f"{path}: duplicate score for ({system}, {segment})")
        seen[(system, segment)] = score
    systems = tuple(sorted({s for s, _ in seen}))
    segments = tuple(sorted({g for _, g in seen}))
    raw = np.empty((len(systems), len(segments)))
    for si, system in enumerate(systems):
        for gi, segment in enumerate(segments):
            if (system, segment) not in seen:
                raise UnalignedIds(f"{path}: no score for ({system}, {segment})")
            raw[si, gi] = seen[(system, segment)]
    matrix_name = name if name is not None else path.stem
    return ScoreMatrix.from_raw(matrix_name, raw, orientation, systems, segments)


def align(
    eval_set: EvaluationSet,
    scores: Sequence[ScoreMatrix],
    mode: AlignMode = AlignMode.STRICT,
) -> tuple[EvaluationSet, list[ScoreMatrix]]:
    """Bring score matrices onto the evaluation set's grid.

    STRICT errors on any missing cell (including candidate cells missing from
    the evaluation set itself). DROP_INCOMPLETE removes every segment that is
    missing from the set or from any matrix; a missing *system* cannot be
    repaired by dropping segments and always raises.
    """
    incomplete: set[str] = {g for _, g in eval_set.missing_cells()}
    for matrix in scores:
        missing_sys = [s for s in eval_set.systems if s not in set(matrix.systems)]
        if missing_sys:
            raise UnalignedIds(f"matrix {matrix.name!r} has no scores for systems {missing_sys[:5]}")
        have = set(matrix.segments)
        incomplete.update(g for g in eval_set.segments if g not in have)

    if incomplete:
        if mode is AlignMode.STRICT:
            raise UnalignedIds(
                f"{len(incomplete)} segment(s) incomplete in strict mode, e.g. {sorted(incomplete)[:5]}"
            )
        keep = [g for g in eval_set.segments if g not in incomplete]
        logger.warning("dropped_segments=%d set=%s", len(incomplete), eval_set.name)
        eval_set = eval_set.subset_segments(keep)

    aligned = [m.reindex(eval_set.systems, eval_set.segments) for m in scores]
    return eval_set, aligned
