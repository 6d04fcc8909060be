"""Extrinsic-bias quantification and pseudo-system synthesis.

The bias of a meta-evaluation setup is measured by running one-way ANOVA on
the adequacy and fluency score matrices and comparing how significantly each
aspect separates the systems: delta_p = p_fluency - p_adequacy (equivalently
the difference of the F-CDF values), compressed with
b = 1 / (1 - ln |delta_p|). A positive delta_p (dominant "A") means adequacy
separates the systems more sharply than fluency, i.e. the setup favors
adequacy-oriented metrics.

Synthesis builds K pseudo-systems along one aspect: for each segment the
rank-k synthesized system takes the candidate with the k-th best (lowest)
penalty on that aspect, ties broken by a seeded shuffle. Combining original,
synthesized-by-adequacy, and synthesized-by-fluency system sets yields the
composed meta-evaluation setups.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .data import EvaluationSet, ScoreMatrix
from .errors import UnalignedIds
from .metametrics import check_aligned
from .scoring import MqmMatrices
from .stats import AnovaMethod, AnovaResult, derive_subseed, f_statistic, welch_f_statistic


class Aspect(Enum):
    ADEQUACY = "adequacy"
    FLUENCY = "fluency"


class Dominance(Enum):
    ADEQUACY = "A"
    FLUENCY = "F"
    NONE = "none"


def b_transform(delta_p: float, base: float = math.e) -> float:
    """Bounded bias transform 1 / (1 - log|delta_p|); b(0) is defined as 0.

    Natural log by default; strictly increasing in |delta_p| on (0, 1].
    """
    magnitude = abs(delta_p)
    if magnitude == 0.0:
        return 0.0
    log = math.log(magnitude)
    if base != math.e:
        log /= math.log(base)
    return 1.0 / (1.0 - log)


def dominance_of(delta_p: float) -> Dominance:
    if delta_p > 0:
        return Dominance.ADEQUACY
    if delta_p < 0:
        return Dominance.FLUENCY
    return Dominance.NONE


@dataclass(frozen=True)
class BiasReport:
    adequacy: AnovaResult
    fluency: AnovaResult
    delta_p: float
    b_value: float
    dominant: Dominance


def bias_report(
    adequacy: ScoreMatrix,
    fluency: ScoreMatrix,
    method: AnovaMethod = AnovaMethod.STANDARD,
) -> BiasReport:
    """ANOVA both aspects, then delta_p and its b transform.

    delta_p = p_fluency - p_adequacy, so the aspect with the smaller ANOVA
    p-value (sharper system separation) dominates: positive -> "A".

    The F statistic is invariant under the internal score negation, so the
    matrices can be passed in either orientation. Welch's method raises
    ZeroVarianceSystem on degenerate systems; the standard method returns the
    documented +inf/floored-p sentinel instead.
    """
    check_aligned(adequacy, fluency)
    anova = welch_f_statistic if method is AnovaMethod.WELCH else f_statistic
    result_a = anova(adequacy)
    result_f = anova(fluency)
    delta_p = result_f.p_value - result_a.p_value
    return BiasReport(
        adequacy=result_a,
        fluency=result_f,
        delta_p=delta_p,
        b_value=b_transform(delta_p),
        dominant=dominance_of(delta_p),
    )


@dataclass(frozen=True)
class SetupSpec:
    """Which system sets compose a meta-evaluation setup."""

    include_original: bool = True
    include_synth_adequacy: bool = False
    include_synth_fluency: bool = False
    tie_seed: int = 0

    def __post_init__(self) -> None:
        if not (self.include_original or self.include_synth_adequacy or self.include_synth_fluency):
            raise ValueError("a setup must include at least one system set")

    @classmethod
    def parse(cls, text: str, tie_seed: int = 0) -> "SetupSpec":
        """Parse a CLI-style value like "original,synth-adequacy,synth-fluency"."""
        flags = {"original": False, "synth-adequacy": False, "synth-fluency": False}
        for token in text.split(","):
            token = token.strip().lower().replace("_", "-")
            if not token:
                continue
            if token not in flags:
                raise ValueError(f"unknown system set {token!r}; expected one of {sorted(flags)}")
            flags[token] = True
        return cls(
            include_original=flags["original"],
            include_synth_adequacy=flags["synth-adequacy"],
            include_synth_fluency=flags["synth-fluency"],
            tie_seed=tie_seed,
        )

    @property
    def label(self) -> str:
        parts = []
        if self.include_original:
            parts.append("original")
        if self.include_synth_adequacy:
            parts.append("synth-adequacy")
        if self.include_synth_fluency:
            parts.append("synth-fluency")
        return "+".join(parts)

    @property
    def n_sets(self) -> int:
        return sum((self.include_original, self.include_synth_adequacy, self.include_synth_fluency))


@dataclass(frozen=True)
class SynthesizedSet:
    """Per-segment permutation assigning each quality rank to a source system.

    ``assignment[j, k]`` is the index (into ``source.systems``) of the system
    whose candidate the rank-(k+1) synthesized system emits for segment j;
    rank 1 is the best (lowest penalty) on the chosen axis.
    """

    source: EvaluationSet
    axis: Aspect
    assignment: np.ndarray

    def __post_init__(self) -> None:
        assignment = np.asarray(self.assignment, dtype=np.intp)
        if assignment.shape != (self.source.n_segments, self.source.n_systems):
            raise ValueError("assignment must be N x K")
        expected = np.arange(self.source.n_systems)
        for j in range(assignment.shape[0]):
            if not np.array_equal(np.sort(assignment[j]), expected):
                raise ValueError(f"assignment for segment {j} is not a permutation")
        assignment = assignment.copy()
        assignment.flags.writeable = False
        object.__setattr__(self, "assignment", assignment)

    def system_ids(self) -> tuple[str, ...]:
        tag = "synthA" if self.axis is Aspect.ADEQUACY else "synthF"
        k = self.source.n_systems
        width = len(str(k))
        return tuple(f"{tag}#{rank:0{width}d}" for rank in range(1, k + 1))

    def apply(self, matrix: ScoreMatrix) -> ScoreMatrix:
        """Re-index a matrix through the assignment: row k takes, per segment,
        the score of the source system holding rank k+1 there."""
        if matrix.systems != self.source.systems or matrix.segments != self.source.segments:
            raise UnalignedIds(f"matrix {matrix.name!r} is not aligned with the synthesis source")
        cols = np.arange(matrix.n_segments)
        values = matrix.values[self.assignment.T, cols[None, :]]
        return ScoreMatrix(matrix.name, values, matrix.orientation, self.system_ids(), matrix.segments)


def synthesize(
    eval_set: EvaluationSet,
    axis_scores: ScoreMatrix,
    axis: Aspect,
    tie_seed: int = 0,
) -> SynthesizedSet:
    """Build the extreme-variation pseudo-systems along one aspect.

    Per segment, candidates are stably sorted by axis penalty ascending after
    a seeded shuffle, so tied candidates are assigned a uniformly random rank
    order that is reproducible for a fixed tie_seed.
    """
    if axis_scores.systems != eval_set.systems or axis_scores.segments != eval_set.segments:
        raise UnalignedIds(f"axis matrix {axis_scores.name!r} is not aligned with {eval_set.name!r}")
    k = eval_set.n_systems
    assignment = np.empty((eval_set.n_segments, k), dtype=np.intp)
    oriented = axis_scores.values
    for j, segment in enumerate(eval_set.segments):
        rng = np.random.default_rng(derive_subseed(tie_seed, "synthesize", axis.value, segment))
        shuffled = rng.permutation(k)
        order = np.argsort(-oriented[shuffled, j], kind="stable")
        assignment[j] = shuffled[order]
    return SynthesizedSet(source=eval_set, axis=axis, assignment=assignment)


@dataclass(frozen=True)
class ComposedSetup:
    eval_set: EvaluationSet
    mqm: MqmMatrices
    externals: tuple[ScoreMatrix, ...]
    spec: SetupSpec
    synthesized: Mapping[Aspect, SynthesizedSet]


def _remap_annotations(synth: SynthesizedSet) -> list:
    """Annotations for the synthesized systems: each rank inherits, per
    segment, the source system's annotations under the new system id."""
    source = synth.source
    ids = synth.system_ids()
    by_cell: dict[tuple[str, str], list] = {}
    for a in source.annotations:
        by_cell.setdefault((a.system_id, a.segment_id), []).append(a)
    remapped = []
    for j, segment in enumerate(source.segments):
        for rank in range(source.n_systems):
            src_system = source.systems[synth.assignment[j, rank]]
            for a in by_cell.get((src_system, segment), []):
                remapped.append(dataclasses.replace(a, system_id=ids[rank]))
    return remapped


def build_setup(
    eval_set: EvaluationSet,
    spec: SetupSpec,
    mqm: MqmMatrices,
    externals: Sequence[ScoreMatrix] = (),
) -> ComposedSetup:
    """Compose the requested system sets into one setup of K' = K * n_sets
    systems, re-indexing every matrix (MQM and external) consistently.

    With only the original set requested this is the identity.
    """
    names = [m.name for m in (*mqm, *externals)]
    if len(set(names)) != len(names):
        raise ValueError(f"matrix names must be unique within a setup, got {names}")
    for matrix in (*mqm, *externals):
        if matrix.systems != eval_set.systems or matrix.segments != eval_set.segments:
            raise UnalignedIds(f"matrix {matrix.name!r} is not aligned with {eval_set.name!r}")

    if spec.include_original and spec.n_sets == 1:
        return ComposedSetup(eval_set, mqm, tuple(externals), spec, {})

    synthesized: dict[Aspect, SynthesizedSet] = {}
    if spec.include_synth_adequacy:
        synthesized[Aspect.ADEQUACY] = synthesize(eval_set, mqm.adequacy, Aspect.ADEQUACY, spec.tie_seed)
    if spec.include_synth_fluency:
        synthesized[Aspect.FLUENCY] = synthesize(eval_set, mqm.fluency, Aspect.FLUENCY, spec.tie_seed)

    systems: list[str] = []
    candidates: dict[tuple[str, str], str] = {}
    annotations: list = []
    blocks: dict[str, list[ScoreMatrix]] = {m.name: [] for m in (*mqm, *externals)}

    if spec.include_original:
        systems.extend(eval_set.systems)
        candidates.update(eval_set.candidates)
        annotations.extend(eval_set.annotations)
        for matrix in (*mqm, *externals):
            blocks[matrix.name].append(matrix)
    for aspect in (Aspect.ADEQUACY, Aspect.FLUENCY):
        if aspect not in synthesized:
            continue
        synth = synthesized[aspect]
        ids = synth.system_ids()
        systems.extend(ids)
        for j, segment in enumerate(eval_set.segments):
            for rank, new_id in enumerate(ids):
                src_system = eval_set.systems[synth.assignment[j, rank]]
                if (src_system, segment) in eval_set.candidates:
                    candidates[(new_id, segment)] = eval_set.candidates[(src_system, segment)]
        annotations.extend(_remap_annotations(synth))
        for matrix in (*mqm, *externals):
            blocks[matrix.name].append(synth.apply(matrix))

    composed_set = EvaluationSet(
        name=f"{eval_set.name}[{spec.label}]",
        language_pair=eval_set.language_pair,
        systems=tuple(systems),
        segments=eval_set.segments,
        candidates=candidates,
        annotations=tuple(annotations),
    )

    def stack(name: str, template: ScoreMatrix) -> ScoreMatrix:
        parts = blocks[name]
        values = np.vstack([p.values for p in parts])
        return ScoreMatrix(name, values, template.orientation, tuple(systems), eval_set.segments)

    composed_mqm = MqmMatrices(
        all=stack(mqm.all.name, mqm.all),
        adequacy=stack(mqm.adequacy.name, mqm.adequacy),
        fluency=stack(mqm.fluency.name, mqm.fluency),
        other=stack(mqm.other.name, mqm.other),
    )
    composed_externals = tuple(stack(m.name, m) for m in externals)
    return ComposedSetup(composed_set, composed_mqm, composed_externals, spec, synthesized)
