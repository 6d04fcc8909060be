"""System-level pairwise accuracy (PA) and soft pairwise accuracy (SPA).

PA counts sign agreements between metric and human system-mean differences,
excluding human-tied pairs. SPA averages 1 - |p_human - p_metric| over all
pairs, where each p is a one-sided paired sign-flip permutation p-value for
"system j beats system i" (i < j in the matrix's system order). Within one
SPA computation the human and metric tests for a pair share the same
sub-seed, so a metric that is segment-identical to the human scores gets
identical p-values and an SPA of exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import ScoreMatrix, SystemPair, all_pairs
from .errors import NoUsablePairs, UnalignedIds
from .stats import (
    PermutationConfig,
    derive_subseed,
    pair_tag,
    pvalues_from_statistics,
    signflip_statistics,
)


@dataclass(frozen=True)
class PairwiseResult:
    value: float
    pairs_used: int
    pairs_excluded_human_tie: int
    per_pair: tuple[tuple[SystemPair, float], ...] | None = None


@dataclass(frozen=True)
class ConcordanceCounts:
    concordant: int
    discordant: int
    tied: int

    @property
    def total(self) -> int:
        return self.concordant + self.discordant + self.tied


@dataclass(frozen=True)
class Mix:
    """A linear combination w1*base1 + w2*base2 evaluated through the shared
    sign flips (the flip statistic is linear in the score vector)."""

    name: str
    w1: float
    base1: str
    w2: float
    base2: str


def check_aligned(*matrices: ScoreMatrix) -> None:
    first = matrices[0]
    for m in matrices[1:]:
        if m.systems != first.systems or m.segments != first.segments:
            raise UnalignedIds(
                f"matrices {first.name!r} and {m.name!r} are not on the same system/segment grid"
            )


def pairwise_accuracy(
    metric: ScoreMatrix,
    human: ScoreMatrix,
    keep_per_pair: bool = False,
) -> PairwiseResult:
    """Fraction of non-human-tied system pairs where the metric's system-mean
    difference has the same sign as the human's.

    A metric tie against a nonzero human difference counts as a disagreement.
    Human ties are exact equality of system means.
    """
    check_aligned(metric, human)
    m = metric.values.mean(axis=1)
    h = human.values.mean(axis=1)
    agree = 0
    used = 0
    excluded = 0
    per_pair: list[tuple[SystemPair, float]] = []
    for pair in all_pairs(metric.n_systems):
        dh = h[pair.j] - h[pair.i]
        if dh == 0.0:
            excluded += 1
            continue
        used += 1
        hit = float(np.sign(m[pair.j] - m[pair.i]) == np.sign(dh))
        agree += hit
        if keep_per_pair:
            per_pair.append((pair, hit))
    if used == 0:
        raise NoUsablePairs("all system pairs are tied on the human scores")
    return PairwiseResult(
        value=agree / used,
        pairs_used=used,
        pairs_excluded_human_tie=excluded,
        per_pair=tuple(per_pair) if keep_per_pair else None,
    )


def concordance_counts(adequacy: ScoreMatrix, fluency: ScoreMatrix) -> ConcordanceCounts:
    """Classify system pairs by the signs of their adequacy/fluency mean
    differences: same nonzero sign -> concordant, opposite -> discordant,
    any zero -> tied."""
    check_aligned(adequacy, fluency)
    a = adequacy.values.mean(axis=1)
    f = fluency.values.mean(axis=1)
    concordant = discordant = tied = 0
    for pair in all_pairs(adequacy.n_systems):
        sa = np.sign(a[pair.j] - a[pair.i])
        sf = np.sign(f[pair.j] - f[pair.i])
        if sa == 0.0 or sf == 0.0:
            tied += 1
        elif sa == sf:
            concordant += 1
        else:
            discordant += 1
    return ConcordanceCounts(concordant, discordant, tied)


def pairwise_pvalues(
    human: ScoreMatrix,
    scorings: Mapping[str, ScoreMatrix],
    cfg: PermutationConfig,
    mixes: Sequence[Mix] = (),
) -> dict[str, np.ndarray]:
    """One-sided p(system j > system i) per pair for the human scoring
    (key "__human__"), every named scoring, and every mix.

    All tests for one pair share the sub-seed derived from (human scoring
    name, system i, system j), and scorings whose values equal another
    column's are deduplicated so identical inputs yield bit-identical
    p-values. Mixes reuse the base columns' resampled statistics.
    """
    mats: dict[str, ScoreMatrix] = {"__human__": human, **scorings}
    check_aligned(*mats.values())
    for mix in mixes:
        for base in (mix.base1, mix.base2):
            if base not in mats:
                raise KeyError(f"mix {mix.name!r} references unknown base {base!r}")

    unique: list[np.ndarray] = []
    col_of: dict[str, int] = {}
    for nm, mat in mats.items():
        vals = mat.values
        for ci, arr in enumerate(unique):
            if arr is vals or np.array_equal(arr, vals):
                col_of[nm] = ci
                break
        else:
            col_of[nm] = len(unique)
            unique.append(vals)

    pairs = all_pairs(human.n_systems)
    result = {nm: np.empty(len(pairs)) for nm in mats}
    result.update({mix.name: np.empty(len(pairs)) for mix in mixes})
    for p_idx, pair in enumerate(pairs):
        diffs = np.stack([arr[pair.j] - arr[pair.i] for arr in unique])
        tag = pair_tag(human.name, human.systems[pair.i], human.systems[pair.j])
        subseed = derive_subseed(cfg.seed, tag)
        ts = signflip_statistics(diffs, cfg, subseed)
        pvals = pvalues_from_statistics(ts, cfg)
        for nm in mats:
            result[nm][p_idx] = pvals[col_of[nm]]
        for mix in mixes:
            col = mix.w1 * ts[:, col_of[mix.base1]] + mix.w2 * ts[:, col_of[mix.base2]]
            result[mix.name][p_idx] = pvalues_from_statistics(col[:, None], cfg)[0]
    return result


def spa_from_pvalues(p_metric: np.ndarray, p_human: np.ndarray) -> float:
    return float(np.mean(1.0 - np.abs(p_human - p_metric)))


def soft_pairwise_accuracy(
    metric: ScoreMatrix,
    human: ScoreMatrix,
    cfg: PermutationConfig,
    keep_per_pair: bool = False,
) -> PairwiseResult:
    """Mean over all system pairs of 1 - |p_human - p_metric|.

    Unlike PA, human-tied pairs are included; there are no exclusions.
    """
    table = pairwise_pvalues(human, {"metric": metric}, cfg)
    gaps = 1.0 - np.abs(table["__human__"] - table["metric"])
    pairs = all_pairs(metric.n_systems)
    per_pair = tuple(zip(pairs, (float(g) for g in gaps))) if keep_per_pair else None
    return PairwiseResult(
        value=float(gaps.mean()),
        pairs_used=len(pairs),
        pairs_excluded_human_tie=0,
        per_pair=per_pair,
    )


def soft_pairwise_accuracy_many(
    metrics: Mapping[str, ScoreMatrix],
    human: ScoreMatrix,
    cfg: PermutationConfig,
) -> dict[str, PairwiseResult]:
    """SPA of several metrics against one human scoring, computing the human
    p-values and per-pair sign flips once."""
    table = pairwise_pvalues(human, dict(metrics), cfg)
    n_pairs = len(all_pairs(human.n_systems))
    out = {}
    for nm in metrics:
        gaps = 1.0 - np.abs(table["__human__"] - table[nm])
        out[nm] = PairwiseResult(float(gaps.mean()), n_pairs, 0, None)
    return out
