"""The three tradeoff-analysis protocols: PA breakdown, SPA plane, and
sensitivity analysis.

PA breakdown splits system pairs into concordant and discordant subsets
(by the signs of the adequacy/fluency mean differences) and reports the
metric's PA on concordant pairs plus its adequacy/fluency agreement shares
on discordant pairs, which sum to 1 with the metric-tie fraction.

The SPA plane places each metric at (SPA vs fluency, SPA vs adequacy) and
draws three sentinel lines: the tradeoff line (adequacy-fluency
interpolation, which no scoring can surpass) and the two knowledge lines
(each aspect interpolated with per-segment uniform random scores).

Sensitivity measures the expected metric-score change per unit of penalty on
one aspect over candidate pairs that exactly tie on the other aspect.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .data import Orientation, ScoreMatrix, all_pairs
from .errors import DomainError, NoQualifyingPairs
from .metametrics import Mix, check_aligned, pairwise_pvalues, spa_from_pvalues
from .stats import PermutationConfig, derive_subseed

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = tuple(round(i * 0.05, 2) for i in range(21))
DEFAULT_INSTANCES = 10


@dataclass(frozen=True)
class PABreakdown:
    """Concordant-pair PA plus the discordant-pair agreement split.

    The discordant-bucket fields are None when no discordant pairs exist;
    otherwise agree_adequacy + agree_fluency + metric_tie_fraction == 1.
    """

    pa_concordant: float | None
    agree_adequacy: float | None
    agree_fluency: float | None
    metric_tie_fraction: float | None
    n_concordant: int
    n_discordant: int
    n_tied: int
    n_agree_adequacy: int
    n_agree_fluency: int
    n_metric_tie: int


def pa_breakdown(metric: ScoreMatrix, adequacy: ScoreMatrix, fluency: ScoreMatrix) -> PABreakdown:
    check_aligned(metric, adequacy, fluency)
    m = metric.values.mean(axis=1)
    a = adequacy.values.mean(axis=1)
    f = fluency.values.mean(axis=1)

    n_concordant = n_discordant = n_tied = 0
    concordant_hits = 0
    agree_a = agree_f = metric_ties = 0
    for pair in all_pairs(metric.n_systems):
        sa = np.sign(a[pair.j] - a[pair.i])
        sf = np.sign(f[pair.j] - f[pair.i])
        sm = np.sign(m[pair.j] - m[pair.i])
        if sa == 0.0 or sf == 0.0:
            n_tied += 1
        elif sa == sf:
            n_concordant += 1
            concordant_hits += sm == sa
        else:
            n_discordant += 1
            if sm == 0.0:
                metric_ties += 1
            elif sm == sa:
                agree_a += 1
            else:
                agree_f += 1

    return PABreakdown(
        pa_concordant=concordant_hits / n_concordant if n_concordant else None,
        agree_adequacy=agree_a / n_discordant if n_discordant else None,
        agree_fluency=agree_f / n_discordant if n_discordant else None,
        metric_tie_fraction=metric_ties / n_discordant if n_discordant else None,
        n_concordant=n_concordant,
        n_discordant=n_discordant,
        n_tied=n_tied,
        n_agree_adequacy=agree_a,
        n_agree_fluency=agree_f,
        n_metric_tie=metric_ties,
    )


class LineKind(Enum):
    TRADEOFF = "tradeoff"
    ADEQUACY_KNOWLEDGE = "adequacy-knowledge"
    FLUENCY_KNOWLEDGE = "fluency-knowledge"


@dataclass(frozen=True)
class SPAPlanePoint:
    label: str
    x: float  # SPA vs the fluency scoring
    y: float  # SPA vs the adequacy scoring


@dataclass(frozen=True)
class SentinelLine:
    kind: LineKind
    points: tuple[SPAPlanePoint, ...]
    instances: int
    shadows: tuple[tuple[SPAPlanePoint, ...], ...] = ()


@dataclass(frozen=True)
class SpaPlane:
    points: tuple[SPAPlanePoint, ...]
    tradeoff: SentinelLine
    adequacy_knowledge: SentinelLine
    fluency_knowledge: SentinelLine
    grid: tuple[float, ...]


def _uniform_in_segment_range(
    aspect: ScoreMatrix, tag: str, instance: int, seed: int
) -> ScoreMatrix:
    """Random scores, uniform per cell within the segment's range of the
    aspect's oriented scores across systems."""
    rng = np.random.default_rng(derive_subseed(seed, "spa-plane-noise", tag, str(instance)))
    lo = aspect.values.min(axis=0)
    hi = aspect.values.max(axis=0)
    u = rng.uniform(size=aspect.values.shape)
    values = lo[None, :] + u * (hi - lo)[None, :]
    return ScoreMatrix(
        f"random-{tag}-{instance}", values, Orientation.HIGHER_BETTER, aspect.systems, aspect.segments
    )


def _rescaled(matrix: ScoreMatrix) -> ScoreMatrix:
    """Scale oriented scores to unit global standard deviation (experimental
    alternative for the interpolations; shifts cancel in paired differences)."""
    sd = float(matrix.values.std())
    if sd == 0.0:
        return matrix
    return ScoreMatrix(
        matrix.name, matrix.values / sd, matrix.orientation, matrix.systems, matrix.segments
    )


def spa_plane(
    metrics: Mapping[str, ScoreMatrix],
    adequacy: ScoreMatrix,
    fluency: ScoreMatrix,
    cfg: PermutationConfig,
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    instances: int = DEFAULT_INSTANCES,
    rescale_aspects: bool = False,
) -> SpaPlane:
    """Metric points and the three sentinel lines in the SPA plane.

    The tradeoff line evaluates lambda*adequacy + (1-lambda)*fluency on the
    oriented segment scores; each knowledge line interpolates one aspect with
    per-segment uniform random scores, one full line per random instance,
    averaged pointwise over ``instances`` draws. The lambda-1 end of the
    tradeoff line is the adequacy self-point (y = 1 exactly, since the
    mixture's p-values coincide with the human ones), and lambda-0 the
    fluency self-point.
    """
    grid = tuple(float(v) for v in grid)
    if not grid or min(grid) < 0.0 or max(grid) > 1.0 or 0.0 not in grid or 1.0 not in grid:
        raise DomainError("the lambda grid must lie in [0, 1] and include both endpoints")
    if instances < 1:
        raise DomainError("instances must be >= 1")
    check_aligned(adequacy, fluency, *metrics.values())
    if rescale_aspects:
        adequacy = _rescaled(adequacy)
        fluency = _rescaled(fluency)

    basis: dict[str, ScoreMatrix] = {"[adequacy]": adequacy, "[fluency]": fluency}
    for nm, matrix in metrics.items():
        basis[nm] = matrix
    noise: dict[tuple[str, int], str] = {}
    for tag, aspect in (("adequacy", adequacy), ("fluency", fluency)):
        for r in range(instances):
            key = f"[rand-{tag}-{r}]"
            basis[key] = _uniform_in_segment_range(aspect, tag, r, cfg.seed)
            noise[(tag, r)] = key

    mixes: list[Mix] = []
    for lam in grid:
        mixes.append(Mix(f"[mix-t-{lam}]", lam, "[adequacy]", 1.0 - lam, "[fluency]"))
        for r in range(instances):
            mixes.append(Mix(f"[mix-a-{lam}-{r}]", lam, "[adequacy]", 1.0 - lam, noise[("adequacy", r)]))
            mixes.append(Mix(f"[mix-f-{lam}-{r}]", lam, "[fluency]", 1.0 - lam, noise[("fluency", r)]))

    spa_vs: dict[str, dict[str, float]] = {}
    for axis, human in (("y", adequacy), ("x", fluency)):
        table = pairwise_pvalues(human, basis, cfg, mixes)
        p_h = table["__human__"]
        spa_vs[axis] = {nm: spa_from_pvalues(p, p_h) for nm, p in table.items() if nm != "__human__"}

    def point(label: str, key: str) -> SPAPlanePoint:
        return SPAPlanePoint(label, x=spa_vs["x"][key], y=spa_vs["y"][key])

    metric_points = tuple(point(nm, nm) for nm in metrics)
    tradeoff = SentinelLine(
        kind=LineKind.TRADEOFF,
        points=tuple(point(f"lambda={lam:g}", f"[mix-t-{lam}]") for lam in grid),
        instances=1,
    )

    def knowledge(kind: LineKind, mix_tag: str) -> SentinelLine:
        shadows = tuple(
            tuple(point(f"lambda={lam:g}", f"[mix-{mix_tag}-{lam}-{r}]") for lam in grid)
            for r in range(instances)
        )
        averaged = tuple(
            SPAPlanePoint(
                f"lambda={lam:g}",
                x=float(np.mean([shadows[r][gi].x for r in range(instances)])),
                y=float(np.mean([shadows[r][gi].y for r in range(instances)])),
            )
            for gi, lam in enumerate(grid)
        )
        return SentinelLine(kind=kind, points=averaged, instances=instances, shadows=shadows)

    return SpaPlane(
        points=metric_points,
        tradeoff=tradeoff,
        adequacy_knowledge=knowledge(LineKind.ADEQUACY_KNOWLEDGE, "a"),
        fluency_knowledge=knowledge(LineKind.FLUENCY_KNOWLEDGE, "f"),
        grid=grid,
    )


@dataclass(frozen=True)
class SensitivityResult:
    axis: str
    unnormalized: float
    normalized: float
    pairs_used: int


def sensitivity(metric: ScoreMatrix, vary: ScoreMatrix, hold: ScoreMatrix) -> SensitivityResult:
    """Expected metric change per unit of ``vary`` penalty, over candidate
    pairs that exactly tie on ``hold``.

    For each segment, every cross-system candidate pair with identical hold
    scores and different vary scores contributes
    (metric_better - metric_worse) / (penalty_worse - penalty_better) using
    oriented metric scores, so a metric that tracks the vary aspect perfectly
    contributes exactly 1. The normalized value scales by the summed
    per-segment score spreads: sum_j sd_j(vary) / sum_j sd_j(metric), sd
    taken across the candidates of a segment.
    """
    check_aligned(metric, vary, hold)
    k = metric.n_systems
    iu, ju = np.triu_indices(k, 1)
    hold_eq = hold.values[iu, :] == hold.values[ju, :]
    vary_diff = vary.values[iu, :] != vary.values[ju, :]
    mask = hold_eq & vary_diff
    pairs_used = int(mask.sum())
    if pairs_used == 0:
        raise NoQualifyingPairs(
            f"no candidate pairs hold {hold.name!r} fixed while varying {vary.name!r}"
        )
    dm = (metric.values[iu, :] - metric.values[ju, :])[mask]
    dv = (vary.values[iu, :] - vary.values[ju, :])[mask]
    contributions = dm / dv
    unnormalized = float(contributions.mean())

    sd_vary = float(vary.values.std(axis=0).sum())
    sd_metric = float(metric.values.std(axis=0).sum())
    if sd_metric == 0.0:
        logger.warning("constant metric %r: normalized sensitivity reported as 0", metric.name)
        normalized = 0.0
    else:
        normalized = unnormalized * sd_vary / sd_metric
    return SensitivityResult(
        axis=vary.name,
        unnormalized=unnormalized,
        normalized=normalized,
        pairs_used=pairs_used,
    )
