"""Reusable statistics: seeded sign-flip permutation tests, one-way ANOVA
(standard and Welch), and the F-distribution CDF.

Permutation tests are deterministic: the resampling stream for a comparison
is seeded by XOR-ing the run seed with a stable hash of the caller's tag
(scoring name plus the two system ids), so results do not depend on
evaluation order and identical comparisons share identical sign flips.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import betainc

from .data import ScoreMatrix
from .errors import DomainError, LengthMismatch, ZeroVarianceSystem

P_FLOOR = 1e-300
EXHAUSTIVE_MAX_N = 20


def derive_subseed(seed: int, *tags: str) -> int:
    """Stable 64-bit sub-seed: seed XOR blake2b(tags)."""
    digest = hashlib.blake2b("\x1f".join(tags).encode("utf-8"), digest_size=8).digest()
    return (seed ^ int.from_bytes(digest, "little")) & 0xFFFFFFFFFFFFFFFF


def pair_tag(scoring: str, system_i: str, system_j: str) -> str:
    """Canonical tag for one system pair's permutation tests.

    ``derive_subseed(seed, pair_tag(s, i, j))`` equals
    ``derive_subseed(seed, s, i, j)``, so callers holding only the joined tag
    reproduce the batched computations' sub-seeds.
    """
    return "\x1f".join((scoring, system_i, system_j))


@dataclass(frozen=True)
class PermutationConfig:
    """Resample count and seed for the paired sign-flip test.

    With ``exhaustive=True`` all 2^n sign assignments are enumerated instead
    of sampled (n <= 20); the seed is then irrelevant.
    """

    resamples: int = 1000
    seed: int = 0
    exhaustive: bool = False

    def __post_init__(self) -> None:
        if self.resamples < 1:
            raise ValueError("resamples must be >= 1")


class AnovaMethod(Enum):
    STANDARD = "standard"
    WELCH = "welch"


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: float
    df_between: int
    df_within: float
    p_value: float
    method: AnovaMethod


def _sampled_bits(subseed: int, resamples: int, n: int) -> np.ndarray:
    """(resamples + 1, n) float32 matrix of 0/1 bits; row 0 is all ones.

    Bits come straight from the generator's byte stream so large matrices
    are cheap; the all-ones row is the identity assignment, making the
    observed statistic flow through the same matrix product as the resampled
    ones so that tie comparisons are exact.
    """
    rng = np.random.default_rng(subseed)
    row_bytes = (n + 7) // 8
    raw = np.frombuffer(rng.bytes(resamples * row_bytes), dtype=np.uint8)
    unpacked = np.unpackbits(raw.reshape(resamples, row_bytes), axis=1)[:, :n]
    bits = np.empty((resamples + 1, n), dtype=np.float32)
    bits[0] = 1.0
    np.copyto(bits[1:], unpacked, casting="unsafe")
    return bits


def _exhaustive_bits(n: int) -> np.ndarray:
    """(2^n, n) float64 matrix of every 0/1 assignment; the last row is all ones."""
    if n > EXHAUSTIVE_MAX_N:
        raise DomainError(f"exhaustive enumeration supports n <= {EXHAUSTIVE_MAX_N}, got {n}")
    r = np.arange(2**n, dtype=np.int64)
    return (((r[:, None] >> np.arange(n)) & 1)).astype(np.float64)


def signflip_statistics(diffs: np.ndarray, cfg: PermutationConfig, subseed: int) -> np.ndarray:
    """Resampled statistics for one or more paired-difference vectors.

    ``diffs`` has shape (m, n): m score vectors over the same n segments, all
    flipped with one shared set of sign assignments. Each entry is the sum of
    a column's diffs over the assignment's kept positions, which differs from
    the signed-sum statistic sum(s_i * d_i) only by the row-independent
    affine map x -> 2x - sum(d); >=-comparisons between rows of a column (and
    of fixed nonneg-weighted column combinations) are therefore identical to
    the signed statistic's, and the -1/+1 matrix never needs materializing.

    Returns (rows, m); the reference (identity-assignment) statistic is
    row 0 in sampled mode and the last row in exhaustive mode. The sampled
    path runs in float32: lower precision only perturbs near-tie resamples,
    deterministically for a fixed seed.
    """
    diffs = np.atleast_2d(np.asarray(diffs, dtype=np.float64))
    n = diffs.shape[1]
    if n < 1:
        raise LengthMismatch("need at least one paired observation")
    if cfg.exhaustive:
        return _exhaustive_bits(n) @ diffs.T
    return _sampled_bits(subseed, cfg.resamples, n) @ diffs.T.astype(np.float32)


def pvalues_from_statistics(stats: np.ndarray, cfg: PermutationConfig) -> np.ndarray:
    """One-sided p-values from a signflip_statistics result (column-wise)."""
    if cfg.exhaustive:
        ref = stats[-1]
        return (stats >= ref).sum(axis=0) / stats.shape[0]
    ref = stats[0]
    count = (stats[1:] >= ref).sum(axis=0)
    return (1.0 + count) / (1.0 + (stats.shape[0] - 1))


def permutation_pvalue(
    a: np.ndarray,
    b: np.ndarray,
    cfg: PermutationConfig,
    pair_tag: str = "",
) -> float:
    """One-sided paired sign-flip p-value for "a scores higher than b".

    The statistic is the mean of d = a - b; p = (1 + #{resampled >= observed})
    / (1 + resamples), so p is always in [1/(resamples+1), 1] and equals 1
    when a == b. Deterministic for a fixed seed and pair_tag.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise LengthMismatch(f"paired vectors must be 1-D with equal length, got {a.shape} and {b.shape}")
    if a.size < 1:
        raise LengthMismatch("need at least one paired observation")
    subseed = derive_subseed(cfg.seed, pair_tag)
    stats = signflip_statistics((a - b)[None, :], cfg, subseed)
    return float(pvalues_from_statistics(stats, cfg)[0])


def _clamp_p(p: float) -> float:
    return min(max(float(p), P_FLOOR), 1.0)


def f_cdf(x: float, d1: float, d2: float) -> float:
    """CDF of the F distribution via the regularized incomplete beta function."""
    if d1 <= 0 or d2 <= 0:
        raise DomainError(f"degrees of freedom must be positive, got ({d1}, {d2})")
    if x <= 0:
        return 0.0
    if np.isinf(x):
        return 1.0
    return float(betainc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2)))


def f_sf(x: float, d1: float, d2: float) -> float:
    """Right-tail probability 1 - f_cdf(x), computed without cancellation.

    Uses the complementary incomplete-beta identity so values far below
    1e-15 keep full relative precision (ANOVA p-values on well-separated
    systems reach 1e-30 and smaller).
    """
    if d1 <= 0 or d2 <= 0:
        raise DomainError(f"degrees of freedom must be positive, got ({d1}, {d2})")
    if x <= 0:
        return 1.0
    if np.isinf(x):
        return 0.0
    return float(betainc(d2 / 2.0, d1 / 2.0, d2 / (d1 * x + d2)))


def f_oneway_groups(groups: list[np.ndarray]) -> AnovaResult:
    """Standard one-way ANOVA over groups of observations (unequal sizes allowed).

    MSB = sum n_i (mean_i - grand)^2 / (K - 1);
    MSW = sum of squared within-group deviations / (T - K).
    A zero within-group variance yields the +inf sentinel with the floored
    p-value instead of raising, so pipelines on degenerate synthetic setups
    can complete; fully constant input yields F = 0, p = 1.
    """
    groups = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    k = len(groups)
    sizes = np.array([g.size for g in groups], dtype=np.float64)
    total = float(sizes.sum())
    if k < 2:
        raise DomainError("ANOVA needs at least 2 systems")
    if np.any(sizes < 1) or total <= k:
        raise DomainError("ANOVA needs more observations than systems")
    grand = float(np.concatenate(groups).mean())
    means = np.array([g.mean() for g in groups])
    ss_between = float((sizes * (means - grand) ** 2).sum())
    ss_within = float(sum(((g - m) ** 2).sum() for g, m in zip(groups, means)))
    df_between = k - 1
    df_within = total - k
    msb = ss_between / df_between
    msw = ss_within / df_within
    if msw == 0.0:
        if msb == 0.0:
            return AnovaResult(0.0, df_between, df_within, 1.0, AnovaMethod.STANDARD)
        return AnovaResult(float("inf"), df_between, df_within, P_FLOOR, AnovaMethod.STANDARD)
    f = msb / msw
    p = _clamp_p(f_sf(f, df_between, df_within))
    return AnovaResult(f, df_between, df_within, p, AnovaMethod.STANDARD)


def welch_f_groups(groups: list[np.ndarray]) -> AnovaResult:
    """Welch's heteroscedastic one-way ANOVA with fractional df_within."""
    groups = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    k = len(groups)
    if k < 2:
        raise DomainError("ANOVA needs at least 2 systems")
    sizes = np.array([g.size for g in groups], dtype=np.float64)
    if np.any(sizes < 2):
        raise DomainError("Welch's ANOVA needs at least 2 observations per system")
    variances = np.array([g.var(ddof=1) for g in groups])
    if np.any(variances == 0.0):
        raise ZeroVarianceSystem("Welch's ANOVA is undefined when a system has zero score variance")
    means = np.array([g.mean() for g in groups])
    w = sizes / variances
    w_total = float(w.sum())
    mean_w = float((w * means).sum() / w_total)
    a = float((w * (means - mean_w) ** 2).sum()) / (k - 1)
    tmp = float(((1.0 - w / w_total) ** 2 / (sizes - 1.0)).sum())
    b = 1.0 + 2.0 * (k - 2) / (k**2 - 1.0) * tmp
    f = a / b
    df_between = k - 1
    df_within = (k**2 - 1.0) / (3.0 * tmp)
    p = _clamp_p(f_sf(f, df_between, df_within))
    return AnovaResult(f, df_between, df_within, p, AnovaMethod.WELCH)


def f_statistic(matrix: ScoreMatrix) -> AnovaResult:
    """Standard one-way ANOVA treating each system's segment scores as a group."""
    return f_oneway_groups(list(matrix.values))


def welch_f_statistic(matrix: ScoreMatrix) -> AnovaResult:
    """Welch's one-way ANOVA treating each system's segment scores as a group."""
    return welch_f_groups(list(matrix.values))
