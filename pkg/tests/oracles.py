"""Independent brute-force implementations used as test oracles.

Everything here is written the slow, obvious way (explicit loops, textbook
formulas, exhaustive enumeration, high-precision quadrature) and must stay
independent of the library code paths it checks.
"""

from __future__ import annotations

import itertools

import mpmath


def _sign(x):
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def brute_pairwise_accuracy(metric_means, human_means):
    """PA by definition: loop pairs, skip human ties, compare signs."""
    metric_means = [float(v) for v in metric_means]
    human_means = [float(v) for v in human_means]
    k = len(metric_means)
    agree = 0
    used = 0
    for i in range(k):
        for j in range(i + 1, k):
            dh = human_means[j] - human_means[i]
            if dh == 0:
                continue
            used += 1
            agree += _sign(metric_means[j] - metric_means[i]) == _sign(dh)
    if used == 0:
        return None
    return agree / used, used


def brute_concordance(a_means, f_means):
    a_means = [float(v) for v in a_means]
    f_means = [float(v) for v in f_means]
    concordant = discordant = tied = 0
    k = len(a_means)
    for i in range(k):
        for j in range(i + 1, k):
            sa = _sign(a_means[j] - a_means[i])
            sf = _sign(f_means[j] - f_means[i])
            if sa == 0 or sf == 0:
                tied += 1
            elif sa == sf:
                concordant += 1
            else:
                discordant += 1
    return concordant, discordant, tied


def brute_f_oneway(groups):
    """Textbook one-way ANOVA, two explicit passes."""
    k = len(groups)
    all_values = [v for g in groups for v in g]
    total = len(all_values)
    grand = sum(all_values) / total
    ss_between = 0.0
    ss_within = 0.0
    for g in groups:
        mean = sum(g) / len(g)
        ss_between += len(g) * (mean - grand) ** 2
        for v in g:
            ss_within += (v - mean) ** 2
    msb = ss_between / (k - 1)
    msw = ss_within / (total - k)
    return msb / msw, k - 1, total - k


def brute_welch(groups):
    """Welch's one-way ANOVA from the published formulas, explicit loops."""
    k = len(groups)
    means = [sum(g) / len(g) for g in groups]
    variances = [sum((v - m) ** 2 for v in g) / (len(g) - 1) for g, m in zip(groups, means)]
    w = [len(g) / s2 for g, s2 in zip(groups, variances)]
    w_sum = sum(w)
    grand_w = sum(wi * mi for wi, mi in zip(w, means)) / w_sum
    numerator = sum(wi * (mi - grand_w) ** 2 for wi, mi in zip(w, means)) / (k - 1)
    tail = sum((1 - wi / w_sum) ** 2 / (len(g) - 1) for wi, g in zip(w, groups))
    denominator = 1 + (2 * (k - 2) / (k**2 - 1)) * tail
    df2 = (k**2 - 1) / (3 * tail)
    return numerator / denominator, k - 1, df2


def exhaustive_signflip_pvalue(diffs):
    """p(mean(d) under sign flips >= observed), full 2^n enumeration."""
    diffs = list(diffs)
    n = len(diffs)
    observed = sum(diffs) / n
    count = 0
    total = 0
    for signs in itertools.product((1.0, -1.0), repeat=n):
        total += 1
        stat = sum(s * d for s, d in zip(signs, diffs)) / n
        count += stat >= observed
    return count / total


def quadrature_f_cdf(x, d1, d2, dps=40):
    """F CDF by direct quadrature of the density at high precision."""
    with mpmath.workdps(dps):
        d1m = mpmath.mpf(d1)
        d2m = mpmath.mpf(d2)
        log_norm = (
            (d1m / 2) * mpmath.log(d1m / d2m)
            - mpmath.log(mpmath.beta(d1m / 2, d2m / 2))
        )

        def density(t):
            if t <= 0:
                return mpmath.mpf(0)
            return mpmath.e ** (
                log_norm + (d1m / 2 - 1) * mpmath.log(t) - ((d1m + d2m) / 2) * mpmath.log(1 + d1m * t / d2m)
            )

        return float(mpmath.quad(density, [0, x]))


def quadrature_f_sf(x, d1, d2, dps=40):
    with mpmath.workdps(dps):
        d1m = mpmath.mpf(d1)
        d2m = mpmath.mpf(d2)
        log_norm = (d1m / 2) * mpmath.log(d1m / d2m) - mpmath.log(mpmath.beta(d1m / 2, d2m / 2))

        def density(t):
            return mpmath.e ** (
                log_norm + (d1m / 2 - 1) * mpmath.log(t) - ((d1m + d2m) / 2) * mpmath.log(1 + d1m * t / d2m)
            )

        return float(mpmath.quad(density, [x, mpmath.inf]))


def brute_sensitivity(metric_oriented, vary_oriented, hold_oriented):
    """Mean per-pair slope over qualifying pairs, explicit loops."""
    k, n = metric_oriented.shape
    contributions = []
    for j in range(n):
        for u in range(k):
            for v in range(u + 1, k):
                if hold_oriented[u, j] != hold_oriented[v, j]:
                    continue
                if vary_oriented[u, j] == vary_oriented[v, j]:
                    continue
                contributions.append(
                    (metric_oriented[u, j] - metric_oriented[v, j])
                    / (vary_oriented[u, j] - vary_oriented[v, j])
                )
    if not contributions:
        return None
    return sum(contributions) / len(contributions), len(contributions)


def between_system_variance(raw_matrix):
    means = [sum(row) / len(row) for row in raw_matrix]
    grand = sum(means) / len(means)
    return sum((m - grand) ** 2 for m in means) / len(means)
