"""Nonparametric statistics used to compare testing approaches.

The Mann-Whitney test runs an exact permutation path for small samples
(pooled size <= 16) and a tie-corrected, continuity-corrected normal
approximation otherwise.  Ties always contribute one half, both to U and
to the A12 effect size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

EXACT_LIMIT = 16  # pooled sample size at or below which the exact path runs


@dataclass(frozen=True)
class MannWhitneyResult:
    U: float  # statistic for the first sample (ties count half)
    pValue: float
    exact: bool


@dataclass(frozen=True)
class CoverageReport:
    totalHits: int
    applied: int
    notApplied: int
    coverageApplied: float  # percent
    coverageNotApplied: float  # percent


@dataclass(frozen=True)
class StatResult:
    mannWhitneyU: float
    pValue: float
    a12: float


def _average_ranks(pooled: Sequence[float]) -> list[float]:
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _u_statistic(ranks_x_sum: float, n1: int) -> float:
    return ranks_x_sum - n1 * (n1 + 1) / 2.0


def mann_whitney(xs: Sequence[float], ys: Sequence[float],
                 method: str = "auto") -> MannWhitneyResult:
    """Two-sided Mann-Whitney test; U is reported for *xs*.

    With ``method="auto"`` the exact permutation p-value is used when
    ``len(xs) + len(ys) <= 16`` and the normal approximation with tie
    correction and continuity correction otherwise.  ``"exact"`` and
    ``"approx"`` force one path (useful for cross-checking them).
    """
    if method not in ("auto", "exact", "approx"):
        raise ValueError(f"unknown method {method!r}")
    n1, n2 = len(xs), len(ys)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    pooled = list(xs) + list(ys)
    ranks = _average_ranks(pooled)
    u_obs = _u_statistic(sum(ranks[:n1]), n1)
    mu = n1 * n2 / 2.0

    use_exact = method == "exact" or (method == "auto" and n1 + n2 <= EXACT_LIMIT)
    if use_exact:
        observed_dev = abs(u_obs - mu)
        count = 0
        total = 0
        for chosen in combinations(range(n1 + n2), n1):
            u = _u_statistic(sum(ranks[i] for i in chosen), n1)
            if abs(u - mu) >= observed_dev - 1e-12:
                count += 1
            total += 1
        return MannWhitneyResult(U=u_obs, pValue=count / total, exact=True)

    # tie-corrected variance
    n = n1 + n2
    tie_term = 0.0
    sorted_pool = sorted(pooled)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_pool[j + 1] == sorted_pool[i]:
            j += 1
        t = j - i + 1
        tie_term += t ** 3 - t
        i = j + 1
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return MannWhitneyResult(U=u_obs, pValue=1.0, exact=False)
    z = (abs(u_obs - mu) - 0.5) / math.sqrt(variance)
    z = max(z, 0.0)
    p = math.erfc(z / math.sqrt(2.0))
    return MannWhitneyResult(U=u_obs, pValue=min(p, 1.0), exact=False)


def vargha_delaney_a12(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Probability-of-superiority effect size, ties counted half.

    Computed from rank sums: identical to pairwise counting of
    ``#(x > y) + 0.5 * #(x = y)`` over ``|xs| * |ys|`` pairs.
    """
    n1, n2 = len(xs), len(ys)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    ranks = _average_ranks(list(xs) + list(ys))
    rank_sum_x = sum(ranks[:n1])
    return (rank_sum_x / n1 - (n1 + 1) / 2.0) / n2


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    if len(xs) != len(ys):
        raise ValueError("samples must have equal length")
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two points")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0 or var_y == 0:
        raise ValueError("degenerate variance")
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    r = cov / math.sqrt(var_x * var_y)
    return max(-1.0, min(1.0, r))


def coverage(applied: int, not_applied: int) -> CoverageReport:
    """Percentage coverage of applied vs not-applied rule hits."""
    if applied < 0 or not_applied < 0:
        raise ValueError("hit counts must be non-negative")
    total = applied + not_applied
    if total == 0:
        raise ValueError("no rule hits")
    return CoverageReport(
        totalHits=total,
        applied=applied,
        notApplied=not_applied,
        coverageApplied=applied / total * 100.0,
        coverageNotApplied=not_applied / total * 100.0,
    )


def compare_samples(xs: Sequence[float], ys: Sequence[float]) -> StatResult:
    result = mann_whitney(xs, ys)
    return StatResult(mannWhitneyU=result.U, pValue=result.pValue, a12=vargha_delaney_a12(xs, ys))
