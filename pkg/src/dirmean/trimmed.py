"""Univariate trimmed statistics: rearrangement, trim sets, trimmed moments.

Trimming removes a fixed *count* of extreme values rather than values beyond
a preset threshold: with trim fraction theta and sample size N, the
k = round(theta * N) largest and k smallest values are discarded.  Ties are
broken by original index with the smaller index treated as the larger value,
so all operations are deterministic on data with repeats.

Interior sums are accumulated with ``math.fsum`` (exact compensated
summation) in ascending original-index order, so results are reproducible
across runs and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MEAN_NORMALIZATIONS = ("full", "interior")


@dataclass(frozen=True)
class SortedSample:
    """Nonincreasing rearrangement plus the permutation producing it.

    ``values_desc[i] == values[perm[i]]``; the sort is stable, so equal
    values keep their original relative order.
    """

    values_desc: np.ndarray
    perm: np.ndarray


@dataclass(frozen=True)
class TrimPlan:
    """Index sets of the k largest (upper) and k smallest (lower) values."""

    theta: float
    k: int
    upper_indices: frozenset[int]
    lower_indices: frozenset[int]


def rearrange_desc(values) -> SortedSample:
    """Stable descending sort with its permutation."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size == 0:
        raise ValueError("empty sample")
    perm = np.argsort(-values, kind="stable")
    return SortedSample(values_desc=values[perm], perm=perm)


def trim_count(theta: float, n: int) -> int:
    """k = round(theta * N), rounding halves away from zero."""
    return int(math.floor(theta * n + 0.5))


def _validate_k(k: int, n: int) -> None:
    if k < 1:
        raise ValueError(f"trim count k = {k} must be >= 1")
    if 2 * k >= n:
        raise ValueError(f"trim count k = {k} too large: need 2k < N = {n}")


def trim_sets(values, theta: float, k: int | None = None) -> TrimPlan:
    """Compute the trim plan for fraction ``theta``.

    ``k`` overrides the rounded count when given (``k = 0`` is the
    degenerate no-trim plan; otherwise 1 <= k and 2k < N are enforced).
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    n = values.size
    if n == 0:
        raise ValueError("empty sample")
    if k is None:
        if not (0.0 < theta < 0.5):
            raise ValueError("theta must lie in (0, 1/2)")
        k = trim_count(theta, n)
        _validate_k(k, n)
    elif k != 0:
        _validate_k(k, n)
    srt = rearrange_desc(values)
    return TrimPlan(
        theta=theta,
        k=k,
        upper_indices=frozenset(int(i) for i in srt.perm[:k]),
        lower_indices=frozenset(int(i) for i in srt.perm[n - k:] if k > 0),
    )


def _interior_sum(values: np.ndarray, plan: TrimPlan, transform=None) -> float:
    dropped = plan.upper_indices | plan.lower_indices
    terms = (
        (transform(v) if transform is not None else v)
        for i, v in enumerate(values)
        if i not in dropped
    )
    return math.fsum(terms)


def trimmed_mean(values, theta: float, normalization: str = "full", k: int | None = None) -> float:
    """Mean of the sample after dropping the k largest and k smallest values.

    normalization 'full' divides by N (the count before trimming);
    'interior' divides by N - 2k (the surviving count).  With ``k = 0`` and
    either mode this is exactly the arithmetic mean.
    """
    if normalization not in MEAN_NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {MEAN_NORMALIZATIONS}")
    values = np.asarray(values, dtype=float).reshape(-1)
    plan = trim_sets(values, theta, k=k)
    total = _interior_sum(values, plan)
    divisor = values.size if normalization == "full" else values.size - 2 * plan.k
    return total / divisor


def trimmed_abs_moment(values, p: float, theta: float, k: int | None = None) -> float:
    """(1/N) * sum of |value|^p over the interior (divisor always N)."""
    if p < 1:
        raise ValueError("need p >= 1")
    values = np.asarray(values, dtype=float).reshape(-1)
    plan = trim_sets(values, theta, k=k)
    return _interior_sum(values, plan, transform=lambda v: abs(v) ** p) / values.size


def empirical_quantile_hat(values, theta: float) -> tuple[float, float]:
    """Trim-boundary order statistics (upper, lower).

    The upper value is the k-th largest sample point and the lower value the
    k-th smallest (its mirror image), with k = round(theta * N).
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    plan = trim_sets(values, theta)
    srt = rearrange_desc(values)
    q_plus = float(srt.values_desc[plan.k - 1])
    q_minus = float(srt.values_desc[values.size - plan.k])
    return q_plus, q_minus
