"""Sample splitting, pairwise differencing and block averaging.

Block averages carry the 1/sqrt(m) scaling, so they preserve the covariance
of a single observation while regularizing the marginal law.  Rows that do
not fill a complete block are discarded; folding them into a short block
would break the 1/sqrt(m) normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .distributions import as_rows

PLAN_PURPOSES = ("variance", "mean")


class SizingError(ValueError):
    """Sample too small for the requested confidence / trim fraction."""

    def __init__(self, message: str, minimal_n: int):
        super().__init__(f"{message} (minimal usable row count: {minimal_n})")
        self.minimal_n = minimal_n


@dataclass(frozen=True)
class BlockPlan:
    """Block geometry: n blocks of size m, with trim count per side."""

    m: int
    n: int
    used: int
    discarded: int
    theta: float
    trim_per_side: int
    purpose: str

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "used": self.used,
            "discarded": self.discarded,
            "theta": self.theta,
            "trim_per_side": self.trim_per_side,
            "purpose": self.purpose,
        }


def pair_differences(ds) -> np.ndarray:
    """Row i of the output is row_i - row_{N+i} of the 2N input rows.

    The output is mean zero with twice the covariance of one observation.
    """
    rows = as_rows(ds)
    if rows.shape[0] % 2 != 0:
        raise ValueError("pair differencing needs an even row count")
    half = rows.shape[0] // 2
    return rows[:half] - rows[half:]


def block_averages(ds, m: int) -> np.ndarray:
    """(1/sqrt(m)) * sum over consecutive groups of m rows.

    Trailing rows beyond the last full block are dropped.
    """
    rows = as_rows(ds)
    n_rows, d = rows.shape
    if m < 1:
        raise ValueError("block size must be >= 1")
    n = n_rows // m
    if n < 1:
        raise ValueError(f"block size m = {m} exceeds row count {n_rows}")
    if m == 1:
        return rows[: n * m].copy()
    return rows[: n * m].reshape(n, m, d).sum(axis=1) / math.sqrt(m)


def _trim_modulus(theta: float) -> int:
    """Block counts are multiples of b = ceil(1/theta) so theta*n is integral."""
    b = math.ceil(1.0 / theta)
    if abs(theta * b - round(theta * b)) > 1e-9:
        raise ValueError(
            f"theta = {theta} does not make theta * ceil(1/theta) an integer; "
            "use a reciprocal of an integer"
        )
    return b


def plan_blocks(
    n_rows: int,
    delta: float | None,
    theta: float,
    purpose: str,
    config: PipelineConfig | None = None,
) -> BlockPlan:
    """Choose (m, n) for the given purpose.

    variance: m is pinned from below by the small-ball requirement
    (m0 = ceil(c1 / gamma^2)); n is the largest multiple of ceil(1/theta)
    with n * m0 <= N, and m is then enlarged to floor(N / n) so at most
    n - 1 rows are wasted.

    mean: n is the smallest multiple of ceil(1/theta) with
    n >= ceil(c_blocks * log(e/delta)), and m = floor(N / n).
    """
    config = config or PipelineConfig()
    if purpose not in PLAN_PURPOSES:
        raise ValueError(f"purpose must be one of {PLAN_PURPOSES}")
    if not (0.0 < theta < 0.5):
        raise ValueError("theta must lie in (0, 1/2)")
    b = _trim_modulus(theta)

    if purpose == "variance":
        m0 = max(1, math.ceil(config.c1 / config.gamma**2))
        n = (n_rows // m0) // b * b
        if n < b:
            raise SizingError(
                f"variance sizing infeasible: N = {n_rows} rows give fewer than "
                f"{b} blocks of size {m0}",
                minimal_n=m0 * b,
            )
    else:
        if delta is None or not (0.0 < delta < 1.0):
            raise ValueError("mean-purpose planning needs delta in (0, 1)")
        target = math.ceil(config.c_blocks * (1.0 + math.log(1.0 / delta)))
        n = b * math.ceil(target / b)
        if n > n_rows:
            raise SizingError(
                f"mean sizing infeasible: need at least {n} rows for "
                f"delta = {delta}, theta = {theta}",
                minimal_n=n,
            )

    m = n_rows // n
    used = n * m
    return BlockPlan(
        m=m,
        n=n,
        used=used,
        discarded=n_rows - used,
        theta=theta,
        trim_per_side=round(theta * n),
        purpose=purpose,
    )
