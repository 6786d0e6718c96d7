"""Empirical checks of the ratio, sandwich and small-ball properties.

These diagnostics compare empirical frequencies against an exact marginal
law supplied by the ground-truth oracle.  They certify samples, not
theorems: each check runs on a finite grid of thresholds or directions and
reports worst margins (negative margins mean the property held with room
to spare).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    GroundTruth,
    NoAnalyticOracleError,
    directional_sigma,
    marginal_oracle,
    sample_marginal,
)
from .rng import derive_seed, stream
from .trimmed import empirical_quantile_hat


@dataclass(frozen=True)
class RatioConditionReport:
    """Outcome of the three ratio conditions on one sample.

    tail_ratio_worst: worst margin of the dyadic relative-error condition
        on upper/lower tail sets (<= 0 means it held everywhere checked).
    interval_excess_worst: sup over intervals of P_N{I} - 1.5 P{I} - 2 Delta.
    balanced_ok: both tail masses at 0 are at least eta = 4 theta + 16 Delta.
    """

    tail_ratio_worst: float
    interval_excess_worst: float
    balanced_ok: bool
    delta: float
    theta: float
    eta: float
    holds: bool

    def to_json_dict(self) -> dict:
        return {
            "tail_ratio_worst": float(self.tail_ratio_worst),
            "interval_excess_worst": float(self.interval_excess_worst),
            "balanced_ok": bool(self.balanced_ok),
            "delta": float(self.delta),
            "theta": float(self.theta),
            "eta": float(self.eta),
            "holds": bool(self.holds),
        }


def interval_excess_sup(sample: np.ndarray, cdf) -> float:
    """Exact sup over all intervals of P_N{I} - 1.5 P{I}.

    For a continuous law the supremum is attained on closed intervals with
    endpoints at sample points (or rays), so it decomposes into a prefix
    sweep: value([s_a, s_b]) = A_b - B_a with A_j = j/N - 1.5 F(s_j) and
    B_a = (a-1)/N - 1.5 F(s_a).
    """
    s = np.sort(np.asarray(sample, dtype=float).reshape(-1))
    n = s.size
    f = np.clip(np.asarray(cdf(s), dtype=float), 0.0, 1.0)
    j = np.arange(1, n + 1)
    a_vals = j / n - 1.5 * f                      # right end at s_j
    b_vals = (j - 1) / n - 1.5 * f                # left end at s_j
    b_ext = np.concatenate([[0.0], b_vals])       # sentinel: left end at -inf
    prefix_min = np.minimum.accumulate(b_ext)     # prefix_min[b] = min over a <= b
    best = np.max(a_vals - prefix_min[1:])        # intervals and left rays
    best = max(best, (1.0 - 1.5) - prefix_min[n])  # right rays and full line
    return float(best)


def _tail_ratio_margins(sorted_sample: np.ndarray, t_grid: np.ndarray, probs: np.ndarray, delta: float, lower: bool) -> float:
    """Worst dyadic ratio margin over one tail side; -inf if nothing applies."""
    n = sorted_sample.size
    applicable = probs >= delta
    if not np.any(applicable):
        return -np.inf
    t = t_grid[applicable]
    p = probs[applicable]
    if lower:
        # counts of samples < -t (strict) and <= -t (weak)
        strict = np.searchsorted(sorted_sample, -t, side="left") / n
        weak = np.searchsorted(sorted_sample, -t, side="right") / n
    else:
        strict = (n - np.searchsorted(sorted_sample, t, side="right")) / n
        weak = (n - np.searchsorted(sorted_sample, t, side="left")) / n
    dev = np.maximum(np.abs(strict / p - 1.0), np.abs(weak / p - 1.0))
    j_max = np.floor(np.log2(p / delta))
    tolerance = 2.0 ** (-j_max / 2.0 - 1.0)
    return float(np.max(dev - tolerance))


def check_ratio_conditions(sample, oracle, delta: float, theta: float) -> RatioConditionReport:
    """Check the three ratio conditions of one sample against its true law.

    oracle is a frozen scipy-style distribution (cdf / sf / ppf) of the
    sample's law.  The dyadic tail condition is evaluated on the grid of
    sample order statistics plus the oracle quantiles at the dyadic levels;
    between grid points both measures are monotone, so worst margins occur
    at (one-sided limits of) grid points, which the strict/weak counts
    cover.  The stated regime is delta, theta < 1/100; larger experimental
    values are accepted but make the balance condition eta = 4 theta +
    16 delta correspondingly harder (impossible above eta = 1/2 for any
    symmetric law).
    """
    if not (0.0 < delta < 0.5 and 0.0 < theta < 0.5):
        raise ValueError("delta and theta must lie in (0, 1/2)")
    sample = np.asarray(sample, dtype=float).reshape(-1)
    if sample.size == 0:
        raise ValueError("empty sample")
    s = np.sort(sample)
    j_span = int(math.ceil(math.log2(1.0 / delta)))
    levels = delta * 2.0 ** np.arange(0, j_span + 1)
    levels = levels[levels < 1.0]

    # upper side: thresholds t >= 0 with P{Z > t}
    upper_t = np.concatenate([[0.0], s[s >= 0], np.asarray(oracle.ppf(1.0 - levels))])
    upper_t = np.unique(upper_t[np.isfinite(upper_t) & (upper_t >= 0)])
    worst = _tail_ratio_margins(s, upper_t, np.asarray(oracle.sf(upper_t)), delta, lower=False)

    # lower side: thresholds t >= 0 with P{Z < -t}
    lower_t = np.concatenate([[0.0], -s[s <= 0], -np.asarray(oracle.ppf(levels))])
    lower_t = np.unique(lower_t[np.isfinite(lower_t) & (lower_t >= 0)])
    worst = max(worst, _tail_ratio_margins(s, lower_t, np.asarray(oracle.cdf(-lower_t)), delta, lower=True))
    if not np.isfinite(worst):
        worst = 0.0

    interval_worst = interval_excess_sup(s, oracle.cdf) - 2.0 * delta
    eta = 4.0 * theta + 16.0 * delta
    balanced = bool(oracle.sf(0.0) >= eta and oracle.cdf(0.0) >= eta)
    return RatioConditionReport(
        tail_ratio_worst=worst,
        interval_excess_worst=interval_worst,
        balanced_ok=balanced,
        delta=delta,
        theta=theta,
        eta=eta,
        holds=bool(worst <= 0.0 and interval_worst <= 0.0 and balanced),
    )


def quantile_sandwich_check(sample, oracle, theta: float, delta: float) -> bool:
    """True when both trim-boundary order statistics sit between the
    true quantiles at the derived levels.

    With theta1 = 2 theta + 8 delta and theta2 = (2 theta - 8 delta) / 3,
    the upper boundary must lie in (Q_{1-theta1}, Q_{1-theta2}) and the
    lower one in (Q_{theta2}, Q_{theta1}).  Requires theta >= 7 delta.
    """
    if theta < 7.0 * delta:
        raise ValueError("need theta >= 7 delta")
    theta1 = 2.0 * theta + 8.0 * delta
    theta2 = (2.0 * theta - 8.0 * delta) / 3.0
    if theta2 <= 0.0 or theta1 >= 1.0:
        raise ValueError(f"infeasible sandwich levels theta1={theta1}, theta2={theta2}")
    q_plus, q_minus = empirical_quantile_hat(np.asarray(sample, dtype=float), theta)
    upper_ok = oracle.ppf(1.0 - theta1) < q_plus < oracle.ppf(1.0 - theta2)
    lower_ok = oracle.ppf(theta2) < q_minus < oracle.ppf(theta1)
    return bool(upper_ok and lower_ok)


@dataclass(frozen=True)
class RatioReport:
    """Per-direction ratio margins on projected blocks."""

    tail_margins: np.ndarray
    interval_margins: np.ndarray
    directions: np.ndarray
    r_used: float
    delta: float
    pass_fraction: float

    def to_json_dict(self) -> dict:
        return {
            "r_used": float(self.r_used),
            "delta": float(self.delta),
            "n_directions": int(self.tail_margins.size),
            "pass_fraction": float(self.pass_fraction),
            "tail_margins": [float(v) for v in self.tail_margins],
            "interval_margins": [float(v) for v in self.interval_margins],
        }

    @property
    def csv_columns(self) -> list[str]:
        return ["dir_index", "tail_margin", "interval_margin", "passed"]

    def csv_rows(self):
        for i in range(self.tail_margins.size):
            passed = self.tail_margins[i] <= 0.0 and self.interval_margins[i] <= 0.0
            yield [i, float(self.tail_margins[i]), float(self.interval_margins[i]), int(passed)]


def check_uniform_ratios(
    z_blocks: np.ndarray,
    gt: GroundTruth,
    delta_param: float,
    r: float,
    n_dirs: int,
    seed: int,
    sigma_scale: float = math.sqrt(2.0),
) -> RatioReport:
    """Ratio conditions on block projections over sampled directions.

    ``z_blocks`` are block averages of pairwise differences, whose
    projections have the law sigma_scale * sigma(u) times the standardized
    marginal.  A closed-form law for blocked differences exists only for
    the gaussian family; other families raise NoAnalyticOracleError.
    Directions are sampled uniformly subject to sigma_scale * sigma(u) >= r.
    """
    if gt.spec.family != "gaussian":
        raise NoAnalyticOracleError(
            "uniform ratio check needs a closed-form law for blocked "
            f"difference projections; family {gt.spec.family!r} has none"
        )
    z = np.atleast_2d(np.asarray(z_blocks, dtype=float))
    d = z.shape[1]
    rng = stream(seed, "ratio-directions")
    dirs: list[np.ndarray] = []
    attempts = 0
    while len(dirs) < n_dirs:
        attempts += 1
        if attempts > max(1000, 100 * n_dirs):
            raise ValueError(f"could not sample {n_dirs} directions with sigma(u) >= {r}")
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        if sigma_scale * directional_sigma(gt, u) >= r:
            dirs.append(u)

    tails = np.empty(n_dirs)
    intervals = np.empty(n_dirs)
    for i, u in enumerate(dirs):
        oracle = marginal_oracle(gt, u, scale=sigma_scale)
        rep = check_ratio_conditions(z @ u, oracle, delta_param, theta=min(7 * delta_param, 0.49))
        tails[i] = rep.tail_ratio_worst
        intervals[i] = rep.interval_excess_worst
    passed = np.logical_and(tails <= 0.0, intervals <= 0.0)
    return RatioReport(
        tail_margins=tails,
        interval_margins=intervals,
        directions=np.array(dirs) if dirs else np.empty((0, d)),
        r_used=r,
        delta=delta_param,
        pass_fraction=float(passed.mean()) if n_dirs > 0 else 1.0,
    )


@dataclass(frozen=True)
class SmallBallReport:
    """Monte Carlo estimates of the block-average regularity facts."""

    m: int
    gamma: float
    trials: int
    sign_prob_pos: float
    sign_prob_neg: float
    alpha: float
    xi: float
    truncated_ratio: float
    lq_l2_ratio: float
    lq_l2_bound: float
    small_ball_L: float
    sigma: float

    def to_json_dict(self) -> dict:
        return {
            "m": int(self.m),
            "gamma": float(self.gamma),
            "trials": int(self.trials),
            "sign_prob_pos": float(self.sign_prob_pos),
            "sign_prob_neg": float(self.sign_prob_neg),
            "alpha": float(self.alpha),
            "xi": float(self.xi),
            "truncated_ratio": float(self.truncated_ratio),
            "lq_l2_ratio": float(self.lq_l2_ratio),
            "lq_l2_bound": float(self.lq_l2_bound),
            "small_ball_L": float(self.small_ball_L),
            "sigma": float(self.sigma),
        }


def small_ball_alpha(xi: float, kappa: float, q: float) -> float:
    """Quantile level alpha = (xi / kappa^2)^(q / (q - 2))."""
    return (xi / kappa**2) ** (q / (q - 2.0))


def small_ball_check(
    gt: GroundTruth,
    m: int,
    gamma: float,
    trials: int,
    seed: int,
    direction=None,
    xi: float = 0.02,
    eps_grid=(0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0),
    n_centers: int = 81,
) -> SmallBallReport:
    """Monte Carlo audit of the block-average facts along one direction.

    Estimates, for Z_m = (1/sqrt(m)) * sum of m centered marginals:
    the sign-balance probabilities; the truncated second-moment ratio at
    the level alpha = (xi/kappa^2)^(q/(q-2)); the Lq/L2 norm ratio of Z_m
    against the bound sqrt(4(q-1)) kappa; and the smallest constant L for
    which P{|Z_m - x| <= eps sigma} <= max(2 L eps, gamma) holds on the
    center/epsilon grid.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if trials < 100:
        raise ValueError("too few trials for stable estimates")
    d = gt.dim
    u = np.eye(d)[0] if direction is None else np.asarray(direction, dtype=float)
    sigma = directional_sigma(gt, u)
    if sigma <= 0:
        raise ValueError("direction with zero variance")
    q = gt.q_moment

    acc = np.zeros(trials)
    for j in range(m):
        acc += sample_marginal(gt, u, trials, derive_seed(seed, "block-term", j))
    z = acc / math.sqrt(m)

    ybar = sample_marginal(gt, u, trials, derive_seed(seed, "raw"))
    alpha = small_ball_alpha(xi, gt.kappa, q)
    try:
        # symmetric analytic families: P(|Y| > T) = 2 sf(T)
        t_cut = float(marginal_oracle(gt, u).ppf(1.0 - alpha / 2.0))
    except NoAnalyticOracleError:
        t_cut = float(np.quantile(np.abs(ybar), 1.0 - alpha))
    truncated_ratio = float(np.mean(ybar**2 * (np.abs(ybar) >= t_cut)) / sigma**2)

    lq = float(np.mean(np.abs(z) ** q) ** (1.0 / q))
    l2 = float(np.sqrt(np.mean(z**2)))
    lq_l2_ratio = lq / l2 if l2 > 0 else 0.0
    lq_l2_bound = math.sqrt(4.0 * (q - 1.0)) * gt.kappa

    z_sorted = np.sort(z)
    centers = np.linspace(-4.0, 4.0, n_centers) * max(l2, 1e-300)
    small_ball_l = 0.0
    for eps in eps_grid:
        half = eps * sigma
        hi = np.searchsorted(z_sorted, centers + half, side="right")
        lo = np.searchsorted(z_sorted, centers - half, side="left")
        p_sup = float(np.max(hi - lo)) / trials
        if p_sup > gamma:
            small_ball_l = max(small_ball_l, p_sup / (2.0 * eps))

    return SmallBallReport(
        m=m,
        gamma=gamma,
        trials=trials,
        sign_prob_pos=float(np.mean(z >= 0.0)),
        sign_prob_neg=float(np.mean(z <= 0.0)),
        alpha=alpha,
        xi=xi,
        truncated_ratio=truncated_ratio,
        lq_l2_ratio=lq_l2_ratio,
        lq_l2_bound=lq_l2_bound,
        small_ball_L=small_ball_l,
        sigma=sigma,
    )
