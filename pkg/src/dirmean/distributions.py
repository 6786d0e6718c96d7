"""Synthetic heavy-tailed test distributions with exactly known ground truth.

Every family is built as ``X = mu + T @ W`` where ``W`` is spherically
symmetric with identity covariance, so the covariance factor ``T`` gives the
directional standard deviation sigma(u) = ||T^t u|| in closed form.  The
point-contamination family is the one exception: there the mixture
covariance is recomputed exactly.

Families
--------
gaussian
    ``W`` standard normal.  L4/L2 moment ratio kappa = 3**(1/4).
elliptical-student (dof nu > 2)
    ``W = G * sqrt((nu-2)/S)`` with ``S ~ chi2(nu)``; the radial rescaling
    makes Cov(W) the identity and the one-dimensional marginals exactly
    ``sqrt((nu-2)/nu) * t_nu``.
elliptical-lognormal (shape s > 0)
    ``W = c * R * U`` with ``R`` lognormal, ``U`` uniform on the sphere and
    ``c`` chosen so that Cov(W) = I.  Heavy-tailed but with all moments.
gaussian-with-point-contamination (fraction, offset)
    A gaussian component plus a point mass at a fixed offset.  The gaussian
    component is recentered by ``-fraction * offset`` so the mixture mean
    equals the requested mean exactly.  Contaminated rows are assigned by
    exact stratified counts (floor(fraction * N) rows, positions shuffled),
    keeping dataset composition deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .rng import stream

FAMILIES = (
    "gaussian",
    "elliptical-student",
    "elliptical-lognormal",
    "gaussian-with-point-contamination",
)

UNIT_NORM_TOL = 1e-12


class NoAnalyticOracleError(ValueError):
    """Raised when a closed-form marginal law is requested but unavailable."""


@dataclass(frozen=True)
class SpectrumSpec:
    """Covariance spectrum: eigenvalues in nonincreasing order plus rotation.

    ``rotation_seed is None`` means the eigenbasis is the canonical basis;
    an integer seed selects a Haar-random orthogonal rotation.
    """

    eigenvalues: tuple[float, ...]
    rotation_seed: int | None = None

    def __post_init__(self):
        lam = tuple(float(v) for v in self.eigenvalues)
        if len(lam) < 1:
            raise ValueError("spectrum needs at least one eigenvalue")
        if any(v < 0 for v in lam):
            raise ValueError("eigenvalues must be nonnegative")
        if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
            raise ValueError("eigenvalues must be nonincreasing")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class DistributionSpec:
    """Parameters of one synthetic family, JSON round-trippable."""

    family: str
    spectrum: SpectrumSpec
    mean: tuple[float, ...]
    dof: float | None = None
    shape: float | None = None
    contamination_fraction: float | None = None
    contamination_offset: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        mean = tuple(float(v) for v in np.atleast_1d(np.asarray(self.mean, dtype=float)))
        if len(mean) != self.spectrum.dim:
            raise ValueError("mean length must match spectrum dimension")
        object.__setattr__(self, "mean", mean)
        if self.family == "elliptical-student":
            if self.dof is None or self.dof <= 2:
                raise ValueError("student family requires dof > 2 (finite covariance)")
        if self.family == "elliptical-lognormal":
            if self.shape is None or self.shape <= 0:
                raise ValueError("lognormal family requires shape > 0")
        if self.family == "gaussian-with-point-contamination":
            frac = self.contamination_fraction
            if frac is None or not (0.0 <= frac < 0.5):
                raise ValueError("contamination fraction must lie in [0, 1/2)")
            if self.contamination_offset is None:
                raise ValueError("contamination offset required")
            off = tuple(float(v) for v in np.atleast_1d(np.asarray(self.contamination_offset, dtype=float)))
            if len(off) != self.spectrum.dim:
                raise ValueError("offset length must match dimension")
            object.__setattr__(self, "contamination_offset", off)

    @property
    def dim(self) -> int:
        return self.spectrum.dim

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "eigenvalues": list(self.spectrum.eigenvalues),
            "rotation_seed": self.spectrum.rotation_seed,
            "mean": list(self.mean),
            "dof": self.dof,
            "shape": self.shape,
            "contamination": (
                None
                if self.contamination_fraction is None
                else {
                    "fraction": self.contamination_fraction,
                    "offset": list(self.contamination_offset),
                }
            ),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DistributionSpec":
        cont = doc.get("contamination")
        return cls(
            family=doc["family"],
            spectrum=SpectrumSpec(
                eigenvalues=tuple(doc["eigenvalues"]),
                rotation_seed=doc.get("rotation_seed"),
            ),
            mean=tuple(doc["mean"]),
            dof=doc.get("dof"),
            shape=doc.get("shape"),
            contamination_fraction=None if cont is None else cont["fraction"],
            contamination_offset=None if cont is None else tuple(cont["offset"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DistributionSpec":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class GroundTruth:
    """Exact distributional facts backing a :class:`DistributionSpec`.

    ``factor_T`` satisfies Sigma = T @ T^t, so sigma(u) = ||T^t u||.
    ``kappa`` is the Lq-L2 norm-equivalence constant of the one-dimensional
    marginals (the supremum over a probe direction set for the contaminated
    family, where it is direction dependent) and ``q_moment`` the moment
    order it refers to.
    """

    spec: DistributionSpec
    mu: np.ndarray
    factor_T: np.ndarray
    spectrum: SpectrumSpec
    kappa: float
    q_moment: float
    # contaminated-family internals (component center / point location)
    _component_center: np.ndarray | None = field(default=None, repr=False)
    _point_value: np.ndarray | None = field(default=None, repr=False)
    _component_factor: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def covariance(self) -> np.ndarray:
        return self.factor_T @ self.factor_T.T


@dataclass
class Dataset:
    """Observation matrix (one row per draw) plus sampling provenance."""

    rows: np.ndarray
    seed: int | None = None
    spec: DistributionSpec | None = None

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def as_rows(data) -> np.ndarray:
    """Accept a Dataset or a bare (N, d) array and return the row matrix."""
    if isinstance(data, Dataset):
        return data.rows
    return np.atleast_2d(np.asarray(data, dtype=float))


def _check_unit(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1)
    if abs(np.linalg.norm(u) - 1.0) > UNIT_NORM_TOL:
        raise ValueError("direction must be a unit vector (|norm - 1| <= 1e-12)")
    return u


def _rotation_matrix(d: int, rotation_seed: int | None) -> np.ndarray:
    if rotation_seed is None:
        return np.eye(d)
    rng = stream(rotation_seed, "rotation")
    a = rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    # fix signs so the rotation is a deterministic function of the seed
    q = q * np.sign(np.diag(r))
    return q


def _student_radial_scale(nu: float) -> float:
    # scale making the 1-d marginal sqrt((nu-2)/nu) * t_nu unit variance
    return np.sqrt((nu - 2.0) / nu)


def student_kappa(nu: float, q: float) -> float:
    """Lq/L2 ratio of a t_nu marginal, by numerical quadrature of |t|^q."""
    if not (2.0 < q < nu):
        raise ValueError("need 2 < q < nu for a finite moment ratio")
    dens = stats.t(nu).pdf
    mom, _ = integrate.quad(lambda t: 2.0 * t**q * dens(t), 0.0, np.inf, limit=200)
    l2 = np.sqrt(nu / (nu - 2.0))
    return mom ** (1.0 / q) / l2


def _lognormal_radius_coeff(d: int, shape: float) -> float:
    # c with E[(c R)^2] = d for R ~ lognormal(0, shape)
    return np.sqrt(d) * np.exp(-shape**2)


def _lognormal_kappa(d: int, shape: float, q: float) -> float:
    # <W, u> = (c R) * U1 with R, U1 independent; both moments in closed form
    def radius_moment(p: float) -> float:
        return np.exp(p**2 * shape**2 / 2.0)

    def sphere_moment(p: float) -> float:
        # E|U1|^p for U uniform on S^(d-1); U1^2 ~ Beta(1/2, (d-1)/2)
        if d == 1:
            return 1.0
        return special.beta((p + 1) / 2.0, (d - 1) / 2.0) / special.beta(0.5, (d - 1) / 2.0)

    mq = radius_moment(q) * sphere_moment(q)
    m2 = radius_moment(2.0) * sphere_moment(2.0)
    return mq ** (1.0 / q) / np.sqrt(m2)


def _contaminated_moments(sigma2_g: float, proj_off: float, frac: float) -> tuple[float, float]:
    """Exact 2nd and 4th centered moments of the mixture marginal."""
    c = -frac * proj_off  # gaussian-component center after centering the mixture
    p = (1.0 - frac) * proj_off  # point-mass location after centering
    m2 = (1.0 - frac) * (sigma2_g + c * c) + frac * p * p
    m4_gauss = 3.0 * sigma2_g**2 + 6.0 * sigma2_g * c * c + c**4
    m4 = (1.0 - frac) * m4_gauss + frac * p**4
    return m2, m4


def _contaminated_kappa(spec: DistributionSpec, sigma_base: np.ndarray, n_probes: int = 256) -> float:
    """Supremum of the per-direction L4/L2 ratio over a probe direction set.

    kappa is direction dependent for this family; the recorded value is an
    estimate (max over canonical plus seeded random probe directions).
    """
    d = spec.dim
    off = np.asarray(spec.contamination_offset, dtype=float)
    frac = spec.contamination_fraction
    rng = stream(0, "contaminated-kappa-probes")
    probes = [np.eye(d)[i] for i in range(d)]
    extra = rng.standard_normal((max(n_probes - d, 0), d))
    probes.extend(extra / np.linalg.norm(extra, axis=1, keepdims=True))
    worst = 1.0
    for u in probes:
        s2 = float(u @ sigma_base @ u)
        m2, m4 = _contaminated_moments(s2, float(off @ u), frac)
        if m2 > 0:
            worst = max(worst, m4**0.25 / np.sqrt(m2))
    return worst


def make_ground_truth(spec: DistributionSpec) -> GroundTruth:
    """Realize covariance factor, kappa and moment order for a spec.

    gaussian: q = 4, kappa = 3**(1/4) (closed form).
    student(nu): q = (nu + 2) / 2 with kappa from the quadrature oracle.
    lognormal: q = 4, kappa from the closed-form radial/sphere moments.
    contaminated: q = 4, kappa = probe-set supremum (direction dependent).
    """
    d = spec.dim
    lam = np.asarray(spec.spectrum.eigenvalues, dtype=float)
    rot = _rotation_matrix(d, spec.spectrum.rotation_seed)
    factor = rot * np.sqrt(lam)[np.newaxis, :]  # rot @ diag(sqrt(lam))
    mu = np.asarray(spec.mean, dtype=float)

    if spec.family == "gaussian":
        return GroundTruth(spec, mu, factor, spec.spectrum, kappa=3.0**0.25, q_moment=4.0)

    if spec.family == "elliptical-student":
        nu = float(spec.dof)
        q = (nu + 2.0) / 2.0
        return GroundTruth(spec, mu, factor, spec.spectrum, kappa=student_kappa(nu, q), q_moment=q)

    if spec.family == "elliptical-lognormal":
        q = 4.0
        return GroundTruth(
            spec, mu, factor, spec.spectrum, kappa=_lognormal_kappa(d, float(spec.shape), q), q_moment=q
        )

    # gaussian-with-point-contamination
    frac = float(spec.contamination_fraction)
    off = np.asarray(spec.contamination_offset, dtype=float)
    sigma_base = factor @ factor.T
    center = mu - frac * off
    point = center + off
    sigma_mix = (1.0 - frac) * sigma_base + frac * (1.0 - frac) * np.outer(off, off)
    evals, evecs = np.linalg.eigh(sigma_mix)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    mix_spectrum = SpectrumSpec(tuple(evals), rotation_seed=spec.spectrum.rotation_seed)
    mix_factor = evecs * np.sqrt(evals)[np.newaxis, :]
    kappa = _contaminated_kappa(spec, sigma_base)
    return GroundTruth(
        spec,
        mu,
        mix_factor,
        mix_spectrum,
        kappa=kappa,
        q_moment=4.0,
        _component_center=center,
        _point_value=point,
        _component_factor=factor,
    )


def sample_dataset(gt: GroundTruth, n: int, seed: int) -> Dataset:
    """Draw ``n`` i.i.d. rows; a pure function of ``(gt.spec, n, seed)``."""
    if n < 1:
        raise ValueError("need n >= 1")
    spec = gt.spec
    d = gt.dim
    rng = stream(seed, "sample", spec.family)

    if spec.family == "gaussian-with-point-contamination":
        n_cont = int(np.floor(spec.contamination_fraction * n))
        positions = rng.permutation(n)[:n_cont]
        g = rng.standard_normal((n, d))
        rows = gt._component_center + g @ gt._component_factor.T
        rows[positions] = gt._point_value
        return Dataset(rows, seed=seed, spec=spec)

    if spec.family == "gaussian":
        w = rng.standard_normal((n, d))
    elif spec.family == "elliptical-student":
        nu = float(spec.dof)
        g = rng.standard_normal((n, d))
        s = rng.chisquare(nu, size=n)
        w = g * np.sqrt((nu - 2.0) / s)[:, np.newaxis]
    else:  # elliptical-lognormal
        shape = float(spec.shape)
        g = rng.standard_normal((n, d))
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
        r = np.exp(shape * rng.standard_normal(n))
        w = _lognormal_radius_coeff(d, shape) * r[:, np.newaxis] * u

    if spec.spectrum.rotation_seed is None:
        rows = gt.mu + w * np.sqrt(np.asarray(spec.spectrum.eigenvalues))
    else:
        rows = gt.mu + w @ gt.factor_T.T
    return Dataset(rows, seed=seed, spec=spec)


def directional_sigma(gt: GroundTruth, u) -> float:
    """Standard deviation of the marginal <X, u>: sqrt(u^t Sigma u)."""
    u = _check_unit(u)
    return float(np.linalg.norm(gt.factor_T.T @ u))


def tail_eigensum(gt: GroundTruth, k: int) -> float:
    """Sum of eigenvalues below rank ``k``: sum_{i > k} lambda_i.

    ``k = 0`` gives the trace; ``k = d`` gives 0.
    """
    lam = np.asarray(gt.spectrum.eigenvalues)
    if not (0 <= k <= lam.size):
        raise ValueError(f"k must lie in [0, {lam.size}]")
    return float(lam[int(k):].sum())


def marginal_tail_prob(gt: GroundTruth, u, t: float) -> float:
    """P{<X - mu, u> > t} from the closed-form marginal law.

    Available for the gaussian and student families only; other families
    raise :class:`NoAnalyticOracleError` (callers may fall back to Monte
    Carlo).
    """
    u = _check_unit(u)
    sig = directional_sigma(gt, u)
    fam = gt.spec.family
    if fam == "gaussian":
        if sig == 0.0:
            return 0.0 if t >= 0 else 1.0
        return float(stats.norm.sf(t / sig))
    if fam == "elliptical-student":
        if sig == 0.0:
            return 0.0 if t >= 0 else 1.0
        nu = float(gt.spec.dof)
        return float(stats.t.sf(t / (sig * _student_radial_scale(nu)), nu))
    raise NoAnalyticOracleError(f"no analytic marginal law for family {fam!r}")


def marginal_oracle(gt: GroundTruth, u, scale: float = 1.0):
    """Frozen scipy distribution of ``scale * <X - mu, u>``.

    ``scale`` rescales the law (e.g. sqrt(2) for pairwise differences of
    gaussian data).  Raises :class:`NoAnalyticOracleError` for families
    without a closed-form marginal.
    """
    u = _check_unit(u)
    sig = directional_sigma(gt, u) * scale
    fam = gt.spec.family
    if fam == "gaussian":
        return stats.norm(loc=0.0, scale=sig)
    if fam == "elliptical-student":
        nu = float(gt.spec.dof)
        return stats.t(nu, loc=0.0, scale=sig * _student_radial_scale(nu))
    raise NoAnalyticOracleError(f"no analytic marginal law for family {fam!r}")


def sample_marginal(gt: GroundTruth, u, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` values of the centered marginal <X - mu, u> directly.

    Scalar-only sampling path used by the small-ball diagnostics; avoids
    materializing (n, d) matrices when only a one-dimensional law is needed.
    """
    u = _check_unit(u)
    spec = gt.spec
    sig = directional_sigma(gt, u)
    rng = stream(seed, "marginal", spec.family)
    if spec.family == "gaussian":
        return sig * rng.standard_normal(n)
    if spec.family == "elliptical-student":
        nu = float(spec.dof)
        g = rng.standard_normal(n)
        s = rng.chisquare(nu, size=n)
        return sig * g * np.sqrt((nu - 2.0) / s)
    if spec.family == "elliptical-lognormal":
        d = gt.dim
        shape = float(spec.shape)
        # <W, u> = c R U1; sample U1 as G1/||G||
        g = rng.standard_normal((n, d))
        u1 = g[:, 0] / np.linalg.norm(g, axis=1)
        r = np.exp(shape * rng.standard_normal(n))
        return sig * _lognormal_radius_coeff(d, shape) * r * u1
    # contaminated: mixture of a gaussian and a point mass along u
    frac = float(spec.contamination_fraction)
    off = np.asarray(spec.contamination_offset, dtype=float) @ u
    s_g = float(np.linalg.norm(gt._component_factor.T @ u))
    vals = -frac * off + s_g * rng.standard_normal(n)
    mask = rng.random(n) < frac
    vals[mask] = (1.0 - frac) * off
    return vals


def jitter(ds: Dataset, scale: float, seed: int) -> Dataset:
    """Add i.i.d. uniform(-scale, scale) noise per entry (ties breaker).

    ``scale = 0`` returns the rows unchanged bit for bit.
    """
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    if scale == 0.0:
        return Dataset(ds.rows.copy(), seed=ds.seed, spec=ds.spec)
    rng = stream(seed, "jitter")
    noise = rng.uniform(-scale, scale, size=ds.rows.shape)
    return Dataset(ds.rows + noise, seed=ds.seed, spec=ds.spec)
