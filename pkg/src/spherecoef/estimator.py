"""Plug-in density estimation for random coefficients in binary choice.

The model: y = 1{x'beta >= 0} with x and beta independent, both living on
the unit sphere after scale normalization.  The choice probability as a
function of x is the hemisphere average of the coefficient density, so the
density is recovered by inverting that operator degree by degree.  The
closed-form estimator reweights each observation by the sign (2y-1) over a
trimmed covariate-density estimate and sums an explicitly filtered odd
kernel in x_i'b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gegenbauer, hemisphere
from .kernels import KernelSpec, HarmonicMixture, eigenspace_dim, _FAMILIES
from .sphere import build_quadrature, check_on_sphere, sample_uniform, surface_area

__all__ = [
    "ChoiceSample",
    "EstimatorConfig",
    "FxEstimate",
    "DensityEstimate",
    "ChoiceProbabilityEstimate",
    "IdentificationReport",
    "estimate_fx",
    "estimate_fbeta",
    "estimate_choice_probability",
    "standard_error",
    "confidence_interval",
    "marginal_density",
    "identification_diagnostic",
    "rate_truncation",
    "CoefficientDensity",
]


@dataclass
class ChoiceSample:
    """Binary choices plus normalized covariate directions.

    y is an (N,) array with values in {0, 1}; x is (N, d) with unit rows
    whose first coordinate is nonnegative (the scale-fixing convention:
    flipping the sign of a row and its choice leaves the model invariant,
    so all rows are folded onto one half of the sphere with the intercept
    coordinate first).
    """

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.ndim != 1:
            raise ValueError(f"y must be one-dimensional, got shape {y.shape}")
        vals = np.unique(y)
        if not np.all(np.isin(vals, (0, 1))):
            raise ValueError("y must contain only 0 and 1")
        self.y = y.astype(np.int64)
        x = check_on_sphere(self.x)
        if x.shape[0] != y.shape[0]:
            raise ValueError(
                f"y has {y.shape[0]} rows but x has {x.shape[0]}"
            )
        if np.any(x[:, 0] < -1e-12):
            raise ValueError("x rows must have nonnegative first coordinate")
        self.x = x

    @property
    def n_obs(self):
        return self.y.shape[0]

    @property
    def dimension(self):
        return self.x.shape[1]


@dataclass
class EstimatorConfig:
    """Tuning constants for the plug-in estimator.

    truncation is the number of odd degrees kept in the coefficient-density
    expansion (the spectral filter runs to degree 2*truncation).
    trimming_exponent r sets the covariate-density floor (log N)^(-r).
    fx_truncation is the band limit of the covariate-density kernel.
    family, s, l parametrize the filter profile (see kernels.KernelSpec).
    """

    truncation: int = 3
    trimming_exponent: float = 2.0
    family: str = "riesz"
    s: float = 2.0
    l: int = 3
    fx_truncation: int = 10

    def __post_init__(self):
        if int(self.truncation) != self.truncation or self.truncation < 1:
            raise ValueError(f"truncation must be an integer >= 1, got {self.truncation}")
        self.truncation = int(self.truncation)
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if not self.trimming_exponent > 0:
            raise ValueError(
                f"trimming_exponent must be positive, got {self.trimming_exponent}"
            )
        if int(self.fx_truncation) != self.fx_truncation or self.fx_truncation < 0:
            raise ValueError(
                f"fx_truncation must be an integer >= 0, got {self.fx_truncation}"
            )
        self.fx_truncation = int(self.fx_truncation)

    def main_kernel(self, d):
        """Filter spec for the coefficient density at dimension d."""
        return KernelSpec(self.family, 2 * self.truncation, d, s=self.s, l=self.l)

    def fx_kernel(self, d):
        """Filter spec for the covariate density at dimension d."""
        return KernelSpec(self.family, self.fx_truncation, d, s=self.s, l=self.l)

    def trimming_floor(self, n_obs):
        """Lower cutoff (log N)^(-r) applied to the covariate density."""
        if n_obs < 3:
            raise ValueError(f"need at least 3 observations, got {n_obs}")
        return math.log(n_obs) ** (-self.trimming_exponent)


@dataclass
class FxEstimate:
    """Kernel estimate of the covariate density on the sphere.

    Wraps the raw band-limited average clipped at zero (the unclipped
    average can dip negative in the filter's ripple).
    """

    mixture: HarmonicMixture
    kernel: KernelSpec

    def evaluate(self, points):
        raw = self.mixture.evaluate(points)
        return np.maximum(raw, 0.0) if isinstance(raw, np.ndarray) else max(raw, 0.0)

    __call__ = evaluate


def estimate_fx(sample, kernel):
    """Fit the covariate density by an equal-weight filtered kernel average."""
    if kernel.dimension != sample.dimension:
        raise ValueError(
            f"kernel is for dimension {kernel.dimension}, sample has {sample.dimension}"
        )
    n = sample.n_obs
    chi = kernel.chi()
    mix = HarmonicMixture(
        dimension=sample.dimension,
        anchors=sample.x,
        weights=np.full(n, 1.0 / n),
        degree_coeffs={m: float(chi[m]) for m in range(chi.size) if chi[m] != 0.0},
    )
    return FxEstimate(mixture=mix, kernel=kernel)


def _signed_trimmed_weights(sample, config, fx):
    """Per-observation weights (2y-1)/max(fx(x_i), floor) and the pieces."""
    if callable(fx):
        fx_vals = np.asarray(fx(sample.x), dtype=float)
    elif fx is None:
        fx_vals = estimate_fx(sample, config.fx_kernel(sample.dimension))(sample.x)
    else:
        fx_vals = np.asarray(fx, dtype=float)
    if fx_vals.shape != (sample.n_obs,):
        raise ValueError(
            f"covariate-density values have shape {fx_vals.shape}, expected ({sample.n_obs},)"
        )
    floor = config.trimming_floor(sample.n_obs)
    signs = 2.0 * sample.y - 1.0
    return signs / np.maximum(fx_vals, floor), fx_vals, floor


@dataclass
class DensityEstimate:
    """Closed-form estimate of the coefficient density on S^{d-1}.

    The odd part is (1/N) sum_i w_i sum_p gamma_p C_{2p+1}^nu(x_i'b); the
    density itself is twice its positive part.  gamma holds the filtered
    per-degree constants, already including the surface-area normalizer.
    """

    anchors: np.ndarray
    weights: np.ndarray
    gamma: np.ndarray
    kernel: KernelSpec
    config: EstimatorConfig
    trimming_floor: float
    fx_values: np.ndarray

    @property
    def dimension(self):
        return self.anchors.shape[1]

    @property
    def n_obs(self):
        return self.anchors.shape[0]

    def _coeff_array(self):
        coeffs = np.zeros(2 * self.config.truncation)
        coeffs[1::2] = self.gamma
        return coeffs

    def odd_values(self, points):
        """The odd-part estimate at the given point(s)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = check_on_sphere(pts, d=self.dimension)
        coeffs = self._coeff_array()
        nu = self.kernel.nu
        n = self.n_obs
        out = np.empty(pts.shape[0])
        step = max(1, 4_000_000 // max(n, 1))
        for lo in range(0, pts.shape[0], step):
            block = pts[lo : lo + step]
            cosines = np.clip(block @ self.anchors.T, -1.0, 1.0)
            out[lo : lo + step] = gegenbauer.series_eval(nu, coeffs, cosines) @ self.weights / n
        return float(out[0]) if single else out

    def density(self, points):
        """Twice the positive part of the odd estimate."""
        ov = self.odd_values(points)
        if isinstance(ov, np.ndarray):
            return np.where(ov > 0.0, 2.0 * ov, 0.0)
        return 2.0 * ov if ov > 0.0 else 0.0

    __call__ = density

    def z_values(self, point):
        """Per-observation summands Z_i at a single point (density = 2 * mean)."""
        b = np.asarray(point, dtype=float)
        if b.ndim != 1:
            raise ValueError("z_values takes a single point")
        b = check_on_sphere(b, d=self.dimension)[0]
        cosines = np.clip(self.anchors @ b, -1.0, 1.0)
        return gegenbauer.series_eval(self.kernel.nu, self._coeff_array(), cosines) * self.weights

    def as_mixture(self):
        """The same odd part as a HarmonicMixture (coeffs = filter / eigenvalue)."""
        d = self.dimension
        chi = self.kernel.chi()
        coeffs = {
            m: float(chi[m]) / hemisphere.eigenvalue(m, d)
            for m in range(1, chi.size, 2)
        }
        return HarmonicMixture(
            dimension=d,
            anchors=self.anchors,
            weights=self.weights / self.n_obs,
            degree_coeffs=coeffs,
        )


def estimate_fbeta(sample, config=None, fx=None):
    """Fit the coefficient density from a choice sample.

    fx optionally overrides the plug-in covariate-density step: a callable
    evaluated at the sample covariates, or an (N,) array of precomputed
    values.  With fx=None the covariate density is itself estimated from
    the sample with config.fx_kernel.
    """
    config = EstimatorConfig() if config is None else config
    if sample.n_obs < 3:
        raise ValueError(f"need at least 3 observations, got {sample.n_obs}")
    d = sample.dimension
    kernel = config.main_kernel(d)
    weights, fx_vals, floor = _signed_trimmed_weights(sample, config, fx)
    chi = kernel.chi()
    area = surface_area(d)
    nu = kernel.nu
    gamma = np.empty(config.truncation)
    for p in range(config.truncation):
        m = 2 * p + 1
        gamma[p] = (
            chi[m]
            * eigenspace_dim(m, d)
            / (hemisphere.eigenvalue(m, d) * gegenbauer.eval_at_one(nu, m) * area)
        )
    return DensityEstimate(
        anchors=sample.x,
        weights=weights,
        gamma=gamma,
        kernel=kernel,
        config=config,
        trimming_floor=floor,
        fx_values=fx_vals,
    )


@dataclass
class ChoiceProbabilityEstimate:
    """Estimated choice probability x -> 1/2 + (filtered odd part).

    The odd part uses the same signed trimmed weights as the density
    estimator but without the eigenvalue division, so inverting the
    hemisphere operator on it reproduces the density estimate's odd part
    exactly.
    """

    odd_part: HarmonicMixture

    @property
    def dimension(self):
        return self.odd_part.dimension

    def evaluate(self, points):
        return 0.5 + self.odd_part.evaluate(points)

    __call__ = evaluate

    def coefficient_odd_part(self):
        """Spectral inverse of the odd part under the hemisphere operator."""
        return hemisphere.invert(self.odd_part)


def estimate_choice_probability(sample, config=None, fx=None):
    """Fit the choice-probability function from a choice sample."""
    config = EstimatorConfig() if config is None else config
    if sample.n_obs < 3:
        raise ValueError(f"need at least 3 observations, got {sample.n_obs}")
    d = sample.dimension
    kernel = config.main_kernel(d)
    weights, _, _ = _signed_trimmed_weights(sample, config, fx)
    chi = kernel.chi()
    mix = HarmonicMixture(
        dimension=d,
        anchors=sample.x,
        weights=weights / sample.n_obs,
        degree_coeffs={m: float(chi[m]) for m in range(1, chi.size, 2)},
    )
    return ChoiceProbabilityEstimate(odd_part=mix)


def standard_error(estimate, points):
    """Pointwise standard error scale of the density estimate.

    On the positive region the estimate at b is 2/N * sum_i Z_i(b), so the
    returned value is 2 * sd(Z_i(b)) with ddof=1.  Divide by sqrt(N) for
    the half-width scale of a normal confidence interval (see
    confidence_interval, which does that and applies the quantile).
    """
    if estimate.n_obs < 2:
        raise ValueError("standard error needs at least 2 observations")
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = check_on_sphere(pts, d=estimate.dimension)
    out = np.empty(pts.shape[0])
    for i, b in enumerate(pts):
        out[i] = 2.0 * np.std(estimate.z_values(b), ddof=1)
    return float(out[0]) if single else out


def confidence_interval(estimate, points, level=0.95):
    """Pointwise normal confidence interval for the density.

    Returns (lower, upper) arrays: estimate +- z * se / sqrt(N) with z the
    two-sided normal quantile for the given level.
    """
    from scipy.stats import norm

    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    z = norm.ppf(0.5 + level / 2.0)
    center = estimate.density(points)
    half = z * standard_error(estimate, points) / math.sqrt(estimate.n_obs)
    return center - half, center + half


def marginal_density(density, keep_dims, values, n_draws=512, seed=None, dimension=None):
    """Marginal of a sphere density over a coordinate subset.

    Integrates out the complementary block of coordinates over the sphere
    of radius sqrt(1 - |values|^2) by Monte Carlo: the marginal at the
    point values (for the kept coordinates) is |S^{d-1}| times the average
    of the joint density over points whose kept block equals values and
    whose complementary block is rho * u with u uniform on the unit sphere
    of the complementary dimension.  When only one coordinate remains to
    integrate, u is a random sign.
    """
    if dimension is None:
        dimension = getattr(density, "dimension", None)
    if dimension is None:
        raise ValueError("pass dimension= when density is a bare callable")
    d = int(dimension)
    keep = np.asarray(keep_dims, dtype=int)
    if keep.ndim != 1 or keep.size == 0 or keep.size >= d:
        raise ValueError("keep_dims must select between 1 and d-1 coordinates")
    if np.unique(keep).size != keep.size or keep.min() < 0 or keep.max() >= d:
        raise ValueError(f"keep_dims must be distinct coordinates in [0, {d}), got {keep_dims}")
    vals = np.atleast_1d(np.asarray(values, dtype=float))
    if vals.shape != (keep.size,):
        raise ValueError(f"values has shape {vals.shape}, expected ({keep.size},)")
    sq = float(vals @ vals)
    if sq >= 1.0:
        raise ValueError("kept coordinates must have norm strictly below 1")
    rho = math.sqrt(1.0 - sq)
    rest = np.setdiff1d(np.arange(d), keep)
    if rest.size == 1:
        rng = np.random.default_rng(seed)
        u = rng.choice((-1.0, 1.0), size=(n_draws, 1))
    else:
        u = sample_uniform(rest.size, n_draws, seed=seed)
    pts = np.empty((n_draws, d))
    pts[:, keep] = vals
    pts[:, rest] = rho * u
    f = density.density if isinstance(density, DensityEstimate) else density
    return surface_area(d) * float(np.mean(f(pts)))


@dataclass
class IdentificationReport:
    """Diagnostic for the one-hemisphere support assumption.

    axis maximizes the hemisphere mass of the estimated odd part over the
    probe nodes; mass_plus and mass_minus are the odd-part masses of the
    two closed hemispheres around it under the normalized surface measure
    (they are exact negatives of each other).  For a density supported in
    the axis hemisphere the plus mass approaches +1/(2|S^{d-1}|).
    violation_score is twice the surface measure of the probe region where
    the odd part is clearly positive while the hemisphere mass centered at
    the same direction is negative, a sign incoherence that a
    one-hemisphere density cannot produce.  The positivity cutoff is
    relative to the odd part's peak; the default 0.3 clears the ripple the
    inverted spectral filter leaves at realistic sample sizes, keeping the
    score near zero on well-specified data while antipodally symmetric
    coefficient distributions (whose odd part is pure noise) score far
    above 0.05 * |S^{d-1}|.
    """

    axis: np.ndarray
    mass_plus: float
    mass_minus: float
    violation_score: float
    threshold: float


def identification_diagnostic(estimate, resolution=32, quad=None, rel_threshold=0.3):
    """Check the estimated density for one-hemisphere support."""
    if isinstance(estimate, DensityEstimate):
        odd = estimate.as_mixture()
    elif isinstance(estimate, HarmonicMixture):
        odd = estimate
    else:
        raise TypeError("expected a DensityEstimate or an odd HarmonicMixture")
    if not odd.is_odd():
        raise ValueError("diagnostic needs an odd expansion")
    d = odd.dimension
    if quad is None:
        quad = build_quadrature(d, resolution, seed=0)
    area = surface_area(d)
    averaged = hemisphere.transform(odd)
    hemi_vals = averaged.evaluate(quad.points)
    masses = hemi_vals / area
    i_best = int(np.argmax(masses))
    axis = quad.points[i_best].copy()
    mass_plus = float(masses[i_best])
    mass_minus = float(averaged.evaluate(-axis) / area)
    odd_vals = odd.evaluate(quad.points)
    peak = float(np.max(odd_vals, initial=0.0))
    threshold = max(rel_threshold * peak, 1e-12)
    incoherent = (odd_vals > threshold) & (hemi_vals < 0.0)
    score = 2.0 * float(np.sum(quad.weights[incoherent]))
    return IdentificationReport(
        axis=axis,
        mass_plus=mass_plus,
        mass_minus=mass_minus,
        violation_score=score,
        threshold=threshold,
    )


def rate_truncation(n_obs, dimension, smoothness=2.0, trimming_exponent=2.0, moment_order=2.0, constant=1.0):
    """Band-limit choice from the convergence-rate tradeoff.

    T grows like (N / (log N)^e)^(1 / (2s + 2d - 1)) with e = 2r plus a
    moment correction 1 - 2/q for q >= 2; the constant is a free scale.
    Returns an integer at least 1.
    """
    if n_obs < 3:
        raise ValueError(f"need at least 3 observations, got {n_obs}")
    if dimension < 2:
        raise ValueError(f"dimension must be >= 2, got {dimension}")
    if smoothness <= 0 or constant <= 0:
        raise ValueError("smoothness and constant must be positive")
    exponent = 2.0 * trimming_exponent
    if moment_order >= 2.0:
        exponent += 1.0 - 2.0 / moment_order
    base = n_obs / math.log(n_obs) ** exponent
    t = constant * base ** (1.0 / (2.0 * smoothness + 2.0 * dimension - 1.0))
    return max(1, int(round(t)))


class CoefficientDensity:
    """Estimator-style front end: fit on (X, y), then query densities.

    Parameters mirror EstimatorConfig; truncation=None picks the band
    limit from the sample size through rate_truncation.  X rows are
    renormalized to unit length (they must already be within 1e-6 of it)
    and must have nonnegative first coordinate.
    """

    def __init__(
        self,
        truncation=3,
        trimming_exponent=2.0,
        family="riesz",
        s=2.0,
        l=3,
        fx_truncation=10,
        smoothness=2.0,
        rate_constant=1.0,
    ):
        self.truncation = truncation
        self.trimming_exponent = trimming_exponent
        self.family = family
        self.s = s
        self.l = l
        self.fx_truncation = fx_truncation
        self.smoothness = smoothness
        self.rate_constant = rate_constant

    _param_names = (
        "truncation",
        "trimming_exponent",
        "family",
        "s",
        "l",
        "fx_truncation",
        "smoothness",
        "rate_constant",
    )

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params):
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    def _config(self, n_obs):
        t = self.truncation
        if t is None:
            t = rate_truncation(
                n_obs,
                self._dimension,
                smoothness=self.smoothness,
                trimming_exponent=self.trimming_exponent,
                constant=self.rate_constant,
            )
        return EstimatorConfig(
            truncation=t,
            trimming_exponent=self.trimming_exponent,
            family=self.family,
            s=self.s,
            l=self.l,
            fx_truncation=self.fx_truncation,
        )

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        norms = np.linalg.norm(X, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("X rows must be unit vectors (within 1e-6)")
        sample = ChoiceSample(y=np.asarray(y), x=X / norms[:, None])
        self._dimension = sample.dimension
        self.config_ = self._config(sample.n_obs)
        self.sample_ = sample
        self.fx_ = estimate_fx(sample, self.config_.fx_kernel(sample.dimension))
        self.estimate_ = estimate_fbeta(sample, self.config_, fx=self.fx_(sample.x))
        self.choice_probability_ = estimate_choice_probability(
            sample, self.config_, fx=self.estimate_.fx_values
        )
        self.n_features_in_ = sample.dimension
        return self

    def _check_fitted(self):
        if not hasattr(self, "estimate_"):
            raise RuntimeError("call fit before querying the estimator")

    def density(self, B):
        self._check_fitted()
        return self.estimate_.density(B)

    def odd_density(self, B):
        self._check_fitted()
        return self.estimate_.odd_values(B)

    def standard_error(self, B):
        self._check_fitted()
        return standard_error(self.estimate_, B)

    def confidence_interval(self, B, level=0.95):
        self._check_fitted()
        return confidence_interval(self.estimate_, B, level=level)

    def marginal(self, keep_dims, values, n_draws=512, seed=None):
        self._check_fitted()
        return marginal_density(self.estimate_, keep_dims, values, n_draws=n_draws, seed=seed)

    def diagnostic(self, resolution=32):
        self._check_fitted()
        return identification_diagnostic(self.estimate_, resolution=resolution)

    def predict_proba(self, X):
        """Estimated P(y=1 | x) for new covariate directions, clipped to [0, 1]."""
        self._check_fitted()
        p = np.clip(self.choice_probability_.evaluate(X), 0.0, 1.0)
        return np.column_stack([1.0 - p, p]) if isinstance(p, np.ndarray) else np.array([1.0 - p, p])

    def predict(self, X):
        self._check_fitted()
        p = self.choice_probability_.evaluate(X)
        return (np.asarray(p) >= 0.5).astype(np.int64)
