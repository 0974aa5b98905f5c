"""Surface-harmonic machinery: eigenspace dimensions, zonal projector
kernels, smoothed projection kernels and anchored harmonic expansions.

Degree-n content on S^{d-1} is handled through the zonal projector kernel

    q_n(x, y) = h(n, d) * C_n^nu(x'y) / (|S^{d-1}| * C_n^nu(1)),

with nu = (d-2)/2, so no explicit orthonormal basis is ever constructed.
A smoothed projection kernel is K_T(x, y) = sum_{n<=T} chi(n, T) q_n(x, y)
for one of the weight families below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gegenbauer
from .sphere import check_on_sphere, surface_area

__all__ = [
    "eigenspace_dim",
    "laplacian_eigenvalue",
    "projector_kernel",
    "KernelSpec",
    "chi_weight",
    "chi_weights",
    "kernel_eval",
    "kernel_odd_eval",
    "HarmonicMixture",
    "project",
]

_FAMILIES = ("riesz", "delayed_means", "dirichlet")


def _check_degree_dim(n, d):
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n}")
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    return int(n), int(d)


def eigenspace_dim(n, d):
    """Dimension of the space of degree-n surface harmonics on S^{d-1}.

    Exact integer; equals 1 at n = 0, 2 for every n >= 1 when d = 2, and
    2n + 1 when d = 3.
    """
    n, d = _check_degree_dim(n, d)
    if n == 0:
        return 1
    return math.comb(n + d - 2, n) + math.comb(n + d - 3, n - 1)


def laplacian_eigenvalue(n, d):
    """Eigenvalue n (n + d - 2) of -Laplace-Beltrami on degree-n harmonics."""
    n, d = _check_degree_dim(n, d)
    return float(n * (n + d - 2))


def projector_kernel(n, d, t):
    """Zonal kernel of the projection onto degree-n harmonics, at cosine t."""
    n, d = _check_degree_dim(n, d)
    nu = (d - 2) / 2.0
    coeffs = np.zeros(n + 1)
    coeffs[n] = eigenspace_dim(n, d) / (surface_area(d) * gegenbauer.eval_at_one(nu, n))
    return gegenbauer.series_eval(nu, coeffs, t)


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class KernelSpec:
    """A smoothed projection kernel: weight family, cutoff degree, dimension.

    family : "riesz", "delayed_means" or "dirichlet"
    degree : truncation degree T >= 0
    dimension : ambient dimension d >= 2
    s, l : Riesz parameters (smoothness exponent and integer power); l must
        exceed (d-2)/2.  Ignored by the other families.
    """

    family: str
    degree: int
    dimension: int
    s: float = 2.0
    l: int = 3

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if int(self.degree) != self.degree or self.degree < 0:
            raise ValueError(f"degree must be a nonnegative integer, got {self.degree}")
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.dimension}")
        if self.family == "riesz":
            if self.s <= 0:
                raise ValueError(f"riesz smoothness s must be > 0, got {self.s}")
            if int(self.l) != self.l or self.l <= (self.dimension - 2) / 2.0:
                raise ValueError(
                    f"riesz power l must be an integer > (d-2)/2 = "
                    f"{(self.dimension - 2) / 2.0}, got {self.l}"
                )
        if self.family == "delayed_means" and not _is_power_of_two(self.degree):
            raise ValueError(
                f"delayed_means requires a power-of-two degree, got {self.degree}"
            )

    @property
    def nu(self):
        return (self.dimension - 2) / 2.0

    def chi(self):
        """All filter weights chi(n, T) for n = 0..degree as an array."""
        return chi_weights(self)


def _bump(u):
    """exp(-1/u) for u > 0, else 0 (smooth cutoff building block)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / u[pos])
    return out


def _delayed_means_profile(x):
    """C^inf nonincreasing profile equal to 1 on [0, 1/2] and 0 on [1, inf)."""
    x = np.asarray(x, dtype=float)
    a = _bump(2.0 - 2.0 * x)
    b = _bump(2.0 * x - 1.0)
    with np.errstate(invalid="ignore"):
        out = np.where(a + b > 0.0, a / np.where(a + b > 0.0, a + b, 1.0), 0.0)
    return out


def chi_weights(spec):
    """All weights chi(n, T) for n = 0..T as an array (single call)."""
    n = np.arange(spec.degree + 1, dtype=float)
    if spec.family == "dirichlet":
        return np.ones_like(n)
    if spec.family == "riesz":
        zeta = n * (n + spec.dimension - 2)
        zeta_top = spec.degree * (spec.degree + spec.dimension - 2)
        ratio = zeta / (zeta_top + 1.0)
        return (1.0 - ratio ** (spec.s / 2.0)) ** spec.l
    return _delayed_means_profile(n / spec.degree) if spec.degree > 0 else np.ones(1)


def chi_weight(spec, n):
    """Weight chi(n, T) for the given KernelSpec; 0 above the cutoff degree."""
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n}")
    if n > spec.degree:
        return 0.0
    return float(chi_weights(spec)[int(n)])


def _series_coeffs(spec, odd_only=False):
    """Per-degree coefficients turning chi weights into a Gegenbauer series."""
    d = spec.dimension
    area = surface_area(d)
    chi = chi_weights(spec)
    coeffs = np.zeros(spec.degree + 1)
    for n in range(spec.degree + 1):
        if odd_only and n % 2 == 0:
            continue
        coeffs[n] = (
            chi[n] * eigenspace_dim(n, d) / (area * gegenbauer.eval_at_one(spec.nu, n))
        )
    return coeffs


def kernel_eval(spec, t):
    """Evaluate the smoothed kernel K_T at cosine(s) t (one recursion sweep)."""
    return gegenbauer.series_eval(spec.nu, _series_coeffs(spec), t)


def kernel_odd_eval(spec, t):
    """Odd part of the smoothed kernel: only odd degrees contribute, and
    kernel_odd_eval(spec, -t) = -kernel_odd_eval(spec, t)."""
    return gegenbauer.series_eval(spec.nu, _series_coeffs(spec, odd_only=True), t)


@dataclass
class HarmonicMixture:
    """Band-limited function anchored at sphere points.

    Represents g(b) = sum_n degree_coeffs[n] * sum_i weights[i] * q_n(x_i, b)
    with x_i the anchor points.  This is the natural closed form for every
    kernel-smoothed statistic in the package: evaluation needs one
    Gegenbauer sweep over the cosine matrix, and spectral operators act by
    rescaling degree_coeffs.
    """

    dimension: int
    anchors: np.ndarray
    weights: np.ndarray
    degree_coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.anchors = check_on_sphere(self.anchors, d=self.dimension, tol=1e-8)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.anchors.shape[0],):
            raise ValueError("weights must have one entry per anchor")
        clean = {}
        for n, c in self.degree_coeffs.items():
            if int(n) != n or n < 0:
                raise ValueError(f"degrees must be nonnegative integers, got {n}")
            clean[int(n)] = float(c)
        self.degree_coeffs = clean

    @property
    def degrees(self):
        return sorted(self.degree_coeffs)

    @property
    def max_degree(self):
        return max(self.degree_coeffs) if self.degree_coeffs else 0

    def is_odd(self):
        """True when only odd degrees carry nonzero coefficients."""
        return all(n % 2 == 1 for n, c in self.degree_coeffs.items() if c != 0.0)

    def with_degree_coeffs(self, new_coeffs):
        return HarmonicMixture(
            dimension=self.dimension,
            anchors=self.anchors,
            weights=self.weights,
            degree_coeffs=dict(new_coeffs),
        )

    def _series_coeffs(self):
        d = self.dimension
        nu = (d - 2) / 2.0
        area = surface_area(d)
        coeffs = np.zeros(self.max_degree + 1)
        for n, c in self.degree_coeffs.items():
            coeffs[n] = c * eigenspace_dim(n, d) / (area * gegenbauer.eval_at_one(nu, n))
        return coeffs

    def evaluate(self, points, chunk_size=None):
        """Evaluate the mixture at one point (d,) or a batch (m, d)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = check_on_sphere(pts, d=self.dimension, tol=1e-8)
        if not self.degree_coeffs:
            out = np.zeros(pts.shape[0])
            return float(out[0]) if single else out
        coeffs = self._series_coeffs()
        nu = (self.dimension - 2) / 2.0
        n_anchor = self.anchors.shape[0]
        if chunk_size is None:
            chunk_size = max(1, int(4_000_000 // max(1, n_anchor)))
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], chunk_size):
            block = pts[start : start + chunk_size]
            cosines = np.clip(block @ self.anchors.T, -1.0, 1.0)
            out[start : start + chunk_size] = (
                gegenbauer.series_eval(nu, coeffs, cosines) @ self.weights
            )
        return float(out[0]) if single else out

    __call__ = evaluate


def project(f, n, quad, x):
    """Projection of f onto degree-n harmonics, evaluated at x by quadrature.

    f may be a callable on sphere points or an array of values on the
    quadrature nodes.  Intended as a slow, direct test oracle.
    """
    values = f(quad.points) if callable(f) else np.asarray(f, dtype=float)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = check_on_sphere(x, d=quad.dimension)
    out = np.empty(xs.shape[0])
    for i, xi in enumerate(xs):
        cosines = np.clip(quad.points @ xi, -1.0, 1.0)
        out[i] = np.sum(quad.weights * values * projector_kernel(n, quad.dimension, cosines))
    return float(out[0]) if single else out
