"""Independent reference implementations used as test oracles.

Every routine here reaches its value by a different route than the package
code: explicit finite sums instead of recursions, 1-D integrals instead of
closed-form products, and a plain-Python transcription of the density
estimator's defining formula.  Nothing in this module imports from
spherecoef, so an agreement between the two sides is evidence, not an
identity check of shared code.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "sphere_area",
    "rising_factorial",
    "gegenbauer_explicit",
    "gegenbauer_at_one",
    "harmonic_dim",
    "halfspace_eigenvalue_1d",
    "riesz_weight",
    "direct_density_estimate",
    "gaussian_mixture_pdf",
    "pushforward_density",
]


def sphere_area(d):
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def rising_factorial(a, k):
    """Pochhammer symbol a (a+1) ... (a+k-1) as an explicit product."""
    out = 1.0
    for j in range(int(k)):
        out *= a + j
    return out


def gegenbauer_explicit(nu, n, t):
    """Ultraspherical polynomial value by direct summation.

    Uses the closed-form expansion with a hand-rolled Pochhammer product;
    for the nu = 0 family it returns the renormalized Chebyshev limit
    (2/n) cos(n arccos t) (1 at degree 0).  Accurate for n up to ~25.
    """
    t = np.asarray(t, dtype=float)
    n = int(n)
    if n == 0:
        return np.ones_like(t) if t.shape else 1.0
    if nu == 0:
        val = (2.0 / n) * np.cos(n * np.arccos(np.clip(t, -1.0, 1.0)))
        return val if t.shape else float(val)
    val = np.zeros_like(t)
    for k in range(n // 2 + 1):
        coeff = (
            (-1.0) ** k
            * rising_factorial(nu, n - k)
            / (math.factorial(k) * math.factorial(n - 2 * k))
        )
        val = val + coeff * (2.0 * t) ** (n - 2 * k)
    return val if t.shape else float(val)


def gegenbauer_at_one(nu, n):
    """Value of the ultraspherical polynomial at t = 1 (explicit sum)."""
    return float(gegenbauer_explicit(nu, n, np.asarray(1.0)))


def harmonic_dim(n, d):
    """Dimension of degree-n spherical harmonics on S^{d-1}.

    Computed as the difference of homogeneous-polynomial dimensions
    binom(n+d-1, d-1) - binom(n+d-3, d-1), a different formula than the
    package's sum of two binomials.
    """
    n, d = int(n), int(d)
    if n == 0:
        return 1
    first = math.comb(n + d - 1, d - 1)
    second = math.comb(n + d - 3, d - 1) if n + d - 3 >= d - 1 else 0
    return first - second


def halfspace_eigenvalue_1d(n, d, n_nodes=400):
    """Hemisphere-transform eigenvalue by a 1-D polar integral.

    Reduces the integral of the normalized zonal polynomial over a polar
    hemisphere to sphere_area(d-1) * int_0^{pi/2} C(cos h) sin^{d-2} h dh
    and evaluates it with Gauss-Legendre in the angle.  The integrand is
    entire, so a few hundred nodes reach machine precision.
    """
    nu = (d - 2) / 2.0
    x, w = leggauss(int(n_nodes))
    theta = (x + 1.0) * (math.pi / 4.0)
    wt = w * (math.pi / 4.0)
    c = gegenbauer_explicit(nu, n, np.cos(theta)) / gegenbauer_at_one(nu, n)
    lower = sphere_area(d - 1) if d >= 3 else 2.0
    return lower * float(np.sum(wt * c * np.sin(theta) ** (d - 2)))


def riesz_weight(n, cutoff, d, s=2.0, l=3):
    """Smoothed filter weight of the Riesz family, written out directly."""
    zn = n * (n + d - 2)
    zc = cutoff * (cutoff + d - 2)
    return (1.0 - (zn / (zc + 1.0)) ** (s / 2.0)) ** l


def direct_density_estimate(y, x, b, fx_values, truncation, s=2.0, l=3,
                            trimming_exponent=2.0):
    """Plain-loop transcription of the coefficient-density estimator.

    Returns (odd_part, density) at the single sphere point b for a binary
    sample (y, x) and given covariate-density values at the observations.
    Everything - weights, filter, eigenvalues, zonal polynomials - is
    computed inside this function from first principles.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    n_obs, d = x.shape
    nu = (d - 2) / 2.0
    area = sphere_area(d)
    floor = math.log(n_obs) ** (-trimming_exponent)
    cutoff = 2 * truncation

    odd = 0.0
    for i in range(n_obs):
        w_i = (2.0 * y[i] - 1.0) / max(float(fx_values[i]), floor)
        t = float(np.clip(np.dot(x[i], b), -1.0, 1.0))
        acc = 0.0
        for p in range(truncation):
            m = 2 * p + 1
            gamma = (
                riesz_weight(m, cutoff, d, s=s, l=l)
                * harmonic_dim(m, d)
                / (
                    halfspace_eigenvalue_1d(m, d)
                    * gegenbauer_at_one(nu, m)
                    * area
                )
            )
            acc += gamma * gegenbauer_explicit(nu, m, np.asarray(t))
        odd += w_i * acc
    odd /= n_obs
    return odd, (2.0 * odd if odd > 0.0 else 0.0)


def gaussian_mixture_pdf(point, weights, means, covs):
    """Mixture-of-Gaussians density written out with explicit linear algebra."""
    point = np.asarray(point, dtype=float)
    total = 0.0
    for w, mu, cov in zip(weights, means, covs):
        mu = np.asarray(mu, dtype=float)
        cov = np.asarray(cov, dtype=float)
        diff = point - mu
        quad = float(diff @ np.linalg.solve(cov, diff))
        norm = math.sqrt((2.0 * math.pi) ** mu.size * np.linalg.det(cov))
        total += w * math.exp(-0.5 * quad) / norm
    return total


def pushforward_density(coef_pdf, b, fixed_value=1.0):
    """Density on the sphere of the normalized coefficient vector.

    The random vector is (G, v) in R^d with G ~ coef_pdf on R^{d-1} and a
    constant last coordinate v > 0; b is a unit vector.  On {b_d > 0} the
    change of variables G = v * b_tilde / b_d gives

        f(b) = coef_pdf(v * b_tilde / b_d) * v^{d-1} / b_d^d,

    and f vanishes on the closed lower half.  A deliberately different
    algebraic arrangement from the package's (1 + |u|^2)^{d/2} form.
    """
    b = np.asarray(b, dtype=float)
    d = b.size
    pivot = float(b[-1])
    if pivot <= 1e-12:
        return 0.0
    g = fixed_value * b[:-1] / pivot
    return float(coef_pdf(g)) * fixed_value ** (d - 1) / pivot**d
