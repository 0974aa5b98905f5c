"""Gegenbauer (ultraspherical) polynomials C_n^nu on [-1, 1].

The nu = 0 family here is the renormalized limit (2/n) T_n with T_n the
Chebyshev polynomial of the first kind (and C_0^0 = 1, C_1^0(t) = 2t), which
is the convention under which the sphere machinery in this package treats
the circle (d = 2) and the higher-dimensional spheres uniformly.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.special import binom, poch

__all__ = ["eval_all", "eval_at_one", "explicit_eval", "series_eval"]

_EXPLICIT_MAX_DEGREE = 30


def _check_args(nu, max_degree, t):
    if nu < 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    if int(max_degree) != max_degree or max_degree < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {max_degree}")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-9):
        raise ValueError("arguments t must lie in [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def eval_all(nu, max_degree, t):
    """Evaluate C_0^nu, ..., C_max_degree^nu at t by the three-term recursion.

    Parameters
    ----------
    nu : float
        Gegenbauer index, >= 0.  nu = 0 uses C_1^0(t) = 2t and the
        Chebyshev-limit family (2/n) T_n.
    max_degree : int
        Highest degree to return.
    t : scalar or ndarray
        Evaluation points in [-1, 1].

    Returns
    -------
    ndarray with shape (max_degree + 1,) + shape(t); entry [n] is C_n^nu(t).
    """
    t = _check_args(nu, max_degree, t)
    n_deg = int(max_degree)
    out = np.empty((n_deg + 1,) + t.shape, dtype=float)
    out[0] = 1.0
    if n_deg == 0:
        return out
    if nu == 0:
        out[1] = 2.0 * t
        if n_deg >= 2:
            # the degree-2 member of the Chebyshev-limit family; the printed
            # three-term recursion only applies from degree 1 onward here
            out[2] = 2.0 * t * t - 1.0
        for n in range(1, n_deg - 1):
            out[n + 2] = (2.0 * (n + 1.0) * t * out[n + 1] - n * out[n]) / (n + 2.0)
    else:
        out[1] = 2.0 * nu * t
        for n in range(0, n_deg - 1):
            out[n + 2] = (
                2.0 * (nu + n + 1.0) * t * out[n + 1] - (2.0 * nu + n) * out[n]
            ) / (n + 2.0)
    return out


def series_eval(nu, coeffs, t):
    """Evaluate sum_n coeffs[n] * C_n^nu(t) in one recursion sweep.

    Keeps only two rolling degree slices, so t may be a large array without
    materializing every degree.  coeffs is a 1-D sequence indexed by degree;
    zero entries are skipped in the accumulation.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("coeffs must be a nonempty 1-D sequence indexed by degree")
    max_degree = coeffs.size - 1
    t = _check_args(nu, max_degree, t)
    scalar = t.shape == ()
    t = np.atleast_1d(t)

    prev = np.ones_like(t)
    out = coeffs[0] * prev if coeffs[0] != 0.0 else np.zeros_like(t)
    if max_degree >= 1:
        cur = 2.0 * t if nu == 0 else 2.0 * nu * t
        if coeffs[1] != 0.0:
            out = out + coeffs[1] * cur
        for n in range(2, max_degree + 1):
            if nu == 0 and n == 2:
                nxt = 2.0 * t * t - 1.0
            else:
                m = n - 2
                nxt = (
                    2.0 * (nu + m + 1.0) * t * cur - (2.0 * nu + m) * prev
                ) / (m + 2.0)
            prev, cur = cur, nxt
            if coeffs[n] != 0.0:
                out = out + coeffs[n] * cur
    return float(out[0]) if scalar else out


def eval_at_one(nu, n):
    """Value C_n^nu(1): binom(n + 2 nu - 1, n) for nu > 0, and 2/n for the
    nu = 0 family (1 at degree 0)."""
    if nu < 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n}")
    n = int(n)
    if n == 0:
        return 1.0
    if nu == 0:
        return 2.0 / n
    return float(binom(n + 2.0 * nu - 1.0, n))


def explicit_eval(nu, n, t):
    """Direct-summation value of C_n^nu(t), independent of the recursion.

    Intended as a test oracle: sums the closed-form expansion
    sum_l (-1)^l (nu)_{n-l} / (l! (n-2l)!) (2t)^{n-2l}
    (Chebyshev cosine form for nu = 0).  For half-integer nu the alternating
    sum is carried out in exact rational arithmetic, so the only rounding is
    the final conversion to float; other nu use a plain float sum, and
    degrees above 30 are refused since that path loses accuracy there.
    """
    t = _check_args(nu, n, t)
    n = int(n)
    if n > _EXPLICIT_MAX_DEGREE:
        raise ValueError(
            f"explicit_eval supports degrees up to {_EXPLICIT_MAX_DEGREE}, got {n}"
        )
    if n == 0:
        return np.ones_like(t) if t.shape else 1.0
    if nu == 0:
        val = (2.0 / n) * np.cos(n * np.arccos(t))
        return val if t.shape else float(val)
    if float(2 * nu).is_integer():
        nu_frac = Fraction(int(round(2 * nu)), 2)
        coeffs = []
        for l in range(n // 2 + 1):
            rising = Fraction(1)
            for j in range(n - l):
                rising *= nu_frac + j
            coeffs.append(
                (-1) ** l * rising
                / (math.factorial(l) * math.factorial(n - 2 * l))
            )
        flat = np.atleast_1d(t)
        vals = np.empty(flat.shape, dtype=float)
        for i, ti in enumerate(flat.ravel()):
            two_t = 2 * Fraction(float(ti))
            total = Fraction(0)
            for l, c in enumerate(coeffs):
                total += c * two_t ** (n - 2 * l)
            vals.ravel()[i] = float(total)
        vals = vals.reshape(np.shape(t))
        return vals if t.shape else float(vals)
    val = np.zeros_like(t)
    for l in range(n // 2 + 1):
        coeff = (-1.0) ** l * float(poch(nu, n - l)) / (
            math.factorial(l) * math.factorial(n - 2 * l)
        )
        val = val + coeff * (2.0 * t) ** (n - 2 * l)
    return val if t.shape else float(val)
