"""Special functions used by the risk formulas.

Everything here is a pure, vectorised function of its arguments. The
cross-angle law ``V`` is the cosine of the angle between a uniform direction
on the unit sphere of R^d and an independent direction; its c.d.f. is a
symmetric regularized incomplete beta function.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

__all__ = [
    "f_V",
    "F_V",
    "f_Y1",
    "F_Y1",
    "gauss_2f1",
    "std_normal_cdf",
    "ball_volume",
    "sphere_area",
]


def _check_angle_dim(d: int) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"cross-angle law needs an integer dimension d >= 2, got {d!r}")


def f_V(d: int, v):
    """Density of the cross-angle cosine ``V`` in dimension ``d``.

    Returns ``(1 - v^2)^((d-3)/2) / B((d-1)/2, 1/2)`` on [-1, 1] and 0 outside.
    For ``d = 2`` the density is infinite at ``|v| = 1``; ``inf`` is returned
    there and callers that need probabilities should use :func:`F_V`.
    """
    _check_angle_dim(d)
    v = np.asarray(v, dtype=float)
    inside = np.abs(v) <= 1.0
    one_minus = np.where(inside, 1.0 - v * v, 1.0)
    log_norm = sc.betaln((d - 1) / 2.0, 0.5)
    with np.errstate(divide="ignore"):
        dens = np.exp((d - 3) / 2.0 * np.log(one_minus) - log_norm)
    out = np.where(inside, dens, 0.0)
    return out[()] if out.ndim == 0 else out


def F_V(d: int, v):
    """Clamped c.d.f. of the cross-angle cosine ``V``.

    Arguments outside [-1, 1] map to 0 or 1. Closed forms are used for
    ``d = 2`` (arcsine law) and ``d = 3`` (uniform law); other dimensions go
    through ``I_{(1+v)/2}((d-1)/2, (d-1)/2)``.
    """
    _check_angle_dim(d)
    v = np.clip(np.asarray(v, dtype=float), -1.0, 1.0)
    if d == 2:
        out = 0.5 + np.arcsin(v) / math.pi
    elif d == 3:
        out = 0.5 * (v + 1.0)
    else:
        a = (d - 1) / 2.0
        out = sc.betainc(a, a, 0.5 * (1.0 + v))
    return out[()] if np.ndim(out) == 0 else out


def f_Y1(d: int, t):
    """Density of the first coordinate of a uniform draw on the unit ball of R^d."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    log_norm = sc.gammaln(d / 2.0 + 1.0) - 0.5 * math.log(math.pi) - sc.gammaln((d + 1) / 2.0)
    base = np.where(inside, 1.0 - t * t, 1.0)
    out = np.where(inside, np.exp(log_norm + (d - 1) / 2.0 * np.log(base)), 0.0)
    return out[()] if out.ndim == 0 else out


def F_Y1(d: int, t):
    """Clamped c.d.f. of the first coordinate of a uniform draw on the unit ball.

    ``F_Y1`` in dimension ``d`` coincides with :func:`F_V` in dimension ``d + 2``.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    if d == 1:
        out = 0.5 * (t + 1.0)
    elif d == 3:
        out = (3.0 * t - t ** 3 + 2.0) / 4.0
    else:
        a = (d + 1) / 2.0
        out = sc.betainc(a, a, 0.5 * (1.0 + t))
    return out[()] if np.ndim(out) == 0 else out


def gauss_2f1(a: float, b: float, c: float, z: float, *, rtol: float = 1e-15,
              max_terms: int = 10_000) -> float:
    """Gauss hypergeometric function by its power series.

    The series is summed until a term falls below ``rtol`` times the partial
    sum, or ``max_terms`` terms. For ``-1 < z < -1/2`` the Pfaff transform
    ``(1-z)^(-b) 2F1(c-a, b; c; z/(z-1))`` is summed instead, which maps the
    argument into (1/3, 1/2) and keeps the term count small.

    Raises
    ------
    ValueError
        If ``|z| >= 1`` (outside the disc of convergence) or ``c`` is a
        nonpositive integer.
    """
    if abs(z) >= 1.0:
        raise ValueError(
            f"2F1 power series converges only for |z| < 1; got z = {z!r}"
        )
    if c <= 0 and float(c).is_integer():
        raise ValueError(f"2F1 undefined for nonpositive integer c = {c!r}")
    if z < -0.5:
        return (1.0 - z) ** (-b) * _series_2f1(c - a, b, c, z / (z - 1.0), rtol, max_terms)
    return _series_2f1(a, b, c, z, rtol, max_terms)


def _series_2f1(a, b, c, z, rtol, max_terms):
    total = 1.0
    comp = 0.0  # Kahan compensation
    term = 1.0
    for j in range(max_terms):
        term *= (a + j) * (b + j) / ((c + j) * (j + 1.0)) * z
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= rtol * abs(total):
            break
    return total


def std_normal_cdf(u):
    """Standard normal c.d.f. (complementary-error-function based)."""
    out = sc.ndtr(np.asarray(u, dtype=float))
    return out[()] if np.ndim(out) == 0 else out


def ball_volume(d: int, m: float = 1.0) -> float:
    """Volume ``m^d pi^(d/2) / Gamma(d/2 + 1)`` of a radius-``m`` ball in R^d."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if m <= 0:
        raise ValueError(f"radius must be positive, got {m!r}")
    return float(math.exp(d * math.log(m) + d / 2.0 * math.log(math.pi) - sc.gammaln(d / 2.0 + 1.0)))


def sphere_area(d: int) -> float:
    """Surface area ``2 pi^(d/2) / Gamma(d/2)`` of the unit sphere in R^d."""
    return float(2.0 * math.exp(d / 2.0 * math.log(math.pi) - sc.gammaln(d / 2.0)))
