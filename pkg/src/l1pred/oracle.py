"""Brute-force evaluation of L1 losses and risks from their definitions.

Nothing here uses the cross-angle reduction or any closed-form risk: densities are evaluated pointwise from the radial
generators and integrated by Monte Carlo or by plain quadrature. The module
depends only on :mod:`l1pred.models` and the error types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import PreconditionError
from .models import Estimator, RadialModel, sample_points

__all__ = [
    "LossEstimate",
    "GridSpec",
    "mc_l1_loss",
    "overlap_route_loss",
    "mc_risk",
    "grid_l1_loss",
    "posterior_median_uniform",
]

_MIN_N = 1000
_CHUNK_ELEMS = 2_000_000


@dataclass(frozen=True)
class LossEstimate:
    """An estimated loss (or risk) with its standard error."""

    value: float
    std_err: float
    n: int
    method: str

    def z_score(self, reference: float, other_se: float = 0.0) -> float:
        se = math.hypot(self.std_err, other_se)
        return (self.value - reference) / se if se > 0 else (0.0 if self.value == reference else math.inf)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _points(theta, center, d):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if theta.shape != (d,) or center.shape != (d,):
        raise PreconditionError(f"theta and center must be points of R^{d}")
    return theta, center


def _draw(q: RadialModel, n: int, rng, center, scale=1.0):
    return sample_points(q, n, rng, center=center, scale=scale)


def mc_l1_loss(q: RadialModel, theta, center, c: float, n: int = 100_000, seed=0) -> LossEstimate:
    """``int |q_theta - q_hat|`` by importance sampling from their equal mixture.

    Half of the ``n`` draws come from ``q_theta`` and half from the predictive
    ``q_hat(y) = c^-d q(||y - center||^2 / c^2)``; each draw contributes
    ``|q_theta - q_hat| / g`` with ``g = (q_theta + q_hat)/2``, a ratio bounded
    by 2. Identical densities return 0 without sampling.
    """
    if n < _MIN_N:
        raise PreconditionError(f"n must be at least {_MIN_N}")
    if not c > 0:
        raise PreconditionError("scale factor must be positive")
    theta, center = _points(theta, center, q.dim)
    if c == 1.0 and np.array_equal(theta, center):
        return LossEstimate(0.0, 0.0, 0, "importance-mixture MC")
    rng = _rng(seed)
    half = n // 2
    parts = []
    for src_center, src_scale, size in ((theta, 1.0, half), (center, c, n - half)):
        y = _draw(q, size, rng, src_center, src_scale)
        a = q.density(y, center=theta)
        b = q.density(y, center=center, scale=c)
        g = 0.5 * (a + b)
        parts.append(np.abs(a - b) / g)
    # stratified mixture: each half estimates its own component expectation
    means = [p.mean() for p in parts]
    variances = [p.var(ddof=1) / p.size for p in parts]
    value = 0.5 * (means[0] + means[1])
    se = 0.5 * math.sqrt(variances[0] + variances[1])
    return LossEstimate(float(np.clip(value, 0.0, 2.0)), float(se), n, "importance-mixture MC")


def overlap_route_loss(q: RadialModel, theta, center, c: float, n: int = 100_000,
                       seed=0) -> LossEstimate:
    """``2 - 2 OVL`` with ``OVL = int min(q_theta, q_hat)`` estimated from ``q_theta`` draws."""
    if n < _MIN_N:
        raise PreconditionError(f"n must be at least {_MIN_N}")
    theta, center = _points(theta, center, q.dim)
    rng = _rng(seed)
    y = _draw(q, n, rng, theta)
    a = q.density(y, center=theta)
    b = q.density(y, center=center, scale=c)
    ratio = np.minimum(1.0, b / a)
    ovl = ratio.mean()
    se = 2.0 * ratio.std(ddof=1) / math.sqrt(n)
    return LossEstimate(float(np.clip(2.0 - 2.0 * ovl, 0.0, 2.0)), float(se), n, "overlap MC")


def _batch_losses(q, theta, centers, c, n_y, rng, route):
    """Loss estimates for many predictive centers at once (rows of ``centers``)."""
    b, d = centers.shape
    if route == "mixture":
        half = n_y // 2
        y_a = _draw(q, b * half, rng, theta).reshape(b, half, d)
        y_b = (centers[:, None, :]
               + c * _draw(q, b * (n_y - half), rng, np.zeros(d)).reshape(b, n_y - half, d))
        out = []
        for y in (y_a, y_b):
            a = q.density(y, center=theta)
            bb = q.density(y - centers[:, None, :], scale=c)
            out.append((np.abs(a - bb) / (0.5 * (a + bb))).mean(axis=1))
        return np.clip(0.5 * (out[0] + out[1]), 0.0, 2.0)
    if route == "overlap":
        y = _draw(q, b * n_y, rng, theta).reshape(b, n_y, d)
        a = q.density(y, center=theta)
        bb = q.density(y - centers[:, None, :], scale=c)
        return np.clip(2.0 - 2.0 * np.minimum(1.0, bb / a).mean(axis=1), 0.0, 2.0)
    raise PreconditionError(f"unknown route {route!r}")


def mc_risk(p: RadialModel, q: RadialModel, estimator: Estimator, c: float, theta,
            gamma=None, n_x: int = 100_000, n_y: int = 1000, seed=0,
            route: str = "mixture") -> LossEstimate:
    """Risk ``E gamma(L(theta, q_hat))`` by nested Monte Carlo.

    The outer stage draws full ``d``-dimensional ``X`` (isotropic direction
    times sampled norm) around ``theta``; the inner stage estimates each loss
    with ``n_y`` draws (``route`` ``"mixture"`` or ``"overlap"``). The
    reported std-err is the sample std of the per-draw transformed losses over
    ``sqrt(n_x)``, which already contains the inner-stage noise. For
    nonlinear ``gamma`` the inner noise also adds an ``O(1/n_y)`` bias.

    Draws are processed in chunks whose seeds are spawned from ``seed``, so
    results depend only on ``(seed, n_x, n_y)``.
    """
    if n_x < _MIN_N or n_y < _MIN_N:
        raise PreconditionError(f"n_x and n_y must be at least {_MIN_N}")
    if p.dim != q.dim:
        raise PreconditionError("p and q dimensions differ")
    apply = (lambda v: v) if gamma is None else gamma.apply
    d = p.dim
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (d,):
        raise PreconditionError(f"theta must be a point of R^{d}")
    chunk = max(1, _CHUNK_ELEMS // n_y)
    n_chunks = math.ceil(n_x / chunk)
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    vals = []
    for k, ss in enumerate(seeds):
        size = min(chunk, n_x - k * chunk)
        rng = np.random.default_rng(ss)
        x = _draw(p, size, rng, theta)
        centers = np.atleast_2d(estimator(x))
        vals.append(apply(_batch_losses(q, theta, centers, c, n_y, rng, route)))
    v = np.concatenate(vals)
    return LossEstimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), int(v.size),
                        f"nested MC ({route})")


# --------------------------------------------------------------------------
# Deterministic low-dimensional oracle
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Budget for :func:`grid_l1_loss`: angular Gauss-Legendre nodes per piece and
    absolute tolerance of the adaptive radial/line integral."""

    angular_nodes: int = 96
    epsabs: float = 1e-11
    truncation_mass: float = 1e-13


def _radius(q: RadialModel, mass: float) -> float:
    return q.support_radius if math.isfinite(q.support_radius) else q.truncation_radius(mass)


def grid_l1_loss(q: RadialModel, theta, center, c: float, grid: GridSpec | None = None) -> float:
    """Deterministic ``int |q_theta - q_hat|`` for ``d <= 2``.

    ``d = 1``: adaptive quadrature on the line with breakpoints at support
    edges and density crossings. ``d = 2``: polar coordinates around
    ``theta``; at fixed radius ``q_hat`` is monotone in the angle, so the
    angular integral splits at a single crossing found by bisection.
    """
    grid = grid or GridSpec()
    d = q.dim
    if d > 2:
        raise PreconditionError("grid oracle supports d <= 2 only")
    theta, center = _points(theta, center, d)
    if c == 1.0 and np.array_equal(theta, center):
        return 0.0
    R = _radius(q, grid.truncation_mass)
    if d == 1:
        return _line_loss(q, float(theta[0]), float(center[0]), c, R, grid)
    return _polar_loss(q, theta, center, c, R, grid)


def _line_loss(q, th, ce, c, R, grid):
    def a(y):
        return q.density(np.atleast_1d(y)[:, None], center=[th])

    def b(y):
        return q.density(np.atleast_1d(y)[:, None], center=[ce], scale=c)

    lo, hi = min(th - R, ce - c * R), max(th + R, ce + c * R)
    pts = {th - R, th + R, ce - c * R, ce + c * R, th, ce}
    scan = np.linspace(lo, hi, 4001)
    diff = a(scan) - b(scan)
    for i in np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)[0]:
        f = lambda y: float(a(y)[0] - b(y)[0])  # noqa: E731
        try:
            pts.add(optimize.brentq(f, scan[i], scan[i + 1], xtol=1e-14))
        except ValueError:
            pts.add(0.5 * (scan[i] + scan[i + 1]))
    knots = sorted(p for p in pts if lo <= p <= hi)
    total = 0.0
    for u, v in zip(knots[:-1], knots[1:]):
        if v - u <= 0:
            continue
        total += integrate.quad(lambda y: abs(float(a(y)[0] - b(y)[0])), u, v,
                                epsabs=grid.epsabs, epsrel=1e-12, limit=400)[0]
    return float(min(total, 2.0))


def _polar_loss(q, theta, center, c, R, grid):
    delta = float(np.linalg.norm(center - theta))
    u, w = np.polynomial.legendre.leggauss(grid.angular_nodes)
    # cosine-clustered nodes on [0, 1]
    s = 0.5 * (u + 1.0)
    x01 = 0.5 * (1.0 - np.cos(math.pi * s))
    w01 = 0.5 * w * 0.5 * math.pi * np.sin(math.pi * s)

    def qhat(rho, phi):
        dist2 = rho * rho + delta * delta - 2.0 * rho * delta * np.cos(phi)
        return q.generator(np.maximum(dist2, 0.0) / (c * c)) / (c * c)

    def ring(rho):
        a = float(q.generator(rho * rho))
        # q_hat(rho, .) is nonincreasing on [0, pi]; find where it drops below a
        lo, hi = 0.0, math.pi
        if qhat(rho, 0.0) <= a:
            cut = 0.0
        elif qhat(rho, math.pi) > a:
            cut = math.pi
        else:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if qhat(rho, mid) > a:
                    lo = mid
                else:
                    hi = mid
            cut = 0.5 * (lo + hi)
        splits = [0.0, cut, math.pi]
        if math.isfinite(R) and rho > 0 and delta > 0:
            # edge of the predictive support, where q_hat may jump
            cos_edge = (rho * rho + delta * delta - (c * R) ** 2) / (2.0 * rho * delta)
            if -1.0 < cos_edge < 1.0:
                splits.append(math.acos(cos_edge))
        splits = sorted(splits)
        total = 0.0
        for p0, p1 in zip(splits[:-1], splits[1:]):
            if p1 > p0:
                phi = p0 + (p1 - p0) * x01
                total += (p1 - p0) * np.sum(w01 * np.abs(a - qhat(rho, phi)))
        return 2.0 * rho * total

    top = max(R, delta + c * R)
    pts = sorted({p for p in (R, abs(delta - c * R), delta + c * R, delta) if 0 < p < top})
    knots = [0.0] + pts + [top]
    total = 0.0
    for u0, v0 in zip(knots[:-1], knots[1:]):
        if v0 > u0:
            total += integrate.quad(ring, u0, v0, epsabs=grid.epsabs, epsrel=1e-11, limit=400)[0]
    return float(min(total, 2.0))


# --------------------------------------------------------------------------
# Posterior median for the uniform location model
# --------------------------------------------------------------------------


def _weighted_median(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Lower weighted median of each row of ``values`` (shared ``weights``)."""
    order = np.argsort(values, axis=1, kind="stable")
    v = np.take_along_axis(values, order, axis=1)
    cw = np.cumsum(weights[order], axis=1)
    idx = np.argmax(cw >= 0.5 * cw[:, -1:] * (1 - 1e-12), axis=1)
    return v[np.arange(v.shape[0]), idx]


def posterior_median_uniform(sample, A: float, B: float, y_grid,
                             theta_nodes: int = 2001) -> np.ndarray:
    """Pointwise posterior median of ``q_theta(y)`` under a flat prior, on ``y_grid``.

    The posterior is tabulated on a ``theta`` grid from the likelihood
    ``prod (2A)^-1 1{|x_i - theta| <= A}``, and the median of
    ``(2B)^-1 1{|y - theta| <= B}`` is taken with those weights.
    """
    x = np.asarray(sample, dtype=float)
    y = np.asarray(y_grid, dtype=float)
    span = np.linspace(x.min() - A - B, x.max() + A + B, 4 * theta_nodes + 1)
    lik = np.all(np.abs(x[None, :] - span[:, None]) <= A, axis=1).astype(float)
    if not lik.any():
        raise PreconditionError("sample has zero likelihood for every theta on the grid")
    support = span[lik > 0]
    th = np.linspace(support.min(), support.max(), theta_nodes)
    # refined grid inside the support: the likelihood is flat there
    weights = np.all(np.abs(x[None, :] - th[:, None]) <= A, axis=1).astype(float)
    vals = np.where(np.abs(y[:, None] - th[None, :]) <= B, 0.5 / B, 0.0)
    return _weighted_median(vals, weights)
