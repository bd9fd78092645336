"""Spherically symmetric location models.

A model is stored through its radial generator ``t -> p(t)`` where
``t = ||x - theta||^2`` is the *squared* distance to the location. The law of
the norm ``||X - theta||`` is derived from it, converting explicitly between
``t`` and ``r = sqrt(t)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, stats
from scipy import special as sc

from .errors import ModelError, PreconditionError, SpecParseError
from .special import ball_volume, sphere_area

__all__ = [
    "Mixing",
    "RadialModel",
    "NormLaw",
    "Estimator",
    "PredictiveSpec",
    "make_normal",
    "make_uniform_ball",
    "make_scale_mixture_normal",
    "make_custom",
    "norm_pdf",
    "generalized_inverse",
    "sample_norm",
    "sample_points",
    "random_directions",
    "predictive_eval",
    "mle_ball_estimator",
    "parse_model",
]

_BISECT_ITERS = 200
_BISECT_RTOL = 1e-12


# --------------------------------------------------------------------------
# Norm laws
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormLaw:
    """Distribution of a nonnegative radius ``||X - theta||``.

    ``upper`` is the right end of the support (``inf`` when unbounded).
    ``ppf`` and ``isf`` are optional; quantiles fall back to root finding on
    ``cdf`` when absent.
    """

    pdf: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    upper: float = math.inf
    ppf: Callable[[np.ndarray], np.ndarray] | None = None
    isf: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = ""

    def quantile(self, u: float) -> float:
        if self.ppf is not None:
            return float(self.ppf(u))
        return _cdf_root(self.cdf, u, self.upper)

    def upper_quantile(self, tail: float) -> float:
        """Radius beyond which only ``tail`` probability remains."""
        if math.isfinite(self.upper):
            return self.upper
        if self.isf is not None:
            return float(self.isf(tail))
        return _cdf_root(self.cdf, 1.0 - tail, self.upper)


def _cdf_root(cdf, u, upper):
    if u <= 0.0:
        return 0.0
    hi = 1.0 if not math.isfinite(upper) else upper
    while not math.isfinite(upper) and cdf(hi) < u:
        hi *= 2.0
        if hi > 1e300:
            raise PreconditionError("norm c.d.f. never reaches the requested level")
    return float(optimize.brentq(lambda r: float(cdf(r)) - u, 0.0, hi, xtol=1e-14, rtol=1e-14))


# --------------------------------------------------------------------------
# Mixing laws for scale mixtures of normals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Mixing:
    """Mixing law over the variance ``sigma^2`` of a normal scale mixture.

    ``kind`` is ``"discrete"`` (finite support ``variances`` with ``weights``)
    or ``"invgamma"`` (shape ``a``, scale ``b``; the mixture is then a
    multivariate Student law with ``2a`` degrees of freedom, Cauchy for
    ``a = b = 1/2``).
    """

    kind: str
    variances: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind == "discrete":
            v = np.asarray(self.variances, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if v.size == 0 or v.shape != w.shape:
                raise ModelError("discrete mixing needs matching variances and weights")
            if np.any(v <= 0):
                raise ModelError("mixing variances must be positive")
            if np.any(w < 0):
                raise ModelError("mixing weights must be nonnegative")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ModelError(f"unnormalized mixing spec: weights sum to {w.sum()!r}")
        elif self.kind == "invgamma":
            if not (self.a > 0 and self.b > 0):
                raise ModelError("inverse-gamma mixing needs a > 0 and b > 0")
        else:
            raise ModelError(f"unknown mixing kind {self.kind!r}")

    @classmethod
    def point(cls, variance: float) -> "Mixing":
        return cls("discrete", (float(variance),), (1.0,))

    @classmethod
    def discrete(cls, variances, weights) -> "Mixing":
        return cls("discrete", tuple(float(v) for v in variances), tuple(float(w) for w in weights))

    @classmethod
    def invgamma(cls, a: float, b: float) -> "Mixing":
        return cls("invgamma", a=float(a), b=float(b))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "discrete":
            idx = rng.choice(len(self.variances), size=n, p=np.asarray(self.weights))
            return np.asarray(self.variances)[idx]
        return 1.0 / rng.gamma(self.a, 1.0 / self.b, size=n)

    def describe(self) -> str:
        if self.kind == "invgamma":
            return f"invgamma({self.a:g},{self.b:g})"
        if len(self.variances) == 1:
            return f"point({self.variances[0]:g})"
        pairs = ",".join(f"{v:g}:{w:g}" for v, w in zip(self.variances, self.weights))
        return f"points({pairs})"


# --------------------------------------------------------------------------
# Radial model
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialModel:
    """Spherically symmetric density ``x -> generator(||x - theta||^2)`` on R^d.

    Instances are immutable; build them with the ``make_*`` factories or
    :func:`parse_model`.

    Attributes
    ----------
    dim : int
        Dimension ``d``.
    kind : str
        ``"normal"``, ``"uniform_ball"``, ``"normal_scale_mixture"`` or ``"custom"``.
    params : dict
        Kind-specific parameters (``var``, ``m``, ``mixing``).
    support_radius : float
        Smallest ``R`` with ``P(||X - theta|| <= R) = 1``.
    nonincreasing, strictly_decreasing : bool
        Shape flags of the generator on [0, inf). Operations that need a
        unimodal generator check ``nonincreasing``; the dominance derivative
        additionally needs ``strictly_decreasing``.
    """

    dim: int
    kind: str
    params: dict
    generator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    log_generator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support_radius: float
    nonincreasing: bool
    strictly_decreasing: bool
    norm: NormLaw = field(repr=False)
    _norm_sampler: Callable[[int, np.random.Generator], np.ndarray] = field(repr=False)
    _inverse: Callable[[np.ndarray, bool], np.ndarray] | None = field(default=None, repr=False)

    # -- densities -------------------------------------------------------

    def norm_pdf(self, r):
        return norm_pdf(self, r)

    def norm_cdf(self, r):
        return self.norm.cdf(np.asarray(r, dtype=float))

    def density(self, y, center=None, scale: float = 1.0):
        """Density of ``center + scale * (X - theta)`` evaluated at points ``y`` (rows)."""
        y = np.asarray(y, dtype=float)
        if center is not None:
            y = y - np.asarray(center, dtype=float)
        t = np.sum(y * y, axis=-1) / scale ** 2
        return self.generator(t) / scale ** self.dim

    def truncation_radius(self, mass: float = 1e-10) -> float:
        """Radius capturing ``1 - mass`` of the norm distribution."""
        return self.norm.upper_quantile(mass)

    # -- generalized inverse ---------------------------------------------

    def inverse_log_level(self, log_level, upper: bool = False):
        """Generalized inverse of the generator at ``exp(log_level)``.

        ``upper=False`` gives ``inf{z >= 0 : g(z) <= level}``; ``upper=True``
        gives ``sup{z >= 0 : g(z) >= level}`` (0 when the set is empty). The two
        coincide for strictly decreasing generators and differ on flat parts,
        where the upper version is the one that keeps ties on the same side as
        the lower version does.
        """
        log_level = np.asarray(log_level, dtype=float)
        if self._inverse is not None:
            return self._inverse(log_level, upper)
        return _bisect_inverse(self, log_level, upper)

    def scaled_inverse(self, t, log_factor: float, upper: bool = False):
        """``q^{-1}(factor * q(t))`` computed in log space."""
        return self.inverse_log_level(self.log_generator(np.asarray(t, dtype=float)) + log_factor, upper)

    # -- sampling ---------------------------------------------------------

    def sample_norm(self, n: int, seed=None) -> np.ndarray:
        return sample_norm(self, n, seed)

    def describe(self) -> str:
        if self.kind == "normal":
            return f"normal:d={self.dim},var={self.params['var']:g}"
        if self.kind == "uniform_ball":
            return f"uniball:d={self.dim},m={self.params['m']:g}"
        if self.kind == "normal_scale_mixture":
            return f"mixnormal:d={self.dim},mix={self.params['mixing'].describe()}"
        return f"custom:d={self.dim}"

    def __repr__(self) -> str:
        return f"RadialModel({self.describe()})"


def _check_dim(d) -> int:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ModelError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def make_normal(d: int, sigma2: float = 1.0) -> RadialModel:
    """``N_d(theta, sigma2 I)`` as a radial model."""
    d = _check_dim(d)
    if not sigma2 > 0:
        raise ModelError(f"variance must be positive, got {sigma2!r}")
    sigma2 = float(sigma2)
    log_g0 = -0.5 * d * math.log(2.0 * math.pi * sigma2)
    scale = math.sqrt(sigma2)
    chi = stats.chi(d, scale=scale)

    def log_gen(t):
        return log_g0 - np.asarray(t, dtype=float) / (2.0 * sigma2)

    def gen(t):
        return np.exp(log_gen(t))

    def inverse(log_level, upper):
        return np.maximum(0.0, 2.0 * sigma2 * (log_g0 - log_level))

    def sampler(n, rng):
        z = rng.standard_normal((n, d))
        return scale * np.sqrt(np.sum(z * z, axis=1))

    law = NormLaw(
        pdf=None, cdf=chi.cdf, upper=math.inf, ppf=chi.ppf, isf=chi.isf,
        label=f"chi_{d} * {scale:g}",
    )
    model = RadialModel(
        dim=d, kind="normal", params={"var": sigma2}, generator=gen, log_generator=log_gen,
        support_radius=math.inf, nonincreasing=True, strictly_decreasing=True,
        norm=law, _norm_sampler=sampler, _inverse=inverse,
    )
    return _attach_pdf(model)


def make_uniform_ball(d: int, m: float = 1.0) -> RadialModel:
    """Uniform law on the closed ball of radius ``m`` around ``theta``."""
    d = _check_dim(d)
    if not m > 0:
        raise ModelError(f"ball radius must be positive, got {m!r}")
    m = float(m)
    vol = ball_volume(d, m)
    m2 = m * m

    def gen(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= m2, 1.0 / vol, 0.0)

    def log_gen(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= m2, -math.log(vol), -np.inf)

    def inverse(log_level, upper):
        log_top = -math.log(vol)
        # levels within rounding of the plateau count as on it
        tol = 1e-12 * max(1.0, abs(log_top))
        if upper:
            # sup{z : g(z) >= level}
            return np.where(log_level > log_top + tol, 0.0,
                            np.where(np.isneginf(log_level), np.inf, m2))
        # inf{z : g(z) <= level}
        return np.where(log_level >= log_top - tol, 0.0, m2)

    def sampler(n, rng):
        return m * rng.random(n) ** (1.0 / d)

    law = NormLaw(
        pdf=None,
        cdf=lambda r: np.clip(np.asarray(r, dtype=float) / m, 0.0, 1.0) ** d,
        upper=m,
        ppf=lambda u: m * np.asarray(u, dtype=float) ** (1.0 / d),
        label=f"{m:g} * U^(1/{d})",
    )
    model = RadialModel(
        dim=d, kind="uniform_ball", params={"m": m}, generator=gen, log_generator=log_gen,
        support_radius=m, nonincreasing=True, strictly_decreasing=False,
        norm=law, _norm_sampler=sampler, _inverse=inverse,
    )
    return _attach_pdf(model)


def make_scale_mixture_normal(d: int, mixing: Mixing) -> RadialModel:
    """Normal scale mixture ``E_mixing[N_d(theta, sigma^2 I)]``.

    Discrete mixing is summed exactly. Inverse-gamma mixing integrates the
    normal kernel against the gamma law of the precision in closed form, giving
    the multivariate Student generator.
    """
    d = _check_dim(d)
    if not isinstance(mixing, Mixing):
        raise ModelError("mixing must be a Mixing instance")

    if mixing.kind == "discrete":
        var = np.asarray(mixing.variances)
        logw = np.log(np.asarray(mixing.weights))
        log_c = logw - 0.5 * d * np.log(2.0 * math.pi * var)

        def log_gen(t):
            t = np.asarray(t, dtype=float)
            return sc.logsumexp(log_c - t[..., None] / (2.0 * var), axis=-1)

        comps = [stats.chi(d, scale=math.sqrt(v)) for v in var]
        wts = np.asarray(mixing.weights)

        def cdf(r):
            r = np.asarray(r, dtype=float)
            return sum(w * c.cdf(r) for w, c in zip(wts, comps))

        law = NormLaw(pdf=None, cdf=cdf, upper=math.inf,
                      isf=lambda tail: _cdf_root(cdf, 1.0 - tail, math.inf),
                      label="chi mixture")
        log_g0 = float(sc.logsumexp(log_c))

        def inverse(log_level, upper):
            # log_gen is convex and decreasing, so Newton from t = 0 increases monotonically
            lev = np.asarray(log_level, dtype=float)
            out = np.zeros(lev.shape)
            out[np.isneginf(lev)] = np.inf
            idx = np.flatnonzero(np.isfinite(lev) & (lev < log_g0))
            target = lev.ravel()[idx]
            t = np.zeros(idx.size)
            flat = out.ravel()
            for _ in range(100):
                if idx.size == 0:
                    break
                z = log_c - t[:, None] / (2.0 * var)
                zmax = z.max(axis=1, keepdims=True)
                e = np.exp(z - zmax)
                s = e.sum(axis=1)
                h = zmax[:, 0] + np.log(s)
                slope = -(e / (2.0 * var)).sum(axis=1) / s
                step = (h - target) / slope
                t = t - step
                # iterates increase; a non-positive or negligible step means converged
                done = -step <= 1e-14 * t
                flat[idx[done]] = t[done]
                idx, t, target = idx[~done], t[~done], target[~done]
            flat[idx] = t
            return flat.reshape(lev.shape)
        if var.size == 1:
            # a point mass is exactly the normal model
            return _relabel(make_normal(d, float(var[0])), mixing)
    else:
        a, b = mixing.a, mixing.b
        alpha = a + d / 2.0
        log_g0 = (-0.5 * d * math.log(2.0 * math.pi * b)
                  + sc.gammaln(alpha) - sc.gammaln(a))

        def log_gen(t):
            return log_g0 - alpha * np.log1p(np.asarray(t, dtype=float) / (2.0 * b))

        def inverse(log_level, upper):
            return np.maximum(0.0, 2.0 * b * np.expm1((log_g0 - log_level) / alpha))

        # ||X||^2 a / (b d) ~ F(d, 2a)
        fdist = stats.f(d, 2.0 * a)
        k = a / (b * d)
        law = NormLaw(
            pdf=None,
            cdf=lambda r: fdist.cdf(k * np.asarray(r, dtype=float) ** 2),
            upper=math.inf,
            ppf=lambda u: np.sqrt(fdist.ppf(u) / k),
            isf=lambda u: np.sqrt(fdist.isf(u) / k),
            label=f"Student radius (nu={2 * a:g})",
        )

    def gen(t):
        return np.exp(log_gen(t))

    def sampler(n, rng):
        s2 = mixing.sample(n, rng)
        z = rng.standard_normal((n, d))
        return np.sqrt(s2 * np.sum(z * z, axis=1))

    model = RadialModel(
        dim=d, kind="normal_scale_mixture", params={"mixing": mixing},
        generator=gen, log_generator=log_gen, support_radius=math.inf,
        nonincreasing=True, strictly_decreasing=True,
        norm=law, _norm_sampler=sampler, _inverse=inverse,
    )
    return _attach_pdf(model)


def _relabel(model: RadialModel, mixing: Mixing) -> RadialModel:
    return RadialModel(
        dim=model.dim, kind="normal_scale_mixture", params={"mixing": mixing, **model.params},
        generator=model.generator, log_generator=model.log_generator,
        support_radius=model.support_radius, nonincreasing=True, strictly_decreasing=True,
        norm=model.norm, _norm_sampler=model._norm_sampler, _inverse=model._inverse,
    )


def make_custom(d: int, generator: Callable, *, nonincreasing: bool,
                strictly_decreasing: bool = False, support_radius: float = math.inf,
                log_generator: Callable | None = None) -> RadialModel:
    """Radial model from a user-supplied generator ``t -> p(t)``.

    The shape flags must be declared by the caller; operations that need a
    unimodal generator refuse models declared otherwise. Normalisation is
    checked by quadrature.
    """
    d = _check_dim(d)
    if strictly_decreasing and not nonincreasing:
        raise ModelError("a strictly decreasing generator is also nonincreasing")
    area = sphere_area(d)
    upper = float(support_radius)

    def gen(t):
        return np.asarray(generator(np.asarray(t, dtype=float)), dtype=float)

    if log_generator is None:
        def log_gen(t):
            with np.errstate(divide="ignore"):
                return np.log(gen(t))
    else:
        log_gen = log_generator

    def pdf(r):
        r = np.asarray(r, dtype=float)
        return area * r ** (d - 1) * gen(r * r)

    def cdf(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.array([integrate.quad(pdf, 0.0, min(x, upper), limit=200)[0] if x > 0 else 0.0
                        for x in r.ravel()]).reshape(r.shape)
        return np.clip(out, 0.0, 1.0)

    total = integrate.quad(pdf, 0.0, upper, limit=200)[0]
    if abs(total - 1.0) > 1e-6:
        raise ModelError(f"custom generator integrates to {total!r}, not 1")

    law = NormLaw(pdf=pdf, cdf=lambda r: cdf(r).squeeze()[()], upper=upper, label="custom")

    def sampler(n, rng):
        hi = law.upper_quantile(1e-12)
        grid = np.linspace(0.0, hi, 4097)
        cum = integrate.cumulative_trapezoid(pdf(grid), grid, initial=0.0)
        cum /= cum[-1]
        return np.interp(rng.random(n), cum, grid)

    model = RadialModel(
        dim=d, kind="custom", params={}, generator=gen, log_generator=log_gen,
        support_radius=upper, nonincreasing=bool(nonincreasing),
        strictly_decreasing=bool(strictly_decreasing), norm=law, _norm_sampler=sampler,
    )
    return model


def _attach_pdf(model: RadialModel) -> RadialModel:
    law = model.norm
    object.__setattr__(model, "norm", NormLaw(
        pdf=lambda r: norm_pdf(model, r), cdf=law.cdf, upper=law.upper,
        ppf=law.ppf, isf=law.isf, label=law.label,
    ))
    return model


# --------------------------------------------------------------------------
# Module-level operations
# --------------------------------------------------------------------------


def norm_pdf(model: RadialModel, r):
    """Density ``S_d r^(d-1) p(r^2)`` of ``||X - theta||``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise PreconditionError("norm density is defined for r >= 0 only")
    d = model.dim
    with np.errstate(divide="ignore", invalid="ignore"):
        log_part = model.log_generator(r * r) + (d - 1) * np.log(r)
        out = sphere_area(d) * np.exp(log_part)
    if d == 1:
        out = sphere_area(1) * model.generator(r * r)
    out = np.where(np.isfinite(out), out, 0.0)
    return out[()] if out.ndim == 0 else out


def generalized_inverse(model: RadialModel, level, upper: bool = False):
    """``inf{z >= 0 : p(z) <= level}`` for a nonincreasing generator.

    Returns 0 whenever ``level >= p(0)``. Closed forms are used for the normal,
    uniform-ball and Student models; other models use bracketed bisection.
    """
    _require_unimodal(model)
    level = np.asarray(level, dtype=float)
    if np.any(level < 0):
        raise PreconditionError("level must be nonnegative")
    with np.errstate(divide="ignore"):
        out = model.inverse_log_level(np.log(level), upper)
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def _require_unimodal(model: RadialModel) -> None:
    if not model.nonincreasing:
        raise PreconditionError(
            f"{model.describe()} is not declared nonincreasing; a unimodal generator is required"
        )


def _bisect_inverse(model: RadialModel, log_level: np.ndarray, upper: bool) -> np.ndarray:
    """Vectorised bracketed bisection for the generalized inverse."""
    _require_unimodal(model)
    log_level = np.asarray(log_level, dtype=float)
    flat = log_level.ravel()
    log_g0 = float(model.log_generator(np.array(0.0)))
    out = np.zeros_like(flat)
    if upper:
        active = flat <= log_g0
    else:
        active = flat < log_g0
    out[np.isneginf(flat)] = np.inf
    active &= ~np.isneginf(flat)
    if np.any(active):
        lev = flat[active]
        lo = np.zeros_like(lev)
        hi = np.ones_like(lev)
        limit = model.support_radius ** 2 if math.isfinite(model.support_radius) else math.inf

        def below(z):
            g = model.log_generator(z)
            return g < lev if upper else g <= lev

        grow = ~below(hi)
        while np.any(grow):
            hi = np.where(grow, hi * 2.0, hi)
            if np.any(hi > min(limit * 2.0, 1e300)):
                hi = np.minimum(hi, limit * 2.0 if math.isfinite(limit) else 1e300)
                grow = ~below(hi) & (hi < 1e300) & (hi < limit * 2.0)
                if np.all(hi >= 1e300):
                    break
                continue
            grow = ~below(hi)
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            b = below(mid)
            hi = np.where(b, mid, hi)
            lo = np.where(b, lo, mid)
            if np.all(hi - lo <= _BISECT_RTOL * np.maximum(hi, 1e-300)):
                break
        out[active] = hi if not upper else lo
    return out.reshape(log_level.shape)


def random_directions(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent uniform unit vectors in R^d (rows)."""
    z = rng.standard_normal((n, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    bad = norms[:, 0] == 0.0
    while np.any(bad):
        z[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        bad = norms[:, 0] == 0.0
    return z / norms


def sample_norm(model: RadialModel, n: int, seed=None) -> np.ndarray:
    """``n`` i.i.d. draws of ``||X - theta||``; deterministic given ``seed``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise PreconditionError(f"sample size must be a positive integer, got {n!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return model._norm_sampler(int(n), rng)


def sample_points(model: RadialModel, n: int, rng: np.random.Generator,
                  center=None, scale: float = 1.0) -> np.ndarray:
    """Draws of ``center + scale * (X - theta)`` as an ``(n, d)`` array."""
    if model.kind == "normal":
        pts = (scale * math.sqrt(model.params["var"])) * rng.standard_normal((n, model.dim))
        return pts if center is None else pts + np.asarray(center, dtype=float)
    r = sample_norm(model, n, rng)
    pts = scale * r[:, None] * random_directions(n, model.dim, rng)
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


# --------------------------------------------------------------------------
# Estimators and predictive densities
# --------------------------------------------------------------------------


def mle_ball_estimator(x, m: float):
    """Projection of ``x`` onto the closed ball of radius ``m`` (rows if 2-d)."""
    if not m > 0:
        raise PreconditionError(f"ball radius must be positive, got {m!r}")
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(norm > m, m / norm, 1.0)
    return x * factor


@dataclass(frozen=True)
class Estimator:
    """Center estimator ``theta_hat(X)`` used by a predictive density.

    ``equivariant`` marks estimators of the form ``g(||x||) x``; the
    reduction of the risk to a function of ``||theta||`` is only valid for
    those.
    """

    kind: str
    m: float | None = None
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    equivariant: bool = True

    @classmethod
    def raw(cls) -> "Estimator":
        return cls("raw_x")

    @classmethod
    def mle_ball(cls, m: float) -> "Estimator":
        if not m > 0:
            raise ModelError(f"ball radius must be positive, got {m!r}")
        return cls("mle_ball", m=float(m))

    @classmethod
    def custom(cls, func: Callable, equivariant: bool = False) -> "Estimator":
        return cls("custom", func=func, equivariant=equivariant)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "raw_x":
            return x
        if self.kind == "mle_ball":
            return mle_ball_estimator(x, self.m)
        return np.asarray(self.func(x), dtype=float)

    def describe(self) -> str:
        if self.kind == "mle_ball":
            return f"mle-ball(m={self.m:g})"
        return self.kind


@dataclass(frozen=True)
class PredictiveSpec:
    """Predictive density ``y -> c^-d q(||y - theta_hat||^2 / c^2)``."""

    center: Estimator
    scale_c: float
    base: RadialModel

    def __post_init__(self):
        if not self.scale_c > 0:
            raise ModelError(f"scale factor must be positive, got {self.scale_c!r}")


def predictive_eval(spec: PredictiveSpec, center, y):
    """Value of the scale-expanded predictive density centred at ``center``."""
    return spec.base.density(y, center=center, scale=spec.scale_c)


# --------------------------------------------------------------------------
# Spec-string grammar
# --------------------------------------------------------------------------

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _number(token: str, what: str) -> float:
    if not re.fullmatch(_NUM, token.strip()):
        raise SpecParseError(f"invalid number for {what}: {token!r}", token)
    return float(token)


def _parse_mixing(token: str) -> Mixing:
    m = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", token)
    if not m:
        raise SpecParseError(f"invalid mixing spec {token!r}", token)
    name, body = m.group(1), m.group(2)
    args = [a for a in _split_top(body) if a]
    if name == "invgamma":
        if len(args) != 2:
            raise SpecParseError(f"invgamma takes two arguments: {token!r}", token)
        return Mixing.invgamma(_number(args[0], "invgamma shape"), _number(args[1], "invgamma scale"))
    if name == "point":
        if len(args) != 1:
            raise SpecParseError(f"point takes one argument: {token!r}", token)
        return Mixing.point(_number(args[0], "variance"))
    if name == "points":
        variances, weights = [], []
        for a in args:
            if ":" not in a:
                raise SpecParseError(f"expected variance:weight, got {a!r}", a)
            v, w = a.split(":", 1)
            variances.append(_number(v, "variance"))
            weights.append(_number(w, "weight"))
        return Mixing.discrete(variances, weights)
    raise SpecParseError(f"unknown mixing law {name!r}", name)


def parse_model(spec: str) -> RadialModel:
    """Build a model from ``normal:d=3,var=1``, ``uniball:d=3,m=1`` or
    ``mixnormal:d=2,mix=invgamma(0.5,0.5)``.

    Mixing laws: ``invgamma(a,b)``, ``point(v)``, ``points(v1:w1,v2:w2,...)``.
    """
    if ":" not in spec:
        raise SpecParseError(f"model spec needs 'kind:key=value,...', got {spec!r}", spec)
    kind, rest = spec.split(":", 1)
    kind = kind.strip()
    fields: dict[str, str] = {}
    for item in _split_top(rest):
        if "=" not in item:
            raise SpecParseError(f"expected key=value, got {item!r}", item)
        key, value = item.split("=", 1)
        fields[key.strip()] = value.strip()
    allowed = {"normal": {"d", "var"}, "uniball": {"d", "m"}, "mixnormal": {"d", "mix"}}
    if kind not in allowed:
        raise SpecParseError(f"unknown model kind {kind!r}", kind)
    for key in fields:
        if key not in allowed[kind]:
            raise SpecParseError(f"unknown key {key!r} for {kind}", key)
    if "d" not in fields:
        raise SpecParseError(f"model spec {spec!r} is missing d=", "d")
    d = _number(fields["d"], "d")
    if d != int(d) or d < 1:
        raise SpecParseError(f"d must be a positive integer, got {fields['d']!r}", fields["d"])
    d = int(d)
    try:
        if kind == "normal":
            return make_normal(d, _number(fields.get("var", "1"), "var"))
        if kind == "uniball":
            return make_uniform_ball(d, _number(fields.get("m", "1"), "m"))
        if "mix" not in fields:
            raise SpecParseError("mixnormal needs mix=...", "mix")
        return make_scale_mixture_normal(d, _parse_mixing(fields["mix"]))
    except SpecParseError:
        raise
    except ModelError as exc:
        raise SpecParseError(str(exc), spec) from exc
