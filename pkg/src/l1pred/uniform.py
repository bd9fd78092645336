"""Closed forms for uniform targets and the normal plug-in risk.

Covers the posterior-median (Bayes under a flat prior) predictive density
for a uniform sample, the risk of scaled uniform predictive densities in
one and several dimensions, the intersection volume of two balls, and the
hypergeometric form of the normal plug-in risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy import special as sc

from .errors import InconsistentDataError, NoValidDensityError, PreconditionError
from .models import NormLaw, make_normal
from .quadrature import law_edges, panel_rule
from .special import F_Y1, ball_volume, gauss_2f1, std_normal_cdf

__all__ = [
    "UniformBayesInput",
    "IntervalDensity",
    "bayes_uniform_predictive",
    "midrange_norm_law",
    "uniform_abs_law",
    "scaled_law",
    "univariate_uniform_risk",
    "ConditionReport",
    "check_plugin_optimality",
    "ball_intersection_volume",
    "multivariate_uniform_risk",
    "uniform_d3_closed_risk",
    "normal_R1_hypergeometric",
    "normal_R1_quadrature",
    "normal_R1",
]

_GRID_NODES = 192


# --------------------------------------------------------------------------
# Posterior-median predictive density for a uniform sample
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformBayesInput:
    """Sample from ``U(theta - A, theta + A)`` and the half-width ``B`` of the target."""

    sample: tuple
    A: float
    B: float

    def __post_init__(self):
        x = np.asarray(self.sample, dtype=float).ravel()
        if x.size < 1:
            raise PreconditionError("sample must contain at least one value")
        if not np.all(np.isfinite(x)):
            raise PreconditionError("sample values must be finite")
        if not (self.A > 0 and self.B > 0):
            raise PreconditionError(f"A and B must be positive, got A={self.A!r}, B={self.B!r}")
        object.__setattr__(self, "sample", tuple(float(v) for v in x))
        if self.range > 2.0 * self.A:
            raise InconsistentDataError(
                f"sample range {self.range:g} exceeds 2A = {2 * self.A:g}; "
                "impossible under U(theta - A, theta + A)"
            )

    @property
    def range(self) -> float:
        return max(self.sample) - min(self.sample)

    @property
    def midrange(self) -> float:
        return 0.5 * (max(self.sample) + min(self.sample))


@dataclass(frozen=True)
class IntervalDensity:
    """The ``U(center - half_width, center + half_width)`` density."""

    center: float
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise PreconditionError("half-width must be positive")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y - self.center) <= self.half_width, 0.5 / self.half_width, 0.0)

    def __str__(self) -> str:
        return f"U({_fmt(self.lower)}, {_fmt(self.upper)})"


def _fmt(v: float) -> str:
    out = f"{v:.10g}"
    return "0" if out == "-0" else out


def bayes_uniform_predictive(data: UniformBayesInput) -> IntervalDensity:
    """Pointwise posterior median of ``q_theta(y)`` under a flat prior on ``theta``.

    The posterior of ``theta`` is uniform on ``(x_(n) - A, x_(1) + A)``, of
    width ``w = 2A - range``. The median of ``q_theta(y)`` is ``1/(2B)`` exactly
    when more than half of that posterior lies within ``B`` of ``y``, which
    gives ``U(midrange - B, midrange + B)`` whenever ``w < 4B`` and the zero
    function otherwise. ``B >= A/2`` always satisfies ``w < 4B`` (up to a
    null set of ties).

    Raises
    ------
    NoValidDensityError
        If ``B < A/2`` and ``range < 2A - 4B``: the median is 0 for all ``y``.
    InconsistentDataError
        If ``range > 2A`` (raised when building the input).
    """
    A, B = data.A, data.B
    if B < A / 2.0 and data.range < 2.0 * A - 4.0 * B:
        raise NoValidDensityError(
            f"B = {B:g} < A/2 = {A / 2:g} and range {data.range:g} < 2A - 4B = {2 * A - 4 * B:g}: "
            "the posterior median of q_theta(y) is 0 for every y, so no valid density exists"
        )
    return IntervalDensity(data.midrange, B)


def midrange_norm_law(n: int, A: float) -> NormLaw:
    """Law of ``|midrange - theta|`` for ``n`` i.i.d. ``U(theta - A, theta + A)`` draws.

    Density ``n (A - s)^(n-1) / A^n`` on ``(0, A)``, c.d.f. ``1 - (1 - s/A)^n``,
    obtained from the joint law of the two extreme order statistics.
    """
    if int(n) != n or n < 1:
        raise PreconditionError(f"n must be a positive integer, got {n!r}")
    if not A > 0:
        raise PreconditionError(f"A must be positive, got {A!r}")

    def pdf(s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0) & (s <= A)
        return np.where(inside, n * np.clip(A - s, 0.0, None) ** (n - 1) / A ** n, 0.0)

    def cdf(s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, A)
        return 1.0 - (1.0 - s / A) ** n

    def ppf(u):
        return A * (1.0 - (1.0 - np.asarray(u, dtype=float)) ** (1.0 / n))

    return NormLaw(pdf=pdf, cdf=cdf, upper=float(A), ppf=ppf, label=f"|midrange| n={n}")


def uniform_abs_law(A: float) -> NormLaw:
    """Law of ``|X - theta|`` for ``X ~ U(theta - A, theta + A)``."""
    return midrange_norm_law(1, A)


def scaled_law(law: NormLaw, s: float) -> NormLaw:
    """Law of ``R / s`` given the law of ``R``."""
    if not s > 0:
        raise PreconditionError("scale must be positive")
    return NormLaw(
        pdf=lambda r: s * law.pdf(np.asarray(r, dtype=float) * s),
        cdf=lambda r: law.cdf(np.asarray(r, dtype=float) * s),
        upper=law.upper / s,
        ppf=None if law.ppf is None else (lambda u: law.ppf(u) / s),
        isf=None if law.isf is None else (lambda u: law.isf(u) / s),
        label=f"({law.label}) / {s:g}",
    )


# --------------------------------------------------------------------------
# Univariate uniform target
# --------------------------------------------------------------------------


def _check_c(c) -> float:
    c = float(c)
    if not (c > 0 and math.isfinite(c)):
        raise PreconditionError(f"scale factor must be a positive finite number, got {c!r}")
    return c


def _first_moment(law: NormLaw, a: float, b: float) -> float:
    hi = min(b, law.upper)
    if hi <= a:
        return 0.0
    pts = [p for p in (1.0, 2.0) if a < p < hi] or None
    val, _ = integrate.quad(lambda t: t * law.pdf(t), a, hi, points=pts, limit=200,
                            epsabs=1e-13, epsrel=1e-12)
    return val


def univariate_uniform_risk(abs_law: NormLaw, c: float, B: float = 1.0,
                            branch: str | None = None) -> float:
    """Risk of ``U(X - cB, X + cB)`` for ``Y ~ U(theta - B, theta + B)``.

    ``abs_law`` is the law of ``|X - theta|`` in the original units; it is
    rescaled by ``1/B`` and the normalized formulas are applied, with
    ``f`` the density of the rescaled ``|X - theta|``:

    * ``c < 1``: ``2 + (1-c)P(|X| < 1-c) - (1+c)P(|X| < 1+c) + int_{1-c}^{1+c} t f``
    * ``c >= 1``: ``2 + (1-1/c)P(|X| <= c-1) - (1+1/c)P(|X| < c+1) + (1/c) int_{c-1}^{c+1} t f``

    ``branch`` (``"lower"`` or ``"upper"``) forces one of the two formulas,
    e.g. to compare them at ``c = 1``.
    """
    c = _check_c(c)
    if branch not in (None, "lower", "upper"):
        raise PreconditionError(f"branch must be 'lower' or 'upper', got {branch!r}")
    law = abs_law if B == 1.0 else scaled_law(abs_law, B)
    F = law.cdf
    lower = c < 1.0 if branch is None else branch == "lower"
    if lower:
        val = (2.0 + (1.0 - c) * F(1.0 - c) - (1.0 + c) * F(1.0 + c)
               + _first_moment(law, 1.0 - c, 1.0 + c))
    else:
        val = (2.0 + (1.0 - 1.0 / c) * F(c - 1.0) - (1.0 + 1.0 / c) * F(c + 1.0)
               + _first_moment(law, c - 1.0, c + 1.0) / c)
    return float(np.clip(val, 0.0, 2.0))


class ConditionReport(NamedTuple):
    """Grid check of the two sufficient conditions for optimality of ``c = 1``.

    Each status is ``"holds"``, ``"fails"`` or ``"undetermined"``; "holds"
    means at grid resolution only.
    """

    condition_i: str
    condition_ii: str
    conditional_mean: float

    @property
    def plugin_optimal(self) -> bool:
        return "holds" in (self.condition_i, self.condition_ii)


def check_plugin_optimality(abs_law: NormLaw, B: float = 1.0, grid_size: int = 1000,
                            s_max: float | None = None) -> ConditionReport:
    """Check the sufficient conditions under which ``c = 1`` is optimal in one dimension.

    (i) ``E(|X| | |X| <= 2) <= 1`` and ``f(s) >= f(s + 2)`` for ``s > 0``;
    (ii) ``f`` nonincreasing on ``(0, inf)``. Here ``f`` is the density of
    ``|X - theta| / B``. Inequalities are sampled on ``grid_size`` points of
    ``(0, s_max]``; ``s_max`` defaults to the support edge, or the ``1 - 1e-10``
    quantile for unbounded laws.
    """
    law = abs_law if B == 1.0 else scaled_law(abs_law, B)
    p2 = float(law.cdf(2.0))
    if s_max is None:
        s_max = law.upper if math.isfinite(law.upper) else law.upper_quantile(1e-10)
    s = np.linspace(0.0, s_max, grid_size + 1)[1:]
    f = law.pdf(s)
    slack = 1e-12 * max(float(np.max(f)), 1.0)
    # evaluate just inside the support edge so a closed/open endpoint does not matter
    s_in = np.where(s >= law.upper, law.upper * (1 - 1e-12), s)
    f_in = law.pdf(s_in)
    ii = "holds" if np.all(np.diff(f_in) <= slack) else "fails"
    if p2 <= 0.0:
        return ConditionReport("undetermined", ii, float("nan"))
    cond_mean = _first_moment(law, 0.0, 2.0) / p2
    tail_ok = np.all(f_in >= law.pdf(s_in + 2.0) - slack)
    i = "holds" if (cond_mean <= 1.0 + 1e-12 and tail_ok) else "fails"
    return ConditionReport(i, ii, float(cond_mean))


# --------------------------------------------------------------------------
# Multivariate uniform target
# --------------------------------------------------------------------------


def ball_intersection_volume(d: int, x_norm, c: float):
    """Volume of ``B_0(1)`` intersected with ``B_x(c)`` for ``||x|| = x_norm > 0``.

    ``V_d(1) {1 - F_Y1(x/2 + (1-c^2)/(2x)) + c^d F_Y1(-x/(2c) + (1-c^2)/(2cx))}``,
    clamped to ``[0, min(V_d(1), V_d(c))]``. The concentric case ``x_norm = 0``
    is the caller's, with value ``min(V_d(1), V_d(c))``.
    """
    if int(d) != d or d < 2:
        raise PreconditionError(f"d must be an integer >= 2, got {d!r}")
    c = _check_c(c)
    x = np.asarray(x_norm, dtype=float)
    if np.any(x <= 0):
        raise PreconditionError("x_norm must be positive; use min(V_d(1), V_d(c)) for x = 0")
    v1 = ball_volume(d)
    k = (1.0 - c * c) / (2.0 * x)
    val = v1 * (1.0 - F_Y1(d, x / 2.0 + k) + c ** d * F_Y1(d, -x / (2.0 * c) + k / c))
    out = np.clip(val, 0.0, min(v1, v1 * c ** d))
    return out[()] if np.ndim(out) == 0 else out


def _expect(law: NormLaw, func, kinks, nodes: int = _GRID_NODES, truncation_mass: float = 1e-12):
    base = law_edges(law, truncation_mass)
    inner = [k for k in kinks if 0.0 < k < base[-1]]
    edges = np.unique(np.concatenate([base, inner]))
    x, w = panel_rule(edges, max(24, math.ceil(nodes / (edges.size - 1))))
    return float(np.sum(w * law.pdf(x) * func(x)))


def multivariate_uniform_risk(abs_law: NormLaw, d: int, c: float, m: float = 1.0) -> float:
    """Risk of the uniform density on ``B_X(c m)`` for ``Y`` uniform on ``B_theta(m)``.

    ``abs_law`` is the law of ``||X - theta||`` in original units; lengths are
    divided by ``m``. With ``E`` over the normalized ``||X||``:

    * ``c <= 1``: ``2[E{F_Y1(x/2 - (c^2-1)/(2x)) + c^d F_Y1(x/(2c) + (c^2-1)/(2cx))} - c^d]``
    * ``c > 1``: ``(2/c^d)[E{same bracket} - 1]``
    """
    if int(d) != d or d < 2:
        raise PreconditionError("multivariate path needs d >= 2; use univariate_uniform_risk")
    c = _check_c(c)
    law = abs_law if m == 1.0 else scaled_law(abs_law, m)
    k = c * c - 1.0

    def bracket(x):
        return F_Y1(d, x / 2.0 - k / (2.0 * x)) + c ** d * F_Y1(d, x / (2.0 * c) + k / (2.0 * c * x))

    e = _expect(law, bracket, [abs(c - 1.0), c + 1.0])
    if c <= 1.0:
        val = 2.0 * (e - c ** d)
    else:
        val = 2.0 * (e - 1.0) / c ** d
    return float(np.clip(val, 0.0, 2.0))


def uniform_d3_closed_risk(c):
    """Exact risk for ``X`` and ``Y`` both uniform on the unit ball of R^3.

    ``(-c^6 + 18c^4 - 32c^3 + 32)/16`` on (0, 1], ``c(18 - c^2)/16`` on (1, 2],
    ``2(1 - 1/c^3)`` beyond.
    """
    c = np.asarray(c, dtype=float)
    if np.any(~(c > 0)):
        raise PreconditionError("scale factor must be positive")
    low = (-c ** 6 + 18.0 * c ** 4 - 32.0 * c ** 3 + 32.0) / 16.0
    mid = c * (18.0 - c * c) / 16.0
    high = 2.0 * (1.0 - 1.0 / c ** 3)
    out = np.where(c <= 1.0, low, np.where(c <= 2.0, mid, high))
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Normal plug-in risk
# --------------------------------------------------------------------------


def normal_R1_hypergeometric(d: int, r: float) -> float:
    """Plug-in risk for ``X ~ N_d(theta, s I)``, ``Y ~ N_d(theta, r s I)``.

    ``Gamma((d+1)/2)/Gamma(d/2) sqrt(4/(r pi)) 2F1((d+1)/2, 1/2; 3/2; -1/(4r))``.

    Raises
    ------
    PreconditionError
        For ``r <= 1/4``, where the series argument leaves the unit disc;
        use :func:`normal_R1_quadrature` (or :func:`normal_R1`) instead.
    """
    if int(d) != d or d < 1:
        raise PreconditionError(f"d must be a positive integer, got {d!r}")
    if not r > 0.25:
        raise PreconditionError(
            f"hypergeometric form needs r > 1/4 so that |-1/(4r)| < 1; got r = {r!r}"
        )
    lead = math.exp(sc.gammaln((d + 1) / 2.0) - sc.gammaln(d / 2.0)) * math.sqrt(4.0 / (r * math.pi))
    return float(lead * gauss_2f1((d + 1) / 2.0, 0.5, 1.5, -1.0 / (4.0 * r)))


def normal_R1_quadrature(d: int, r: float, nodes: int = _GRID_NODES) -> float:
    """``4 E Phi(||Z|| / (2 sqrt r)) - 2`` for ``Z ~ N_d(0, I)``, by radial quadrature."""
    if int(d) != d or d < 1:
        raise PreconditionError(f"d must be a positive integer, got {d!r}")
    if not r > 0:
        raise PreconditionError(f"r must be positive, got {r!r}")
    law = make_normal(int(d), 1.0).norm
    e = _expect(law, lambda x: std_normal_cdf(x / (2.0 * math.sqrt(r))), [], nodes,
                truncation_mass=1e-15)
    return 4.0 * e - 2.0


def normal_R1(d: int, r: float) -> float:
    """Normal plug-in risk: hypergeometric series for ``r > 1/4``, quadrature otherwise."""
    if r > 0.25:
        return normal_R1_hypergeometric(d, r)
    return normal_R1_quadrature(d, r)
