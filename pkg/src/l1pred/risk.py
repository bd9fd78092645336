"""Integrated-L1 risk of scale-expanded plug-in predictive densities.

Let ``X ~ p(||x - theta||^2)`` and ``Y ~ q(||y - theta||^2)``. For the predictive
density ``y -> c^-d q(||y - theta_hat||^2 / c^2)``, the L1 loss given
``t1 = ||theta_hat - theta||`` is

    H_c(t1) = 2 E ||Y|| { F_V(l1(t1, ||Y||)) - F_V(l2(t1, ||Y||)) },

and the risk is ``E gamma(H_c(t1))``. Both expectations are one-dimensional
radial integrals evaluated with panelled Gauss-Legendre rules whose panel
edges follow the kinks of the integrand (the points where an ``l`` function
reaches +-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .loss import LossTransform
from .models import (
    Estimator,
    RadialModel,
    _require_unimodal,
    random_directions,
    sample_norm,
)
from .quadrature import (
    McSpec,
    QuadSpec,
    SearchSpec,
    find_crossings,
    golden_section,
    law_edges,
    panel_rule,
)
from .special import F_V, f_V, std_normal_cdf

__all__ = [
    "l1_c",
    "l2_c",
    "loss_given_deviation",
    "constant_risk",
    "plugin_risk_R1",
    "risk_derivative_at_one",
    "RiskCurve",
    "risk_curve",
    "OptimalScale",
    "optimal_c",
    "RiskEstimate",
    "estimator_deviations",
    "LossTable",
    "loss_table",
    "restricted_losses",
    "restricted_risk",
    "restricted_optimal_c",
    "C1Result",
    "c1_inf",
    "central_scale_L1",
    "dual_point_loss",
]

#: Deviations below this are treated as an exact hit of the location.
T1_ZERO = 1e-12
_MIN_PANEL_NODES = 16


def _check_c(c) -> float:
    c = float(c)
    if not (c > 0 and math.isfinite(c)):
        raise PreconditionError(f"scale factor must be a positive finite number, got {c!r}")
    return c


def _check_pair(p: RadialModel, q: RadialModel) -> None:
    if p.dim != q.dim:
        raise PreconditionError(f"p and q dimensions differ ({p.dim} vs {q.dim})")
    if p.dim < 2:
        raise PreconditionError(
            "the cross-angle reduction needs d >= 2; use univariate_uniform_risk for d = 1"
        )
    _require_unimodal(q)


# --------------------------------------------------------------------------
# l-functions
# --------------------------------------------------------------------------


def _positive_radii(t1, t2):
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t1 <= 0) or np.any(t2 <= 0):
        raise PreconditionError(
            "l-functions need t1, t2 > 0; a zero deviation must use central_scale_L1"
        )
    return t1, t2


def _level_inverse(q: RadialModel, c: float, t2, log_factor: float, upper: bool):
    if c == 1.0 and q.strictly_decreasing:
        # exact; the rounded round trip would cancel badly against t2^2 when t1 is tiny
        return t2 * t2
    return q.scaled_inverse(t2 * t2, log_factor, upper=upper)


def l1_c(q: RadialModel, c: float, t1, t2):
    """``(t1^2 + t2^2 - c^2 q^-1(q(t2^2) c^d)) / (2 t1 t2)``.

    The generalized inverse is evaluated in log space, so the product
    ``q(t2^2) c^d`` never under- or overflows.
    """
    c = _check_c(c)
    t1, t2 = _positive_radii(t1, t2)
    z = _level_inverse(q, c, t2, q.dim * math.log(c), upper=False)
    # difference first: t1^2 would be lost against t2^2 when t1 is tiny
    out = (t1 * t1 + (t2 * t2 - c * c * z)) / (2.0 * t1 * t2)
    return out[()] if out.ndim == 0 else out


def l2_c(q: RadialModel, c: float, t1, t2):
    """``(-t1^2 - c^2 t2^2 + q^-1(q(t2^2) / c^d)) / (2 c t1 t2)``.

    Uses the upper generalized inverse ``sup{z : q(z) >= level}``, which equals
    the usual one for strictly decreasing ``q``. On a flat generator (uniform
    ball) only the upper version puts the boundary of the predictive support
    in the right place.
    """
    c = _check_c(c)
    t1, t2 = _positive_radii(t1, t2)
    z = _level_inverse(q, c, t2, -q.dim * math.log(c), upper=True)
    with np.errstate(invalid="ignore"):
        out = ((z - c * c * t2 * t2) - t1 * t1) / (2.0 * c * t1 * t2)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Radial rules with kink-aware panels
# --------------------------------------------------------------------------


_SCAN_PER_PANEL = 24


def _panel_nodes(base_edges: np.ndarray, nodes: int) -> int:
    return max(_MIN_PANEL_NODES, math.ceil(nodes / max(base_edges.size - 1, 1)))


def _rowwise_rule(law, quad: QuadSpec, rows: int, kink_funcs, scale_pts=None, split_funcs=()):
    """Quadrature nodes/weights, one row per outer point, against ``law``.

    ``kink_funcs`` are row-wise functions whose sign changes mark kinks of
    the integrand; ``scale_pts`` adds row-specific scan points. Roots of
    ``split_funcs`` are found first and added to the scan, which separates
    kink pairs that would otherwise share one scan interval.
    """
    base = law_edges(law, quad.truncation_mass)
    top = base[-1]
    # uniform within panels: cosine-mapped nodes leave mid-panel gaps
    u = (np.arange(_SCAN_PER_PANEL) + 0.5) / _SCAN_PER_PANEL
    scan1 = (base[:-1, None] + u * np.diff(base)[:, None]).ravel()
    # kinks can slide towards 0 (l-functions blow up like 1/t2 there)
    near_zero = np.geomspace(1e-9 * top, scan1[0], 16, endpoint=False)
    scan = np.concatenate([near_zero, scan1, base[1:]])
    scan = np.broadcast_to(scan, (rows, scan.size))
    if scale_pts is not None:
        scan = np.concatenate([scan, np.clip(scale_pts, top * 1e-12, top)], axis=1)
    scan = np.sort(scan, axis=1)
    if split_funcs:
        extra_pts = []
        for f in split_funcs:
            roots = find_crossings([f], scan)
            roots = np.where(np.isnan(roots), top, roots)
            # interior points of each lobe separate crossing pairs inside it
            lo, hi = roots[:, :-1], roots[:, 1:]
            extra_pts += [roots] + [lo + u * (hi - lo) for u in (0.25, 0.5, 0.75)]
        scan = np.sort(np.concatenate([scan] + extra_pts, axis=1), axis=1)
    kinks = find_crossings(kink_funcs, scan) if kink_funcs else np.full((rows, 0), np.nan)
    kinks = np.where(np.isnan(kinks), top, np.clip(kinks, 0.0, top))
    edges = np.sort(np.concatenate([np.broadcast_to(base, (rows, base.size)), kinks], axis=1), axis=1)
    x, w = panel_rule(edges, _panel_nodes(base, quad.nodes))
    return x, w * law.pdf(x)


def _outer_rule(p: RadialModel, quad: QuadSpec, kink_funcs):
    base = law_edges(p.norm, quad.truncation_mass)
    edges = base
    if kink_funcs:
        scan1, _ = panel_rule(base, 16)
        scan1 = np.concatenate([np.geomspace(1e-9 * base[-1], scan1[0], 16, endpoint=False), scan1])
        roots = find_crossings(kink_funcs, scan1[None, :])
        roots = roots[~np.isnan(roots)]
        edges = np.unique(np.concatenate([base, roots[(roots > 0) & (roots < base[-1])]]))
    x, w = panel_rule(edges, _panel_nodes(base, quad.nodes))
    return x, w * p.norm.pdf(x)


def _support_kinks(q: RadialModel, c: float):
    """Outer kink functions in ``t1``: where the predictive ball boundary is tangent."""
    rq = q.support_radius
    if not math.isfinite(rq):
        return []
    return [
        lambda t: l1_c(q, c, t, rq) - 1.0,
        lambda t: l1_c(q, c, t, rq) + 1.0,
        lambda t: l2_c(q, c, t, rq) - 1.0,
        lambda t: l2_c(q, c, t, rq) + 1.0,
    ]


def loss_given_deviation(q: RadialModel, c: float, t1, quad: QuadSpec | None = None):
    """L1 loss ``H_c(t1)`` of the predictive density whose center is ``t1`` from ``theta``.

    Deviations below ``T1_ZERO`` are routed to :func:`central_scale_L1`.
    """
    quad = quad or QuadSpec()
    c = _check_c(c)
    _require_unimodal(q)
    if q.dim < 2:
        raise PreconditionError("the cross-angle reduction needs d >= 2")
    t1 = np.asarray(t1, dtype=float)
    flat = np.atleast_1d(t1).ravel()
    out = np.empty_like(flat)
    zero = flat < T1_ZERO
    if np.any(zero):
        out[zero] = central_scale_L1(q, c, quad)
    if np.any(~zero):
        out[~zero] = _loss_rows(q, c, flat[~zero], quad)
    out = out.reshape(t1.shape)
    return out[()] if out.ndim == 0 else out


def _loss_rows(q: RadialModel, c: float, t1: np.ndarray, quad: QuadSpec) -> np.ndarray:
    d = q.dim
    tc = t1[:, None]

    def l1(t2):
        return l1_c(q, c, tc, t2)

    def l2(t2):
        return l2_c(q, c, tc, t2)

    log_g0 = float(q.log_generator(np.array(0.0)))
    log_cd = d * math.log(c)

    def peak(t2, sign):
        # where q(t2^2) c^(+-d) reaches q(0) the inverse clamps to 0: a kink of l1 or l2
        with np.errstate(invalid="ignore"):
            return q.log_generator(t2 * t2) + sign * log_cd - log_g0 + 0.0 * tc

    funcs = [
        lambda t2: l1(t2) - 1.0,
        lambda t2: l1(t2) + 1.0,
        lambda t2: l2(t2) - 1.0,
        lambda t2: l2(t2) + 1.0,
        lambda t2: peak(t2, 1.0),
        lambda t2: peak(t2, -1.0),
    ]
    extra = tc * np.array([0.25, 0.5, 1.0, 2.0, 4.0])
    # l1 and l2 swing through [-1, 1] within ~t1 of their zeros
    y, w = _rowwise_rule(q.norm, quad, t1.size, funcs, extra, split_funcs=(l1, l2))
    diff = F_V(d, l1(y)) - F_V(d, l2(y))
    h = 2.0 * np.sum(w * diff, axis=1)
    return np.clip(h, 0.0, 2.0)


# --------------------------------------------------------------------------
# Constant risk
# --------------------------------------------------------------------------


def constant_risk(p: RadialModel, q: RadialModel, c: float,
                  gamma: LossTransform | None = None, quad: QuadSpec | None = None) -> float:
    """Risk ``E gamma(H_c(||X - theta||))`` of the scale-``c`` plug-in density.

    The risk does not depend on ``theta``. With ``quad.check_convergence``
    the value is recomputed with doubled nodes and a
    :class:`~l1pred.errors.ConvergenceError` is raised if the two differ by
    ``quad.tol`` or more.

    Raises
    ------
    PreconditionError
        For ``d = 1`` or mismatched dimensions. Also when ``q`` is not
        declared nonincreasing.
    """
    gamma = gamma or LossTransform.identity()
    quad = quad or QuadSpec()
    _check_pair(p, q)
    c = _check_c(c)
    value = _constant_risk(p, q, c, gamma, quad)
    if quad.check_convergence:
        finer = _constant_risk(p, q, c, gamma, quad.doubled())
        if not abs(finer - value) < quad.tol:
            raise ConvergenceError(
                f"risk at c={c:g} moved by {abs(finer - value):.3g} when nodes doubled"
            )
    return value


def _constant_risk(p, q, c, gamma, quad) -> float:
    x, w = _outer_rule(p, quad, _support_kinks(q, c))
    h = _loss_rows(q, c, x, quad)
    return float(np.sum(w * gamma.apply(h)))


def plugin_risk_R1(p: RadialModel, q: RadialModel, quad: QuadSpec | None = None) -> float:
    """Risk of the plug-in density (``c = 1``, identity loss).

    Evaluates ``4 E F_V(||X|| / (2 ||Y||)) - 2`` directly, without the
    ``l``-function machinery, so it serves as a cross-check of
    :func:`constant_risk`.
    """
    quad = quad or QuadSpec()
    _check_pair(p, q)
    d = p.dim
    rq = q.support_radius
    outer_kinks = [] if not math.isfinite(rq) else [lambda t: t - 2.0 * rq]
    x, wx = _outer_rule(p, quad, outer_kinks)
    xc = x[:, None]
    y, wy = _rowwise_rule(q.norm, quad, x.size, [lambda t2: xc - 2.0 * t2], 0.5 * xc)
    inner = np.sum(wy * F_V(d, xc / (2.0 * y)), axis=1)
    return float(4.0 * np.sum(wx * inner) - 2.0)


def risk_derivative_at_one(p: RadialModel, q: RadialModel, gamma: LossTransform | None = None,
                           quad: QuadSpec | None = None) -> float:
    """Right derivative of ``R(c)`` at ``c = 1``.

    ``-E{ gamma'(H_1(||X||)) E[f_V(||X|| / (2||Y||)) ||X|| / ||Y||] }``, which is
    negative whenever ``q`` is strictly decreasing.
    """
    gamma = gamma or LossTransform.identity()
    quad = quad or QuadSpec()
    _check_pair(p, q)
    if not q.strictly_decreasing:
        raise PreconditionError(
            f"{q.describe()} is not strictly decreasing; the derivative at c = 1 needs it"
        )
    d = p.dim
    x, wx = _outer_rule(p, quad, [])
    h1 = _loss_rows(q, 1.0, x, quad)
    xc = x[:, None]
    y, wy = _rowwise_rule(q.norm, quad, x.size, [lambda t2: xc - 2.0 * t2], 0.5 * xc)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = f_V(d, xc / (2.0 * y))
    dens = np.where(np.isfinite(dens), dens, 0.0)
    inner = np.sum(wy * dens * xc / y, axis=1)
    return float(-np.sum(wx * gamma.derivative(h1) * inner))


@dataclass(frozen=True)
class RiskCurve:
    """Risks over an increasing grid of scale factors."""

    grid: np.ndarray
    values: np.ndarray
    std_errs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0 or np.any(np.diff(g) <= 0):
            raise PreconditionError("risk curve grid must be nonempty and strictly increasing")

    def argmin(self) -> int:
        return int(np.argmin(self.values))


def risk_curve(p: RadialModel, q: RadialModel, c_grid, gamma: LossTransform | None = None,
               quad: QuadSpec | None = None) -> RiskCurve:
    """:func:`constant_risk` over ``c_grid``."""
    gamma = gamma or LossTransform.identity()
    quad = quad or QuadSpec()
    grid = np.asarray(c_grid, dtype=float)
    if grid.size == 0:
        raise PreconditionError("empty c grid")
    vals = np.array([constant_risk(p, q, c, gamma, quad) for c in grid])
    meta = {"p": p.describe(), "q": q.describe(), "d": p.dim, "gamma": gamma.describe(),
            "quad_nodes": quad.nodes, "truncation_mass": quad.truncation_mass}
    return RiskCurve(grid, vals, np.zeros_like(vals), meta)


class OptimalScale(NamedTuple):
    c_star: float
    risk: float
    boundary: bool


def _grid_then_golden(f: Callable[[float], float], search: SearchSpec) -> OptimalScale:
    grid = search.grid()
    vals = np.array([f(c) for c in grid])
    i = int(np.argmin(vals))
    if i == grid.size - 1:
        return OptimalScale(float(grid[i]), float(vals[i]), True)
    lo = grid[max(i - 1, 0)]
    hi = grid[i + 1]
    c_ref, v_ref = golden_section(f, lo, hi, search.tol)
    if v_ref > vals[i]:
        c_ref, v_ref = grid[i], vals[i]
    return OptimalScale(float(c_ref), float(v_ref), False)


def optimal_c(p: RadialModel, q: RadialModel, gamma: LossTransform | None = None,
              quad: QuadSpec | None = None, search: SearchSpec | None = None) -> OptimalScale:
    """Minimise :func:`constant_risk` over ``c`` in ``[c_min, c_max]``.

    A coarse grid locates the global minimum; golden section refines it on
    the neighbouring grid cells. A minimum at ``c_max`` is returned with
    ``boundary=True`` (risk still decreasing, as for very heavy tails).
    """
    gamma = gamma or LossTransform.identity()
    quad = quad or QuadSpec()
    search = search or SearchSpec()
    _check_pair(p, q)
    return _grid_then_golden(lambda c: _constant_risk(p, q, c, gamma, quad), search)


# --------------------------------------------------------------------------
# Restricted parameter space
# --------------------------------------------------------------------------


class RiskEstimate(NamedTuple):
    risk: float
    std_err: float
    n: int


def estimator_deviations(p: RadialModel, estimator: Estimator, lam: float,
                         mc: McSpec | None = None) -> np.ndarray:
    """Draws of ``||theta_hat(X) - theta||`` at ``theta = (lam, 0, ..., 0)``.

    Draws are generated in chunks of ``mc.batch`` with seeds spawned from
    ``mc.seed``; the same seed gives the same ``X - theta`` for every ``lam``.
    """
    mc = mc or McSpec()
    if not estimator.equivariant:
        raise PreconditionError(
            "estimator is not orthogonally equivariant; the risk is not a function of ||theta||"
        )
    if lam < 0:
        raise PreconditionError(f"lambda must be nonnegative, got {lam!r}")
    d = p.dim
    theta = np.zeros(d)
    theta[0] = lam
    n_chunks = math.ceil(mc.n / mc.batch)
    seeds = np.random.SeedSequence(mc.seed).spawn(n_chunks)
    out = []
    for k, ss in enumerate(seeds):
        size = min(mc.batch, mc.n - k * mc.batch)
        rng = np.random.default_rng(ss)
        r = sample_norm(p, size, rng)
        x = r[:, None] * random_directions(size, d, rng) + theta
        out.append(np.linalg.norm(estimator(x) - theta, axis=1))
    return np.concatenate(out)


@dataclass(frozen=True)
class LossTable:
    """Piecewise Chebyshev interpolant of ``t1 -> H_c(t1)`` on ``[0, t_max]``."""

    c: float
    breaks: np.ndarray
    pieces: tuple
    central: float

    def __call__(self, t1):
        t1 = np.asarray(t1, dtype=float)
        tt = np.clip(t1, 0.0, self.breaks[-1])
        idx = np.clip(np.searchsorted(self.breaks, tt, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(tt)
        for k, piece in enumerate(self.pieces):
            sel = idx == k
            if np.any(sel):
                out[sel] = piece(tt[sel])
        out = np.where(t1 < T1_ZERO, self.central, np.clip(out, 0.0, 2.0))
        return out


def _small_deviation_scale(q: RadialModel, c: float) -> float:
    """``t1`` at which an l-function changes sign as ``t2 -> 0``."""
    if c == 1.0:
        return 0.0
    log_g0 = float(q.log_generator(np.array(0.0)))
    if c > 1.0:
        z = float(q.inverse_log_level(np.array(log_g0 - q.dim * math.log(c)), upper=True))
        return math.sqrt(z) if math.isfinite(z) else 0.0
    z = float(q.inverse_log_level(np.array(log_g0 + q.dim * math.log(c))))
    return c * math.sqrt(z) if math.isfinite(z) else 0.0


def loss_table(q: RadialModel, c: float, t_max: float, quad: QuadSpec | None = None,
               degree: int = 40, segments: int = 8) -> LossTable:
    """Tabulate :func:`loss_given_deviation` for fast evaluation at many deviations.

    Segment breaks include the tangency radii ``|1-c| R`` and ``(1+c) R`` of a
    bounded ``q`` (support radius ``R``), where ``H_c`` has kinks.
    """
    quad = quad or QuadSpec()
    c = _check_c(c)
    if not t_max > 0:
        raise PreconditionError("t_max must be positive")
    breaks = [np.linspace(0.0, t_max, segments + 1)]
    # H_c bends near 0 on a scale that shrinks with |c - 1|
    breaks.append(t_max / segments * 4.0 ** -np.arange(1, 7))
    t_star = _small_deviation_scale(q, c)
    if t_star > 0:
        # H_c bends on the scale t_star near 0; resolve it with geometric breaks
        breaks.append(t_star * np.array([0.0625, 0.125, 0.25, 0.5, 1.0, 2.0]))
    rq = q.support_radius
    if math.isfinite(rq):
        breaks.append(np.array([abs(1.0 - c) * rq, (1.0 + c) * rq]))
    br = np.unique(np.concatenate(breaks))
    br = br[(br >= 0) & (br <= t_max)]
    # merge near-duplicate breaks, keeping both ends
    keep = np.concatenate([[True], np.diff(br) > 1e-9 * t_max])
    keep[-1] = True
    br = np.unique(np.concatenate([br[keep], [0.0, t_max]]))
    cheb = np.polynomial.chebyshev
    ref = cheb.chebpts1(degree + 1)
    pts = [(0.5 * (a + b) + 0.5 * (b - a) * ref) for a, b in zip(br[:-1], br[1:])]
    vals = _loss_rows(q, c, np.concatenate(pts), quad).reshape(len(pts), -1)
    pieces = tuple(
        np.polynomial.Chebyshev(cheb.chebfit(ref, v, degree), domain=[a, b])
        for v, a, b in zip(vals, br[:-1], br[1:])
    )
    return LossTable(c, br, pieces, central_scale_L1(q, c, quad))


def restricted_losses(p: RadialModel, q: RadialModel, c: float, estimator: Estimator, lam: float,
                      gamma: LossTransform | None = None, mc: McSpec | None = None,
                      quad: QuadSpec | None = None) -> np.ndarray:
    """Per-draw transformed losses ``gamma(H_c(||theta_hat(X) - theta||))``."""
    gamma = gamma or LossTransform.identity()
    _check_pair(p, q)
    t1 = estimator_deviations(p, estimator, lam, mc)
    table = loss_table(q, c, float(t1.max()) * (1 + 1e-9) + 1e-12, quad)
    return gamma.apply(table(t1))


def restricted_risk(p: RadialModel, q: RadialModel, c: float, estimator: Estimator, lam: float,
                    gamma: LossTransform | None = None, mc: McSpec | None = None,
                    quad: QuadSpec | None = None) -> RiskEstimate:
    """Risk at any ``theta`` with ``||theta|| = lam`` and its Monte-Carlo std-err.

    The outer expectation over ``X`` is Monte Carlo; the inner one over
    ``||Y||`` is quadrature. Using the same ``mc.seed`` across calls gives
    common random numbers, so differences between calls have far smaller
    error than the individual std-errs suggest.
    """
    losses = restricted_losses(p, q, c, estimator, lam, gamma, mc, quad)
    return RiskEstimate(float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(losses.size)),
                        int(losses.size))


class _RestrictedSearch:
    """Shared draws and loss tables for searches over ``c`` at several ``lam``."""

    def __init__(self, p, q, estimator, lams, gamma, mc, quad):
        self.q = q
        self.gamma = gamma
        self.quad = quad
        self.t1 = {float(lam): estimator_deviations(p, estimator, lam, mc) for lam in lams}
        self.t_max = max(float(t.max()) for t in self.t1.values()) * (1 + 1e-9) + 1e-12
        self._tables: dict[float, LossTable] = {}
        self._losses: dict[tuple[float, float], np.ndarray] = {}

    def losses(self, lam: float, c: float) -> np.ndarray:
        key_c = round(float(c), 12)
        key = (float(lam), key_c)
        if key not in self._losses:
            if key_c not in self._tables:
                self._tables[key_c] = loss_table(self.q, key_c, self.t_max, self.quad)
            self._losses[key] = self.gamma.apply(self._tables[key_c](self.t1[float(lam)]))
        return self._losses[key]

    def risk(self, lam: float, c: float) -> float:
        return float(self.losses(lam, c).mean())


def restricted_optimal_c(p: RadialModel, q: RadialModel, estimator: Estimator, lam: float,
                         gamma: LossTransform | None = None, mc: McSpec | None = None,
                         quad: QuadSpec | None = None,
                         search: SearchSpec | None = None) -> OptimalScale:
    """``c*_1(lam)``: minimiser over ``c`` of the restricted risk at ``||theta|| = lam``."""
    gamma = gamma or LossTransform.identity()
    quad = quad or QuadSpec()
    search = search or SearchSpec()
    _check_pair(p, q)
    s = _RestrictedSearch(p, q, estimator, [lam], gamma, mc or McSpec(), quad)
    return _grid_then_golden(lambda c: s.risk(lam, c), search)


@dataclass(frozen=True)
class C1Result:
    """Result of :func:`c1_inf`.

    ``spread`` is the standard deviation of ``c1`` over bootstrap resamples of
    the Monte-Carlo draws; ``boundary`` lists the ``lam`` whose minimiser sat
    at the search boundary.
    """

    c1: float
    lam_at_inf: float
    lambdas: np.ndarray
    c_star: np.ndarray
    risks: np.ndarray
    spread: float
    bootstrap: np.ndarray
    boundary: tuple


def c1_inf(p: RadialModel, q: RadialModel, estimator: Estimator, m: float, lambda_grid,
           gamma: LossTransform | None = None, mc: McSpec | None = None,
           quad: QuadSpec | None = None, search: SearchSpec | None = None,
           n_boot: int = 8) -> C1Result:
    """``c1 = inf over lam in lambda_grid of c*_1(lam)`` for ``||theta|| <= m``.

    Scale expansions ``c`` in ``(1, c1]`` improve on ``c = 1`` at every grid
    point. Loss tables are shared across ``lam``; draws use common random
    numbers. Bootstrap resamples re-minimise on a fine local grid
    (step ``search.step / 10``) around each ``c*_1(lam)``.
    """
    gamma = gamma or LossTransform.identity()
    mc = mc or McSpec()
    quad = quad or QuadSpec()
    search = search or SearchSpec()
    _check_pair(p, q)
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size == 0:
        raise PreconditionError("empty lambda grid")
    if np.any(lams < 0) or np.any(lams > m * (1 + 1e-12)):
        raise PreconditionError(f"lambda grid must lie in [0, m] = [0, {m:g}]")
    s = _RestrictedSearch(p, q, estimator, lams, gamma, mc, quad)
    found = [_grid_then_golden(lambda c, lam=lam: s.risk(lam, c), search) for lam in lams]
    c_star = np.array([f.c_star for f in found])
    risks = np.array([f.risk for f in found])
    k = int(np.argmin(c_star))

    boot = np.empty(n_boot)
    if n_boot > 0:
        rng = np.random.default_rng(np.random.SeedSequence(mc.seed).spawn(2)[1])
        weights = rng.multinomial(mc.n, np.full(mc.n, 1.0 / mc.n), size=n_boot).astype(float)
        fine = search.step / 10.0
        per_lam = np.empty((n_boot, lams.size))
        for j, (lam, c0) in enumerate(zip(lams, c_star)):
            center = round(c0 / fine) * fine
            grid = center + fine * np.arange(-10, 11)
            grid = grid[(grid >= search.c_min) & (grid <= search.c_max)]
            mat = np.stack([s.losses(lam, c) for c in grid], axis=1)
            risk_b = weights @ mat / mc.n
            per_lam[:, j] = grid[np.argmin(risk_b, axis=1)]
        boot = per_lam.min(axis=1)
    spread = float(boot.std(ddof=1)) if n_boot > 1 else float("nan")
    boundary = tuple(float(lam) for lam, f in zip(lams, found) if f.boundary)
    return C1Result(float(c_star[k]), float(lams[k]), lams, c_star, risks, spread, boot, boundary)


def central_scale_L1(q: RadialModel, c: float, quad: QuadSpec | None = None) -> float:
    """``int |q(||y||^2) - c^-d q(||y||^2 / c^2)| dy`` for concentric densities.

    A one-dimensional radial integral split at the support edges and at the
    radius where the two densities cross.
    """
    quad = quad or QuadSpec()
    c = _check_c(c)
    if c == 1.0:
        return 0.0
    law = q.norm
    base = law_edges(law, quad.truncation_mass)
    edges = np.unique(np.concatenate([base, c * base]))

    def diff(r):
        return law.pdf(r) - law.pdf(r / c) / c

    scan, _ = panel_rule(edges, 16)
    roots = find_crossings([diff], scan[None, :])
    roots = roots[~np.isnan(roots)]
    edges = np.unique(np.concatenate([edges, roots]))
    r, w = panel_rule(edges, _panel_nodes(base, quad.nodes))
    # beyond the last edge the sign is fixed, so the tail integral is a c.d.f. difference
    t = edges[-1]
    tail = abs(float(law.cdf(t / c)) - float(law.cdf(t))) if math.isinf(law.upper) else 0.0
    return float(min(2.0, np.sum(w * np.abs(diff(r))) + tail))


def dual_point_loss(theta_hat, theta) -> float:
    """``4 Phi(||theta_hat - theta|| / 2) - 2``: the plug-in L1 loss for unit-variance normal ``q``."""
    delta = np.asarray(theta_hat, dtype=float) - np.asarray(theta, dtype=float)
    dist = np.linalg.norm(np.atleast_1d(delta), axis=-1)
    out = 4.0 * std_normal_cdf(0.5 * dist) - 2.0
    return out[()] if np.ndim(out) == 0 else out
