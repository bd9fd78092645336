"""Cross-validation suite: analytic results against closed forms and oracles.

Each ``criterion_N`` function runs one group of comparisons and returns a
:class:`CriterionReport`. ``tier="full"`` uses the documented budgets;
``tier="quick"`` shrinks Monte-Carlo sizes and grids so the whole suite runs
in a couple of minutes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from . import oracle
from .errors import NoValidDensityError
from .loss import LossTransform
from .models import (
    Estimator,
    Mixing,
    make_normal,
    make_scale_mixture_normal,
    make_uniform_ball,
)
from .quadrature import McSpec, QuadSpec, SearchSpec
from .risk import (
    c1_inf,
    central_scale_L1,
    constant_risk,
    estimator_deviations,
    loss_given_deviation,
    loss_table,
    optimal_c,
    plugin_risk_R1,
    restricted_risk,
    risk_derivative_at_one,
)
from .special import F_V, F_Y1, f_V, f_Y1, gauss_2f1
from .uniform import (
    UniformBayesInput,
    ball_intersection_volume,
    bayes_uniform_predictive,
    multivariate_uniform_risk,
    normal_R1_hypergeometric,
    normal_R1_quadrature,
    uniform_abs_law,
    univariate_uniform_risk,
    uniform_d3_closed_risk,
)

__all__ = ["CheckResult", "CriterionReport", "CRITERIA", "run_validation", "crossing_lambda"]


@dataclass(frozen=True)
class CheckResult:
    """One comparison. ``tolerance`` is absolute unless ``std_err > 0``, in
    which case it is a multiple of ``std_err``."""

    name: str
    passed: bool
    observed: float
    expected: float
    tolerance: float
    std_err: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "ok  " if self.passed else "FAIL"
        se = f" se={self.std_err:.3g}" if self.std_err > 0 else ""
        extra = f" ({self.detail})" if self.detail else ""
        return (f"  [{status}] {self.name}: observed={self.observed:.10g} "
                f"expected={self.expected:.10g} tol={self.tolerance:.3g}{se}{extra}")


@dataclass
class CriterionReport:
    number: int
    title: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0
    time_limit: float = math.inf

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} {status} ({self.seconds:.1f}s) {self.title}"

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


class _Recorder:
    def __init__(self, number, title, time_limit):
        self.report = CriterionReport(number, title, time_limit=time_limit)
        self._t0 = time.perf_counter()

    def close(self, observed: float, expected: float, tol: float, name: str, detail: str = ""):
        ok = bool(abs(observed - expected) <= tol)
        self.report.checks.append(CheckResult(name, ok, float(observed), float(expected), tol,
                                              detail=detail))

    def within_se(self, observed: float, expected: float, se: float, name: str, k: float = 3.0,
                  detail: str = ""):
        ok = bool(abs(observed - expected) <= k * se)
        self.report.checks.append(CheckResult(name, ok, float(observed), float(expected), k,
                                              std_err=float(se), detail=detail))

    def truth(self, ok: bool, name: str, observed: float = math.nan, expected: float = math.nan,
              detail: str = ""):
        self.report.checks.append(CheckResult(name, bool(ok), float(observed), float(expected),
                                              0.0, detail=detail))

    def done(self) -> CriterionReport:
        self.report.seconds = time.perf_counter() - self._t0
        limit = self.report.time_limit
        self.report.checks.append(CheckResult(
            "runtime", self.report.seconds <= limit, self.report.seconds, limit, 0.0,
            detail="seconds"))
        return self.report


def _quick(tier: str) -> bool:
    if tier not in ("quick", "full"):
        raise ValueError(f"tier must be 'quick' or 'full', got {tier!r}")
    return tier == "quick"


# --------------------------------------------------------------------------
# Criteria
# --------------------------------------------------------------------------


def criterion_1(tier: str = "full") -> CriterionReport:
    rec = _Recorder(1, "uniform/uniform d=3 closed form", 1.0)
    u = make_uniform_ball(3, 1.0)
    rec.close(constant_risk(u, u, 1.0), 17.0 / 16.0, 1e-6, "uniform-d3-R1-quadrature")
    for c in (0.3, 0.7, 1.5, 2.5, 3.5):
        rec.close(constant_risk(u, u, c), float(uniform_d3_closed_risk(c)), 1e-6,
                  f"uniform-d3-curve[c={c:g}]")
    for c in (1.0, 2.0):
        left = float(uniform_d3_closed_risk(c * (1 - 1e-13)))
        right = float(uniform_d3_closed_risk(c * (1 + 1e-13)))
        rec.close(left, right, 1e-10, f"uniform-d3-continuity[c={c:g}]")
    rec.close(float(uniform_d3_closed_risk(1.0)), 17.0 / 16.0, 1e-15, "uniform-d3-closed-R1")
    return rec.done()


def criterion_2(tier: str = "full") -> CriterionReport:
    rec = _Recorder(2, "normal plug-in risk identities", 5.0)
    p = make_normal(2, 1.0)
    for r in (0.5, 1.0, 2.0):
        rec.close(constant_risk(p, make_normal(2, r), 1.0), 2.0 / math.sqrt(1.0 + 4.0 * r), 1e-6,
                  f"normal-d2-R1-closed-form[r={r:g}]")
        rec.close(plugin_risk_R1(p, make_normal(2, r)), 2.0 / math.sqrt(1.0 + 4.0 * r), 1e-6,
                  f"normal-d2-R1-direct[r={r:g}]")
    for d in range(1, 7):
        for r in (0.5, 1.0, 2.0):
            rec.close(normal_R1_hypergeometric(d, r), normal_R1_quadrature(d, r), 1e-8,
                      f"normal-R1-hypergeometric[d={d},r={r:g}]")
    return rec.done()


def criterion_3(tier: str = "full") -> CriterionReport:
    rec = _Recorder(3, "optimal expansion, normal d=3 r=1", 30.0)
    n3 = make_normal(3, 1.0)
    res = optimal_c(n3, n3)
    rec.close(res.c_star, 1.175, 0.01, "normal-d3-c-star")
    rec.truth(not res.boundary, "normal-d3-c-star-interior")
    return rec.done()


def criterion_4(tier: str = "full") -> CriterionReport:
    quick = _quick(tier)
    rec = _Recorder(4, "restricted dominance, normal d=3 m=1", 300.0)
    n3 = make_normal(3, 1.0)
    est = Estimator.mle_ball(1.0)
    n = 20_000 if quick else 100_000
    lams = np.linspace(0.0, 1.0, 6 if quick else 11)
    res = c1_inf(n3, n3, est, 1.0, lams, mc=McSpec(n, 20240601))
    rec.close(res.c1, 1.055, 0.015, "restricted-c1", detail=f"bootstrap spread {res.spread:.2g}")
    for lam in (0.0, 0.5, 1.0):
        a = restricted_risk(n3, n3, 1.05, est, lam, mc=McSpec(n, 101))
        b = restricted_risk(n3, n3, 1.0, est, lam, mc=McSpec(n, 202))
        se = math.hypot(a.std_err, b.std_err)
        gap = b.risk - a.risk
        rec.truth(gap > 3.0 * se, f"restricted-dominance[lam={lam:g}]", gap / se, 3.0,
                  detail="z of risk(c=1) - risk(c=1.05), independent draws")
    return rec.done()


def crossing_lambda(p, q, estimator, c: float, reference: float, lo: float, hi: float,
                    mc: McSpec, quad: QuadSpec | None = None) -> float:
    """``lam`` where the restricted risk of ``estimator`` at scale ``c`` meets ``reference``.

    Common random numbers make the restricted risk continuous in ``lam``, so
    a bracketing root finder applies.
    """
    t_max = max(float(estimator_deviations(p, estimator, lam, mc).max()) for lam in (lo, hi))
    table = loss_table(q, c, 2.0 * t_max + 1.0, quad)

    def gap(lam):
        return float(table(estimator_deviations(p, estimator, lam, mc)).mean()) - reference

    return float(optimize.brentq(gap, lo, hi, xtol=1e-4))


def criterion_5(tier: str = "full") -> CriterionReport:
    quick = _quick(tier)
    rec = _Recorder(5, "crossing of restricted and unrestricted optimal risks", 300.0)
    n3 = make_normal(3, 1.0)
    ref = optimal_c(n3, n3, search=SearchSpec(1.0, 1.5, 0.01)).risk
    k = crossing_lambda(n3, n3, Estimator.mle_ball(1.0), 1.05, ref, 1.0, 3.5,
                        McSpec(20_000 if quick else 100_000, 7))
    rec.close(k, 2.1, 0.2, "crossing-k")
    return rec.done()


def _dominance_pairs():
    two_point = Mixing.discrete([1.0, 4.0], [0.5, 0.5])
    ident, sq = LossTransform.identity(), LossTransform.power(2.0)
    return [
        ("normal-d2-r1-identity", make_normal(2, 1.0), make_normal(2, 1.0), ident),
        ("normal-d3-r2-power2", make_normal(3, 1.0), make_normal(3, 2.0), sq),
        ("normal-d5-r0.5-identity", make_normal(5, 2.0), make_normal(5, 1.0), ident),
        ("twopoint-d2-power2", make_scale_mixture_normal(2, two_point),
         make_scale_mixture_normal(2, two_point), sq),
        ("student8-d3-identity", make_scale_mixture_normal(3, Mixing.invgamma(4.0, 4.0)),
         make_scale_mixture_normal(3, Mixing.invgamma(4.0, 4.0)), ident),
        ("normal-twopoint-d5-power2", make_normal(5, 1.0),
         make_scale_mixture_normal(5, two_point), sq),
    ]


def criterion_6(tier: str = "full") -> CriterionReport:
    rec = _Recorder(6, "local dominance of scale expansion", 120.0)
    quad = QuadSpec()
    for name, p, q, g in _dominance_pairs():
        deriv = risk_derivative_at_one(p, q, g, quad)
        rec.truth(deriv < 0, f"derivative[{name}]", deriv, 0.0)
        r1 = constant_risk(p, q, 1.0, g, quad)
        r2 = constant_risk(p, q, 1.02, g, quad)
        # quadrature error estimated by node doubling
        err = abs(constant_risk(p, q, 1.02, g, quad.doubled()) - r2) + abs(
            constant_risk(p, q, 1.0, g, quad.doubled()) - r1)
        margin = max(err, quad.tol)
        rec.truth(r1 - r2 > margin, f"expansion-improves[{name}]", r1 - r2, margin)
    return rec.done()


def _oracle_configs(quick: bool):
    n2, n3, n5 = make_normal(2, 1.0), make_normal(3, 1.0), make_normal(5, 1.0)
    u3 = make_uniform_ball(3, 1.0)
    mix2 = make_scale_mixture_normal(2, Mixing.discrete([1.0, 4.0], [0.5, 0.5]))
    raw = Estimator.raw()
    mle = Estimator.mle_ball(1.0)
    sq = LossTransform.power(2.0)
    out = [
        ("normal-d2-c1", n2, n2, raw, 1.0, 0.0, None, "mixture", lambda: 2.0 / math.sqrt(5.0)),
        ("normal-d2-r0.5-c1.2", n2, make_normal(2, 0.5), raw, 1.2, 0.0, None, "mixture",
         lambda: constant_risk(n2, make_normal(2, 0.5), 1.2)),
        ("uniform-d3-c1", u3, u3, raw, 1.0, 0.0, None, "overlap", lambda: 17.0 / 16.0),
        ("uniform-d3-c1.5", u3, u3, raw, 1.5, 0.0, None, "mixture",
         lambda: float(uniform_d3_closed_risk(1.5))),
        ("uniform-d3-c0.7", u3, u3, raw, 0.7, 0.0, None, "mixture",
         lambda: float(uniform_d3_closed_risk(0.7))),
        ("normal-d3-c1.175", n3, n3, raw, 1.175, 0.0, None, "overlap",
         lambda: constant_risk(n3, n3, 1.175)),
        ("normal-d5-c1.1", n5, n5, raw, 1.1, 0.0, None, "mixture",
         lambda: constant_risk(n5, n5, 1.1)),
        ("twopoint-d2-c1.1", mix2, mix2, raw, 1.1, 0.0, None, "mixture",
         lambda: constant_risk(mix2, mix2, 1.1)),
        ("uniform-normal-d3-c1.1", u3, n3, raw, 1.1, 0.0, None, "mixture",
         lambda: constant_risk(u3, n3, 1.1)),
        ("normal-d3-power2-c1.1", n3, n3, raw, 1.1, 0.0, sq, "mixture",
         lambda: constant_risk(n3, n3, 1.1, sq)),
        ("mle-d3-lam0.5-c1.05", n3, n3, mle, 1.05, 0.5, None, "mixture",
         lambda: restricted_risk(n3, n3, 1.05, mle, 0.5, mc=McSpec(200_000, 5))),
        ("mle-d3-lam2-c1", n3, n3, mle, 1.0, 2.0, None, "overlap",
         lambda: restricted_risk(n3, n3, 1.0, mle, 2.0, mc=McSpec(200_000, 6))),
    ]
    return out[::3] if quick else out


def criterion_7(tier: str = "full") -> CriterionReport:
    quick = _quick(tier)
    rec = _Recorder(7, "oracle equivalence", 600.0)
    n_x = 10_000 if quick else 100_000
    for k, (name, p, q, est, c, lam, g, route, ref) in enumerate(_oracle_configs(quick)):
        theta = np.zeros(p.dim)
        theta[0] = lam
        est_val = oracle.mc_risk(p, q, est, c, theta, gamma=g, n_x=n_x, n_y=1000,
                                 seed=1000 + k, route=route)
        expected = ref()
        ref_se = 0.0
        if hasattr(expected, "std_err"):
            expected, ref_se = expected.risk, expected.std_err
        rec.within_se(est_val.value, expected, math.hypot(est_val.std_err, ref_se),
                      f"oracle[{name}]", detail=route)
    n = 50_000 if quick else 200_000
    n3 = make_normal(3, 1.0)
    u3 = make_uniform_ball(3, 1.0)
    loss_cases = [
        ("overlap-normal-d3-central-c1.5", n3, np.zeros(3), 1.5, central_scale_L1(n3, 1.5)),
        ("overlap-uniform-d3-shift0.8-c1.2", u3, np.array([0.8, 0.0, 0.0]), 1.2,
         2.0 - 2.0 * float(ball_intersection_volume(3, 0.8, 1.2)) / (1.2 ** 3 * 4.0 * math.pi / 3)),
        ("overlap-normal-d3-shift1", n3, np.array([1.0, 0.0, 0.0]), 1.0,
         float(loss_given_deviation(n3, 1.0, 1.0))),
    ]
    for k, (name, q, center, c, expected) in enumerate(loss_cases):
        a = oracle.overlap_route_loss(q, np.zeros(q.dim), center, c, n, seed=2000 + k)
        b = oracle.mc_l1_loss(q, np.zeros(q.dim), center, c, n, seed=3000 + k)
        rec.within_se(a.value, expected, a.std_err, name)
        rec.within_se(a.value, b.value, math.hypot(a.std_err, b.std_err), name + "-vs-mixture")
    rec.truth(oracle_is_independent(), "oracle-imports-no-risk-code")
    return rec.done()


def oracle_is_independent() -> bool:
    """True if the oracle module imports nothing beyond models, errors and special."""
    import ast
    import inspect

    tree = ast.parse(inspect.getsource(oracle))
    allowed = {"models", "errors", "special"}
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom) and node.level > 0:
            mod = (node.module or "").split(".")[0]
            if mod not in allowed:
                return False
            if mod == "special" and any(a.name != "std_normal_cdf" for a in node.names):
                return False
        if isinstance(node, ast.ImportFrom) and node.level == 0 and (node.module or "").startswith("l1pred"):
            return False
    return True


def _random_rotation(d: int, rng) -> np.ndarray:
    qm, r = np.linalg.qr(rng.standard_normal((d, d)))
    return qm * np.sign(np.diag(r))


def criterion_8(tier: str = "full") -> CriterionReport:
    quick = _quick(tier)
    rec = _Recorder(8, "constant risk and rotation invariance", math.inf)
    n_x = 10_000 if quick else 40_000
    n3 = make_normal(3, 1.0)
    u3 = make_uniform_ball(3, 1.0)
    for k, (name, p, c) in enumerate((("normal-d3-c1.2", n3, 1.2), ("uniform-d3-c1.3", u3, 1.3))):
        a = oracle.mc_risk(p, p, Estimator.raw(), c, np.zeros(3), n_x=n_x, n_y=1000, seed=10 + k)
        b = oracle.mc_risk(p, p, Estimator.raw(), c, np.array([7.0, 0, 0]), n_x=n_x, n_y=1000,
                           seed=20 + k)
        rec.within_se(a.value, b.value, math.hypot(a.std_err, b.std_err), f"theta0-vs-theta7[{name}]")
    rng = np.random.default_rng(8)
    mle = Estimator.mle_ball(1.0)
    base = np.array([0.8, 0.0, 0.0])
    ref = restricted_risk(n3, n3, 1.05, mle, 0.8, mc=McSpec(200_000, 9))
    for j in range(5):
        h = _random_rotation(3, rng)
        est = oracle.mc_risk(n3, n3, mle, 1.05, h @ base, n_x=n_x // 2, n_y=1000, seed=30 + j)
        rec.within_se(est.value, ref.risk, math.hypot(est.std_err, ref.std_err),
                      f"rotation[{j}]")
    return rec.done()


def criterion_9(tier: str = "full") -> CriterionReport:
    quick = _quick(tier)
    rec = _Recorder(9, "uniform-target optimality of c = 1", 120.0)
    grid = np.round(np.arange(0.2, 4.0 + 1e-9, 0.05 if quick else 0.01), 10)
    cases = [(f"d1-A{A:g}", 1, uniform_abs_law(A)) for A in (1.0, 3.0)]
    cases.append(("d1-normal", 1, make_normal(1, 1.0).norm))
    for d in range(2, 6):
        cases.append((f"d{d}-uniball", d, make_uniform_ball(d, 1.0).norm))
        cases.append((f"d{d}-normal", d, make_normal(d, 1.0).norm))
    for name, d, law in cases:
        if d == 1:
            vals = np.array([univariate_uniform_risk(law, c) for c in grid])
        else:
            vals = np.array([multivariate_uniform_risk(law, d, c) for c in grid])
        r1 = vals[grid == 1.0][0]
        # ties are possible (flat risk on [1, 2] for d = 1, A = 3), so test attainment
        ties = grid[vals <= vals.min() + 1e-12]
        rec.close(r1, float(vals.min()), 1e-12, f"c=1-attains-minimum[{name}]",
                  detail=f"minimisers {ties.min():g}..{ties.max():g}")
        ratio = r1 / vals
        rec.truth(np.all(ratio <= 1 + 1e-9), f"ratio<=1[{name}]", float(ratio.max()), 1.0)
    return rec.done()


def criterion_10(tier: str = "full") -> CriterionReport:
    quick = _quick(tier)
    rec = _Recorder(10, "Bayes uniform predictive density", 60.0)
    rng = np.random.default_rng(10)
    n_sets = 100 if quick else 1000
    mismatches = 0
    worst = 0.0
    for _ in range(n_sets):
        A = rng.uniform(0.5, 3.0)
        B = rng.uniform(A / 2, 2 * A)
        n = int(rng.integers(1, 12))
        theta = rng.uniform(-5, 5)
        x = rng.uniform(theta - A, theta + A, n)
        dens = bayes_uniform_predictive(UniformBayesInput(tuple(x), A, B))
        ys = np.linspace(dens.center - B - 1.0, dens.center + B + 1.0, 401)
        step = ys[1] - ys[0]
        med = oracle.posterior_median_uniform(x, A, B, ys, theta_nodes=401)
        inside = ys[med > 0]
        if inside.size == 0:
            mismatches += 1
            continue
        err = max(abs(inside.min() - dens.lower), abs(inside.max() - dens.upper))
        worst = max(worst, err / step)
        if err > 2 * step:
            mismatches += 1
    rec.truth(mismatches == 0, "median-support-matches", mismatches, 0,
              detail=f"worst edge error {worst:.2f} grid steps")
    wrong = 0
    for _ in range(n_sets):
        A = rng.uniform(0.5, 3.0)
        B = rng.uniform(0.05, A / 2)
        n = int(rng.integers(1, 6))
        x = rng.uniform(-A, A, n)
        should_fail = (x.max() - x.min()) < 2 * A - 4 * B
        try:
            bayes_uniform_predictive(UniformBayesInput(tuple(x), A, B))
            failed = False
        except NoValidDensityError:
            failed = True
        ys = np.linspace(x.min() - B, x.max() + B, 201)
        oracle_zero = not np.any(oracle.posterior_median_uniform(x, A, B, ys, theta_nodes=401) > 0)
        if failed != should_fail or failed != oracle_zero:
            wrong += 1
    rec.truth(wrong == 0, "failure-condition-exact", wrong, 0)
    return rec.done()


def criterion_11(tier: str = "full") -> CriterionReport:
    rec = _Recorder(11, "special functions", 1.0)
    v = np.linspace(-1, 1, 41)
    for d in (2, 3, 4, 7, 10):
        rec.close(float(np.max(np.abs(F_V(d, v) + F_V(d, -v) - 1.0))), 0.0, 1e-14,
                  f"F_V-symmetry[d={d}]")
        mass = integrate.quad(lambda t: f_V(d, t), -1, 1, limit=200)[0]
        rec.close(mass, 1.0, 1e-8, f"f_V-normalization[d={d}]")
    rec.close(float(np.max(np.abs(F_V(3, v) - (v + 1) / 2))), 0.0, 1e-15, "F_V-d3-linear")
    rec.close(float(F_V(7, 0.3)), integrate.quad(lambda t: f_V(7, t), -1, 0.3)[0], 1e-10,
              "F_V-d7-quadrature")
    t = np.linspace(-1, 1, 41)
    rec.close(float(np.max(np.abs(F_Y1(3, t) - (3 * t - t ** 3 + 2) / 4))), 0.0, 1e-15,
              "F_Y1-d3-cubic")
    rec.close(float(F_Y1(5, 0.5)), integrate.quad(lambda s: f_Y1(5, s), -1, 0.5)[0], 1e-10,
              "F_Y1-d5-quadrature")
    rec.close(gauss_2f1(1.5, 0.5, 1.5, -0.25), 1.25 ** -0.5, 1e-14, "2F1-binomial-collapse")
    for z in (-0.9, -0.3, 0.4, 0.8):
        rec.close(gauss_2f1(0.5, 1.0, 1.0, z), (1 - z) ** -0.5, 1e-12, f"2F1-1F0[z={z:g}]")
    return rec.done()


CRITERIA: dict[int, Callable[[str], CriterionReport]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11,
}

#: Criteria run by the quick tier (the slow restricted searches are left to "full").
QUICK = (1, 2, 3, 6, 7, 9, 10, 11)


def run_validation(tier: str = "quick", criteria=None, progress: Callable | None = None) -> list:
    """Run the suite and return the reports in criterion order."""
    _quick(tier)
    numbers = criteria if criteria is not None else (QUICK if tier == "quick" else tuple(CRITERIA))
    reports = []
    for k in numbers:
        rep = CRITERIA[k](tier)
        if tier == "quick":
            # quick budgets are not the documented ones; drop the runtime gate
            rep.checks = [c for c in rep.checks if c.name != "runtime"]
        reports.append(rep)
        if progress is not None:
            progress(rep)
    return reports
