import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from l1pred.errors import InconsistentDataError, NoValidDensityError, PreconditionError
from l1pred.models import NormLaw, make_normal, make_uniform_ball
from l1pred.uniform import (
    IntervalDensity,
    UniformBayesInput,
    ball_intersection_volume,
    bayes_uniform_predictive,
    check_plugin_optimality,
    midrange_norm_law,
    multivariate_uniform_risk,
    normal_R1,
    normal_R1_hypergeometric,
    normal_R1_quadrature,
    scaled_law,
    uniform_abs_law,
    uniform_d3_closed_risk,
    univariate_uniform_risk,
)


def interval_l1(x, c, B=1.0):
    """L1 distance between U(x - cB, x + cB) and U(-B, B), from the overlap length."""
    lo = np.maximum(x - c * B, -B)
    hi = np.minimum(x + c * B, B)
    overlap = np.clip(hi - lo, 0.0, None)
    return 2.0 - 2.0 * overlap * min(1.0 / (2 * c * B), 1.0 / (2 * B))


def oracle_univariate(law, c, B=1.0):
    pts = (abs(c - 1) * B, (c + 1) * B)
    upper = law.upper if math.isfinite(law.upper) else law.upper_quantile(1e-14)
    pts = [p for p in pts if 0 < p < upper]
    val, _ = integrate.quad(lambda s: interval_l1(s, c, B) * law.pdf(s), 0.0, upper,
                            points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-12)
    return val


def lens_volume(x, c):
    """Volume common to unit and radius-c balls in R^3 whose centers are x apart."""
    if x >= 1 + c:
        return 0.0
    if x <= abs(1 - c):
        return 4 / 3 * math.pi * min(1.0, c) ** 3
    return math.pi * (1 + c - x) ** 2 * (x * x + 2 * x * c - 3 * c * c + 2 * x + 6 * c - 3) / (12 * x)


# --------------------------------------------------------------------------
# Posterior-median predictive density
# --------------------------------------------------------------------------


def test_bayes_predictive_is_centered_interval():
    dens = bayes_uniform_predictive(UniformBayesInput((0.1, 0.5), A=1.0, B=1.0))
    assert dens == IntervalDensity(0.3, 1.0)
    assert str(dens) == "U(-0.7, 1.3)"
    assert dens.pdf([0.0, 1.29, 1.31]).tolist() == [0.5, 0.5, 0.0]


def test_bayes_single_value():
    assert str(bayes_uniform_predictive(UniformBayesInput((0.3,), A=1.0, B=1.0))) == "U(-0.7, 1.3)"


def test_bayes_inconsistent_sample():
    with pytest.raises(InconsistentDataError, match="exceeds 2A"):
        UniformBayesInput((0.0, 2.5), A=1.0, B=1.0)


@pytest.mark.parametrize("sample, ok", [((0.0, 0.1), False), ((0.0, 1.5), True)])
def test_bayes_small_B(sample, ok):
    # B < A/2: a valid density exists only when the range exceeds 2A - 4B = 1.2
    data = UniformBayesInput(sample, A=1.0, B=0.2)
    if ok:
        assert bayes_uniform_predictive(data).center == pytest.approx(0.75)
    else:
        with pytest.raises(NoValidDensityError):
            bayes_uniform_predictive(data)


@pytest.mark.parametrize("kw", [dict(sample=(), A=1, B=1), dict(sample=(0.0,), A=0, B=1),
                                dict(sample=(np.nan,), A=1, B=1)])
def test_bayes_input_preconditions(kw):
    with pytest.raises(PreconditionError):
        UniformBayesInput(**kw)


# --------------------------------------------------------------------------
# Norm laws
# --------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 5])
def test_midrange_law_matches_simulation(n, rng):
    A = 1.5
    x = rng.uniform(-A, A, size=(200_000, n))
    s = np.abs(0.5 * (x.max(axis=1) + x.min(axis=1)))
    law = midrange_norm_law(n, A)
    for q in (0.1, 0.4, 0.8, 1.2):
        emp = np.mean(s <= q)
        se = math.sqrt(emp * (1 - emp) / s.size)
        assert abs(emp - law.cdf(q)) < 5 * se
    total, _ = integrate.quad(law.pdf, 0.0, A)
    assert total == pytest.approx(1.0, abs=1e-12)
    assert law.ppf(law.cdf(0.7)) == pytest.approx(0.7, abs=1e-12)


def test_scaled_law():
    law = scaled_law(uniform_abs_law(2.0), 4.0)
    assert law.upper == 0.5
    assert law.cdf(0.25) == pytest.approx(0.5)
    assert law.pdf(0.1) == pytest.approx(2.0)
    with pytest.raises(PreconditionError):
        scaled_law(law, 0.0)


# --------------------------------------------------------------------------
# Univariate risk
# --------------------------------------------------------------------------


@pytest.mark.parametrize("law", [uniform_abs_law(1.0), uniform_abs_law(3.0), midrange_norm_law(4, 1.0),
                                 make_normal(1, 0.7).norm])
@pytest.mark.parametrize("c", [0.3, 0.9, 1.0, 1.4, 2.5])
def test_univariate_risk_matches_overlap_oracle(law, c):
    assert univariate_uniform_risk(law, c) == pytest.approx(oracle_univariate(law, c), abs=1e-10)


def test_univariate_risk_target_scale():
    law = uniform_abs_law(2.0)
    assert univariate_uniform_risk(law, 1.3, B=2.0) == pytest.approx(
        univariate_uniform_risk(uniform_abs_law(1.0), 1.3), abs=1e-13)
    assert univariate_uniform_risk(law, 1.3, B=0.5) == pytest.approx(
        oracle_univariate(law, 1.3, B=0.5), abs=1e-10)


@given(A=st.floats(0.1, 4.0), n=st.integers(1, 6))
def test_univariate_branches_agree_at_one(A, n):
    law = midrange_norm_law(n, A)
    lo = univariate_uniform_risk(law, 1.0, branch="lower")
    hi = univariate_uniform_risk(law, 1.0, branch="upper")
    assert lo == pytest.approx(hi, abs=1e-11)


def test_univariate_preconditions():
    with pytest.raises(PreconditionError):
        univariate_uniform_risk(uniform_abs_law(1.0), 0.0)
    with pytest.raises(PreconditionError):
        univariate_uniform_risk(uniform_abs_law(1.0), 1.0, branch="middle")


def test_plugin_optimality_conditions():
    flat = check_plugin_optimality(uniform_abs_law(1.0))
    assert flat.condition_ii == "holds" and flat.plugin_optimal
    assert flat.conditional_mean == pytest.approx(0.5)
    rising = NormLaw(pdf=lambda s: np.where((s >= 0) & (s <= 1), 2 * np.asarray(s), 0.0),
                     cdf=lambda s: np.clip(np.asarray(s), 0, 1) ** 2, upper=1.0)
    r = check_plugin_optimality(rising)
    assert (r.condition_i, r.condition_ii) == ("holds", "fails")
    far = NormLaw(pdf=lambda s: np.where((s >= 2.5) & (s <= 3), 2.0, 0.0),
                  cdf=lambda s: np.clip(2 * (np.asarray(s) - 2.5), 0, 1), upper=3.0)
    f = check_plugin_optimality(far)
    assert f.condition_i == "undetermined" and not f.plugin_optimal


# --------------------------------------------------------------------------
# Multivariate risk
# --------------------------------------------------------------------------


@pytest.mark.parametrize("x", [0.05, 0.4, 1.0, 1.7, 2.4])
@pytest.mark.parametrize("c", [0.5, 1.0, 1.6])
def test_ball_intersection_matches_lens(x, c):
    assert ball_intersection_volume(3, x, c) == pytest.approx(lens_volume(x, c), abs=1e-12)


@given(d=st.integers(2, 7), x=st.floats(0.01, 4.0), c=st.floats(0.1, 3.0))
def test_ball_intersection_scaling(d, x, c):
    # B_0(1) and B_x(c), scaled by 1/c, are B_0(1/c) and B_{x/c}(1), a translate of the swap
    a = ball_intersection_volume(d, x, c)
    b = c ** d * ball_intersection_volume(d, x / c, 1.0 / c)
    assert a == pytest.approx(b, abs=1e-12)


def test_ball_intersection_preconditions():
    with pytest.raises(PreconditionError):
        ball_intersection_volume(1, 0.5, 1.0)
    with pytest.raises(PreconditionError):
        ball_intersection_volume(3, 0.0, 1.0)


@pytest.mark.parametrize("c", [0.4, 0.8, 1.0, 1.3, 1.9, 2.0, 2.6])
def test_multivariate_matches_d3_closed_form(c):
    law = make_uniform_ball(3, 1.0).norm
    assert multivariate_uniform_risk(law, 3, c) == pytest.approx(uniform_d3_closed_risk(c), abs=1e-10)


def test_d3_closed_form_continuous():
    for knot in (1.0, 2.0):
        lo, hi = uniform_d3_closed_risk([knot * (1 - 1e-12), knot * (1 + 1e-12)])
        assert lo == pytest.approx(hi, abs=1e-9)
    with pytest.raises(PreconditionError):
        uniform_d3_closed_risk(-1.0)


def test_multivariate_target_scale():
    law = make_uniform_ball(4, 2.0).norm
    assert multivariate_uniform_risk(law, 4, 1.2, m=2.0) == pytest.approx(
        multivariate_uniform_risk(make_uniform_ball(4, 1.0).norm, 4, 1.2), abs=1e-12)
    with pytest.raises(PreconditionError):
        multivariate_uniform_risk(law, 1, 1.2)


# --------------------------------------------------------------------------
# Normal plug-in risk
# --------------------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2, 3, 6])
@pytest.mark.parametrize("r", [0.3, 1.0, 4.0])
def test_normal_R1_routes_agree(d, r):
    assert normal_R1_hypergeometric(d, r) == pytest.approx(normal_R1_quadrature(d, r), abs=1e-11)


def test_normal_R1_small_r():
    with pytest.raises(PreconditionError, match="r > 1/4"):
        normal_R1_hypergeometric(3, 0.25)
    assert normal_R1(3, 0.1) == pytest.approx(normal_R1_quadrature(3, 0.1))
    assert normal_R1(3, 0.2500001) == pytest.approx(normal_R1(3, 0.2499999), abs=1e-6)
