import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from l1pred.errors import ModelError, PreconditionError, SpecParseError
from l1pred.models import (
    Estimator,
    Mixing,
    PredictiveSpec,
    _bisect_inverse,
    generalized_inverse,
    make_custom,
    make_normal,
    make_scale_mixture_normal,
    make_uniform_ball,
    mle_ball_estimator,
    norm_pdf,
    parse_model,
    predictive_eval,
    random_directions,
    sample_norm,
    sample_points,
)
from l1pred.special import ball_volume

MODELS = {
    "normal": lambda d: make_normal(d, 1.7),
    "uniball": lambda d: make_uniform_ball(d, 1.3),
    "student": lambda d: make_scale_mixture_normal(d, Mixing.invgamma(3.0, 2.0)),
    "twopoint": lambda d: make_scale_mixture_normal(d, Mixing.discrete([0.5, 3.0], [0.4, 0.6])),
}


@pytest.mark.parametrize("name", sorted(MODELS))
@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_norm_density_integrates_to_one_and_matches_cdf(name, d):
    model = MODELS[name](d)
    upper = model.norm.upper_quantile(1e-12)
    total, _ = integrate.quad(model.norm.pdf, 0.0, upper, limit=400, points=[upper / 2])
    assert total == pytest.approx(1.0, abs=1e-8)
    r = model.norm.quantile(0.5)
    part, _ = integrate.quad(model.norm.pdf, 0.0, r, limit=400)
    assert part == pytest.approx(float(model.norm.cdf(r)), abs=1e-8)
    assert float(model.norm.cdf(r)) == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_norm_sampler_matches_cdf(name):
    model = MODELS[name](3)
    draws = sample_norm(model, 20_000, seed=3)
    res = stats.kstest(draws, lambda r: model.norm.cdf(r))
    assert res.pvalue > 1e-3


@pytest.mark.parametrize("name", sorted(MODELS))
def test_sample_points_are_isotropic(name):
    model = MODELS[name](3)
    pts = sample_points(model, 40_000, np.random.default_rng(1), center=np.array([5.0, -1.0, 0.0]))
    dev = pts - np.array([5.0, -1.0, 0.0])
    se = dev.std(axis=0) / math.sqrt(len(dev))
    assert np.all(np.abs(dev.mean(axis=0)) < 5 * se)
    u = dev / np.linalg.norm(dev, axis=1, keepdims=True)
    # first coordinate of a uniform direction in R^3 is uniform on [-1, 1]
    assert stats.kstest(u[:, 0], "uniform", args=(-1, 2)).pvalue > 1e-3


def test_density_location_scale(normal3):
    y = np.array([[0.3, -0.2, 1.0]])
    val = normal3.density(y, center=np.array([0.1, 0.0, 0.0]), scale=2.0)[0]
    expected = stats.multivariate_normal(mean=[0.1, 0, 0], cov=4 * np.eye(3)).pdf(y[0])
    assert float(val) == pytest.approx(expected, rel=1e-13)


def test_uniform_ball_density_and_support():
    u = make_uniform_ball(3, 2.0)
    assert float(u.generator(np.array(3.9))) == pytest.approx(1 / ball_volume(3, 2.0))
    assert float(u.generator(np.array(4.1))) == 0.0
    assert u.support_radius == 2.0
    assert not u.strictly_decreasing


def test_generalized_inverse_normal_closed_form(normal3):
    z = np.array([0.0, 0.5, 2.0, 10.0])
    levels = normal3.generator(z)
    np.testing.assert_allclose(generalized_inverse(normal3, levels), z, atol=1e-12)
    assert generalized_inverse(normal3, 2 * float(normal3.generator(np.array(0.0)))) == 0.0


def test_generalized_inverse_uniform_lower_and_upper():
    u = make_uniform_ball(2, 1.5)
    top = float(u.generator(np.array(0.0)))
    assert top == pytest.approx(1 / ball_volume(2, 1.5), rel=1e-14)
    # lower inverse: inf{z : q(z) <= t}; upper inverse: sup{z : q(z) >= t}
    assert generalized_inverse(u, top) == 0.0
    assert generalized_inverse(u, top, upper=True) == pytest.approx(2.25)
    assert generalized_inverse(u, 0.5 * top) == pytest.approx(2.25)
    assert generalized_inverse(u, 0.5 * top, upper=True) == pytest.approx(2.25)
    assert generalized_inverse(u, 2 * top, upper=True) == 0.0
    assert generalized_inverse(u, 0.0, upper=True) == math.inf


@pytest.mark.parametrize("mixing", [Mixing.invgamma(0.5, 0.5), Mixing.invgamma(4.0, 1.0),
                                    Mixing.discrete([1.0, 4.0], [0.5, 0.5]),
                                    Mixing.discrete([0.2, 1.0, 9.0], [0.2, 0.5, 0.3])])
def test_mixture_inverse_agrees_with_bisection(mixing):
    model = make_scale_mixture_normal(3, mixing)
    z = np.array([1e-8, 0.3, 2.0, 50.0, 4000.0])
    levels = model.log_generator(z)
    fast = model.inverse_log_level(levels)
    slow = _bisect_inverse(model, levels, False)
    np.testing.assert_allclose(fast, slow, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(fast, z, rtol=1e-9, atol=1e-14)


def test_discrete_mixture_matches_direct_sum():
    mix = Mixing.discrete([1.0, 4.0], [0.25, 0.75])
    model = make_scale_mixture_normal(2, mix)
    t = np.array([0.0, 1.0, 9.0])
    direct = sum(w * np.exp(-t / (2 * v)) / (2 * math.pi * v) for v, w in [(1.0, 0.25), (4.0, 0.75)])
    np.testing.assert_allclose(model.generator(t), direct, rtol=1e-14)


def test_point_mixture_is_normal():
    model = make_scale_mixture_normal(3, Mixing.point(2.0))
    ref = make_normal(3, 2.0)
    t = np.linspace(0, 10, 7)
    np.testing.assert_allclose(model.generator(t), ref.generator(t), rtol=1e-15)
    assert model.kind == "normal_scale_mixture"


def test_cauchy_generator():
    cauchy = make_scale_mixture_normal(1, Mixing.invgamma(0.5, 0.5))
    y = np.array([[0.0], [1.0], [3.0]])
    np.testing.assert_allclose(cauchy.density(y), stats.cauchy.pdf(y[:, 0]), rtol=1e-13)


@pytest.mark.parametrize("kwargs", [dict(variances=(1.0,), weights=(0.9,)),
                                    dict(variances=(-1.0,), weights=(1.0,)),
                                    dict(variances=(1.0, 2.0), weights=(1.0,))])
def test_mixing_validation(kwargs):
    with pytest.raises(ModelError):
        Mixing("discrete", **kwargs)
    with pytest.raises(ModelError):
        Mixing.invgamma(0.0, 1.0)


def test_make_custom_checks_normalization():
    with pytest.raises(ModelError, match="integrates"):
        make_custom(2, lambda t: np.exp(-t), nonincreasing=True)
    laplace_like = make_custom(2, lambda t: np.exp(-np.sqrt(t)) / (2 * math.pi),
                               nonincreasing=True, strictly_decreasing=True)
    assert float(laplace_like.norm.cdf(1.0)) == pytest.approx(1 - 2 * math.exp(-1), abs=1e-9)
    lev = laplace_like.log_generator(np.array([0.25, 4.0]))
    np.testing.assert_allclose(laplace_like.inverse_log_level(lev), [0.25, 4.0], rtol=1e-9)


def test_custom_nonmonotone_inverse_refused():
    bump = make_custom(1, lambda t: np.where(np.abs(np.sqrt(t) - 1) < 0.5, 0.5, 0.0),
                       nonincreasing=False, support_radius=1.5)
    with pytest.raises(PreconditionError):
        bump.inverse_log_level(np.array([-1.0]))


def test_norm_pdf_rejects_negative(normal3):
    with pytest.raises(PreconditionError):
        norm_pdf(normal3, np.array([-0.1]))


def test_sample_norm_reproducible(normal3):
    a = sample_norm(normal3, 5, seed=9)
    b = sample_norm(normal3, 5, seed=9)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(PreconditionError):
        sample_norm(normal3, 0)


def test_random_directions_unit_norm(rng):
    u = random_directions(1000, 4, rng)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-14)


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(0.1, 5.0))
def test_mle_ball_projection(x, m):
    x = np.array(x)
    out = mle_ball_estimator(x, m)
    assert np.linalg.norm(out) <= m * (1 + 1e-12)
    if np.linalg.norm(x) <= m:
        np.testing.assert_array_equal(out, x)
    else:
        # same direction
        assert np.dot(out, x) == pytest.approx(np.linalg.norm(out) * np.linalg.norm(x))


def test_estimators():
    x = np.array([[3.0, 4.0, 0.0], [0.1, 0.0, 0.0]])
    np.testing.assert_array_equal(Estimator.raw()(x), x)
    np.testing.assert_allclose(Estimator.mle_ball(1.0)(x), [[0.6, 0.8, 0.0], [0.1, 0.0, 0.0]])
    shrink = Estimator.custom(lambda v: 0.5 * v)
    assert not shrink.equivariant
    np.testing.assert_allclose(shrink(x), 0.5 * x)
    with pytest.raises(ModelError):
        Estimator.mle_ball(-1.0)
    assert Estimator.mle_ball(2).describe() == "mle-ball(m=2)"


def test_predictive_eval(normal2):
    spec = PredictiveSpec(Estimator.raw(), 1.5, normal2)
    y = np.array([1.0, 0.0])
    expected = stats.multivariate_normal(mean=[0.2, 0.0], cov=2.25 * np.eye(2)).pdf(y)
    assert float(predictive_eval(spec, np.array([0.2, 0.0]), y)) == pytest.approx(expected)
    with pytest.raises(ModelError):
        PredictiveSpec(Estimator.raw(), 0.0, normal2)


@pytest.mark.parametrize("spec,kind,dim", [
    ("normal:d=3,var=2", "normal", 3),
    ("normal:d=2", "normal", 2),
    ("uniball:d=3,m=1", "uniform_ball", 3),
    ("mixnormal:d=2,mix=invgamma(0.5,0.5)", "normal_scale_mixture", 2),
    ("mixnormal:d=5,mix=points(1:0.5, 4:0.5)", "normal_scale_mixture", 5),
    ("mixnormal: d=1, mix=point(2)", "normal_scale_mixture", 1),
])
def test_parse_model(spec, kind, dim):
    model = parse_model(spec)
    assert model.kind == kind
    assert model.dim == dim


@pytest.mark.parametrize("spec,token", [
    ("normal", "normal"),
    ("gauss:d=3", "gauss"),
    ("normal:d=3,var=abc", "abc"),
    ("normal:d=3,sigma=1", "sigma"),
    ("uniball:m=1", "d"),
    ("mixnormal:d=2,mix=gamma(1,2)", "gamma"),
    ("mixnormal:d=2,mix=points(1:0.5,4:0.6)", "mixnormal:d=2,mix=points(1:0.5,4:0.6)"),
    ("normal:d=0", "0"),
])
def test_parse_model_errors_name_token(spec, token):
    with pytest.raises(SpecParseError) as info:
        parse_model(spec)
    assert info.value.token == token


def test_describe_roundtrip():
    for spec in ("normal:d=3,var=2", "uniball:d=2,m=0.5", "mixnormal:d=2,mix=invgamma(0.5,0.5)"):
        model = parse_model(spec)
        again = parse_model(model.describe())
        t = np.linspace(0, 3, 5)
        np.testing.assert_allclose(again.generator(t), model.generator(t))
