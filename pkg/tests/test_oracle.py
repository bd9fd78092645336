import math

import numpy as np
import pytest
from scipy.stats import norm

from l1pred.errors import PreconditionError
from l1pred.models import Estimator, Mixing, make_normal, make_scale_mixture_normal, make_uniform_ball
from l1pred.oracle import (
    GridSpec,
    grid_l1_loss,
    mc_l1_loss,
    mc_risk,
    overlap_route_loss,
    posterior_median_uniform,
)
from l1pred.risk import constant_risk
from l1pred.uniform import UniformBayesInput, bayes_uniform_predictive
from l1pred.validate import oracle_is_independent


def normal_shift_l1(delta):
    return 2.0 * (2.0 * norm.cdf(delta / 2.0) - 1.0)


def normal_scale_l1(c):
    """L1 distance between N(0, 1) and N(0, c^2) on the line."""
    x0 = math.sqrt(2.0 * c * c * math.log(c) / (c * c - 1.0))
    return 4.0 * abs(norm.cdf(x0) - norm.cdf(x0 / c))


# --------------------------------------------------------------------------
# Deterministic grid oracle
# --------------------------------------------------------------------------


@pytest.mark.parametrize("delta", [0.1, 0.8, 2.5])
@pytest.mark.parametrize("d", [1, 2])
def test_grid_normal_shift(d, delta):
    q = make_normal(d, 1.0)
    center = np.zeros(d)
    center[0] = delta
    assert grid_l1_loss(q, np.zeros(d), center, 1.0) == pytest.approx(normal_shift_l1(delta), abs=1e-9)


@pytest.mark.parametrize("c", [0.6, 1.3, 2.0])
def test_grid_normal_scale_d1(c):
    q = make_normal(1, 1.0)
    assert grid_l1_loss(q, [0.0], [0.0], c) == pytest.approx(normal_scale_l1(c), abs=1e-9)


def test_grid_uniform_concentric_d2():
    # unit disc against the disc of radius c: 2(1 - 1/c^2) for c > 1
    q = make_uniform_ball(2, 1.0)
    assert grid_l1_loss(q, [0.0, 0.0], [0.0, 0.0], 1.5) == pytest.approx(2 * (1 - 1 / 2.25), abs=1e-9)


def test_grid_identical_and_preconditions():
    q = make_normal(2, 1.0)
    assert grid_l1_loss(q, [0.3, 0.1], [0.3, 0.1], 1.0) == 0.0
    with pytest.raises(PreconditionError, match="d <= 2"):
        grid_l1_loss(make_normal(3, 1.0), np.zeros(3), np.zeros(3), 1.2)
    with pytest.raises(PreconditionError):
        grid_l1_loss(q, [0.0], [0.0, 0.0], 1.2)


# --------------------------------------------------------------------------
# Monte Carlo losses
# --------------------------------------------------------------------------


@pytest.mark.parametrize("q", [make_normal(2, 1.0), make_uniform_ball(2, 1.0),
                               make_scale_mixture_normal(2, Mixing.invgamma(2.0, 1.5))],
                         ids=["normal", "uniball", "student"])
def test_mc_routes_match_grid(q):
    theta, center, c = [0.0, 0.0], [0.5, -0.2], 1.25
    exact = grid_l1_loss(q, theta, center, c, GridSpec())
    for route in (mc_l1_loss, overlap_route_loss):
        est = route(q, theta, center, c, n=200_000, seed=7)
        assert abs(est.z_score(exact)) < 5
        assert est.std_err < 0.01


def test_mc_loss_reproducible_and_identical():
    q = make_normal(3, 1.0)
    a = mc_l1_loss(q, np.zeros(3), [0.4, 0, 0], 1.1, n=5000, seed=3)
    b = mc_l1_loss(q, np.zeros(3), [0.4, 0, 0], 1.1, n=5000, seed=3)
    assert a == b
    assert mc_l1_loss(q, np.zeros(3), np.zeros(3), 1.0).value == 0.0


def test_mc_preconditions():
    q = make_normal(2, 1.0)
    with pytest.raises(PreconditionError):
        mc_l1_loss(q, [0, 0], [0, 0], 1.2, n=10)
    with pytest.raises(PreconditionError):
        mc_l1_loss(q, [0, 0], [0, 0], 0.0)
    with pytest.raises(PreconditionError):
        mc_risk(q, make_normal(3, 1.0), Estimator.raw(), 1.1, [0, 0])


@pytest.mark.parametrize("route", ["mixture", "overlap"])
def test_mc_risk_matches_constant_risk(route):
    p, q = make_normal(3, 1.0), make_normal(3, 1.0)
    est = mc_risk(p, q, Estimator.raw(), 1.2, np.zeros(3), n_x=4000, n_y=2000, seed=11, route=route)
    assert abs(est.z_score(constant_risk(p, q, 1.2))) < 5


def test_mc_risk_unknown_route():
    p = make_normal(2, 1.0)
    with pytest.raises(PreconditionError, match="route"):
        mc_risk(p, p, Estimator.raw(), 1.1, [0, 0], n_x=1000, n_y=1000, route="bogus")


# --------------------------------------------------------------------------
# Posterior median and independence
# --------------------------------------------------------------------------


@pytest.mark.parametrize("sample, A, B", [((0.1, 0.5), 1.0, 1.0), ((0.0, 1.5), 1.0, 0.2),
                                          ((-0.3, 0.2, 0.4), 2.0, 1.5)])
def test_posterior_median_matches_closed_form(sample, A, B):
    dens = bayes_uniform_predictive(UniformBayesInput(sample, A, B))
    y = np.linspace(dens.lower - 1, dens.upper + 1, 301)
    # stay off the jump points, where the grid resolution decides
    y = y[np.minimum(np.abs(y - dens.lower), np.abs(y - dens.upper)) > 0.02]
    assert np.array_equal(posterior_median_uniform(sample, A, B, y), dens.pdf(y))


def test_posterior_median_no_valid_density():
    y = np.linspace(-1, 1, 51)
    assert np.all(posterior_median_uniform((0.0, 0.1), 1.0, 0.2, y) == 0.0)
    with pytest.raises(PreconditionError):
        posterior_median_uniform((0.0, 3.0), 1.0, 1.0, y)


def test_oracle_module_is_independent():
    assert oracle_is_independent()
