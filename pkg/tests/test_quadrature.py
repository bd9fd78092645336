import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from l1pred.errors import ModelError
from l1pred.models import make_normal, make_uniform_ball
from l1pred.quadrature import (
    McSpec,
    QuadSpec,
    SearchSpec,
    cosine_rule,
    find_crossings,
    golden_section,
    law_edges,
    panel_rule,
)


@pytest.mark.parametrize("m", [32, 64, 100])
def test_cosine_rule_integrates_polynomials(m):
    x, w = cosine_rule(m)
    assert np.all((x > 0) & (x < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.sum(w * x ** 5) == pytest.approx(1 / 6, abs=1e-10)


def test_cosine_rule_handles_sqrt_endpoint():
    x, w = cosine_rule(64)
    # int_0^1 sqrt(1 - x^2) dx = pi / 4
    assert np.sum(w * np.sqrt(1 - x * x)) == pytest.approx(math.pi / 4, abs=1e-9)


def test_panel_rule_broadcasts_rows():
    edges = np.array([[0.0, 1.0, 3.0], [0.0, 2.0, 2.0]])
    x, w = panel_rule(edges, 24)
    assert x.shape == w.shape == (2, 48)
    np.testing.assert_allclose(np.sum(w * x, axis=1), [4.5, 2.0], atol=1e-12)


def test_law_edges_cover_mass():
    law = make_normal(3, 1.0).norm
    edges = law_edges(law, 1e-10)
    assert edges[0] == 0.0
    assert np.all(np.diff(edges) > 0)
    assert 1.0 - float(law.cdf(edges[-1])) == pytest.approx(1e-10, rel=1e-6)
    bounded = law_edges(make_uniform_ball(3, 2.0).norm, 1e-10)
    np.testing.assert_array_equal(bounded, [0.0, 2.0])


def test_find_crossings_rowwise():
    scan = np.tile(np.linspace(0, 4, 41), (3, 1))
    shifts = np.array([[0.55], [1.234], [5.0]])
    roots = find_crossings([lambda s: s - shifts, lambda s: np.cos(s) + 0 * shifts], scan)
    # row 0: 0.55 and pi/2; row 1: 1.234 and pi/2; row 2: pi/2 only
    np.testing.assert_allclose(roots[0], [0.55, math.pi / 2], atol=1e-12)
    np.testing.assert_allclose(roots[1], [1.234, math.pi / 2], atol=1e-12)
    assert roots[2, 0] == pytest.approx(math.pi / 2, abs=1e-12)
    assert math.isnan(roots[2, 1])


def test_find_crossings_records_exact_grid_hits():
    scan = np.linspace(0, 2, 21)[None, :]
    roots = find_crossings([lambda s: s - 1.0], scan)
    np.testing.assert_array_equal(roots[~np.isnan(roots)], [1.0])


def test_find_crossings_without_roots():
    scan = np.linspace(0, 1, 5)[None, :]
    assert find_crossings([lambda s: s + 1.0], scan).shape == (1, 0)


@given(st.floats(0.2, 3.8))
def test_golden_section_quadratic(x0):
    x, fx = golden_section(lambda x: (x - x0) ** 2, 0.0, 4.0, tol=1e-8)
    assert x == pytest.approx(x0, abs=1e-7)
    assert fx < 1e-13


def test_specs_validate():
    with pytest.raises(ModelError):
        QuadSpec(nodes=4)
    with pytest.raises(ModelError):
        QuadSpec(truncation_mass=0.7)
    with pytest.raises(ModelError):
        McSpec(n=0)
    with pytest.raises(ModelError):
        SearchSpec(c_min=2.0, c_max=1.0)
    assert QuadSpec(nodes=100).doubled().nodes == 200


def test_search_grid_inclusive():
    grid = SearchSpec(1.0, 4.0, 0.01).grid()
    assert grid.size == 301
    assert grid[0] == 1.0
    assert grid[-1] == pytest.approx(4.0, abs=1e-12)
