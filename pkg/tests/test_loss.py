import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from l1pred.errors import ModelError, SpecParseError
from l1pred.loss import LossTransform, parse_gamma


def test_identity_and_power():
    loss = np.array([0.0, 0.5, 2.0])
    np.testing.assert_array_equal(LossTransform.identity()(loss), loss)
    sq = LossTransform.power(2)
    np.testing.assert_allclose(sq(loss), loss ** 2)
    np.testing.assert_allclose(sq.derivative(loss), 2 * loss)
    assert LossTransform.power(1.0).kind == "identity"


@given(st.floats(0.1, 5.0), st.floats(0.01, 2.0))
def test_power_derivative_matches_difference(k, x):
    g = LossTransform.power(k)
    h = 1e-6
    fd = (g(x + h) - g(x - h)) / (2 * h) if x > h else None
    if fd is not None:
        assert float(g.derivative(x)) == pytest.approx(float(fd), rel=1e-5, abs=1e-8)


def test_custom_transform():
    g = LossTransform.custom(np.log1p, lambda v: 1 / (1 + v))
    assert float(g(1.0)) == pytest.approx(np.log(2))
    assert float(g.derivative(1.0)) == 0.5
    with pytest.raises(ModelError, match="derivative"):
        LossTransform("custom", func=np.log1p)
    with pytest.raises(ModelError, match="increasing"):
        LossTransform.custom(lambda v: -v, lambda v: -np.ones_like(v))


@pytest.mark.parametrize("text,kind,k", [("identity", "identity", 1.0), ("power:2", "power", 2.0),
                                         ("power:0.5", "power", 0.5), (" power:3e0 ", "power", 3.0)])
def test_parse_gamma(text, kind, k):
    g = parse_gamma(text)
    assert g.kind == kind
    assert g.k == k


@pytest.mark.parametrize("text", ["square", "power:", "power:-1", "power:abc"])
def test_parse_gamma_errors(text):
    with pytest.raises(SpecParseError):
        parse_gamma(text)


def test_describe_roundtrip():
    for text in ("identity", "power:2", "power:0.5"):
        assert parse_gamma(text).describe() == text
