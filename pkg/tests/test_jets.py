import numpy as np
import pytest
import sympy as sp

from geo3 import jets
from geo3.jets import Jet

X, Y, Z = sp.symbols("x y z")


def _sympy_derivatives(expr, point):
    subs = dict(zip((X, Y, Z), point))
    grad = [float(sp.diff(expr, v).subs(subs)) for v in (X, Y, Z)]
    hess = [[float(sp.diff(expr, a, b).subs(subs)) for b in (X, Y, Z)] for a in (X, Y, Z)]
    return float(expr.subs(subs)), np.array(grad), np.array(hess)


CASES = [
    (lambda x, y, z: x * x * y + 3 * z, X**2 * Y + 3 * Z),
    (lambda x, y, z: jets.exp(x * y) / (1 + z * z), sp.exp(X * Y) / (1 + Z**2)),
    (lambda x, y, z: jets.sqrt(1 + x * x) * jets.sin(y - z), sp.sqrt(1 + X**2) * sp.sin(Y - Z)),
    (lambda x, y, z: jets.log(2 + jets.cos(x)) - y**3, sp.log(2 + sp.cos(X)) - Y**3),
    (lambda x, y, z: (1 + x * x + y * y) ** -2, (1 + X**2 + Y**2) ** -2),
]


@pytest.mark.parametrize("fn, expr", CASES)
def test_second_order_jets_match_symbolic_derivatives(fn, expr):
    point = (0.3, -0.7, 0.45)
    jet = fn(*Jet.variables(np.array([point]), 2))
    value, grad, hess = _sympy_derivatives(expr, point)
    np.testing.assert_allclose(jet.value[0], value, rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(jet.gradient[0], grad, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(jet.hessian[0], hess, rtol=1e-12, atol=1e-12)


def test_hessian_is_exactly_symmetric():
    x, y, z = Jet.variables(np.array([[0.2, 0.5, -1.0]]), 2)
    h = (jets.exp(x * y * z) * jets.sin(x + 2 * y)).hessian[0]
    assert np.array_equal(h, h.T)


def test_third_order_jets_carry_third_derivatives():
    (x,) = Jet.variables(np.array([[0.4]]), 3)
    f = jets.exp(2 * x)
    d = f.partials().partials().partials()
    assert d.value[0, 0, 0, 0] == pytest.approx(8 * np.exp(0.8), rel=1e-13)


def test_partials_lower_the_order():
    x, y = Jet.variables(np.array([[1.0, 2.0]]), 2)
    d = (x * x * y).partials()
    assert d.order == 1
    np.testing.assert_allclose(d.value[0], [4.0, 1.0])
    np.testing.assert_allclose(d.gradient[0], [[4.0, 2.0], [2.0, 0.0]])


def test_from_derivatives_round_trip():
    grad = np.array([[1.0, -2.0]])
    hess = np.array([[[3.0, 0.5], [0.5, -1.0]]])
    jet = Jet.from_derivatives(np.array([7.0]), grad, hess)
    assert jet.value[0] == 7.0
    np.testing.assert_array_equal(jet.gradient, grad)
    np.testing.assert_array_equal(jet.hessian, hess)


def test_numpy_inputs_pass_through_elementary_functions():
    assert jets.exp(0.0) == 1.0
    assert jets.sqrt(np.array([4.0]))[0] == 2.0
