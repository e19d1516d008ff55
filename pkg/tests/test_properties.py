"""Property-based checks over random parameters, points and rotations."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from geo3 import spaces, submersion
from geo3.calculus import Chart, ScalarField, VectorField, everywhere, lie_bracket
from geo3.jets import Jet, exp, sin

coord = st.floats(-0.9, 0.9)
param = st.floats(-2.0, 2.0).map(lambda v: round(v, 3))
angle = st.floats(0.0, 2 * np.pi)
R3 = Chart("r3", 3, everywhere)


@settings(max_examples=40, deadline=None)
@given(m=param, l=param, x=coord, y=coord)
def test_bcv_closed_forms_hold_everywhere(m, l, x, y):
    space = spaces.bcv_space(m, l)
    if 1 + m * (x * x + y * y) <= 0.05:
        return
    pts = np.array([[x, y, 0.3]])
    from geo3.geometry import verify_connection_tables

    assert verify_connection_tables(space, pts).passed(1e-9)


@settings(max_examples=30, deadline=None)
@given(m=param, l=param)
def test_classification_is_a_single_case(m, l):
    label = spaces.classify_bcv(m, l)
    assert label in spaces.BCV_MODELS
    if m > 0 and l != 0 and abs(4 * m - l * l) <= 1e-12:
        assert label == "(b)"


@settings(max_examples=30, deadline=None)
@given(a=angle, b=angle, c=angle, m=param, l=param)
def test_rotated_frame_closed_forms(a, b, c, m, l):
    rot = spaces.rotation_about(0, a) @ spaces.rotation_about(1, b) @ spaces.rotation_about(2, c)
    space = spaces.bcv_space(m, l)
    rep = spaces.rotated_frame_check(space, rot, np.array([[0.1, -0.2, 0.0]]))
    assert rep.max_dev <= 1e-8 and rep.tensor_defect <= 1e-8


@settings(max_examples=20, deadline=None)
@given(eps=st.floats(0.2, 2.5), a=angle)
def test_berger_rotations(eps, a):
    space = spaces.berger_space(eps)
    rep = spaces.rotated_frame_check(space, spaces.rotation_about(1, a), space.sample(3, 0))
    assert rep.max_dev <= 1e-8


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), coord, coord, coord)
def test_bracket_antisymmetry_for_polynomial_fields(k, x, y, z):
    X = VectorField.from_functions(
        (lambda x, y, z: k[0] * x * y, lambda x, y, z: k[1] * z, lambda x, y, z: exp(k[2] * x)), R3
    )
    Y = VectorField.from_functions(
        (lambda x, y, z: sin(k[3] * z), lambda x, y, z: k[4] * x * x, lambda x, y, z: k[5] + y), R3
    )
    p = (x, y, z)
    assert np.abs(lie_bracket(X, Y, p) + lie_bracket(Y, X, p)).max() <= 1e-14


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 3))
def test_jet_product_and_quotient_rules(x0, y0, s):
    x, y = Jet.variables(np.array([[x0, y0]]), 2)
    f = exp(x) * (y + s)
    g = f / (y * y + s)
    # d/dx of f is f itself; check through the engine against the product rule
    np.testing.assert_allclose(f.gradient[0, 0], f.value[0], rtol=1e-13)
    expected_dy = np.exp(x0) * ((y0 * y0 + s) - (y0 + s) * 2 * y0) / (y0 * y0 + s) ** 2
    np.testing.assert_allclose(g.gradient[0, 1], expected_dy, rtol=1e-12, atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), eps=st.floats(0.3, 2.0))
def test_hopf_data_invariants(seed, eps):
    spec = spaces.hopf_map(eps)
    rep = submersion.identity_report(spec, spec.sample(20, seed))
    assert rep.rc_max <= 1e-7 and rep.kappa_max <= 1e-8
    assert np.abs(rep.data.sigma**2 - eps**2).max() <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_nil_tension_matches_closed_form(seed):
    spec = spaces.nil_example23()
    pts = spec.sample(20, seed)
    x = pts[:, 0]
    tau = submersion.tension_field_direct(spec, pts).norm
    np.testing.assert_allclose(tau, np.abs(x) / (1 + x * x), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(R=st.floats(-20, 20).filter(lambda r: abs(r) >= 0.05), c=st.floats(0, 5))
def test_rigidity_for_any_nonzero_gap(R, c):
    assert spaces.vertical_direction_solver(R, c).polar_only
