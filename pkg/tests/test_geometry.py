import numpy as np
import pytest

from conftest import random_rotation
from geo3 import spaces
from geo3.calculus import Chart, everywhere
from geo3.errors import DomainError, FrameError, UsageError
from geo3.geometry import (
    FrameGeometry,
    MetricField,
    StructureFunctions,
    check_orthonormal,
    koszul_connection,
    ricci_frame,
    riemann_frame,
    structure_functions,
    verify_connection_tables,
)


def test_flat_coordinate_frame_has_no_structure():
    sf = structure_functions(spaces.bcv_space(0, 0).frame, (0.3, 0.2, 0.1))
    assert np.all(sf.c == 0)


def test_bcv_structure_at_unit_x():
    sf = structure_functions(spaces.bcv_space(1, 2).frame, (1.0, 0.0, 0.0))
    np.testing.assert_allclose(sf.c[0, 0, 1], [0.0, 2.0, 2.0], atol=1e-15)
    assert sf.residual[0] <= 1e-9


def test_berger_structure_at_half():
    c = structure_functions(spaces.berger_space(0.5).frame, (0.5, 0.5, 0.5, 0.5)).c[0]
    assert c[0, 1, 2] == pytest.approx(1.0)
    assert c[1, 2, 0] == pytest.approx(4.0)
    assert c[2, 0, 1] == pytest.approx(4.0)


def test_structure_functions_are_exactly_antisymmetric():
    raw = np.random.default_rng(0).standard_normal((4, 3, 3, 3))
    c = StructureFunctions(raw, np.zeros(4)).c
    assert np.array_equal(c, -np.swapaxes(c, 1, 2))


def test_koszul_of_zero_is_zero():
    assert np.all(koszul_connection(StructureFunctions(np.zeros((1, 3, 3, 3)), np.zeros(1))).gamma == 0)


def test_bcv_connection_at_unit_x():
    fg = FrameGeometry(spaces.bcv_space(1, 2).frame, [(1.0, 0.0, 0.0)])
    gam = fg.connection.gamma[0]
    assert gam[0, 0, 1] == pytest.approx(0.0, abs=1e-15)
    assert gam[1, 1, 0] == pytest.approx(2.0)
    assert gam[0, 1, 2] == pytest.approx(1.0)


@pytest.mark.parametrize("eps", [0.3, 1.0, 1.7])
def test_berger_connection_entries(eps):
    fg = FrameGeometry(spaces.berger_space(eps).frame, spaces.berger_space(eps).sample(5, 0))
    gam = fg.connection.gamma
    np.testing.assert_allclose(gam[:, 2, 0, 1], (2 - eps**2) / eps)
    np.testing.assert_allclose(gam[:, 0, 1, 2], eps)
    np.testing.assert_allclose(gam[:, 2, 2], 0.0, atol=1e-14)


def test_connection_is_metric_and_torsion_free(catalog):
    for spec in catalog:
        fg = FrameGeometry(spec.closed_form_frame, spec.sample(50, 2))
        assert fg.connection.metric_defect() <= 1e-10
        assert fg.connection.torsion_defect(fg.structure) <= 1e-10


def test_flat_space_is_flat():
    R = riemann_frame(spaces.bcv_space(0, 0).frame, np.array([[0.1, 0.2, 0.3]])).R
    assert np.all(R == 0)
    np.testing.assert_array_equal(ricci_frame(spaces.bcv_space(0, 0).frame, (0, 0, 0)), np.zeros((3, 3)))


@pytest.mark.parametrize("m, l", [(1, 2), (-1, 1), (0.3, -0.8)])
def test_bcv_curvature_closed_forms(m, l):
    space = spaces.bcv_space(m, l)
    R = riemann_frame(space.frame, space.sample(20, 4))
    np.testing.assert_allclose(R.component(1, 2, 1, 2), 4 * m - 0.75 * l * l, atol=1e-12)
    np.testing.assert_allclose(R.component(1, 3, 1, 3), l * l / 4, atol=1e-12)
    np.testing.assert_allclose(R.component(2, 3, 2, 3), l * l / 4, atol=1e-12)
    ric = R.ricci()
    np.testing.assert_allclose(ric, np.broadcast_to(np.diag([4 * m - l * l / 2] * 2 + [l * l / 2]), ric.shape), atol=1e-12)


def test_round_sphere_sectional_curvatures():
    space = spaces.berger_space(1.0)
    R = riemann_frame(space.frame, space.sample(20, 4))
    for idx in [(1, 2, 1, 2), (1, 3, 1, 3), (2, 3, 2, 3)]:
        np.testing.assert_allclose(R.component(*idx), 1.0, atol=1e-12)


def test_berger_vertical_ricci():
    space = spaces.berger_space(0.5)
    ric = ricci_frame(space.frame, space.sample(10, 1))
    np.testing.assert_allclose(ric[:, 2, 2], 0.5, atol=1e-12)


def test_tables_match_for_sample_spaces():
    for space in (spaces.bcv_space(1, 2), spaces.berger_space(0.7), spaces.bcv_space(0, 0)):
        rep = verify_connection_tables(space, space.sample(100, 9))
        assert rep.passed(1e-9), rep.max_dev


def test_tables_need_closed_forms():
    spec = spaces.nil_example23()
    with pytest.raises(UsageError):
        verify_connection_tables(spec.total, spec.sample(3, 0))


def test_symmetries_in_random_rotated_frames(catalog, rng):
    for spec in catalog:
        frame = spec.closed_form_frame.rotated(random_rotation(rng))
        R = FrameGeometry(frame, spec.sample(100, 5)).curvature
        assert max(R.symmetry_defects().values()) <= 1e-8, spec.label


def test_ricci_eigenvalues_do_not_depend_on_the_frame(catalog, rng):
    for spec in catalog:
        pts = spec.sample(30, 6)
        base = np.linalg.eigvalsh(FrameGeometry(spec.closed_form_frame, pts).curvature.ricci())
        turned = FrameGeometry(spec.closed_form_frame.rotated(random_rotation(rng)), pts).curvature.ricci()
        assert np.abs(np.linalg.eigvalsh(turned) - base).max() <= 1e-8, spec.label


def test_non_orthonormal_frame_is_rejected():
    space = spaces.bcv_space(0, 0)
    squeezed = MetricField(lambda x, y, z: [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], space.chart)
    from geo3.geometry import FrameField

    frame = FrameField(*space.frame.fields, squeezed)
    with pytest.raises(FrameError):
        FrameGeometry(frame, [(0.0, 0.0, 0.0)])


def test_rotation_must_be_orthogonal():
    with pytest.raises(FrameError):
        spaces.bcv_space(0, 1).frame.rotated(np.diag([1.0, 1.0, 1.001]))


def test_check_orthonormal_reports_defect():
    assert check_orthonormal(np.eye(3)[None], np.zeros((1, 3)))[0] == 0.0


def test_degenerate_metric_is_detected():
    chart = Chart("line", 2, everywhere)
    g = MetricField(lambda x, y: [[1.0, 0.0], [0.0, x * x]], chart, "degenerate")
    assert g.check_spd([(1.0, 0.0)])[0] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        g.check_spd([(0.0, 0.0)])
