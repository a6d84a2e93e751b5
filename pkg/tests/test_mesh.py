import numpy as np
import pytest

from chpfem.errors import GeometryError, MeshParseError, ParameterError
from chpfem.mesh import (build_dofmap, import_quad_mesh, make_mapped_quad_mesh, make_rect_mesh,
                         make_segment_mesh, refine_quad_mesh, write_quad_mesh)

TRAPEZOID = np.array([[0.0, 0.0], [2.0, 0.0], [1.5, 1.0], [0.5, 1.0]])


def test_segment_mesh_basic():
    m = make_segment_mesh(-1.0, 2.0, 6)
    assert m.n_elem == 6 and m.n_vertices == 7
    assert m.measure() == pytest.approx(3.0) and m.h() == pytest.approx(0.5)
    assert len(m.boundary) == 2


def test_rect_mesh_basic():
    m = make_rect_mesh(2.0, 1.0, 4, 3)
    assert m.n_elem == 12 and m.n_vertices == 20
    assert m.measure() == pytest.approx(2.0)
    lo, hi = m.bounding_box()
    assert np.allclose(lo, [0, 0]) and np.allclose(hi, [2, 1])
    assert len(m.boundary) == 2 * (4 + 3)


def test_mapped_mesh_area_is_exact():
    m = make_mapped_quad_mesh(TRAPEZOID, 5, 3)
    assert m.measure() == pytest.approx(1.5, rel=1e-13)


@pytest.mark.parametrize("bad", [dict(lx=0, ly=1, nx=1, ny=1), dict(lx=1, ly=1, nx=0, ny=1)])
def test_rect_rejects_bad_arguments(bad):
    with pytest.raises(ParameterError):
        make_rect_mesh(**bad)


def test_segment_rejects_bad_arguments():
    with pytest.raises(ParameterError):
        make_segment_mesh(1.0, 0.0, 3)
    with pytest.raises(ParameterError):
        make_segment_mesh(0.0, 1.0, 0)


def test_write_import_round_trip(tmp_path):
    m = make_mapped_quad_mesh(TRAPEZOID, 3, 2)
    text = write_quad_mesh(m)
    path = tmp_path / "trap.mesh"
    path.write_text(text)
    for src in (text, text.encode(), str(path), path):
        m2 = import_quad_mesh(src)
        assert np.allclose(m2.vertices, m.vertices) and np.array_equal(m2.elements, m.elements)


@pytest.mark.parametrize("text, line", [
    ("$vertices 1\n0 0\n", 2),
    ("$vertices 4\n0 0\n1 0\n1 1\n0 1\n$elements 1\n0 1 2\n", 7),
    ("$vertices 4\n0 0\n1 0\n1 1\n0 1\n$elements 1\n0 1 2 7\n", 7),
    ("$vertices 4\n0 0\n1 0\nx 1\n0 1\n$elements 1\n0 1 2 3\n", 4),
    ("$vertices 2\n0 0\n", 2),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(MeshParseError) as info:
        import_quad_mesh(text)
    assert info.value.line == line


def test_clockwise_element_is_rejected():
    with pytest.raises(GeometryError):
        import_quad_mesh("$vertices 4\n0 0\n0 1\n1 1\n1 0\n$elements 1\n0 1 2 3\n")


def test_refinement_preserves_area_and_quadruples():
    m = make_mapped_quad_mesh(TRAPEZOID, 2, 2)
    r = refine_quad_mesh(m)
    assert r.n_elem == 4 * m.n_elem
    assert r.measure() == pytest.approx(m.measure(), rel=1e-13)
    # structured refinement of a structured mesh: vertex count (2n+1)^2
    assert r.n_vertices == 25


@pytest.mark.parametrize("p", [1, 2, 3, 7])
def test_dof_counts(p):
    assert build_dofmap(make_segment_mesh(0, 1, 5), p).n_dofs == 5 * p + 1
    assert build_dofmap(make_rect_mesh(1, 1, 3, 2), p).n_dofs == (3 * p + 1) * (2 * p + 1)


@pytest.mark.parametrize("p", [2, 4])
def test_dofs_are_shared_exactly_once(p):
    # every DoF coordinate is unique, and shared DoFs sit on common edges
    d = build_dofmap(make_mapped_quad_mesh(TRAPEZOID, 3, 2), p)
    rounded = {tuple(np.round(c, 10)) for c in d.dof_coords}
    assert len(rounded) == d.n_dofs
    assert set(np.unique(d.element_to_global)) == set(range(d.n_dofs))
