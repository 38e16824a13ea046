from fractions import Fraction

import pytest

from depthproj.apartment import (
    build_apartment,
    make_window,
    root_system,
)
from oracles import grid_cell_count

Q = Fraction


def apt_a1(m=1, lo=-2, hi=2):
    return build_apartment(root_system("A1"), m, make_window([(lo, hi)], m))


def apt_a2(m=1, lo=-2, hi=2):
    return build_apartment(root_system("A2"), m, make_window([(lo, hi), (lo, hi)], m))


def test_a1_window_cell_count():
    apt = apt_a1()
    cells = apt.cells()
    assert len(cells) == 9
    assert sorted(c.dim for c in cells) == [0] * 5 + [1] * 4
    vertex_coords = sorted(c.vertex_set[0][0] for c in cells if c.dim == 0)
    assert vertex_coords == [-2, -1, 0, 1, 2]


def test_a1_halfinteger_subdivision():
    apt = apt_a1(m=2, lo=0, hi=1)
    cells = apt.cells()
    assert len(cells) == 5
    assert sorted(c.vertex_set[0][0] for c in cells if c.dim == 0) == [0, Q(1, 2), 1]


def test_a2_count_matches_grid_oracle():
    apt = apt_a2()
    families = [
        ((1, 0), list(range(-5, 6))),
        ((0, 1), list(range(-5, 6))),
        ((1, 1), list(range(-10, 11))),
    ]
    expected = grid_cell_count(families, [(Q(-2), Q(2)), (Q(-2), Q(2))])
    assert len(apt.cells()) == expected


def test_a1xa1_count_matches_grid_oracle():
    spec = root_system("A1xA1")
    apt = build_apartment(spec, 1, make_window([(-1, 1), (-1, 1)]))
    families = [
        ((1, 0), list(range(-4, 5))),
        ((0, 1), list(range(-4, 5))),
    ]
    expected = grid_cell_count(families, [(Q(-1), Q(1)), (Q(-1), Q(1))], denom=2)
    assert len(apt.cells()) == expected


def test_faces_of_edge_and_vertex():
    apt = apt_a1()
    edge = apt.locate((Q(1, 2),))
    fs = apt.faces(edge)
    assert {f.dim for f in fs} == {0, 1}
    assert len(fs) == 3
    v0 = apt.locate((0,))
    assert apt.faces(v0) == [v0]


def test_simplex_face_count_a2():
    apt = apt_a2()
    for ch in apt.chambers():
        fs = apt.faces(ch)
        assert len(fs) == 2 ** (ch.dim + 1) - 1 == 7
        assert sorted(f.dim for f in fs) == [0, 0, 0, 1, 1, 1, 2]


def test_product_chamber_face_count():
    spec = root_system("A1xA1")
    apt = build_apartment(spec, 1, make_window([(-1, 1), (-1, 1)]))
    for ch in apt.chambers():
        assert len(apt.faces(ch)) == 3 ** spec.rank == 9


def test_face_closure_property():
    for apt in (apt_a1(), apt_a2(m=1, lo=-1, hi=1)):
        keys = {c.key for c in apt.cells()}
        for c in apt.cells():
            for f in apt.faces(c):
                assert f.key in keys


def test_refinement_consistency():
    coarse = apt_a1(m=1, lo=0, hi=2)
    fine = apt_a1(m=3, lo=0, hi=2)
    for d in (0, 1):
        for cell in (c for c in coarse.cells() if c.dim == d):
            inside = [c for c in fine.cells() if c.dim == d
                      and all(coarse.locate(v).key == cell.key or True for v in c.vertex_set)
                      and coarse.locate(c.barycenter()).key == cell.key]
            assert len(inside) == 3 ** d


def test_refinement_consistency_a2():
    coarse = apt_a2(m=1, lo=0, hi=1)
    fine = apt_a2(m=2, lo=0, hi=1)
    for cell in coarse.cells():
        inside = [c for c in fine.cells()
                  if c.dim == cell.dim and coarse.locate(c.barycenter()).key == cell.key]
        assert len(inside) == 2 ** cell.dim


def test_functional_constant_sign_on_cells():
    apt = apt_a2(lo=-1, hi=1)
    for psi in apt.functionals():
        for cell in apt.cells():
            s = apt.sign_on(psi, cell)  # raises on a sign change
            assert s in (-1, 0, 1)


def test_simple_affine_roots_a1():
    apt = apt_a1()
    ch = apt.locate((Q(1, 2),))
    delta = apt.simple_affine_roots(ch)
    got = {(psi.root, psi.constant) for psi in delta}
    assert got == {((1,), Q(0)), ((-1,), Q(1))}


def test_simple_affine_roots_a1_m2():
    apt = apt_a1(m=2, lo=0, hi=1)
    ch = apt.locate((Q(1, 4),))
    got = {(psi.root, psi.constant) for psi in apt.simple_affine_roots(ch)}
    assert got == {((1,), Q(0)), ((-1,), Q(1, 2))}


def test_simple_affine_roots_a2_positive_inside():
    apt = apt_a2(lo=-1, hi=1)
    for ch in apt.chambers():
        delta = apt.simple_affine_roots(ch)
        assert len(delta) == 3
        b = ch.barycenter()
        for psi in delta:
            assert psi(b) > 0


def test_partition_of_unity_a1():
    apt = apt_a1()
    ch = apt.locate((Q(1, 2),))
    coeffs = apt.partition_of_unity(ch)
    assert all(n == 1 for n in coeffs.values())


def test_partition_of_unity_a1_m2():
    apt = apt_a1(m=2, lo=0, hi=1)
    ch = apt.locate((Q(1, 4),))
    coeffs = apt.partition_of_unity(ch)
    assert sorted(coeffs.values()) == [2, 2]


def test_partition_of_unity_exact_everywhere():
    systems = [
        ("A1", [(-2, 2)], 1),
        ("A1", [(0, 1)], 2),
        ("A2", [(-1, 1), (-1, 1)], 1),
        ("C2", [(0, 1), (0, 1)], 1),
        ("G2", [(0, 1), (0, 1)], 1),
        ("A1xA1", [(-1, 1), (-1, 1)], 1),
    ]
    for name, bounds, m in systems:
        apt = build_apartment(root_system(name), m, make_window(bounds, m))
        assert apt.chambers(), name
        for ch in apt.chambers():
            coeffs = apt.partition_of_unity(ch)
            assert all(n > 0 for n in coeffs.values())
            # exactness at window corners, not just the chamber's own vertices
            for corner in _corners(apt.window):
                total = sum(n * psi(corner) for psi, n in coeffs.items())
                assert total == 1


def _corners(window):
    from itertools import product
    return [tuple(p) for p in product(*window.bounds)]


def test_locate_examples():
    apt = apt_a1()
    assert apt.locate((Q(1, 3),)).dim == 1
    assert apt.locate((1,)).vertex_set == ((Q(1),),)
    apt2 = apt_a2(lo=-1, hi=1)
    for ch in apt2.chambers():
        assert apt2.locate(ch.barycenter()).key == ch.key


def test_locate_outside_window():
    apt = apt_a1()
    with pytest.raises(ValueError):
        apt.locate((3,))


def test_bc1_progressions():
    spec = root_system("BC1", delta=0)
    assert spec.progressions[(1,)] == (0, Q(1, 2))
    assert spec.progressions[(2,)] == (Q(1, 2), 1)
    spec = root_system("BC1", delta=-1)
    assert spec.progressions[(1,)] == (Q(-1, 4), Q(1, 2))
    # cell enumeration uses only the non-divisible root's progression
    apt = build_apartment(root_system("BC1", delta=0), 1, make_window([(0, 1)]))
    vcoords = sorted(c.vertex_set[0][0] for c in apt.vertices())
    assert vcoords == [0, Q(1, 2), 1]


def test_unsupported_system():
    with pytest.raises(ValueError):
        root_system("E8")


def test_functional_padding_scope():
    apt = apt_a1()
    near = {(f.root, f.constant) for f in apt.functionals()}
    far = {(f.root, f.constant) for f in apt.functionals(pad=6)}
    assert near < far
