from fractions import Fraction

import pytest

from depthproj.apartment import build_apartment, make_window, root_system
from depthproj.convexity import (
    SubComplex,
    box_complex,
    halfplane_complex,
    segment_complex,
    upsilon,
)
from depthproj.projector import (
    euler_sum,
    formal_projector,
    reduce_against,
    telescope_partition,
)
from oracles import lcg

Q = Fraction


@pytest.fixture(scope="module")
def a1():
    return build_apartment(root_system("A1"), 1, make_window([(-3, 3)]))


@pytest.fixture(scope="module")
def a1m2():
    return build_apartment(root_system("A1"), 2, make_window([(-2, 2)], 2))


@pytest.fixture(scope="module")
def a2():
    return build_apartment(root_system("A2"), 1, make_window([(-2, 2), (-2, 2)]))


def test_formal_projector_single_vertex(a1):
    sub = segment_complex(a1, 0, 0)
    e = formal_projector(a1, sub, 0)
    assert len(e.terms) == 1
    (sym, coeff), = e.terms
    assert coeff == 1 and sym.dim == 0 and sym.strict


def test_formal_projector_signs(a1):
    e = formal_projector(a1, segment_complex(a1, 0, 1), 0)
    by_dim = {}
    for sym, coeff in e.terms:
        by_dim.setdefault(sym.dim, []).append(coeff)
    assert by_dim[0] == [1, 1] and by_dim[1] == [-1]


def test_formal_projector_m2_halfdepth(a1m2):
    e = formal_projector(a1m2, segment_complex(a1m2, 0, 2), Q(1, 2))
    pos = [c for _, c in e.terms if c == 1]
    neg = [c for _, c in e.terms if c == -1]
    assert len(pos) == 5 and len(neg) == 4


def test_formal_projector_rejects_bad_depth(a1):
    with pytest.raises(ValueError):
        formal_projector(a1, segment_complex(a1, 0, 1), Q(1, 2))


def test_formal_projector_rejects_nonconvex(a1):
    sub = SubComplex(frozenset({a1.vertex_cell((Q(0),)), a1.vertex_cell((Q(2),))}))
    with pytest.raises(ValueError):
        formal_projector(a1, sub, 0)


def test_euler_sums(a1):
    assert euler_sum(segment_complex(a1, 0, 2)) == 1
    v2 = a1.vertex_cell((Q(2),))
    e12 = a1.locate((Q(3, 2),))
    assert euler_sum([v2, e12]) == 0


def test_euler_convex_a2(a2):
    rnd = lcg(5)
    for _ in range(10):
        x0, y0 = rnd(3) - 2, rnd(3) - 2
        w, h = 1 + rnd(2), 1 + rnd(2)
        sub = box_complex(a2, [(x0, min(x0 + w, 2)), (y0, min(y0 + h, 2))])
        if sub.cells:
            assert euler_sum(sub) == 1


def test_telescope_a1_example(a1):
    small = segment_complex(a1, 0, 0)
    big = segment_complex(a1, -2, 2)
    classes, problems = telescope_partition(a1, (0,), 0, small, big)
    assert not problems
    assert len(classes) == 4
    for cl in classes:
        assert cl.euler == 0 and cl.interval_ok and cl.strict_growth
        assert len(cl.cells) == 2


def test_telescope_a1_radius_one(a1):
    small = segment_complex(a1, -1, 1)
    big = segment_complex(a1, -3, 3)
    classes, problems = telescope_partition(a1, (0,), 1, small, big)
    assert not problems
    covered = [c for cl in classes for c in cl.cells]
    assert len(covered) == len(big) - len(small)
    assert all(cl.euler == 0 for cl in classes)


def test_telescope_empty_difference(a1):
    sub = segment_complex(a1, -1, 1)
    classes, problems = telescope_partition(a1, (0,), 1, sub, sub)
    assert classes == [] and problems == []


def test_telescope_precondition_reporting(a1):
    small = segment_complex(a1, 0, 0)  # misses Upsilon at s=1
    big = segment_complex(a1, -2, 2)
    with pytest.raises(ValueError, match="Upsilon"):
        telescope_partition(a1, (0,), 1, small, big)
    with pytest.raises(ValueError, match="not in the smaller"):
        telescope_partition(a1, (1,), 0, small, big)


def test_reduce_against_prop_stab_b(a1):
    e = formal_projector(a1, segment_complex(a1, 0, 2), 0)
    red = reduce_against(a1, e, (0,), 0, 0)
    (sym, coeff), = red.terms
    assert coeff == 1 and sym.cell_key == ((Q(0),),) and sym.depth == 0 and sym.strict


def test_reduce_against_singleton(a1):
    e = formal_projector(a1, segment_complex(a1, 0, 0), 1)
    red = reduce_against(a1, e, (0,), 1, 2)
    assert red == e


def test_reduce_against_stabilization(a1):
    big = formal_projector(a1, segment_complex(a1, -2, 2), 0)
    small = formal_projector(a1, segment_complex(a1, -1, 1), 0)
    assert reduce_against(a1, big, (0,), 0, 1) == reduce_against(a1, small, (0,), 0, 1)


def hexagon(a2, radius):
    cuts = [((1, 0), radius), ((-1, 0), radius), ((0, 1), radius),
            ((0, -1), radius), ((1, 1), radius), ((-1, -1), radius)]
    return halfplane_complex(a2, cuts)


def test_reduce_against_stabilization_a2(a2):
    big_sub = box_complex(a2, [(-2, 2), (-2, 2)])
    small_sub = hexagon(a2, 2)
    assert all(c in small_sub for c in upsilon(a2, (0, 0), 1))
    big = formal_projector(a2, big_sub, 0)
    small = formal_projector(a2, small_sub, 0)
    assert reduce_against(a2, big, (0, 0), 0, 1) == reduce_against(a2, small, (0, 0), 0, 1)


def test_telescope_a2(a2):
    big_sub = box_complex(a2, [(-2, 2), (-2, 2)])
    small_sub = hexagon(a2, 2)
    classes, problems = telescope_partition(a2, (0, 0), 1, small_sub, big_sub)
    assert not problems
    covered = [c for cl in classes for c in cl.cells]
    assert len(covered) == len(big_sub) - len(small_sub)
    assert all(cl.euler == 0 for cl in classes)
