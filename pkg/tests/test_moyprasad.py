import math
from fractions import Fraction

import pytest

from depthproj.apartment import build_apartment, make_window, root_system
from depthproj.moyprasad import (
    FiltrationSpec,
    dual_spec,
    jump_radii,
    lattice_spec,
    least_in_progression,
    member,
    region,
    su3_thresholds,
    valuation_vector,
)
from oracles import lcg

Q = Fraction


def brute_least(offset, step, bound, strict=False):
    """Scan the progression from far below; independent of ceiling arithmetic."""
    e = Q(offset) - 100 * Q(step)
    while (e <= bound) if strict else (e < bound):
        e += step
    return e


@pytest.fixture(scope="module")
def a1():
    return build_apartment(root_system("A1"), 1, make_window([(-3, 3)]))


@pytest.fixture(scope="module")
def a2():
    return build_apartment(root_system("A2"), 1, make_window([(-2, 2), (-2, 2)]))


def consts(spec):
    return spec.constants()


def test_least_in_progression_vs_brute():
    rnd = lcg(41)
    for _ in range(200):
        off = Q(rnd(8) - 4, 1 + rnd(3))
        step = Q(1 + rnd(4), 1 + rnd(2))
        bound = Q(rnd(40) - 20, 1 + rnd(5))
        strict = rnd(2) == 1
        assert least_in_progression(off, step, bound, strict) == \
            brute_least(off, step, bound, strict)


def test_lattice_spec_origin_strict(a1):
    spec = lattice_spec(a1, (0,), 0, strict=True)
    assert spec.torus == 1
    assert consts(spec) == {(1,): 1, (-1,): 1}
    assert not spec.group_units


def test_lattice_spec_midpoint_strict(a1):
    spec = lattice_spec(a1, (Q(1, 2),), 0, strict=True)
    assert spec.torus == 1
    assert consts(spec) == {(1,): 0, (-1,): 1}


def test_lattice_spec_group_units_flag(a1):
    assert lattice_spec(a1, (0,), 0).group_units
    assert not lattice_spec(a1, (0,), Q(1, 2)).group_units


def test_homothety(a1, a2):
    rnd = lcg(43)
    for apt, pts in ((a1, [(0,), (Q(1, 2),), (Q(-3, 2),)]),
                     (a2, [(0, 0), (Q(1, 2), Q(1, 3))])):
        for x in pts:
            for _ in range(5):
                r = Q(rnd(6), 1 + rnd(3))
                n = 1 + rnd(3)
                for strict in (False, True):
                    lifted = lattice_spec(apt, x, r, strict).shifted(n)
                    assert lattice_spec(apt, x, r + n, strict) == lifted


def test_monotone_in_depth(a1):
    rnd = lcg(47)
    for _ in range(20):
        x = (Q(rnd(12) - 6, 2),)
        r1 = Q(rnd(8), 2)
        r2 = r1 + Q(rnd(4), 2)
        lo, hi = lattice_spec(a1, x, r1), lattice_spec(a1, x, r2)
        assert lo.torus <= hi.torus
        assert all(consts(lo)[rho] <= consts(hi)[rho] for rho in consts(lo))


def test_dual_spec_examples(a1):
    d0 = dual_spec(a1, (0,), 0)
    assert d0.torus == 0 and consts(d0) == {(1,): 0, (-1,): 0}
    dh = dual_spec(a1, (Q(1, 2),), 0)
    assert dh.torus == 0 and consts(dh) == {(1,): 1, (-1,): 0}


def test_duality_involution(a1):
    for x in ((0,), (Q(1, 2),)):
        for r in (0, Q(1, 2), 1):
            strict = lattice_spec(a1, x, r, strict=True)
            dual = dual_spec(a1, x, r)
            again = FiltrationSpec(1 - dual.torus,
                                   tuple((rho, 1 - c) for rho, c in dual.per_root))
            assert again == FiltrationSpec(strict.torus, strict.per_root)


def test_member_examples(a1):
    g = lattice_spec(a1, (0,), 0, strict=True)
    assert member(g, valuation_vector(1, {(1,): 1, (-1,): 1}))
    assert not member(g, valuation_vector(1, {(1,): 0, (-1,): 1}))
    gh = lattice_spec(a1, (Q(1, 2),), 0, strict=True)
    assert member(gh, valuation_vector(1, {(1,): 0, (-1,): 1}))
    assert member(g, valuation_vector(math.inf, {(1,): math.inf, (-1,): math.inf}))


def test_member_rejects_mismatch(a1, a2):
    g = lattice_spec(a1, (0,), 0)
    with pytest.raises(ValueError):
        member(g, valuation_vector(0, {(1, 0): 0}))


def test_pairing_duality(a1, a2):
    """val<b, a> >= 1 for a in the strict lattice, b in the dual."""
    rnd = lcg(53)
    for apt, pts in ((a1, [(0,), (Q(1, 2),)]), (a2, [(0, 0), (1, 0)])):
        for x in pts:
            for r in (0, 1):
                g = lattice_spec(apt, x, r, strict=True)
                d = dual_spec(apt, x, r)
                for _ in range(20):
                    avals = {rho: c + rnd(3) for rho, c in g.per_root}
                    bvals = {rho: c + rnd(3) for rho, c in d.per_root}
                    at, bt = g.torus + rnd(3), d.torus + rnd(3)
                    comps = [avals[rho] + bvals[rho] for rho in avals]
                    comps.append(at + bt)
                    assert min(comps) >= 1


def test_region_vertex_example(a1):
    v = valuation_vector(math.inf, {(1,): 0, (-1,): 0})
    sub = region(a1, v, 0)
    assert [c.vertex_set for c in sub.sorted_cells()] == [((Q(0),),)]


def test_region_torus_only(a1):
    v = valuation_vector(5, {(1,): math.inf, (-1,): math.inf})
    sub = region(a1, v, 1)
    assert len(sub) == len(a1.cells())


def test_region_random_convex(a2):
    rnd = lcg(59)
    roots = a2.spec.roots
    for kind in ("lattice", "dual"):
        for _ in range(15):
            vals = {rho: rnd(5) - 2 for rho in roots}
            v = valuation_vector(rnd(3), vals)
            region(a2, v, rnd(2), kind)  # convexity asserted inside


def test_jump_radii_examples(a1):
    assert jump_radii(a1, (0,)) == [0]
    assert jump_radii(a1, (Q(1, 2),)) == [0, Q(1, 2)]
    assert jump_radii(a1, (Q(1, 3),)) == [0, Q(1, 3), Q(2, 3)]


def test_jump_radii_right_limit_oracle(a1, a2):
    """A radius is a jump iff the spec differs from its right limit."""
    eps = Q(1, 1000)
    for apt, pts in ((a1, [(0,), (Q(1, 2),), (Q(1, 3),)]),
                     (a2, [(0, 0), (Q(1, 2), 0), (Q(1, 3), Q(1, 4))])):
        for x in pts:
            jumps = set(jump_radii(apt, x))
            for k in range(60):
                r = Q(k, 60)
                changed = lattice_spec(apt, x, r) != lattice_spec(apt, x, r + eps)
                assert (r in jumps) == changed, (x, r)


def test_su3_examples():
    t_a, _, _ = su3_thresholds(0, 0, 0)
    assert t_a == 0
    _, t_2a, _ = su3_thresholds(0, Q(1, 2), -1)
    assert t_2a == 2
    assert t_2a == brute_least(0, 2, Q(1, 2))


def test_su3_pair():
    _, _, (ta, tb) = su3_thresholds(Q(1, 4), 1, -1)
    assert ta == 1 - Q(1, 4) + Q(1, 2) and tb == 1 - Q(1, 2)


def test_su3_intersection_identity():
    """U_{a,x,r} cap U_{2a,x,r} = U_{2a,x,2r} as b-valuation thresholds."""
    rnd = lcg(61)
    for _ in range(200):
        delta = -rnd(2)
        x = Q(rnd(17) - 8, 4)
        r = Q(rnd(13), 4)
        combined = brute_least(delta + 1, 2, max(2 * r - 2 * x, r - 2 * x))
        assert combined == su3_thresholds(x, 2 * r, delta)[1]


def test_su3_rejects_bad_delta():
    with pytest.raises(ValueError):
        su3_thresholds(0, 0, 1)
