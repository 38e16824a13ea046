"""Steinberg representation of SL2(F_q) modeled on C[P^1] minus the trivial
summand, Hecke sign action, and the unipotent-index measure identity linking
the finite group to the depth-zero projector."""

from __future__ import annotations

from fractions import Fraction

from .sl2 import GroupSpec, enumerate_group, member_entries

Q = Fraction


def sl2_order(q):
    return q * (q * q - 1)


def sl2_group(q):
    """All of SL2(F_q) as residue 4-tuples (a, b, c, d)."""
    out = []
    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    if (a * d - b * c) % q == 1 % q:
                        out.append((a, b, c, d))
    assert len(out) == sl2_order(q)
    return out


def projective_line(q):
    """Points [u : v], normalized so the first nonzero coordinate is 1."""
    return [(1, x) for x in range(q)] + [(0, 1)]


def _normalize(q, u, v):
    u, v = u % q, v % q
    if u != 0:
        return (1, v * pow(u, -1, q) % q)
    if v == 0:
        raise ValueError("zero vector does not define a point")
    return (0, 1)


def act(q, g, pt):
    a, b, c, d = g
    u, v = pt
    return _normalize(q, a * u + b * v, c * u + d * v)


def steinberg_character(q, g):
    """(#fixed points on the projective line) - 1."""
    a, b, c, d = (x % q for x in g)
    if (a * d - b * c) % q != 1 % q:
        raise ValueError("determinant is not 1")
    fixed = sum(1 for pt in projective_line(q) if act(q, (a, b, c, d), pt) == pt)
    return fixed - 1


def character_norm_squared(q):
    return sum(steinberg_character(q, g) ** 2 for g in sl2_group(q))


def borel(q):
    return [g for g in sl2_group(q) if g[2] == 0]


def _operator(q, support, weight):
    """Matrix of sum_{g in support} weight * translation-by-g on C[P^1]."""
    pts = projective_line(q)
    idx = {pt: i for i, pt in enumerate(pts)}
    n = len(pts)
    mat = [[Q(0)] * n for _ in range(n)]
    for g in support:
        a, b, c, d = g
        inv = (d % q, -b % q, -c % q, a % q)
        for j, pt in enumerate(pts):
            mat[idx[act(q, inv, pt)]][j] += weight
    return mat


def hecke_sign_action(q):
    """Eigenvalues of h_w = (1/|B|) 1_{BwB} on the B-invariant line of St."""
    if q > 7:
        raise ValueError("q must be at most 7")
    pts = projective_line(q)
    B = borel(q)
    orbits = set()
    for pt in pts:
        orbits.add(frozenset(act(q, g, pt) for g in B))
    dim_inv = len(orbits) - 1  # B-invariant functions, minus the trivial line
    if dim_inv != 1:
        raise ValueError("B-invariant subspace of St is not one-dimensional")
    # the sum-zero B-invariant vector: q at the B-fixed point, -1 on the orbit
    v = [Q(-1)] * len(pts)
    v[pts.index((1, 0))] = Q(q)
    s = (0, 1, q - 1, 0)
    double_coset = sorted(set(
        _matmul(q, _matmul(q, b1, s), b2) for b1 in B for b2 in B))
    eigen = {}
    for name, support in (("identity", B), ("reflection", double_coset)):
        mat = _operator(q, support, Q(1, len(B)))
        out = [sum(row[j] * v[j] for j in range(len(v))) for row in mat]
        ratios = {out[i] / v[i] for i in range(len(v))}
        if len(ratios) != 1:
            raise ValueError("B-invariant vector is not an eigenvector")
        eigen[name] = ratios.pop()
    return {"dim_invariants": dim_inv, "eigenvalues": eigen,
            "reflection_cosets": Q(len(double_coset), len(B))}


def _matmul(q, g, h):
    a, b, c, d = g
    e, f, x, y = h
    return ((a * e + b * x) % q, (a * f + b * y) % q,
            (c * e + d * x) % q, (c * f + d * y) % q)


def _iwahori_plus(p, N, budget=500000):
    return enumerate_group(GroupSpec(Q(1, 2), Q(0), True), p, N, budget)


def unipotent_index_identity(p, N, t, budget=500000):
    """[I+ : G_{sigma,0+}] by class counting, against |U| of the quotient.

    t is the barycenter of a cell of [0,1]: 0 or 1 (vertices) or 1/2 (the
    base chamber).
    """
    t = Q(t)
    if t not in (Q(0), Q(1), Q(1, 2)):
        raise ValueError("cell must be a face of the base chamber")
    iwahori = _iwahori_plus(p, N, budget)
    sigma = enumerate_group(GroupSpec(t, Q(0), True), p, N, budget)
    index = Q(len(iwahori), len(sigma))
    expected = p if t.denominator == 1 else 1
    return {"index": index, "expected": expected, "pass": index == expected}


def depth_zero_comparison(apt, sub, p, N, f, budget=500000):
    """E_0^Sigma(f) two ways: through the group engine, and through the
    unipotent-weighted sum against the normalized counting measure on I+.

    f is a dict from level-N truncation keys (of classes inside I+) to
    rational values.
    """
    iwahori = _iwahori_plus(p, N, budget)
    bad = set(f) - set(iwahori.classes)
    if bad:
        raise ValueError("test function is not supported in I+")
    specs = []
    for cell in sub.sorted_cells():
        t = cell.barycenter()[0]
        if not 0 <= t <= 1:
            raise ValueError("cell outside the base chamber: G_{sigma,0+} "
                             "must sit inside I+")
        specs.append((cell, GroupSpec(t, Q(0), True)))
    engine_side = Q(0)
    for cell, spec in specs:
        classes = enumerate_group(spec, p, N, budget)
        total = sum((f.get(key, Q(0)) for key in classes.classes), Q(0))
        engine_side += (-1) ** cell.dim * Q(total, len(classes))
    measure_side = Q(0)
    mass = Q(1, len(iwahori))
    for cell, spec in specs:
        u_count = p if cell.dim == 0 else 1
        integral = sum(
            (f[key] * mass for key, rep in iwahori.classes.items()
             if key in f and member_entries(rep, p, spec)), Q(0))
        measure_side += (-1) ** cell.dim * u_count * integral
    return {"engine": engine_side, "measure": measure_side,
            "pass": engine_side == measure_side}
