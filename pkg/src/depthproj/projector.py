"""Symbolic depth-r projector (the signed sum over cells) and the telescoping
certificate behind its stabilization."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .convexity import (
    interval,
    is_convex_halfspace,
    max_polysimplex,
    min_face,
    upsilon,
)

Q = Fraction


@dataclass(frozen=True)
class SubgroupSymbol:
    cell_key: tuple
    dim: int
    depth: Fraction
    strict: bool


@dataclass(frozen=True)
class FormalSignedSum:
    terms: tuple  # sorted ((symbol, coefficient), ...), zero coefficients dropped

    @staticmethod
    def from_dict(d):
        items = tuple(sorted(((s, c) for s, c in d.items() if c != 0),
                             key=lambda t: (t[0].cell_key, t[0].depth, t[0].strict)))
        return FormalSignedSum(items)

    def as_dict(self):
        return dict(self.terms)


def formal_projector(apt, sub, r):
    """One term (-1)^dim per cell of a convex subcomplex, at depth r, strict."""
    r = Q(r)
    if not sub.cells:
        raise ValueError("empty subcomplex")
    if (r * apt.m).denominator != 1 or r < 0:
        raise ValueError("depth must be a nonnegative multiple of 1/m")
    if not is_convex_halfspace(apt, sub):
        raise ValueError("subcomplex is not convex")
    d = {}
    for cell in sub.sorted_cells():
        sym = SubgroupSymbol(cell.key, cell.dim, r, True)
        d[sym] = d.get(sym, 0) + (-1) ** cell.dim
    return FormalSignedSum.from_dict(d)


def euler_sum(cells):
    cells = getattr(cells, "cells", cells)
    return sum((-1) ** c.dim for c in cells)


@dataclass(frozen=True)
class TelescopeClass:
    sigma_prime: object
    sigma_max: object
    cells: tuple
    euler: int
    interval_ok: bool
    strict_growth: bool  # sigma'' != sigma'

    @property
    def ok(self):
        return self.interval_ok and self.strict_growth and self.euler == 0


def telescope_partition(apt, x, s, sub_small, sub_big):
    """Partition sub_big minus sub_small into retraction fibers and certify
    each one is a zero-Euler face interval."""
    x = tuple(Q(t) for t in x)
    s = Q(s)
    xcell = apt.vertex_cell(x)
    problems = []
    if xcell not in sub_small:
        raise ValueError("precondition failed: x not in the smaller subcomplex")
    if not sub_small <= sub_big:
        raise ValueError("precondition failed: subcomplexes not nested")
    for name, sub in (("small", sub_small), ("big", sub_big)):
        if not is_convex_halfspace(apt, sub):
            raise ValueError("precondition failed: %s subcomplex not convex" % name)
    ups = upsilon(apt, x, s)
    missing = [c for c in ups if c not in sub_small]
    if missing:
        raise ValueError("precondition failed: Upsilon not contained in the smaller subcomplex")

    fibers = {}
    for cell in sub_big.sorted_cells():
        if cell in sub_small:
            continue
        face = min_face(apt, x, s, cell, check=False)
        fibers.setdefault(face.key, []).append(cell)

    classes = []
    for fkey in sorted(fibers):
        face = apt.cell(fkey)
        cells = fibers[fkey]
        if face in sub_small:
            problems.append(("fiber lands inside the smaller subcomplex", fkey))
        top = max_polysimplex(apt, x, s, face, check=False)
        expected = {c.key for c in interval(apt, face, top)}
        got = {c.key for c in cells}
        classes.append(TelescopeClass(
            sigma_prime=face,
            sigma_max=top,
            cells=tuple(sorted(cells, key=lambda c: (c.dim, c.key))),
            euler=euler_sum(cells),
            interval_ok=(expected == got),
            strict_growth=(top.key != face.key),
        ))
    bad = [c for c in classes if not c.ok]
    return classes, problems + [("class certificate failed", c.sigma_prime.key) for c in bad]


def reduce_against(apt, formal, x, r, s):
    """Replace every cell symbol by its minimal face: the symbolic shadow of
    convolving with the depth-(r+s) group at x."""
    x = tuple(Q(t) for t in x)
    r, s = Q(r), Q(s)
    d = {}
    tables = [(psi, apt.sign_table(psi))
              for psi in apt.functionals(pad=Q(s) + apt.window.diameter())]
    for sym, coeff in formal.terms:
        cell = apt.cell(sym.cell_key)
        face = min_face(apt, x, s, cell, check=False)
        i, j = apt.cell_position(cell), apt.cell_position(face)
        # root-wise inclusion criterion: psi positive on the cell stays
        # positive on the face unless psi exceeds s at x
        for psi, t in tables:
            if t[i] > 0:
                assert t[j] > 0 or psi(x) > s
        new = SubgroupSymbol(face.key, face.dim, sym.depth, sym.strict)
        d[new] = d.get(new, 0) + coeff
    return FormalSignedSum.from_dict(d)
