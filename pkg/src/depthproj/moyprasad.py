"""Threshold calculus for the Moy-Prasad lattices g_{x,r}, their strict
variants g_{x,r+}, the dual lattices g*_{x,-r}, membership regions on the
apartment, jump radii, and the unramified-SU3 valuation formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .convexity import SubComplex, is_convex_halfspace, subcomplex

Q = Fraction

INF = math.inf


def least_in_progression(offset, step, bound, strict=False):
    """Least element of offset + step*Z that is >= bound (or > if strict)."""
    k = (Q(bound) - offset) / step
    n = math.ceil(k)
    if strict and n == k:
        n += 1
    return offset + step * n


@dataclass(frozen=True)
class FiltrationSpec:
    torus: int
    per_root: tuple  # sorted ((root, constant), ...)
    group_units: bool = False  # r = 0 non-strict group case: units, not 1 + (p)

    def constants(self):
        return dict(self.per_root)

    def shifted(self, n):
        return FiltrationSpec(
            torus=self.torus + n,
            per_root=tuple((rho, c + n) for rho, c in self.per_root),
            group_units=False,
        )


@dataclass(frozen=True)
class ValuationVector:
    torus_val: object  # integer or math.inf
    per_root: tuple  # sorted ((root, valuation-or-inf), ...)


def valuation_vector(torus_val, root_vals):
    return ValuationVector(torus_val, tuple(sorted(root_vals.items())))


def lattice_spec(apt, x, r, strict=False):
    """Componentwise thresholds of g_{x,r} (strict: g_{x,r+})."""
    x = tuple(Q(t) for t in x)
    r = Q(r)
    if r < 0:
        raise ValueError("depth must be nonnegative")
    if not apt.window.contains(x):
        raise ValueError("point outside the window")
    per_root = []
    for rho in apt.spec.roots:
        off, step = apt.spec.progressions[rho]
        alpha_x = sum(c * t for c, t in zip(rho, x))
        per_root.append((rho, least_in_progression(off, step, r - alpha_x, strict)))
    torus = math.floor(r) + 1 if strict else math.ceil(r)
    return FiltrationSpec(torus, tuple(sorted(per_root)),
                          group_units=(r == 0 and not strict))


def dual_spec(apt, x, r):
    """Thresholds of g*_{x,-r}: 1 - c componentwise against g_{x,r+}."""
    strict = lattice_spec(apt, x, r, strict=True)
    return FiltrationSpec(
        torus=1 - strict.torus,
        per_root=tuple((rho, 1 - c) for rho, c in strict.per_root),
    )


def member(spec, v):
    """True iff every component valuation meets its threshold."""
    consts = spec.constants()
    vals = dict(v.per_root)
    if set(consts) != set(vals):
        raise ValueError("root systems do not match")
    if v.torus_val < spec.torus:
        return False
    return all(vals[rho] >= consts[rho] for rho in consts)


def region(apt, v, r, kind="lattice"):
    """Cells of the apartment where v lies in the (dual) lattice at depth r.

    Membership is tested at barycenters; it is constant on cells when
    r is a multiple of 1/m.  The result is asserted convex.
    """
    r = Q(r)
    if (r * apt.m).denominator != 1:
        raise ValueError("depth must be a multiple of 1/m for a subcomplex region")
    if kind not in ("lattice", "dual"):
        raise ValueError("kind must be 'lattice' or 'dual'")
    picked = []
    for cell in apt.cells():
        y = cell.barycenter()
        spec = dual_spec(apt, y, r) if kind == "dual" else lattice_spec(apt, y, r)
        if member(spec, v):
            picked.append(cell)
    sub = subcomplex(apt, picked) if picked else SubComplex(frozenset())
    assert set(sub.cells) == set(picked), "region is not face-closed"
    assert is_convex_halfspace(apt, sub), "region is not convex"
    return sub


def jump_radii(apt, x):
    """The r in [0,1) at which the non-strict filtration at x jumps."""
    x = tuple(Q(t) for t in x)
    candidates = {Q(0)}
    for rho in apt.spec.roots:
        off, step = apt.spec.progressions[rho]
        alpha_x = sum(c * t for c, t in zip(rho, x))
        r = least_in_progression(off + alpha_x, step, 0)
        while r < 1:
            candidates.add(r)
            r += step
    out = [r for r in sorted(candidates)
           if lattice_spec(apt, x, r) != lattice_spec(apt, x, r, strict=True)
           or r == 0]
    return out


def su3_thresholds(x, r, delta):
    """K-valuation thresholds for the SU3 root subgroups at depth r.

    Returns (b-threshold of U_{alpha,x,r} in 2Z+delta,
             b-threshold of U_{2alpha,x,r} in 2Z+delta+1,
             the raw pair (r - alpha(x) - delta/2, r - 2alpha(x))).
    """
    if delta not in (0, -1):
        raise ValueError("delta must be 0 or -1")
    x, r = Q(x), Q(r)
    if r < 0:
        raise ValueError("depth must be nonnegative")
    t_alpha = least_in_progression(Q(delta), 2, 2 * r - 2 * x)
    t_2alpha = least_in_progression(Q(delta + 1), 2, r - 2 * x)
    t_pair = (r - x - Q(delta, 2), r - 2 * x)
    return t_alpha, t_2alpha, t_pair
