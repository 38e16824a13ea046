"""Basic subcomplexes Gamma_s(sigma', x), chamber sets Upsilon_{x,s}, the
retraction to the minimal face, maximal cells and face intervals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .apartment import AffineFunctional

Q = Fraction


@dataclass(frozen=True)
class SubComplex:
    cells: frozenset  # of Polysimplex

    def __post_init__(self):
        object.__setattr__(self, "_keys", frozenset(c.key for c in self.cells))

    def __contains__(self, cell):
        return cell.key in self._keys

    def __len__(self):
        return len(self.cells)

    def __le__(self, other):
        return self._keys <= other._keys

    def keys(self):
        return self._keys

    def sorted_cells(self):
        return sorted(self.cells, key=lambda c: (c.dim, c.key))


def subcomplex(apt, cells):
    """Face-closed SubComplex from a cell iterable."""
    out = {}
    for c in cells:
        for f in apt.faces(c):
            out[f.key] = f
    return SubComplex(frozenset(out.values()))


def segment_complex(apt, lo, hi):
    """All cells of a rank-1 apartment inside [lo, hi]."""
    lo, hi = Q(lo), Q(hi)
    picked = [c for c in apt.cells()
              if all(lo <= v[0] <= hi for v in c.vertex_set)]
    return subcomplex(apt, picked)


def box_complex(apt, bounds):
    """All cells whose closure lies in a coordinate box."""
    bounds = [(Q(a), Q(b)) for a, b in bounds]
    picked = [c for c in apt.cells()
              if all(all(lo <= v[i] <= hi for i, (lo, hi) in enumerate(bounds))
                     for v in c.vertex_set)]
    return subcomplex(apt, picked)


def halfplane_complex(apt, cuts):
    """Cells whose closure satisfies <root, v> <= bound for every cut.

    Cuts along root directions with admissible bounds produce convex
    subcomplexes, the natural shape for stabilization experiments.
    """
    tables = [apt.sign_table(AffineFunctional(tuple(rho), -Q(b)))
              for rho, b in cuts]
    picked = [c for i, c in enumerate(apt.cells())
              if all(t[i] <= 0 for t in tables)]
    return subcomplex(apt, picked)


def _gamma_pad(apt, s):
    return Q(s) + apt.window.diameter()


def _condition_functionals(apt, sigma_prime, x, s):
    out = []
    for psi in apt.functionals(pad=_gamma_pad(apt, s)):
        if apt.sign_on(psi, sigma_prime) <= 0 and psi(x) <= s:
            out.append(psi)
    return out


def gamma(apt, sigma_prime, x, s):
    """Cells sigma with psi(sigma) <= 0 for every psi that is <= 0 on
    sigma_prime and <= s at x."""
    x = tuple(Q(t) for t in x)
    apt.vertex_cell(x)  # raises unless x is a vertex of [A_m]
    s = Q(s)
    conds = _condition_functionals(apt, sigma_prime, x, s)
    tables = [apt.sign_table(psi) for psi in conds]
    picked = []
    for i, cell in enumerate(apt.cells()):
        if all(t[i] <= 0 for t in tables):
            picked.append(cell)
    return SubComplex(frozenset(picked))


def in_gamma(apt, cell, sigma_prime, x, s):
    """Membership test without materializing the whole subcomplex."""
    conds = _condition_functionals(apt, sigma_prime, x, Q(s))
    return all(apt.sign_on(psi, cell) <= 0 for psi in conds)


def upsilon(apt, x, s):
    """Chambers whose simple affine roots are all <= s at x."""
    x = tuple(Q(t) for t in x)
    apt.vertex_cell(x)
    s = Q(s)
    out = []
    for ch in apt.chambers():
        if all(psi(x) <= s for psi in apt.simple_affine_roots(ch)):
            out.append(ch)
    return out


def _any_chamber_over(apt, sigma, reverse=False):
    chs = [c for c in apt.chambers() if apt.is_face(sigma, c)]
    if not chs:
        raise RuntimeError("no chamber contains the cell inside the window")
    chs.sort(key=lambda c: c.key, reverse=reverse)
    return chs[0]


def _chamber_toward(apt, sigma, x, eps0, reverse):
    """Chamber over sigma whose closure meets (barycenter, x]."""
    y = sigma.barycenter()
    if y == x:
        return _any_chamber_over(apt, sigma, reverse=reverse)
    eps = eps0
    for _ in range(16):
        p = tuple(yi + eps * (xi - yi) for yi, xi in zip(y, x))
        try:
            tau = apt.locate(p)
        except ValueError:
            tau = None
        if tau is not None and apt.is_face(sigma, tau):
            if tau.dim == apt.spec.rank:
                return tau
            # the segment runs inside tau's span: any chamber over tau
            # still has p in its closure
            return _any_chamber_over(apt, tau, reverse=reverse)
        eps /= 2
    raise RuntimeError("no chamber toward x found; window too tight")


def _min_face_once(apt, x, s, sigma, second_choice=False):
    if sigma.vertex_set == (x,):
        return sigma
    eps0 = Q(1, 4) if second_choice else Q(1, 2)
    chamber = _chamber_toward(apt, sigma, x, eps0, reverse=second_choice)
    delta = apt.simple_affine_roots(chamber)
    zero_set = [psi for psi in delta
                if apt.sign_on(psi, sigma) == 0 or psi(x) > s]
    vset = tuple(sorted(v for v in sigma.vertex_set
                        if all(psi(v) == 0 for psi in zero_set)))
    if not vset:
        raise RuntimeError("empty vanishing face; chamber choice invalid")
    face = apt.cell(vset)
    return face


def min_face(apt, x, s, sigma, check=True):
    """The unique minimal face sigma' of sigma with sigma in Gamma_s(sigma', x)."""
    x = tuple(Q(t) for t in x)
    apt.vertex_cell(x)
    s = Q(s)
    face = _min_face_once(apt, x, s, sigma)
    if check:
        assert _min_face_once(apt, x, s, sigma, second_choice=True).key == face.key
        assert in_gamma(apt, sigma, face, x, s)
        for sub in apt.faces(face):
            if sub.key != face.key:
                assert not in_gamma(apt, sigma, sub, x, s)
    return face


def max_polysimplex(apt, x, s, sigma_prime, check=True):
    """The unique maximal cell of Gamma_s(sigma', x) having sigma' as a face."""
    x = tuple(Q(t) for t in x)
    s = Q(s)
    if min_face(apt, x, s, sigma_prime, check=False).key != sigma_prime.key:
        raise ValueError("sigma' is not fixed by the retraction")
    region = gamma(apt, sigma_prime, x, s)
    over = [c for c in region.cells if apt.is_face(sigma_prime, c)]
    maximal = [c for c in over
               if not any(o.key != c.key and apt.is_face(c, o) for o in over)]
    if len(maximal) != 1:
        raise ValueError("maximal cell not unique in the window: %d found" % len(maximal))
    top = maximal[0]
    if check:
        for c in over:
            assert apt.is_face(c, top)
    return top


def interval(apt, sigma_prime, sigma_max):
    """All cells tau with sigma' <= tau <= sigma''."""
    if not apt.is_face(sigma_prime, sigma_max):
        raise ValueError("sigma' is not a face of sigma''")
    lo = apt._idset(sigma_prime)
    hi = apt._idset(sigma_max)
    return sorted((c for c in apt.cells() if lo <= apt._idset(c) <= hi),
                  key=lambda c: (c.dim, c.key))


def is_convex(apt, sub):
    """Segment-trace convexity test; exact, quadratic in the point count."""
    ok, _ = convexity_witness(apt, sub)
    return ok


def convexity_witness(apt, sub):
    cells = sub.sorted_cells()
    if not cells:
        return True, None
    points = set()
    for c in cells:
        points.update(c.vertex_set)
        points.add(c.barycenter())
    points = sorted(points)
    keys = sub.keys()
    lines = apt._lines
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            d = tuple(qx - px for px, qx in zip(p, q))
            ts = {Q(0), Q(1)}
            for rho, c in lines:
                denom = sum(r * dx for r, dx in zip(rho, d))
                if denom == 0:
                    continue
                t = -(sum(r * px for r, px in zip(rho, p)) + c) / denom
                if 0 < t < 1:
                    ts.add(t)
            ts = sorted(ts)
            samples = list(ts)
            for a, b in zip(ts, ts[1:]):
                samples.append((a + b) / 2)
            for t in samples:
                z = tuple(px + t * dx for px, dx in zip(p, d))
                try:
                    cell = apt.locate(z)
                except ValueError:
                    return False, (p, q, z)  # trace leaves the window coverage
                if cell.key not in keys:
                    return False, (p, q, z)
    return True, None


def is_convex_halfspace(apt, sub):
    """Fast equivalent test: sub equals the cells cut out by its supporting
    halfspaces from the build scope."""
    if not sub.cells:
        return True
    keys = sub.keys()
    all_cells = apt.cells()
    member = [c.key in keys for c in all_cells]
    inside_idx = [i for i, m in enumerate(member) if m]
    supporting = []
    for psi in apt.functionals():
        t = apt.sign_table(psi)
        if all(t[i] <= 0 for i in inside_idx):
            supporting.append(t)
    for i, m in enumerate(member):
        inside = all(t[i] <= 0 for t in supporting)
        if inside != m:
            return False
    return True
