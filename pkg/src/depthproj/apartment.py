"""Exact-rational model of one apartment, tiled by the refined polysimplicial cells.

Coordinates: a point is written in the basis dual to the simple roots, so a
root is an integer coefficient vector and an affine functional acts by
psi(x) = <root, x> + constant.  In the rank-1 chart this is alpha(t) = t with
chambers the unit intervals.  All arithmetic is Fraction-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd as _gcd

Q = Fraction

# Positive roots as coefficient vectors over the simple roots.  Negatives are
# added in root_system().  For BC1 the divisible root 2*alpha is listed but
# excluded from cell enumeration (its thresholds live in moy_prasad).
_POSITIVE_ROOTS = {
    "A1": [(1,)],
    "A2": [(1, 0), (0, 1), (1, 1)],
    "C2": [(1, 0), (0, 1), (1, 1), (2, 1)],
    "G2": [(1, 0), (0, 1), (1, 1), (2, 1), (3, 1), (3, 2)],
    "A1xA1": [(1, 0), (0, 1)],
    "BC1": [(1,), (2,)],
}

# Coordinate blocks of the simple factors (everything is simple except A1xA1).
_FACTORS = {
    "A1": [(0,)],
    "A2": [(0, 1)],
    "C2": [(0, 1)],
    "G2": [(0, 1)],
    "A1xA1": [(0,), (1,)],
    "BC1": [(0,)],
}

BUILD_PAD = Q(2)  # exceeds every cell diameter in these charts


@dataclass(frozen=True)
class RootSystemSpec:
    name: str
    rank: int
    roots: tuple  # all roots, closed under negation
    inner_product: tuple  # rows of a symmetric positive-definite rational matrix
    progressions: dict  # root -> (offset, step) of admissible affine constants
    factors: tuple  # coordinate blocks of the simple factors

    def hyperplane_roots(self):
        """Positive roots that cut the apartment into cells (non-divisible only)."""
        out = []
        for rho in self.roots:
            if any(x < 0 for x in rho) or all(x == 0 for x in rho):
                continue
            half = tuple(x // 2 for x in rho)
            if all(x % 2 == 0 for x in rho) and half in self.roots:
                continue
            out.append(rho)
        return out


def root_system(name, delta=0):
    if name not in _POSITIVE_ROOTS:
        raise ValueError("unsupported root system: %r" % (name,))
    if delta not in (0, -1):
        raise ValueError("delta must be 0 or -1")
    pos = _POSITIVE_ROOTS[name]
    rank = len(pos[0])
    roots = []
    for rho in pos:
        roots.append(rho)
        roots.append(tuple(-x for x in rho))
    progressions = {}
    for rho in roots:
        if name == "BC1":
            if max(abs(x) for x in rho) == 1:
                progressions[rho] = (Q(delta, 4), Q(1, 2))
            else:
                progressions[rho] = (Q(delta + 1, 2), Q(1))
        else:
            progressions[rho] = (Q(0), Q(1))
    ident = tuple(tuple(Q(1) if i == j else Q(0) for j in range(rank)) for i in range(rank))
    return RootSystemSpec(
        name=name,
        rank=rank,
        roots=tuple(roots),
        inner_product=ident,
        progressions=progressions,
        factors=tuple(_FACTORS[name]),
    )


@dataclass(frozen=True)
class AffineFunctional:
    root: tuple
    constant: Fraction

    def __call__(self, point):
        return sum(a * x for a, x in zip(self.root, point)) + self.constant

    def __neg__(self):
        return AffineFunctional(tuple(-a for a in self.root), -self.constant)


@dataclass(frozen=True)
class Window:
    bounds: tuple  # ((lo, hi), ...) per coordinate
    m: int = 1

    def __post_init__(self):
        for lo, hi in self.bounds:
            if not lo < hi:
                raise ValueError("degenerate window")

    def contains(self, point):
        return all(lo <= x <= hi for (lo, hi), x in zip(self.bounds, point))

    def diameter(self):
        # sum of side lengths: a rational upper bound for the Euclidean diameter
        return sum(hi - lo for lo, hi in self.bounds)


def make_window(bounds, m=1):
    return Window(tuple((Q(lo), Q(hi)) for lo, hi in bounds), m)


@dataclass(frozen=True)
class Polysimplex:
    level: int
    vertex_set: tuple  # sorted tuple of coordinate tuples
    dim: int

    @property
    def key(self):
        return self.vertex_set

    def barycenter(self):
        n = len(self.vertex_set)
        return tuple(sum(v[i] for v in self.vertex_set) * Q(1, n)
                     for i in range(len(self.vertex_set[0])))

    def vset(self):
        return frozenset(self.vertex_set)


def _sign(x):
    return (x > 0) - (x < 0)


def _prog_elements(offset, step, lo, hi):
    """Elements of offset + step*Z inside [lo, hi]."""
    if hi < lo:
        return []
    k0 = (lo - offset) / step
    k0 = k0.numerator // k0.denominator + (0 if (lo - offset) % step == 0 else 1)
    out = []
    k = k0
    while offset + step * k <= hi:
        out.append(offset + step * k)
        k += 1
    return out


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _solve2(r1, c1, r2, c2):
    det = r1[0] * r2[1] - r1[1] * r2[0]
    if det == 0:
        return None
    x = (-c1 * r2[1] + c2 * r1[1]) / det
    y = (-r1[0] * c2 + r2[0] * c1) / det
    return (x, y)


def _cyclic_order(points):
    """Order the vertices of a convex polygon counterclockwise (exact)."""
    n = len(points)
    cx = sum(p[0] for p in points) * Q(1, n)
    cy = sum(p[1] for p in points) * Q(1, n)

    def half(p):
        dx, dy = p[0] - cx, p[1] - cy
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    import functools

    def cmp(p, q):
        hp, hq = half(p), half(q)
        if hp != hq:
            return -1 if hp < hq else 1
        cross = (p[0] - cx) * (q[1] - cy) - (p[1] - cy) * (q[0] - cx)
        return 0 if cross == 0 else (-1 if cross > 0 else 1)

    return sorted(points, key=functools.cmp_to_key(cmp))


def _clip_polygon(poly, window):
    """Sutherland-Hodgman clip of a convex polygon against a box, exact."""
    for axis in range(2):
        lo, hi = window.bounds[axis]
        for bound, keep_le in ((lo, False), (hi, True)):
            if not poly:
                return []
            out = []
            n = len(poly)
            for i in range(n):
                p, q = poly[i], poly[(i + 1) % n]

                def inside(pt):
                    return pt[axis] <= bound if keep_le else pt[axis] >= bound

                if inside(p):
                    out.append(p)
                if inside(p) != inside(q):
                    t = (bound - p[axis]) / (q[axis] - p[axis])
                    out.append(tuple(p[j] + t * (q[j] - p[j]) for j in range(2)))
            poly = out
    return poly


def _polygon_area2(poly):
    s = Q(0)
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        s += p[0] * q[1] - p[1] * q[0]
    return abs(s)


def _open_cell_meets_window(dim, vertices, window):
    if dim == 0:
        return window.contains(vertices[0])
    if len(vertices[0]) == 1:
        lo, hi = window.bounds[0]
        a, b = vertices[0][0], vertices[-1][0]
        a, b = min(a, b), max(a, b)
        return a < hi and b > lo
    if dim == 1:
        (p, q) = vertices
        t0, t1 = Q(0), Q(1)
        for axis in range(2):
            lo, hi = window.bounds[axis]
            d = q[axis] - p[axis]
            if d == 0:
                if not lo <= p[axis] <= hi:
                    return False
            else:
                ta, tb = (lo - p[axis]) / d, (hi - p[axis]) / d
                if ta > tb:
                    ta, tb = tb, ta
                t0, t1 = max(t0, ta), min(t1, tb)
        return t0 < t1
    poly = _clip_polygon(_cyclic_order(list(vertices)), window)
    return len(poly) >= 3 and _polygon_area2(poly) > 0


class Apartment:
    """Indexed cell collection of [A_m] restricted to a window."""

    def __init__(self, spec, m, window):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.spec = spec
        self.m = m
        self.window = window
        self.build_pad = BUILD_PAD
        self._functional_cache = {}
        self._sign_tables = {}
        self._wall_cache = {}
        self._face_cache = {}
        self._build()

    # -- construction -------------------------------------------------------

    def _lines_in_box(self, pad):
        """(root, constant) pairs whose zero set meets the padded window."""
        lines = []
        for rho in self.spec.hyperplane_roots():
            off, step = self.spec.progressions[rho]
            step = step / self.m
            lo = sum(min(r * (b[0] - pad), r * (b[1] + pad))
                     for r, b in zip(rho, self.window.bounds))
            hi = sum(max(r * (b[0] - pad), r * (b[1] + pad))
                     for r, b in zip(rho, self.window.bounds))
            for c in _prog_elements(off, step, -hi, -lo):
                lines.append((rho, c))
        return lines

    def _build(self):
        pad = self.build_pad
        lines = self._lines_in_box(pad)
        self._lines = lines
        rank = self.spec.rank
        box = tuple((lo - pad, hi + pad) for lo, hi in self.window.bounds)

        def in_box(p):
            return all(lo <= x <= hi for (lo, hi), x in zip(box, p))

        verts = set()
        if rank == 1:
            for rho, c in lines:
                verts.add((-c / rho[0],))
        else:
            for (r1, c1), (r2, c2) in combinations(lines, 2):
                p = _solve2(r1, c1, r2, c2)
                if p is not None and in_box(p):
                    verts.add(p)
        verts = sorted(verts)
        self._arrangement_vertices = verts

        reps = [(v, 0) for v in verts]
        if rank == 1:
            for a, b in zip(verts, verts[1:]):
                reps.append((((a[0] + b[0]) / 2,), 1))
        else:
            mids = []
            for rho, c in lines:
                on_line = [v for v in verts if _dot(rho, v) + c == 0]
                d = (-rho[1], rho[0])
                on_line.sort(key=lambda v: _dot(d, v))
                for a, b in zip(on_line, on_line[1:]):
                    mids.append(tuple((a[i] + b[i]) / 2 for i in range(2)))
            for pm in mids:
                reps.append((pm, 1))
            for pm in mids:
                # step off the edge by less than the nearest crossing distance
                for rho, c in lines:
                    if _dot(rho, pm) + c == 0:
                        n = rho
                        break
                tmin = None
                for r2, c2 in lines:
                    denom = _dot(r2, n)
                    if denom == 0:
                        continue
                    t = -(_dot(r2, pm) + c2) / denom
                    if t != 0 and (tmin is None or abs(t) < tmin):
                        tmin = abs(t)
                eps = tmin / 2
                for sgn in (1, -1):
                    q = tuple(pm[i] + sgn * eps * n[i] for i in range(2))
                    if in_box(q):
                        reps.append((q, 2))

        # classify representative points by sign vector over the line set
        self._lines_int = [(rho, c.numerator, c.denominator) for rho, c in lines]
        vsigns = [self._sig_at(v) for v in verts]
        from itertools import product as _product
        buckets = {}
        for idx, v in enumerate(verts):
            bk = tuple(x.numerator // x.denominator for x in v)
            buckets.setdefault(bk, []).append(idx)
        offsets = list(_product((-1, 0, 1), repeat=rank))
        candidates = {}
        sig_of = {}
        for p, _expected_dim in reps:
            sig = self._sig_at(p)
            if sig in sig_of:
                continue
            pb = tuple(x.numerator // x.denominator for x in p)
            vset = []
            for off in offsets:
                for idx in buckets.get(tuple(pb[i] + off[i] for i in range(rank)), ()):
                    vs = vsigns[idx]
                    ok = True
                    for s, sv in zip(sig, vs):
                        if (s == 0 and sv != 0) or (s != 0 and sv not in (0, s)):
                            ok = False
                            break
                    if ok:
                        vset.append(verts[idx])
            if not vset:
                continue
            zero_roots = [rho for (rho, c), s in zip(lines, sig) if s == 0]
            dim = rank - _matrix_rank(zero_roots, rank)
            cell = Polysimplex(self.m, tuple(sorted(vset)), dim)
            sig_of[sig] = cell.key
            candidates[cell.key] = cell

        vid = {v: i for i, v in enumerate(verts)}
        cand_list = list(candidates.values())
        ids_list = [frozenset(vid[v] for v in c.vertex_set) for c in cand_list]
        idsets = {c.key: s for c, s in zip(cand_list, ids_list)}
        kept_idx = set()
        for i, cell in enumerate(cand_list):
            if _open_cell_meets_window(cell.dim, cell.vertex_set, self.window):
                kept_idx.add(i)
        # close under faces (a face of a face is a face: one pass suffices)
        for i in sorted(kept_idx):
            cvs = ids_list[i]
            for j, js in enumerate(ids_list):
                if js <= cvs:
                    kept_idx.add(j)
        kept = {cand_list[i].key: cand_list[i] for i in kept_idx}

        self._cells = kept
        self._candidates = candidates
        self._sig_to_key = sig_of
        self._vid = vid
        self._vsets = idsets
        self._vert_list = verts
        scaled = []
        for v in verts:
            den = 1
            for x in v:
                den = den * x.denominator // _gcd(den, x.denominator)
            scaled.append((tuple(int(x * den) for x in v), den))
        self._vert_scaled = scaled
        self._sorted_cells = sorted(kept.values(), key=lambda c: (c.dim, c.key))
        self._cell_pos = {c.key: i for i, c in enumerate(self._sorted_cells)}
        self._cell_vids = [tuple(vid[v] for v in c.vertex_set)
                           for c in self._sorted_cells]
        self._vset_list = [idsets[c.key] for c in self._sorted_cells]

    def _sig_at(self, point):
        """Sign vector of a point against every build-scope hyperplane, in ints."""
        den = 1
        for x in point:
            d = x.denominator
            den = den * d // _gcd(den, d)
        nums = [int(x * den) for x in point]
        sig = []
        for rho, cn, cd in self._lines_int:
            t = cd * sum(r * nx for r, nx in zip(rho, nums)) + cn * den
            sig.append((t > 0) - (t < 0))
        return tuple(sig)

    # -- accessors -----------------------------------------------------------

    def cells(self):
        return list(self._sorted_cells)

    def cell(self, key):
        return self._cells[key]

    def has_cell(self, cell):
        return cell.key in self._cells

    def cell_position(self, cell):
        """Index of a cell in the cells() ordering (for sign_table lookups)."""
        return self._cell_pos[cell.key]

    def chambers(self):
        return [c for c in self.cells() if c.dim == self.spec.rank]

    def vertices(self):
        return [c for c in self.cells() if c.dim == 0]

    def _idset(self, cell):
        s = self._vsets.get(cell.key)
        if s is None:
            s = frozenset(self._vid[v] for v in cell.vertex_set)
        return s

    def is_face(self, small, big):
        return self._idset(small) <= self._idset(big)

    def faces(self, cell):
        if cell.key not in self._cells:
            raise KeyError("cell not in apartment")
        cached = self._face_cache.get(cell.key)
        if cached is None:
            big = self._vsets[cell.key]
            cached = tuple(c for c, vs in zip(self._sorted_cells, self._vset_list)
                           if vs <= big)
            self._face_cache[cell.key] = cached
        return list(cached)

    def vertex_cell(self, point):
        key = (tuple(point),)
        if key not in self._cells:
            raise KeyError("not a vertex of the refined complex: %r" % (point,))
        return self._cells[key]

    # -- functionals ---------------------------------------------------------

    def functionals(self, pad=None):
        """Signed refined affine functionals whose zero set meets the padded window."""
        if pad is None:
            pad = self.build_pad
        pad = Q(pad)
        if pad not in self._functional_cache:
            out = []
            for rho, c in self._lines_in_box(pad):
                psi = AffineFunctional(rho, c)
                out.append(psi)
                out.append(-psi)
            self._functional_cache[pad] = out
        return self._functional_cache[pad]

    @staticmethod
    def _combine_signs(signs):
        """+1/-1/0 for a constant-sign closure; 2 when the sign is mixed."""
        if all(s == 0 for s in signs):
            return 0
        if all(s >= 0 for s in signs):
            return 1
        if all(s <= 0 for s in signs):
            return -1
        return 2

    def sign_table(self, psi):
        """Sign of psi on every cell, as a list aligned with cells() order."""
        fkey = (psi.root, psi.constant)
        table = self._sign_tables.get(fkey)
        if table is None:
            cq = Q(psi.constant)
            cn, cd = cq.numerator, cq.denominator
            rho = psi.root
            vsigns = []
            for nums, den in self._vert_scaled:
                t = cd * sum(r * n for r, n in zip(rho, nums)) + cn * den
                vsigns.append((t > 0) - (t < 0))
            table = [self._combine_signs([vsigns[i] for i in vids])
                     for vids in self._cell_vids]
            self._sign_tables[fkey] = table
        return table

    def sign_on(self, psi, cell):
        """Sign of psi on an open cell: +1, -1 or 0 (never mixed on true cells)."""
        pos = self._cell_pos.get(cell.key)
        if pos is not None:
            s = self.sign_table(psi)[pos]
        else:
            s = self._combine_signs([_sign(psi(v)) for v in cell.vertex_set])
        if s == 2:
            raise ValueError("functional changes sign on a cell; not an arrangement functional")
        return s

    def locate(self, point):
        point = tuple(Q(x) for x in point)
        if not self.window.contains(point):
            raise ValueError("point outside window: %r" % (point,))
        sig = self._sig_at(point)
        key = self._sig_to_key.get(sig)
        if key is None or key not in self._cells:
            raise ValueError("point not located in any cell: %r" % (point,))
        return self._cells[key]

    def simple_affine_roots(self, chamber):
        if chamber.dim != self.spec.rank:
            raise ValueError("not a chamber")
        cached = self._wall_cache.get(chamber.key)
        if cached is not None:
            return list(cached)
        walls = [f for f in self.faces(chamber) if f.dim == chamber.dim - 1]
        out = []
        for wall in walls:
            found = None
            for rho, c in self._lines:
                if all(_dot(rho, v) + c == 0 for v in wall.vertex_set):
                    psi = AffineFunctional(rho, c)
                    if self.sign_on(psi, chamber) < 0:
                        psi = -psi
                    found = psi
                    break
            if found is None:
                raise RuntimeError("no wall functional found")
            out.append(found)
        self._wall_cache[chamber.key] = tuple(out)
        return out

    def partition_of_unity(self, chamber):
        """Positive rationals n_psi over the simple affine roots with sum(n*psi) = 1."""
        delta = self.simple_affine_roots(chamber)
        nfac = len(self.spec.factors)
        coeffs = {}
        for block in self.spec.factors:
            psis = [psi for psi in delta
                    if all(psi.root[i] == 0 for i in range(self.spec.rank) if i not in block)]
            rows = [[psi(v) for psi in psis] for v in chamber.vertex_set]
            rhs = [Q(1, nfac)] * len(rows)
            sol = _solve_exact(rows, rhs)
            if sol is None:
                raise ArithmeticError("singular partition-of-unity system")
            for psi, n in zip(psis, sol):
                coeffs[psi] = n
        for v in chamber.vertex_set:
            assert sum(n * psi(v) for psi, n in coeffs.items()) == 1
        if any(n <= 0 for n in coeffs.values()):
            raise ArithmeticError("nonpositive partition-of-unity coefficient")
        return coeffs


def _matrix_rank(rows, ncols):
    rows = [list(map(Q, r)) for r in rows]
    rank = 0
    col = 0
    while col < ncols and rank < len(rows):
        piv = None
        for i in range(rank, len(rows)):
            if rows[i][col] != 0:
                piv = i
                break
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        fp = rows[rank][col]
        for i in range(rank + 1, len(rows)):
            fr = rows[i][col]
            if fr == 0:
                continue
            f = fr / fp
            for j in range(col, ncols):
                rows[i][j] -= rows[rank][j] * f
        rank += 1
        col += 1
    return rank


def _solve_exact(rows, rhs):
    """Solve a (possibly overdetermined, consistent) exact linear system."""
    m, n = len(rows), len(rows[0]) if rows else 0
    a = [list(r) + [t] for r, t in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        fp = a[r][c]
        a[r] = [x / fp for x in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if a[i][n] != 0:
            return None  # inconsistent
    if len(piv_cols) < n:
        return None  # underdetermined within a factor block: treated as singular
    sol = [Q(0)] * n
    for i, c in enumerate(piv_cols):
        sol[c] = a[i][n]
    return sol


def build_apartment(spec, m, window):
    return Apartment(spec, m, window)
