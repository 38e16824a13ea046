"""Finite-precision SL2(Q_p): membership in the depth-r subgroups along the
standard apartment, Iwahori factorization, exact rational convolution of
uniform measures, the depth-r projector identity, the r-logarithm, and
indicator inclusion-exclusion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

Q = Fraction

INF = math.inf


class PrecisionError(ArithmeticError):
    """A comparison or truncation needed digits beyond working precision."""


def pval(q, p):
    """p-adic valuation of a rational; +inf for zero."""
    q = Q(q)
    if q == 0:
        return INF
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def ceil_int(q, strict=False):
    """Least integer >= q (strict: > q)."""
    n = math.ceil(q)
    if strict and n == q:
        n += 1
    return n


# ---------------------------------------------------------------------------
# scalars and matrices at working precision


@dataclass(frozen=True)
class PadicScalar:
    """p-adic number p^v * u with the unit known modulo p^precision.

    Zero-at-precision is encoded as valuation = inf with `precision` holding
    the absolute precision (x == 0 mod p^precision).
    """

    p: int
    valuation: object  # integer or inf
    unit: int  # in [1, p^precision), coprime to p; 0 for zero
    precision: object  # relative precision (absolute for zero); may be inf

    @staticmethod
    def from_rational(q, p, prec):
        q = Q(q)
        if q == 0:
            return PadicScalar(p, INF, 0, INF)
        v = pval(q, p)
        u = q / Q(p) ** v
        mod = p ** prec
        res = u.numerator * pow(u.denominator, -1, mod) % mod
        return PadicScalar(p, v, res, prec)

    @staticmethod
    def zero(p, abs_prec):
        return PadicScalar(p, INF, 0, abs_prec)

    @property
    def is_zero(self):
        return self.valuation == INF

    def abs_prec(self):
        return self.precision if self.is_zero else self.valuation + self.precision

    def __mul__(self, other):
        p = self.p
        if self.is_zero or other.is_zero:
            zero, nz = (self, other) if self.is_zero else (other, self)
            return PadicScalar.zero(p, zero.precision + (0 if nz.is_zero else nz.valuation))
        prec = min(self.precision, other.precision)
        mod = p ** prec
        return PadicScalar(p, self.valuation + other.valuation,
                           self.unit * other.unit % mod, prec)

    def inverse(self):
        if self.is_zero:
            raise PrecisionError("cannot invert zero-at-precision")
        mod = self.p ** self.precision
        return PadicScalar(self.p, -self.valuation,
                           pow(self.unit, -1, mod), self.precision)

    def __neg__(self):
        if self.is_zero:
            return self
        mod = self.p ** self.precision
        return PadicScalar(self.p, self.valuation, (mod - self.unit) % mod,
                           self.precision)

    def __add__(self, other):
        p = self.p
        known = min(self.abs_prec(), other.abs_prec())
        if self.is_zero and other.is_zero:
            return PadicScalar.zero(p, known)
        if self.is_zero or other.is_zero:
            zero, nz = (self, other) if self.is_zero else (other, self)
            if known == INF:
                return nz
            rel = known - nz.valuation
            if rel < 1:
                raise PrecisionError("sum known to fewer than one digit")
            return PadicScalar(p, nz.valuation, nz.unit % p ** rel, rel)
        v = min(self.valuation, other.valuation)
        if known == INF:
            window = max(self.precision, other.precision) + \
                abs(self.valuation - other.valuation) + 1
        else:
            window = known - v
        mod = p ** window
        s = (self.unit * p ** (self.valuation - v) +
             other.unit * p ** (other.valuation - v)) % mod
        if s == 0:
            if known == INF:
                return PadicScalar.zero(p, INF)
            return PadicScalar.zero(p, known)
        w = 0
        while s % p == 0:
            s //= p
            w += 1
        rel = window - w
        if known != INF and rel < 1:
            raise PrecisionError("sum known to fewer than one digit")
        return PadicScalar(p, v + w, s % p ** rel, rel)

    def __sub__(self, other):
        return self + (-other)

    def val_ge(self, k):
        """Decide valuation >= k, or raise if undecidable at precision."""
        if self.is_zero:
            if self.precision >= k:
                return True
            raise PrecisionError("zero at insufficient absolute precision")
        return self.valuation >= k


# relative precision used for exactly-known units; far above any threshold
EXACT_PREC = 64


def scalar_one(p):
    return PadicScalar(p, 0, 1, EXACT_PREC)


@dataclass(frozen=True)
class Mat2:
    p: int
    a: PadicScalar
    b: PadicScalar
    c: PadicScalar
    d: PadicScalar

    @staticmethod
    def from_rationals(p, prec, a, b, c, d):
        m = Mat2(p, *(PadicScalar.from_rational(x, p, prec) for x in (a, b, c, d)))
        det1 = m.a * m.d - m.b * m.c - scalar_one(p)
        if not (det1.is_zero and det1.precision >= 1):
            raise ValueError("determinant is not 1 at working precision")
        return m

    @staticmethod
    def identity(p):
        one = scalar_one(p)
        zero = PadicScalar.zero(p, INF)
        return Mat2(p, one, zero, zero, one)

    def inverse(self):
        # adjugate; det = 1
        return Mat2(self.p, self.d, -self.b, -self.c, self.a)

    def __mul__(self, other):
        return Mat2(self.p,
                    self.a * other.a + self.b * other.c,
                    self.a * other.b + self.b * other.d,
                    self.c * other.a + self.d * other.c,
                    self.c * other.b + self.d * other.d)


# ---------------------------------------------------------------------------
# group specs on the standard apartment (alpha(t) = t)


@dataclass(frozen=True)
class GroupSpec:
    t: Fraction
    r: Fraction
    strict: bool

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        object.__setattr__(self, "r", Q(self.r))
        if self.r < 0:
            raise ValueError("depth must be nonnegative")

    @property
    def units(self):
        """Parahoric case: the torus part is the full unit group."""
        return self.r == 0 and not self.strict

    def thresholds(self):
        """(val b, val c, torus) entry thresholds."""
        b = ceil_int(self.r - self.t, self.strict)
        c = ceil_int(self.r + self.t, self.strict)
        tor = math.floor(self.r) + 1 if self.strict else math.ceil(self.r)
        return b, c, tor


def congruence_spec(n):
    """The level-n principal congruence subgroup as a GroupSpec."""
    return GroupSpec(0, n, False)


def spec_contains(outer, inner):
    """Set containment of the two subgroups, by threshold domination."""
    ob, oc, otor = outer.thresholds()
    ib, ic, itor = inner.thresholds()
    if ib < ob or ic < oc:
        return False
    if outer.units:
        return True
    if inner.units:
        return False
    return itor >= otor


def _member_vals(vb, vc, va1, vd1, va, vd, spec):
    b, c, tor = spec.thresholds()
    if vb < b or vc < c:
        return False
    if spec.units:
        return va >= 0 and vd >= 0
    return va1 >= tor and vd1 >= tor


def member_group(g, spec):
    """True iff all entry-valuation conditions of the spec hold for g.

    Accepts a Mat2 (raising PrecisionError when a comparison is undecidable)
    or a 4-tuple of exact rationals.
    """
    b, c, tor = spec.thresholds()
    if not (g.b.val_ge(b) and g.c.val_ge(c)):
        return False
    one = scalar_one(g.p)
    if spec.units:
        return g.a.val_ge(0) and g.d.val_ge(0)
    return (g.a - one).val_ge(tor) and (g.d - one).val_ge(tor)


def member_entries(entries, p, spec):
    """Exact membership for a 4-tuple of rationals (a, b, c, d)."""
    a, b, c, d = entries
    return _member_vals(pval(b, p), pval(c, p), pval(a - 1, p), pval(d - 1, p),
                        pval(a, p), pval(d, p), spec)


def iwahori_factor(g):
    """g = u_-(m) diag(a, 1/a) u_+(n) with m = c/a, n = b/a."""
    try:
        unit_a = g.a.val_ge(0) and not g.a.val_ge(1)
    except PrecisionError:
        unit_a = False
    if not unit_a:
        raise ValueError("upper-left entry is not a unit; no Iwahori factorization")
    ainv = g.a.inverse()
    return g.c * ainv, g.a, g.b * ainv


# ---------------------------------------------------------------------------
# exact rational matrix helpers (internal fast path)


def mat_mul(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_inv(x):
    a, b, c, d = x
    return (d, -b, -c, a)


def _residue(q, p, mod):
    q = Q(q)
    if q.denominator % p == 0:
        raise PrecisionError("entry valuation below the truncation scale")
    return q.numerator * pow(q.denominator, -1, mod) % mod


def truncate_key(entries, p, N, V):
    """Entries reduced to p^{-V} Z_p / p^N Z_p, encoded as residues."""
    mod = p ** (N + V)
    pv = Q(p) ** V
    return tuple(_residue(q * pv, p, mod) for q in entries)


# ---------------------------------------------------------------------------
# enumeration


@dataclass(frozen=True)
class GroupClasses:
    spec: GroupSpec
    p: int
    N: int
    V: int
    classes: dict  # key -> exact rational representative (a, b, c, d)

    def __len__(self):
        return len(self.classes)


def _factor_ranges(spec, p, N):
    b, c, tor = spec.thresholds()
    ms = [Q(p) ** c * j for j in range(p ** max(0, N - c))]
    ns = [Q(p) ** b * j for j in range(p ** max(0, N - b))]
    if spec.units:
        us = [Q(u) for u in range(1, p ** N) if u % p != 0]
    else:
        us = [1 + Q(p) ** tor * j for j in range(p ** max(0, N - tor))]
    return ms, us, ns


def _unl_matrix(m, u, n):
    return (u, u * n, m * u, m * u * n + 1 / u)


def enumerate_group(spec, p, N, budget=500000):
    """All truncated classes of the group, via the Iwahori product map."""
    b, c, tor = spec.thresholds()
    if spec.units and b + c == 0:
        raise ValueError("vertex parahoric has no global Iwahori factorization")
    V = max(0, -b, -c)
    ms, us, ns = _factor_ranges(spec, p, N)
    count = len(ms) * len(us) * len(ns)
    if count > budget:
        raise ValueError("enumeration budget exceeded: %d classes" % count)
    classes = {}
    for m in ms:
        for u in us:
            for n in ns:
                mat = _unl_matrix(m, u, n)
                classes[truncate_key(mat, p, N, V)] = mat
    assert len(classes) == count, "Iwahori product map not injective at this level"
    return GroupClasses(spec, p, N, V, classes)


# ---------------------------------------------------------------------------
# measures


@dataclass
class TruncatedMeasure:
    p: int
    N: int
    V: int
    entries: dict  # key -> exact rational weight
    reps: dict  # key -> exact rational representative

    def total_mass(self):
        return sum(self.entries.values())

    def same_as(self, other):
        return (self.p, self.N, self.V) == (other.p, other.N, other.V) and \
            self.entries == other.entries

    def to_json_dict(self):
        items = sorted(self.entries.items())
        return {"entries": [[list(k), w.numerator, w.denominator] for k, w in items],
                "p": self.p, "N": self.N, "V": self.V}


def delta_measure(spec, p, N, budget=500000):
    """The uniform probability measure on the subgroup."""
    cls = enumerate_group(spec, p, N, budget)
    w = Q(1, len(cls))
    return TruncatedMeasure(p, N, cls.V, {k: w for k in cls.classes},
                            dict(cls.classes))


def _intersection_thresholds(A, B):
    ab, ac, ator = A.thresholds()
    bb, bc, btor = B.thresholds()
    return max(ab, bb), max(ac, bc), ator, btor


def coset_reps(A, B, p, budget=500000):
    """Representatives of the distinct cosets aB, a in A.

    Their count is the index [A : A cap B]; candidates come from ranging the
    Iwahori factors of A over the threshold gaps to A cap B, and are verified
    pairwise distinct modulo B.
    """
    ab, ac, ator = A.thresholds()
    ib, ic = max(ab, B.thresholds()[0]), max(ac, B.thresholds()[1])
    if A.units and B.units:
        us = [Q(1)]
    elif A.units:
        itor = B.thresholds()[2]
        us = [Q(u) for u in range(1, p ** itor) if u % p != 0]
    else:
        itor = max(ator, B.thresholds()[2]) if not B.units else ator
        us = [1 + Q(p) ** ator * j for j in range(p ** max(0, itor - ator))]
    ms = [Q(p) ** ac * j for j in range(p ** (ic - ac))]
    ns = [Q(p) ** ab * j for j in range(p ** (ib - ab))]
    k = len(ms) * len(us) * len(ns)
    if k > budget:
        raise ValueError("coset budget exceeded: %d cosets" % k)
    reps = [_unl_matrix(m, u, n) for m in ms for u in us for n in ns]
    gamma_b = B.thresholds()[1]
    seen = {}
    for rep in reps:
        key = _coset_prefilter(rep, p, gamma_b)
        bucket = seen.setdefault(key, [])
        for other in bucket:
            if member_entries(mat_mul(mat_inv(other), rep), p, B):
                raise RuntimeError("coset representatives collide")
        bucket.append(rep)
    return reps


def _coset_prefilter(rep, p, gamma_b):
    """A right-B-invariant fingerprint: the lower-left Iwahori coordinate
    m = c/a modulo p^{gamma_B} (invariant because right multiplication by B
    shifts m by elements of valuation >= gamma_B)."""
    if gamma_b < 1:
        return None
    a = rep[0]
    if pval(a, p) != 0:
        return None
    m = rep[2] / a
    if pval(m, p) + gamma_b < 1:
        return None
    try:
        return _residue(m, p, p ** gamma_b)
    except PrecisionError:
        return None


def _faithful(B, N):
    return max(B.thresholds()) <= N


def _integral(spec):
    b, c, _ = spec.thresholds()
    return b >= 0 and c >= 0


def convolve_uniform(A, B, p, N, budget=500000):
    """delta_A * delta_B as a truncated measure: uniform on the product set.

    Requires integral groups (so classes at level N are congruence classes)
    and the level-N congruence subgroup inside B, so that truncation is
    faithful: the result is genuinely constant on level-N classes.
    """
    if not (_integral(A) and _integral(B)):
        raise PrecisionError("negative entry thresholds; compare in coset form instead")
    if not _faithful(B, N):
        raise PrecisionError("N too small: level-N congruence subgroup not inside B")
    if spec_contains(B, A):
        return delta_measure(B, p, N, budget)
    if spec_contains(A, B):
        return delta_measure(A, p, N, budget)
    reps = coset_reps(A, B, p, budget)
    bcls = enumerate_group(B, p, N, budget)
    if len(reps) * len(bcls) > budget:
        raise ValueError("convolution budget exceeded")
    entries, out_reps = {}, {}
    w = Q(1, len(reps) * len(bcls))
    for rep in reps:
        for mat in bcls.classes.values():
            prod = mat_mul(rep, mat)
            key = truncate_key(prod, p, N, 0)
            if key in entries:
                raise RuntimeError("cosets overlap at truncation level")
            entries[key] = w
            out_reps[key] = prod
    return TruncatedMeasure(p, N, 0, entries, out_reps)


def check_right_invariance(measure, n, samples=20, seed=1):
    """Spot-check invariance under the level-n principal congruence subgroup."""
    state = seed * 2 + 1
    keys = sorted(measure.entries)
    spec = congruence_spec(n)
    ms, us, ns = _factor_ranges(spec, measure.p, measure.N + 2)
    for _ in range(samples):
        state = (state * 6364136223846793005 + 1442695040888963407) % 2 ** 64
        rep = measure.reps[keys[state % len(keys)]]
        state2 = state
        picks = []
        for options in (ms, us, ns):
            state2 = (state2 * 6364136223846793005 + 1442695040888963407) % 2 ** 64
            picks.append(options[state2 % len(options)])
        h = _unl_matrix(picks[0], picks[1], picks[2])
        moved = truncate_key(mat_mul(rep, h), measure.p, measure.N, measure.V)
        key = truncate_key(rep, measure.p, measure.N, measure.V)
        if measure.entries.get(moved) != measure.entries.get(key):
            return False
    return True


# ---------------------------------------------------------------------------
# the projector


class _CosetLedger:
    """Canonical indexing of cosets gB across several convolutions."""

    def __init__(self, B, p):
        self.B = B
        self.p = p
        self.gamma_b = B.thresholds()[1]
        self.buckets = {}
        self.reps = []

    def index(self, rep):
        key = _coset_prefilter(rep, self.p, self.gamma_b)
        bucket = self.buckets.setdefault(key, [])
        for idx in bucket:
            if member_entries(mat_mul(mat_inv(self.reps[idx]), rep), self.p, self.B):
                return idx
        idx = len(self.reps)
        self.reps.append(rep)
        bucket.append(idx)
        return idx


def convolve_cosets(A, B, p, ledger, budget=500000):
    """delta_A * delta_B in coset form: coefficients on cosets gB.

    Exact and truncation-free: the convolution is (1/k) sum_i delta_{a_i B}
    over the k = [A : A cap B] distinct cosets meeting A.
    """
    if spec_contains(B, A):
        reps = [(Q(1), Q(0), Q(0), Q(1))]
    else:
        reps = coset_reps(A, B, p, budget)
    w = Q(1, len(reps))
    out = {}
    for rep in reps:
        out[ledger.index(tuple(Q(x) for x in rep))] = w
    return out


def signed_convolution_cosets(terms, B, p, budget=500000):
    """Coset-form sum of coeff * (delta_A * delta_B) over (A, coeff) terms."""
    ledger = _CosetLedger(B, p)
    coeffs = {}
    for A, coeff in terms:
        for idx, w in convolve_cosets(A, B, p, ledger, budget).items():
            coeffs[idx] = coeffs.get(idx, 0) + coeff * w
    live = {idx: w for idx, w in coeffs.items() if w != 0}
    return live, ledger


def apply_projector(apt, sub, r, target, p, N, budget=500000):
    """sum over cells of (-1)^dim delta_{G_{sigma,r+}} * delta_target.

    Accumulated in coset form over target-cosets (exact), then materialized
    as a truncated measure.
    """
    r = Q(r)
    if (r * apt.m).denominator != 1:
        raise ValueError("depth must be a multiple of 1/m")
    if apt.spec.rank != 1:
        raise ValueError("the engine models the standard rank-one apartment")
    if not _faithful(target, N):
        raise PrecisionError("N too small: level-N congruence subgroup not inside target")
    if not _integral(target):
        raise PrecisionError("negative target thresholds; materialization unsupported")
    terms = []
    for cell in sub.sorted_cells():
        A = GroupSpec(cell.barycenter()[0], r, True)
        if not _integral(A):
            raise PrecisionError("negative entry thresholds; materialization unsupported")
        terms.append((A, (-1) ** cell.dim))
    live, ledger = signed_convolution_cosets(terms, target, p, budget)
    bcls = enumerate_group(target, p, N, budget)
    if len(live) * len(bcls) > budget:
        raise ValueError("materialization budget exceeded")
    entries, out_reps = {}, {}
    for idx, coeff in sorted(live.items()):
        rep = ledger.reps[idx]
        w = coeff * Q(1, len(bcls))
        for mat in bcls.classes.values():
            prod = mat_mul(rep, mat)
            key = truncate_key(prod, p, N, 0)
            entries[key] = entries.get(key, 0) + w
            out_reps[key] = prod
    entries = {k: w for k, w in entries.items() if w != 0}
    out_reps = {k: out_reps[k] for k in entries}
    return TruncatedMeasure(p, N, 0, entries, out_reps)


# ---------------------------------------------------------------------------
# the r-logarithm


def rlog(g):
    """(g - g^{-1})/2; traceless, matching the group and lattice filtrations."""
    if g.p == 2:
        raise ValueError("the r-logarithm needs p odd")
    half = PadicScalar.from_rational(Q(1, 2), g.p, EXACT_PREC)
    inv = g.inverse()
    return Mat2(g.p, (g.a - inv.a) * half, (g.b - inv.b) * half,
                (g.c - inv.c) * half, (g.d - inv.d) * half)


def rlog_entries(entries):
    a, b, c, d = (Q(x) for x in entries)
    ia, ib, ic, id_ = d, -b, -c, a
    return ((a - ia) / 2, (b - ib) / 2, (c - ic) / 2, (d - id_) / 2)


def member_lattice(entries, p, spec):
    """Membership of a traceless matrix in the Lie algebra filtration lattice."""
    b, c, tor = spec.thresholds()
    h, x, y, _ = entries
    return pval(x, p) >= b and pval(y, p) >= c and pval(h, p) >= tor


def lattice_class_count(spec, p, N):
    b, c, tor = spec.thresholds()
    return p ** max(0, N - b) * p ** max(0, N - c) * p ** max(0, N - tor)


# ---------------------------------------------------------------------------
# indicator inclusion-exclusion


def _lcg(seed):
    state = [seed * 2 + 1]

    def step(n):
        state[0] = (state[0] * 6364136223846793005 + 1442695040888963407) % 2 ** 64
        return state[0] % n

    return step


def sample_matrices(p, N, count, seed, scale=2):
    """Random SL2(Q_p) elements: integral Iwahori products, Weyl twists, and
    diagonal scalings that leave every depth-r subgroup."""
    rnd = _lcg(seed)
    w = (Q(0), Q(1), Q(-1), Q(0))
    out = []
    mod = p ** N
    while len(out) < count:
        m = Q(rnd(mod))
        n = Q(rnd(mod))
        u = Q(1 + rnd(mod - 1))
        if u % p == 0:
            u += 1
        g = _unl_matrix(m, u, n)
        style = rnd(4)
        if style == 1:
            g = mat_mul(g, w)
        elif style == 2:
            e = rnd(2 * scale + 1) - scale
            g = mat_mul(g, (Q(p) ** e, 0, 0, Q(p) ** -e))
        elif style == 3:
            g = mat_mul(mat_mul(w, g), (Q(p) ** (rnd(scale) + 1), 0, 0,
                                        Q(p) ** -(rnd(scale) + 1)))
        out.append(g)
    return out


def indicator_euler_check(apt, sub, r, p, samples=200, seed=7, x=None,
                          sub_small=None):
    """Check the signed indicator identity on sampled matrices, and
    (optionally) the stabilization of G_x cap G_{Sigma,r} against a smaller
    subcomplex containing Upsilon_{x,r}."""
    r = Q(r)
    cells = sub.sorted_cells()
    specs = [(cell, GroupSpec(cell.barycenter()[0], r, False)) for cell in cells]
    failures = []
    mats = sample_matrices(p, 3, samples, seed)
    for g in mats:
        flags = [member_entries(g, p, spec) for _, spec in specs]
        signed = sum((-1) ** cell.dim * f for (cell, _), f in zip(specs, flags))
        union = any(flags)
        if signed != (1 if union else 0):
            failures.append({"matrix": [str(q) for q in g],
                             "signed_sum": signed, "union": union})
    stab_failures = []
    if x is not None and sub_small is not None:
        x = tuple(Q(t) for t in x)
        gx = GroupSpec(x[0], 0, False)
        small = [(c, GroupSpec(c.barycenter()[0], r, False))
                 for c in sub_small.sorted_cells()]
        for g in mats:
            if not member_entries(g, p, gx):
                continue
            in_big = any(member_entries(g, p, s) for _, s in specs)
            in_small = any(member_entries(g, p, s) for _, s in small)
            if in_big != in_small:
                stab_failures.append([str(q) for q in g])
    return {"samples": len(mats), "failures": failures,
            "stabilization_failures": stab_failures,
            "ok": not failures and not stab_failures}
