"""Finite quotient model of the Lie algebra sl2 and its dual, the additive
character of conductor (p), the Fourier transform, and the lattice-indicator
identities it satisfies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .moyprasad import dual_spec, lattice_spec, member, valuation_vector
from .sl2 import GroupSpec, _residue, enumerate_group, rlog_entries

Q = Fraction

INF = math.inf

TOL = 1e-9

# axes of the model: (e, h, f) = (upper root, torus, lower root) coordinates
_ROOT_E = (1,)
_ROOT_F = (-1,)


@dataclass(frozen=True)
class FiniteLieModel:
    """Coordinates in p^{-A} Z / p^B Z per axis; p^{3(A+B)} elements total."""

    p: int
    A: int
    B: int

    def __post_init__(self):
        if self.p < 2 or self.A < 0 or self.B < self.A + 1:
            raise ValueError("need p >= 2, A >= 0 and B >= A + 1")

    @property
    def n(self):
        return self.p ** (self.A + self.B)

    def axis_valuation(self, k):
        """Valuation of the class p^{-A} k; inf for the zero class."""
        if k % self.n == 0:
            return INF
        v = -self.A
        while k % self.p == 0:
            k //= self.p
            v += 1
        return v

    def indicator_1d(self, threshold):
        """Indicator of {valuation >= threshold} along one axis."""
        if threshold == INF:
            step = self.n
        else:
            step = self.p ** min(max(0, self.A + math.ceil(threshold)), self.A + self.B)
        out = np.zeros(self.n, dtype=np.int64)
        out[::step] = 1
        return out

    def indicator(self, thresholds):
        """Indicator array of a component lattice, axes ordered (e, h, f)."""
        e, h, f = (self.indicator_1d(t) for t in thresholds)
        return np.einsum("i,j,k->ijk", e, h, f)

    def character_kernel(self):
        """psi(x*y) on one axis: exp(2 pi i jk / p^{2A+1})."""
        mod = self.p ** (2 * self.A + 1)
        j = np.arange(self.n)
        phases = (np.outer(j, j) % mod) * (2j * np.pi / mod)
        return np.exp(phases)


@dataclass(frozen=True)
class AdditiveCharacter:
    """psi(x) = exp(2 pi i u / p^{A+1}), u = p^A x mod p^{A+1}."""

    p: int
    A: int

    def __call__(self, x):
        mod = self.p ** (self.A + 1)
        u = (Q(x) * self.p ** self.A) % mod
        return np.exp(2j * np.pi * float(u) / mod)


def fourier(model, h):
    """F(h)(a) = sum_b psi(<b, a>) h(b) with the component-diagonal pairing."""
    K = model.character_kernel()
    out = np.asarray(h, dtype=complex)
    for axis in range(3):
        out = np.tensordot(K, out, axes=([1], [axis]))
        out = np.moveaxis(out, 0, axis)
    return out


def _spec_thresholds(spec):
    """(e, h, f) thresholds from a FiltrationSpec on the A1 system."""
    consts = spec.constants()
    return consts[_ROOT_E], spec.torus, consts[_ROOT_F]


def _cell_lattice(apt, cell, r):
    return _spec_thresholds(lattice_spec(apt, cell.barycenter(), r, strict=True))


def _cell_dual(apt, cell, r):
    return _spec_thresholds(dual_spec(apt, cell.barycenter(), r))


def _check_model_size(model, thresholds, upper=False):
    """Thresholds below -A break the Fourier identity; thresholds above B
    merely clamp the lattice to zero, consistently on both sides, and are
    rejected only where an untruncated lattice is required (upper=True)."""
    for t in thresholds:
        if t < -model.A or (upper and t > model.B):
            raise ValueError("model too small for threshold %s" % (t,))


def lattice_uniform(model, thresholds):
    """Uniform probability weights on a lattice, as exact fractions."""
    ind = model.indicator(thresholds)
    return ind.astype(object) * Q(1, int(ind.sum()))


def verify_prop_lie(model, apt, cell, r):
    """F of the uniform measure on g_{sigma,r+} is the dual-lattice indicator."""
    prim = _cell_lattice(apt, cell, r)
    dual = _cell_dual(apt, cell, r)
    _check_model_size(model, prim)
    ind = model.indicator(prim)
    got = fourier(model, ind / ind.sum())
    want = model.indicator(dual)
    err = float(np.max(np.abs(got - want)))
    return {"check": "prop-lie", "max_error": err, "pass": err <= TOL}


def _projector_exact(model, apt, sub, r, upper=False):
    """Signed sum of lattice uniform measures as (integer numerators, den)."""
    cells = sub.sorted_cells()
    inds = []
    for cell in cells:
        thr = _cell_lattice(apt, cell, r)
        _check_model_size(model, thr, upper=upper)
        inds.append(model.indicator(thr))
    den = math.lcm(*(int(ind.sum()) for ind in inds))
    num = np.zeros((model.n,) * 3, dtype=np.int64)
    for cell, ind in zip(cells, inds):
        num += (-1) ** cell.dim * (den // int(ind.sum())) * ind
    return num, den


def projector_function(model, apt, sub, r):
    """The signed sum of primal lattice uniform measures over a subcomplex."""
    num, den = _projector_exact(model, apt, sub, r)
    return num.astype(object) * Q(1, den)


def dual_union_indicator(model, apt, sub, r):
    out = np.zeros((model.n,) * 3, dtype=np.int64)
    for cell in sub.sorted_cells():
        thr = _cell_dual(apt, cell, r)
        out = out | model.indicator(thr)
    return out


def verify_projector_fourier(model, apt, sub, r):
    num, den = _projector_exact(model, apt, sub, r)
    got = fourier(model, num / den)
    want = dual_union_indicator(model, apt, sub, r)
    err = float(np.max(np.abs(got - want)))
    return {"check": "projector-fourier", "max_error": err, "pass": err <= TOL}


def verify_lemma_ep(apt, sub, r):
    """Signed dual-lattice indicator identity, exhaustively over the
    valuation-vector abstraction (exact integers)."""
    cells = sub.sorted_cells()
    specs = [(cell, dual_spec(apt, cell.barycenter(), r)) for cell in cells]
    bounds = [Q(c) for _, s in specs for c in
              list(s.constants().values()) + [s.torus]]
    lo, hi = min(bounds) - 1, max(bounds)
    den = math.lcm(*(c.denominator for c in bounds))
    steps = range(math.floor(lo * den), math.ceil(hi * den) + 1)
    vals = [Q(k, den) for k in steps] + [INF]
    witnesses = []
    for ve in vals:
        for vh in vals:
            for vf in vals:
                v = valuation_vector(vh, {_ROOT_E: ve, _ROOT_F: vf})
                flags = [member(s, v) for _, s in specs]
                signed = sum((-1) ** cell.dim * f
                             for (cell, _), f in zip(specs, flags))
                union = 1 if any(flags) else 0
                if signed != union:
                    witnesses.append({"vals": (ve, vh, vf), "signed": signed,
                                      "union": union})
    return {"check": "lemma-ep", "witnesses": witnesses, "exact": True,
            "pass": not witnesses}


def verify_homothety(model, apt, sub, r):
    """Pullback of the depth-r projector under a -> p^r a is the depth-0 one."""
    if Q(r) < 0 or Q(r).denominator != 1:
        raise ValueError("homothety depth must be a nonnegative integer")
    r = int(r)
    exact_ok = True
    for cell in sub.sorted_cells():
        t0 = _cell_lattice(apt, cell, 0)
        tr = _cell_lattice(apt, cell, r)
        _check_model_size(model, t0, upper=True)
        _check_model_size(model, tr, upper=True)
        if tuple(c + r for c in t0) != tr:
            exact_ok = False
    n0, d0 = _projector_exact(model, apt, sub, 0, upper=True)
    nr, dr = _projector_exact(model, apt, sub, r, upper=True)
    idx = np.arange(model.n)
    mapped = (idx * model.p ** r) % model.n
    pullback = nr[np.ix_(mapped, mapped, mapped)]
    scale = model.p ** (3 * r)  # volume ratio between the two lattices
    exact_ok = exact_ok and np.array_equal(pullback * d0, n0 * (scale * dr))
    f0 = fourier(model, n0 / d0)
    fr = fourier(model, nr / dr)
    fr_dilated = f0[np.ix_(mapped, mapped, mapped)]
    err = float(np.max(np.abs(fr - fr_dilated)))
    return {"check": "homothety", "exact": exact_ok, "max_error": err,
            "pass": exact_ok and err <= TOL}


def pushforward_compare(model, apt, sub, r, N, budget=500000):
    """Push each delta_{G_{sigma,r+}} through the r-logarithm and compare the
    signed sum with the finite-model projector, exactly."""
    if model.p == 2:
        raise ValueError("the r-logarithm needs p odd")
    if N != model.B:
        raise ValueError("precision mismatch: engine level N must equal model B")
    p = model.p
    analytic = {}
    for cell in sub.sorted_cells():
        spec = GroupSpec(cell.barycenter()[0], Q(r), True)
        if min(spec.thresholds()) < 0:
            raise ValueError("negative thresholds: instance leaves the model")
        cls = enumerate_group(spec, p, N, budget)
        w = Q((-1) ** cell.dim, len(cls))
        for mat in cls.classes.values():
            h, b, c, _ = rlog_entries(mat)
            idx = tuple(_residue(Q(x) * p ** model.A, p, model.n)
                        for x in (b, h, c))
            analytic[idx] = analytic.get(idx, 0) + w
    analytic = {k: v for k, v in analytic.items() if v != 0}
    finite = {}
    for cell in sub.sorted_cells():
        thr = _cell_lattice(apt, cell, r)
        _check_model_size(model, thr)
        ind = model.indicator(thr)
        w = Q((-1) ** cell.dim, int(ind.sum()))
        for idx in zip(*np.nonzero(ind)):
            key = tuple(int(i) for i in idx)
            finite[key] = finite.get(key, 0) + w
    finite = {k: v for k, v in finite.items() if v != 0}
    return {"check": "pushforward", "pass": analytic == finite,
            "exact": True}
