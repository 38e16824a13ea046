"""Batch orchestration: run configuration, the check registry, deterministic
suite execution, and machine-readable reports with summary figures."""

from __future__ import annotations

import csv
import io
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .apartment import build_apartment, make_window, root_system
from .convexity import (
    box_complex,
    halfplane_complex,
    is_convex_halfspace,
    segment_complex,
    upsilon,
)
from .liefourier import (
    FiniteLieModel,
    pushforward_compare,
    verify_homothety,
    verify_lemma_ep,
    verify_projector_fourier,
    verify_prop_lie,
)
from .moyprasad import dual_spec, jump_radii, lattice_spec, region, valuation_vector
from .projector import formal_projector, reduce_against, telescope_partition
from .sl2 import (
    GroupSpec,
    apply_projector,
    convolve_cosets,
    delta_measure,
    enumerate_group,
    indicator_euler_check,
    lattice_class_count,
    rlog_entries,
    truncate_key,
)
from .sl2 import _CosetLedger
from .steinberg import (
    character_norm_squared,
    depth_zero_comparison,
    hecke_sign_action,
    sl2_order,
    steinberg_character,
    unipotent_index_identity,
)

Q = Fraction


def parse_rational(text):
    """Rationals serialized as "num/den" (or plain integers)."""
    return Q(str(text))


def format_rational(q):
    q = Q(q)
    return "%d/%d" % (q.numerator, q.denominator)


def _format_value(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, float):
        return "%.2e" % v
    if isinstance(v, dict):
        return {k: _format_value(x) for k, x in sorted(v.items())}
    if isinstance(v, (list, tuple)):
        return [_format_value(x) for x in v]
    return v


@dataclass(frozen=True)
class RunConfig:
    systems: tuple = (("A1", 1), ("A1", 2), ("A2", 1))
    window: int = 3
    primes: tuple = (2, 3)
    level: int = 3
    depths: tuple = (Q(0), Q(1))
    s_values: tuple = (Q(0), Q(1))
    seed: int = 2026
    budget: int = 500000
    samples: int = 20
    workers: int = 1
    checks: tuple = ()  # empty = all registered checks

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("config key 'budget' must be positive")
        if self.samples <= 0:
            raise ValueError("config key 'samples' must be positive")
        if self.workers <= 0:
            raise ValueError("config key 'workers' must be positive")
        if self.window <= 0:
            raise ValueError("config key 'window' must be positive")


_CONFIG_PARSERS = {
    "systems": lambda v: tuple((str(n), int(m)) for n, m in v),
    "window": int,
    "primes": lambda v: tuple(int(p) for p in v),
    "level": int,
    "depths": lambda v: tuple(parse_rational(r) for r in v),
    "s_values": lambda v: tuple(parse_rational(s) for s in v),
    "seed": int,
    "budget": int,
    "samples": int,
    "workers": int,
    "checks": lambda v: tuple(str(c) for c in v),
}


def load_config(d):
    kwargs = {}
    for key, value in d.items():
        if key not in _CONFIG_PARSERS:
            raise ValueError("unknown config key: %r" % key)
        try:
            kwargs[key] = _CONFIG_PARSERS[key](value)
        except (TypeError, ValueError) as exc:
            raise ValueError("malformed config key %r: %s" % (key, exc))
    return RunConfig(**kwargs)


@dataclass(frozen=True)
class CheckReport:
    check: str
    instance: dict
    verdict: str  # pass | fail | skip
    ms: float
    witness: object = None

    def as_dict(self):
        return {
            "check": self.check,
            "instance": _format_value(self.instance),
            "verdict": self.verdict,
            "ms": "%.2e" % self.ms,
            "witness": _format_value(self.witness),
        }


def _instance_key(instance):
    return json.dumps(_format_value(instance), sort_keys=True)


def _apartments(cfg):
    w = cfg.window
    for name, m in cfg.systems:
        spec = root_system(name)
        bounds = [(-w, w)] * spec.rank
        yield name, m, build_apartment(spec, m, make_window(bounds))


def _timed(check, instance, fn):
    t0 = time.perf_counter()
    try:
        ok, witness = fn()
    except ValueError as exc:
        ok, witness = False, {"error": str(exc)}
    ms = (time.perf_counter() - t0) * 1000
    return CheckReport(check, instance, "pass" if ok else "fail", ms, witness)


# ---------------------------------------------------------------------------
# checks


def check_partition(cfg):
    out = []
    for name, m, apt in _apartments(cfg):
        def body(apt=apt):
            for ch in apt.chambers():
                coeffs = apt.partition_of_unity(ch)
                if any(n <= 0 for n in coeffs.values()):
                    return False, {"chamber": ch.key, "issue": "nonpositive"}
                for v in list(ch.vertex_set) + [ch.barycenter()]:
                    total = sum(n * psi(v) for psi, n in coeffs.items())
                    if total != 1:
                        return False, {"chamber": ch.key, "point": v,
                                       "sum": total}
            return True, None
        out.append(_timed("apartment.partition", {"system": name, "m": m}, body))
    return out


def check_upsilon(cfg):
    out = []
    for name, m, apt in _apartments(cfg):
        rnd = random.Random("%d|%s|%d|upsilon" % (cfg.seed, name, m))
        def body(apt=apt, rnd=rnd):
            verts = apt.vertices()
            for _ in range(min(cfg.samples, len(verts))):
                x = verts[rnd.randrange(len(verts))].vertex_set[0]
                if upsilon(apt, x, 0):
                    return False, {"x": x, "issue": "Upsilon nonempty at s=0"}
            return True, None
        out.append(_timed("apartment.upsilon", {"system": name, "m": m}, body))
    return out


def _ball_complex(apt, x, radius):
    """A convex subcomplex containing every chamber of Upsilon_{x,s<=radius}."""
    cuts = []
    for rho in apt.spec.hyperplane_roots():
        v = sum(c * t for c, t in zip(rho, x))
        cuts.append((rho, v + radius))
        cuts.append((tuple(-c for c in rho), -v + radius))
    return halfplane_complex(apt, cuts)


def check_stab(cfg):
    out = []
    for name, m, apt in _apartments(cfg):
        rnd = random.Random("%d|%s|%d|stab" % (cfg.seed, name, m))
        verts = [v for v in apt.vertices()
                 if all(abs(t) <= cfg.window - 2 for t in v.vertex_set[0])]
        for s in cfg.s_values:
            if not verts:
                continue
            x = verts[rnd.randrange(len(verts))].vertex_set[0]
            instance = {"system": name, "m": m, "x": x, "s": s}
            def body(apt=apt, x=x, s=s):
                small = _ball_complex(apt, x, 2 * s + 1)
                big = _ball_complex(apt, x, 2 * s + 3)
                ups = upsilon(apt, x, s)
                if not all(c in small for c in ups):
                    return False, {"issue": "Upsilon not inside Sigma'"}
                classes, problems = telescope_partition(apt, x, s, small, big)
                if problems:
                    return False, {"problems": [str(p) for p in problems]}
                if any(cl.euler != 0 for cl in classes):
                    return False, {"issue": "nonzero Euler class"}
                eb = reduce_against(apt, formal_projector(apt, big, 0), x, 0, s)
                es = reduce_against(apt, formal_projector(apt, small, 0), x, 0, s)
                return eb == es, None
            out.append(_timed("verify.stab", instance, body))
    return out


def check_euler(cfg):
    from .projector import euler_sum
    out = []
    for name, m, apt in _apartments(cfg):
        rnd = random.Random("%d|%s|%d|euler" % (cfg.seed, name, m))
        def body(apt=apt, rnd=rnd):
            w = cfg.window
            for _ in range(cfg.samples):
                lo = [Q(rnd.randrange(-w, w)) for _ in range(apt.spec.rank)]
                hi = [min(Q(w), t + 1 + rnd.randrange(2)) for t in lo]
                sub = box_complex(apt, list(zip(lo, hi)))
                if sub.cells and euler_sum(sub) != 1:
                    return False, {"box": list(zip(lo, hi))}
            return True, None
        out.append(_timed("verify.euler", {"system": name, "m": m}, body))
    return out


def check_convex(cfg):
    out = []
    for name, m, apt in _apartments(cfg):
        rnd = random.Random("%d|%s|%d|convex" % (cfg.seed, name, m))
        for kind in ("lattice", "dual"):
            instance = {"system": name, "m": m, "kind": kind}
            def body(apt=apt, rnd=rnd, kind=kind):
                for _ in range(cfg.samples):
                    vals = {rho: rnd.randrange(-2, 3) for rho in apt.spec.roots}
                    v = valuation_vector(rnd.randrange(0, 3), vals)
                    sub = region(apt, v, Q(rnd.randrange(2)), kind)
                    if sub.cells and not is_convex_halfspace(apt, sub):
                        return False, {"vals": vals}
                return True, None
            out.append(_timed("verify.convex", instance, body))
    return out


def check_mp_spec(cfg):
    out = []
    for name, m, apt in _apartments(cfg):
        rnd = random.Random("%d|%s|%d|mp" % (cfg.seed, name, m))
        def body(apt=apt, rnd=rnd):
            for _ in range(cfg.samples):
                pt = tuple(Q(rnd.randrange(-2 * m, 2 * m + 1), 2 * m)
                           for _ in range(apt.spec.rank))
                r = Q(rnd.randrange(0, 5), 2)
                n = rnd.randrange(1, 3)
                if lattice_spec(apt, pt, r + n) != lattice_spec(apt, pt, r).shifted(n):
                    return False, {"x": pt, "r": r, "n": n,
                                   "issue": "homothety shift"}
                strict = lattice_spec(apt, pt, r, strict=True)
                dual = dual_spec(apt, pt, r)
                if any(1 - c != dict(strict.per_root)[rho]
                       for rho, c in dual.per_root):
                    return False, {"x": pt, "r": r, "issue": "duality"}
            return True, None
        out.append(_timed("mp.spec", {"system": name, "m": m}, body))
    return out


def check_mp_region(cfg):
    out = []
    for name, m, apt in _apartments(cfg):
        def body(apt=apt):
            import math
            full = valuation_vector(5, {rho: math.inf for rho in apt.spec.roots})
            sub = region(apt, full, 1)
            return len(sub) == len(apt.cells()), {"cells": len(sub)}
        out.append(_timed("mp.region", {"system": name, "m": m}, body))
    return out


def check_mp_jumps(cfg):
    out = []
    eps = Q(1, 1000)
    for name, m, apt in _apartments(cfg):
        rnd = random.Random("%d|%s|%d|jumps" % (cfg.seed, name, m))
        def body(apt=apt, rnd=rnd):
            for _ in range(min(cfg.samples, 10)):
                x = tuple(Q(rnd.randrange(-4, 5), 4)
                          for _ in range(apt.spec.rank))
                jumps = set(jump_radii(apt, x))
                for k in range(12):
                    r = Q(k, 12)
                    changed = (lattice_spec(apt, x, r)
                               != lattice_spec(apt, x, r + eps))
                    if (r in jumps) != changed:
                        return False, {"x": x, "r": r}
            return True, None
        out.append(_timed("mp.jumps", {"system": name, "m": m}, body))
    return out


def check_sl2_convolve(cfg):
    out = []
    for p in cfg.primes:
        instance = {"p": p}
        def body(p=p):
            spec = GroupSpec(Q(0), Q(0), True)
            target = GroupSpec(Q(0), Q(1), True)
            ledger = _CosetLedger(target, p)
            lhs = convolve_cosets(GroupSpec(Q(3, 2), Q(0), True), target, p,
                                  ledger, cfg.budget)
            rhs = convolve_cosets(GroupSpec(Q(2), Q(0), True), target, p,
                                  ledger, cfg.budget)
            if lhs != rhs:
                return False, {"issue": "chamber/vertex convolutions differ"}
            idem = convolve_cosets(spec, spec, p, _CosetLedger(spec, p),
                                   cfg.budget)
            return idem == {0: Q(1)}, {"idempotent": idem}
        out.append(_timed("sl2.convolve", instance, body))
    return out


def check_sl2_projector(cfg):
    out = []
    for p in cfg.primes:
        for name, m, apt in _apartments(cfg):
            if name != "A1":
                continue
            for r in cfg.depths:
                instance = {"p": p, "m": m, "r": r, "N": cfg.level}
                if (r * m).denominator != 1:
                    out.append(CheckReport("sl2.projector", instance, "skip",
                                           0.0, {"reason": "r*m not integral"}))
                    continue
                hw = 1 if r > 0 and cfg.level <= 3 else min(2, int(r) + 1)
                sub = segment_complex(apt, Q(-hw), Q(hw))
                target = GroupSpec(Q(0), r, True)
                needed = max(GroupSpec(Q(hw), r, True).thresholds())
                if needed > cfg.level:
                    out.append(CheckReport("sl2.projector", instance, "skip",
                                           0.0, {"reason": "N below the "
                                                 "faithful truncation level"}))
                    continue
                def body(apt=apt, sub=sub, r=r, target=target, p=p):
                    got = apply_projector(apt, sub, r, target, p, cfg.level,
                                          cfg.budget)
                    want = delta_measure(target, p, cfg.level, cfg.budget)
                    return got.same_as(want), None
                out.append(_timed("sl2.projector", instance, body))
    return out


def check_sl2_rlog(cfg):
    out = []
    for p in cfg.primes:
        if p == 2:
            continue
        for r in cfg.depths:
            if r.denominator != 1:
                continue
            instance = {"p": p, "r": r, "N": cfg.level}
            def body(p=p, r=r):
                N = cfg.level
                for tnum in range(-2, 3):
                    spec = GroupSpec(Q(tnum), r, True)
                    if max(spec.thresholds()) > N or min(spec.thresholds()) < 0:
                        continue
                    classes = enumerate_group(spec, p, N, cfg.budget)
                    keys = set()
                    for rep in classes.classes.values():
                        h, b, c, _ = rlog_entries(rep)
                        keys.add(truncate_key((h, b, c), p, N, 0))
                    if len(keys) != lattice_class_count(spec, p, N):
                        return False, {"t": tnum, "issue": "not a bijection"}
                return True, None
            out.append(_timed("sl2.rlog-check", instance, body))
            def push(p=p, r=r):
                apt = build_apartment(root_system("A1"), 1,
                                      make_window([(-3, 3)]))
                model = FiniteLieModel(p, 0, cfg.level)
                hw = 1 if r == 0 else 0
                sub = segment_complex(apt, Q(-hw), Q(min(hw + 1, 1)))
                rep = pushforward_compare(model, apt, sub, r, cfg.level,
                                          cfg.budget)
                return rep["pass"], None
            out.append(_timed("sl2.rlog-check",
                              dict(instance, sub="pushforward"), push))
    return out


def check_sl2_indicator(cfg):
    out = []
    for p in cfg.primes:
        for name, m, apt in _apartments(cfg):
            if name != "A1" or m != 1:
                continue
            instance = {"p": p, "samples": cfg.samples}
            def body(apt=apt, p=p):
                small = segment_complex(apt, Q(-1), Q(1))
                big = segment_complex(apt, Q(-2), Q(2))
                rep = indicator_euler_check(apt, big, 0, p,
                                            samples=cfg.samples, seed=cfg.seed,
                                            x=(Q(0),), sub_small=small)
                return rep["ok"], rep
            out.append(_timed("sl2.indicator-check", instance, body))
    return out


def check_fourier(cfg):
    out = []
    apt = build_apartment(root_system("A1"), 1, make_window([(-3, 3)]))
    model = FiniteLieModel(3, 1, 2)
    sub = segment_complex(apt, Q(-1), Q(1))
    def tolerance():
        for r in (Q(0), Q(1)):
            for cell in sub.sorted_cells():
                if not verify_prop_lie(model, apt, cell, r)["pass"]:
                    return False, {"r": r, "cell": cell.key}
            if not verify_projector_fourier(model, apt, sub, r)["pass"]:
                return False, {"r": r, "issue": "projector transform"}
        return True, None
    out.append(_timed("fourier.identities", {"p": 3, "A": 1, "B": 2},
                      tolerance))
    def exact():
        if not verify_lemma_ep(apt, sub, 0)["pass"]:
            return False, {"issue": "signed dual indicator"}
        big = FiniteLieModel(3, 1, 3)
        rep = verify_homothety(big, apt, segment_complex(apt, Q(0), Q(1)), 1)
        return rep["pass"], None
    out.append(_timed("fourier.identities", {"p": 3, "part": "exact"}, exact))
    return out


def check_steinberg(cfg):
    out = []
    for q in (2, 3, 5):
        instance = {"q": q}
        def body(q=q):
            if steinberg_character(q, (1, 0, 0, 1)) != q:
                return False, {"issue": "identity value"}
            if any(steinberg_character(q, (1, u, 0, 1)) != 0
                   for u in range(1, q)):
                return False, {"issue": "unipotent value"}
            if character_norm_squared(q) != sl2_order(q):
                return False, {"issue": "norm"}
            signs = hecke_sign_action(q)["eigenvalues"]
            if signs != {"identity": 1, "reflection": -1}:
                return False, {"signs": signs}
            rep = unipotent_index_identity(q, 3, 0, cfg.budget)
            return rep["pass"], rep
        out.append(_timed("steinberg.finite", instance, body))
    apt = build_apartment(root_system("A1"), 1, make_window([(-3, 3)]))
    sub = segment_complex(apt, Q(0), Q(1))
    for p in cfg.primes:
        def comp(p=p):
            iwahori = enumerate_group(GroupSpec(Q(1, 2), Q(0), True), p, 3,
                                      cfg.budget)
            f = {key: Q(1) for key in iwahori.classes}
            rep = depth_zero_comparison(apt, sub, p, 3, f, cfg.budget)
            return rep["pass"], rep
        out.append(_timed("steinberg.finite", {"p": p, "part": "depth-zero"},
                          comp))
    return out


CHECKS = {
    "apartment.partition": check_partition,
    "apartment.upsilon": check_upsilon,
    "verify.stab": check_stab,
    "verify.euler": check_euler,
    "verify.convex": check_convex,
    "mp.spec": check_mp_spec,
    "mp.region": check_mp_region,
    "mp.jumps": check_mp_jumps,
    "sl2.convolve": check_sl2_convolve,
    "sl2.projector": check_sl2_projector,
    "sl2.rlog-check": check_sl2_rlog,
    "sl2.indicator-check": check_sl2_indicator,
    "fourier.identities": check_fourier,
    "steinberg.finite": check_steinberg,
}


def run_suite(config, selected=None):
    """Execute the selected checks; deterministic given (config, seed)."""
    wanted = list(selected if selected is not None
                  else (config.checks or CHECKS))
    unknown = [c for c in wanted if c not in CHECKS]
    if unknown:
        raise ValueError("unknown check id: %r" % unknown[0])
    if config.checks and selected is not None:
        wanted = [c for c in wanted if c in config.checks]
    reports = []
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for batch in pool.map(lambda c: CHECKS[c](config), wanted):
            reports.extend(batch)
    reports.sort(key=lambda r: (r.check, _instance_key(r.instance)))
    return reports


def emit_report(reports, fmt="json"):
    """Serialize reports; bit-stable given identical report lists."""
    rows = [r.as_dict() for r in sorted(
        reports, key=lambda r: (r.check, _instance_key(r.instance)))]
    if fmt == "json":
        return json.dumps(rows, sort_keys=True, indent=2,
                          separators=(",", ": ")) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check", "instance", "verdict", "ms", "witness"])
        for row in rows:
            writer.writerow([
                row["check"],
                json.dumps(row["instance"], sort_keys=True),
                row["verdict"],
                row["ms"],
                "" if row["witness"] is None
                else json.dumps(row["witness"], sort_keys=True),
            ])
        return buf.getvalue()
    raise ValueError("format must be 'json' or 'csv'")


def render_figures(reports, out_base):
    """Verdict summary and per-check timing charts next to the report file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    verdicts = {}
    timings = {}
    for r in reports:
        verdicts[r.verdict] = verdicts.get(r.verdict, 0) + 1
        timings[r.check] = timings.get(r.check, 0.0) + r.ms
    paths = []
    fig, ax = plt.subplots(figsize=(5, 3))
    keys = sorted(verdicts)
    colors = {"pass": "#2a9d2a", "fail": "#c03030", "skip": "#d0a020"}
    ax.bar(keys, [verdicts[k] for k in keys],
           color=[colors.get(k, "#808080") for k in keys])
    ax.set_ylabel("checks")
    ax.set_title("verdict summary")
    fig.tight_layout()
    path = out_base + ".verdicts.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    keys = sorted(timings)
    ax.barh(keys, [timings[k] for k in keys], color="#4060c0")
    ax.set_xlabel("total ms")
    ax.set_title("time per check family")
    fig.tight_layout()
    path = out_base + ".timing.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)
    return paths
