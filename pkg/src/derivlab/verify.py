"""Self-check suites run by ``derivlab verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import catalog, ckmr, extremal, randsums, twisted
from .seeding import generator
from .seqspace import (
    SeqVector,
    c0,
    dual_of,
    lp,
    norm,
    norm_dense,
    norming_functionals,
    tsirelson,
    tsirelson2,
)
from .seqspace.dual import dual_norm_dense


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.suite}/{self.name} {self.detail}".rstrip()


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def suite_norms(seed: int, tol: float):
    rng = generator(seed)
    out = []
    for n in (2, 4, 8):
        x = SeqVector.ones(range(n + 1, 2 * n + 1))
        v = norm(tsirelson(2 * n), x)
        out.append(Check("norms", f"tail-block-{n}", v == n / 2, f"value={v}"))
    e34 = SeqVector.ones((3, 4))
    out.append(Check("norms", "T-e3+e4", norm(tsirelson(4), e34) == 1.0))
    v = norm(tsirelson2(4), e34 * (1 / math.sqrt(2)))
    out.append(Check("norms", "T2-e3+e4", _rel(v, 1 / math.sqrt(2)) <= 1e-15, f"value={v}"))
    for n in (4, 8):
        X = rng.random((200, n))
        ns = norming_functionals(n)
        dp = np.array([norm_dense(tsirelson(n), x) for x in X])
        err = float(np.max(np.abs(ns.induced_norms(X) - dp) / dp))
        out.append(Check("norms", f"norming-set-{n}", err <= 1e-12, f"max_rel={err:.2e}"))
    worst = 0.0
    for sp in (lp(1.5, 8), c0(8), tsirelson(8), tsirelson2(8)):
        for _ in range(20):
            x = rng.standard_normal(8)
            s = rng.choice((-1.0, 1.0), 8)
            t = float(rng.uniform(0.1, 10))
            a = norm_dense(sp, x)
            worst = max(worst, abs(norm_dense(sp, s * x) - a) / a,
                        _rel(norm_dense(sp, t * x), t * a))
    out.append(Check("norms", "unconditional-homogeneous", worst <= 1e-12, f"max_rel={worst:.2e}"))
    return out


def suite_duality(seed: int, tol: float, n: int = 6, trials: int = 40):
    rng = generator(seed)
    out = []
    for name in ("c0", "T2", "weighted"):
        cp = catalog.builtin_couple(name, n)
        B = cp.B0
        F = range(1, n + 1)
        k = catalog.cached_kappa(B, F).value
        ks = catalog.cached_kappa(B, F, star=True).value
        ok = True
        for _ in range(trials):
            b = rng.standard_normal(n)
            l2 = float(np.linalg.norm(b))
            nb = norm_dense(B, b)
            d = dual_norm_dense(B, b, tol)
            slack = 1 + 10 * tol
            ok &= d.lower / k <= l2 * slack and l2 <= k * nb * slack
            ok &= nb / ks <= l2 * slack and l2 <= ks * d.upper * slack
        out.append(Check("duality", f"sandwich-{name}", bool(ok), f"kappa={k:.6f} kappa*={ks:.6f}"))
    return out


def suite_selectors(seed: int, tol: float):
    rng = generator(seed)
    out = []
    worst = 0.0
    ratio = 0.0
    for _ in range(50):
        a = SeqVector.from_dense(rng.standard_normal(8) * np.exp(rng.standard_normal(8)))
        for p0, p1, th in ((1, 2, 0.5), (1, 4, 2 / 3), (4, 2, 0.25)):
            rep = ckmr.lions_peetre_selector(a, p0, p1, th)
            worst = max(worst, (ckmr.delta(rep.jseq) - a).l2() / a.l2())
            ratio = max(ratio, rep.bound_ratio / math.exp(1 - th))
        r2 = ckmr.single_slot_selector(a, int(rng.integers(-3, 4)), -1)
        worst = max(worst, (ckmr.delta(r2.jseq) - a).l2() / a.l2())
    out.append(Check("selectors", "reconstruction", worst <= 1e-12, f"max_rel={worst:.2e}"))
    out.append(Check("selectors", "lp-bound-e^(1-theta)", ratio <= 1 + 1e-9,
                     f"max ratio/e^(1-theta)={ratio:.6f}"))
    for q0, q1 in ((2, 2), (1, 3)):
        r = ckmr.check_single_slot_property((tsirelson2(6), dual_of(tsirelson2(6))), q0, q1,
                                            trials=30, seed=seed)
        out.append(Check("selectors", f"single-slot-q{q0}{q1}", r["max_deviation"] == 0.0,
                         f"dev={r['max_deviation']}"))
    return out


def suite_closed_forms(seed: int, tol: float):
    rng = generator(seed)
    out = []
    worst = 0.0
    for _ in range(50):
        a = SeqVector.from_dense(rng.standard_normal(8) * np.exp(rng.standard_normal(8)))
        for p0, p1 in itertools.permutations((1, 2, 4), 2):
            for th in (0.25, 0.5, 2 / 3):
                m = ckmr.delta_prime(ckmr.lions_peetre_selector(a, p0, p1, th).jseq)
                c = catalog.omega_lions_peetre(a, p0, p1, th)
                den = c.l2() if not c.is_zero() else 1.0
                worst = max(worst, (m - c).l2() / den)
    out.append(Check("closed-forms", "lions-peetre-machinery", worst <= 1e-12,
                     f"max_rel={worst:.2e}"))
    for name in catalog.BUILTIN_COUPLES:
        cp = catalog.builtin_couple(name, 6)
        for dual in (False, True):
            o = catalog.omega_critical_real(cp, range(1, 7), dual_branch=dual)
            out.append(Check("closed-forms", f"slot-{name}-{'dual' if dual else 'primal'}",
                             o.exact, f"kappa={o.kappa:.6f} floor={o.floor_log}"))
    a = SeqVector.ones(range(1, 17), 0.25)
    kp = catalog.omega_kalton_peck(a)
    target = a * (-2 * math.log(4.0))
    err = (kp - target).l2() / target.l2()
    out.append(Check("closed-forms", "kalton-peck-ones16", err <= 1e-12, f"rel={err:.2e}"))
    return out


def _all_maps(n):
    return [catalog.make_map("zero"), catalog.make_map("kalton_peck"),
            catalog.make_map("lions_peetre", p0=1.0, p1=2.0, theta=0.5),
            catalog.make_map("rank_J", p0=1.0, p1=2.0, theta=0.5),
            catalog.make_map("critical_real", couple="c0", n=n),
            catalog.make_map("critical_complex", couple="c0", n=n),
            catalog.make_map("weighted_demo", n=n)]


def suite_centralizer(seed: int, tol: float, n: int = 6, trials: int = 500):
    rng = generator(seed)
    out = []
    b = SeqVector.from_dense(rng.standard_normal(n) * np.exp(rng.standard_normal(n)))
    for om in _all_maps(n):
        base = om(b)
        ok = True
        for eps in itertools.product((-1.0, 1.0), repeat=n):
            e = SeqVector.from_dense(np.array(eps))
            ok &= om(e * b) == e * base
        out.append(Check("centralizer", f"sign-exact-{om.kind}", bool(ok)))
    r = catalog.centralizer_defect_mc(catalog.make_map("kalton_peck"), n, trials, seed)
    out.append(Check("centralizer", "kp-defect-finite", math.isfinite(r["max_defect"]),
                     f"max_defect={r['max_defect']:.4f}"))
    return out


def suite_twisted(seed: int, tol: float, n: int = 6):
    rng = generator(seed)
    out = []
    km = catalog.make_map("kalton_peck")
    x = SeqVector.from_dense(rng.standard_normal(n))
    y = SeqVector.from_dense(rng.standard_normal(n))
    j = twisted.inclusion(x, km)
    out.append(Check("twisted", "exactness", twisted.quotient(j).is_zero()))
    out.append(Check("twisted", "isometric-inclusion", twisted.derived_quasinorm(j) == x.l2()))
    v = twisted.DerivedVector(x, y, km)
    out.append(Check("twisted", "quotient-contractive",
                     twisted.quotient(v).l2() <= twisted.derived_quasinorm(v)))
    out.append(Check("twisted", "cancellation",
                     twisted.derived_quasinorm(twisted.DerivedVector(km(y), y, km)) == y.l2()))
    r = twisted.unconditionality_estimate(km, n, 10, seed)
    out.append(Check("twisted", "unconditional-even", r["ratio"] == 1.0, f"ratio={r['ratio']}"))
    z = catalog.make_map("zero")
    w = twisted.DerivedVector(x, y, z)
    out.append(Check("twisted", "zero-map-sum-norm", twisted.derived_quasinorm(w) == x.l2() + y.l2()))
    return out


def suite_randsums(seed: int, tol: float):
    out = []
    vals = [randsums.type_constant_lower(lp(2.0, 6), m, seed=seed).lower_bound for m in range(1, 7)]
    out.append(Check("randsums", "l2-type-one", all(v == 1.0 for v in vals), f"values={vals}"))
    rng = generator(seed)
    worst = 0.0
    for m in (2, 4, 6):
        fam = randsums.VectorFamily(
            tuple(SeqVector.from_dense(rng.standard_normal(6)) for _ in range(m)), lp(2.0, 6))
        sm = randsums.second_moment(fam)
        tot = math.fsum(v.l2() ** 2 for v in fam.members)
        worst = max(worst, _rel(sm, tot))
    out.append(Check("randsums", "second-moment-identity", worst <= 1e-12, f"max_rel={worst:.2e}"))
    cp = catalog.builtin_couple("l2", 6)
    fam = randsums.VectorFamily(tuple(SeqVector.basis(j) for j in range(1, 4)), lp(2.0, 6))
    r = randsums.randoma_defect(randsums.default_map(cp), cp, 0.5, 2.0, fam, seed=seed)
    out.append(Check("randsums", "l2-defect-zero", r["lhs"] == 0.0, f"lhs={r['lhs']}"))
    return out


SUITES = {
    "norms": suite_norms,
    "duality": suite_duality,
    "selectors": suite_selectors,
    "closed-forms": suite_closed_forms,
    "centralizer": suite_centralizer,
    "twisted": suite_twisted,
    "randsums": suite_randsums,
}


def run(suite: str, seed: int = 0, tol: float = 1e-6) -> list[Check]:
    names = list(SUITES) if suite == "all" else [suite]
    out = []
    for name in names:
        if name not in SUITES:
            raise KeyError(name)
        out.extend(SUITES[name](seed, tol))
    return out
