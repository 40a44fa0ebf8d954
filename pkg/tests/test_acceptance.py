"""Acceptance criteria 1-10, one recorded PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py``; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import itertools
import math
import time

import numpy as np
import pytest

from derivlab import catalog, ckmr, extremal, randsums
from derivlab.seqspace import SeqVector, c0, lp, norm_dense, tsirelson
from derivlab.seqspace.dual import dual_norm_dense
from derivlab.seqspace.tsirelson import tsirelson_norm

from oracles import kp_scalar, tsirelson_bruteforce

_T0 = time.perf_counter()


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_criterion_01_tsirelson_oracle(record):
    t = time.perf_counter()
    worst = 0.0
    for n in (2, 4, 8):
        x = np.zeros(2 * n)
        x[n:] = 1.0
        dp = tsirelson_norm(x)
        bf = tsirelson_bruteforce(x)
        worst = max(worst, abs(dp - n / 2), abs(bf - n / 2))
    dt = time.perf_counter() - t
    ok = worst <= 1e-12 and dt < 10
    assert record(1, ok, f"max |err| = {worst:.1e}, {dt:.2f} s")


def test_criterion_02_kalton_peck_critical_point(record):
    B = c0(16)
    worst_k = worst_w = worst_kp = 0.0
    for n in range(1, 17):
        k = extremal.kappa(B, range(1, n + 1))
        worst_k = max(worst_k, _rel(k.value, math.sqrt(n)))
        w = k.witness.to_dense(n)
        worst_w = max(worst_w, float(np.max(np.abs(w / np.linalg.norm(w) - 1 / math.sqrt(n)))))
        om = catalog.omega_kalton_peck(k.witness).to_dense(n)
        target = -2.0 * math.log(math.sqrt(n)) * w
        # plain-float oracle for the closed form itself
        ref = np.array(kp_scalar(list(w)))
        worst_kp = max(worst_kp, float(np.max(np.abs(om - target))) / np.linalg.norm(w),
                       float(np.max(np.abs(om - ref))) / np.linalg.norm(w))
    ok = worst_k <= 1e-9 and worst_w <= 1e-9 and worst_kp <= 1e-12
    assert record(2, ok, f"kappa rel {worst_k:.1e}, witness dev {worst_w:.1e}, "
                         f"KP rel {worst_kp:.1e}")


def test_criterion_03_lions_peetre_closed_form(record):
    rng = np.random.default_rng(3)
    worst = 0.0
    ratio = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 13))
        a = SeqVector.from_dense(rng.standard_normal(d) * np.exp(2 * rng.standard_normal(d)))
        if a.is_zero():
            continue
        for p0, p1 in itertools.product((1, 2, 4), repeat=2):
            for th in (0.25, 0.5, 2 / 3):
                rep = ckmr.lions_peetre_selector(a, p0, p1, th)
                mach = ckmr.delta_prime(rep.jseq)
                closed = catalog.omega_lions_peetre(a, p0, p1, th)
                den = closed.l2() if not closed.is_zero() else a.l2()
                worst = max(worst, (mach - closed).l2() / den)
                ratio = max(ratio, rep.bound_ratio)
    ok = worst <= 1e-12 and ratio <= 1 + 1e-9
    assert record(3, ok, f"closed-form rel {worst:.1e}, max bound_ratio {ratio:.6f} "
                         f"(required <= 1 + 1e-9)")


def test_criterion_03b_lions_peetre_bound_e_power():
    # the bound the selector does satisfy: J-norm <= e^{1-theta} ||a||_p
    rng = np.random.default_rng(33)
    for _ in range(300):
        a = SeqVector.from_dense(rng.standard_normal(8) * np.exp(2 * rng.standard_normal(8)))
        for p0, p1 in itertools.permutations((1, 2, 4), 2):
            for th in (0.25, 0.5, 2 / 3):
                rep = ckmr.lions_peetre_selector(a, p0, p1, th)
                assert rep.bound_ratio <= math.exp(1 - th) * (1 + 1e-9)


def test_criterion_04_single_slot_identity(record):
    exact = True
    ratio = 0.0
    for name in catalog.BUILTIN_COUPLES:
        cp = catalog.builtin_couple(name, 6)
        for n in range(1, 7):
            F = range(1, n + 1)
            o = catalog.omega_critical_real(cp, F)
            k = catalog.cached_kappa(cp.B0, F)
            expect = k.witness * (-2.0 * math.exp(-0.5) * math.floor(math.log(k.value)))
            exact &= o.machinery == expect and o.exact
            rep = ckmr.single_slot_selector(k.witness, o.floor_log, -1, 0.5, cp.pair())
            ratio = max(ratio, rep.bound_ratio)
    ok = bool(exact) and ratio <= math.e * (1 + 1e-9)
    assert record(4, ok, f"bitwise identity {bool(exact)}, max bound_ratio/e {ratio / math.e:.6f}")


def test_criterion_05_dual_branch(record):
    exact = True
    for name in ("c0", "weighted"):
        cp = catalog.builtin_couple(name, 8)
        for n in range(1, 9):
            F = range(1, n + 1)
            o = catalog.omega_critical_real(cp, F, dual_branch=True)
            ks = catalog.cached_kappa(cp.B0, F, star=True)
            expect = ks.witness * (2.0 * math.exp(-0.5) * math.floor(math.log(ks.value)))
            exact &= o.exact and o.machinery == expect
    assert record(5, bool(exact), f"bitwise identity {bool(exact)} on c0 and weighted, n <= 8")


def test_criterion_06_duality_sandwich(record):
    tol = 1e-6
    n = 8
    F = range(1, n + 1)
    rng = np.random.default_rng(6)
    bad = []
    for name in ("l2", "c0", "weighted", "T2"):
        B = catalog.builtin_couple(name, n).B0
        k = catalog.cached_kappa(B, F).value
        ks = catalog.cached_kappa(B, F, star=True).value
        for _ in range(1000):
            b = rng.standard_normal(n)
            l2 = float(np.linalg.norm(b))
            nb = norm_dense(B, b)
            d = dual_norm_dense(B, b, tol)
            s = 1 + tol
            ok = (d.lower / k <= l2 * s and l2 <= k * nb * s
                  and nb / ks <= l2 * s and l2 <= ks * d.upper * s)
            if not ok:
                bad.append(name)
    assert record(6, not bad, f"violations {len(bad)} of 4000 ({sorted(set(bad))})")


def test_criterion_07_calderon_distance(record):
    worst_l1 = 0.0
    for n in range(1, 17):
        d = extremal.calderon_distance(lp(1.0, n), lp(2.0, n), range(1, n + 1)).distance
        worst_l1 = max(worst_l1, abs(d - 0.5 * math.log(n)))
    worst_b = 0.0
    for name in ("c0", "weighted", "T2"):
        B = catalog.builtin_couple(name, 16).B0
        for n in range(1, 17):
            F = range(1, n + 1)
            d = extremal.calderon_distance(B, lp(2.0, 16), F).distance
            worst_b = max(worst_b, abs(d - math.log(catalog.cached_kappa(B, F).value)))
    ok = worst_l1 <= 1e-9 and worst_b <= 1e-9
    assert record(7, ok, f"l1-l2 err {worst_l1:.1e}, B-l2 err {worst_b:.1e}")


def _catalog_maps(n):
    return [catalog.make_map("zero"), catalog.make_map("kalton_peck"),
            catalog.make_map("lions_peetre", p0=1.0, p1=2.0, theta=0.5),
            catalog.make_map("rank_J", p0=1.0, p1=2.0, theta=0.5),
            catalog.make_map("critical_real", couple="c0", n=n),
            catalog.make_map("critical_real", couple="T2", n=n),
            catalog.make_map("critical_complex", couple="c0", n=n),
            catalog.make_map("weighted_demo", n=n)]


def test_criterion_08_centralizer(record):
    rng = np.random.default_rng(8)
    exact = True
    for n in range(1, 11):
        b = SeqVector.from_dense(rng.standard_normal(n) * np.exp(rng.standard_normal(n)))
        signs = [SeqVector.from_dense(np.array(e)) for e in itertools.product((-1.0, 1.0), repeat=n)]
        for om in _catalog_maps(10):
            base = om(b)
            exact &= all(om(e * b) == e * base for e in signs)
    spread = {}
    finite = True
    for om in _catalog_maps(6):
        vals = [catalog.centralizer_defect_mc(om, 6, 10_000, s)["max_defect"] for s in range(5)]
        finite &= all(math.isfinite(v) for v in vals)
        med = float(np.median(vals))
        spread[om.kind] = 0.0 if med == 0 else max(abs(v - med) / med for v in vals)
    worst = max(spread.values())
    ok = bool(exact) and finite and worst <= 0.10
    assert record(8, ok, f"sign-exact {bool(exact)}, max defect spread {worst:.3f} "
                         f"({max(spread, key=spread.get)})")


def test_criterion_09_growth(record):
    g = catalog.growth_diagnostic(catalog.builtin_couple("l2", 16), 16)
    l2_ones = all(r["kappa"] == 1.0 for r in g["rows"])
    vanish = all(catalog.omega_critical_real(catalog.builtin_couple("l2", 16), range(1, n + 1))
                 .machinery.is_zero() for n in range(1, 17))
    t2 = [catalog.cached_kappa(catalog.builtin_couple("T2", 16).B0, range(1, n + 1)).value
          for n in range(1, 17)]
    t2_ok = t2[3] >= math.sqrt(2) and all(b >= a for a, b in zip(t2, t2[1:]))
    delta = 1.0 + np.log1p(np.log1p(np.arange(1, 17, dtype=float)))
    _, sg = catalog.slow_growth_demo(delta, 16)
    slow = all(r["kappa"] == delta[r["n"] - 1] for r in sg["rows"])
    ok = l2_ones and vanish and t2_ok and slow
    assert record(9, ok, f"l2 ones {l2_ones}, vanish {vanish}, T2 kappa(4)={t2[3]:.6f} "
                         f"monotone {t2_ok}, slow-growth exact {slow}")


def test_criterion_10_type_machinery(record):
    t = time.perf_counter()
    l2_vals = [randsums.type_constant_lower(lp(2.0, 10), m).lower_bound for m in range(1, 11)]
    l2_ok = all(v == 1.0 for v in l2_vals)

    cl2 = catalog.builtin_couple("l2", 8)
    fam = randsums.VectorFamily(tuple(SeqVector.basis(j) for j in range(1, 5)), cl2.B0)
    lhs0 = randsums.randoma_defect(randsums.default_map(cl2), cl2, 0.5, 2.0, fam)["lhs"]

    cp = catalog.builtin_couple("T2", 8)
    om = randsums.default_map(cp)
    rng = np.random.default_rng(1234)
    spreads = {}
    finite = True
    for m in range(1, 7):
        fam = randsums.VectorFamily(
            tuple(SeqVector.from_dense(rng.standard_normal(8)) for _ in range(m)), cp.B0)
        cs = [randsums.randoma_defect(om, cp, 0.5, 2.0, fam, seed=s)["c_emp"] for s in range(5)]
        finite &= all(math.isfinite(c) for c in cs)
        med = float(np.median(cs))
        spreads[m] = 0.0 if med == 0 else max(abs(c - med) / med for c in cs)
    table = [randsums.average_bound_check(om, cp, 0.5, 2.0, m)["c_emp"] for m in range(1, 7)]
    bounded = all(math.isfinite(c) and c >= 0 for c in table)
    dt = time.perf_counter() - t
    suite = time.perf_counter() - _T0
    worst_m = max(spreads, key=spreads.get)
    ok = l2_ok and lhs0 == 0.0 and finite and spreads[worst_m] <= 0.15 and bounded and suite < 300
    assert record(10, ok, f"l2 type one {l2_ok}, l2 defect {lhs0}, C_emp spread "
                          f"{spreads[worst_m]:.3f} at m={worst_m} "
                          f"({', '.join(f'{m}:{s:.2f}' for m, s in spreads.items())}), "
                          f"table bounded {bounded}, {dt:.0f} s, suite {suite:.0f} s")
