"""Closed-form derivation maps, centralizer defects and growth diagnostics."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .ckmr import (
    delta_prime,
    lions_peetre_selector,
    log_ratio,
    lp_exponent,
    lp_lambda,
    single_slot_selector,
)
from .errors import ParameterError
from .extremal import KappaResult, kappa, kappa_star
from .seqspace.spaces import (
    SpaceDescriptor,
    c0,
    dual_of,
    format_space,
    lp,
    parse_space,
    tsirelson2,
    weighted_l2,
)
from .seqspace.vector import SeqVector
from .seeding import spawn_generators

MAP_KINDS = ("zero", "kalton_peck", "lions_peetre", "rank_J", "critical_real",
             "critical_complex", "weighted_demo")

NEG_TWO_EXP_HALF = -2.0 * math.exp(-0.5)


def _nonzero(b: SeqVector):
    if b.is_zero():
        raise ParameterError("derivation maps are evaluated on nonzero vectors")


# ---------------------------------------------------------------------------
# closed forms

def omega_kalton_peck(b: SeqVector) -> SeqVector:
    """2 b_j log(|b_j| / ||b||_2) coordinatewise."""
    _nonzero(b)
    v = np.array(b.values)
    r = b.l2()
    out = 2.0 * v * np.array([log_ratio(abs(t), r) for t in b.values])
    return SeqVector.from_dense(_scatter(b, out))


def _scatter(b: SeqVector, vals) -> np.ndarray:
    dense = np.zeros(b.dim)
    dense[np.array(b.indices) - 1] = vals
    return dense


def omega_lions_peetre(a: SeqVector, p0: float, p1: float, theta: float) -> SeqVector:
    """e^{-theta} (-floor(lambda log(|a_m| / ||a||_p))) a_m coordinatewise."""
    _nonzero(a)
    if p0 == p1:
        return SeqVector()
    p = lp_exponent(p0, p1, theta)
    lam = lp_lambda(p0, p1, theta)
    v = np.abs(np.array(a.values))
    top = v.max()
    nrm = top * float(((v / top) ** p).sum() ** (1.0 / p))
    out = []
    for am, m in zip(a.values, v):
        n = -math.floor(lam * log_ratio(m, nrm))
        out.append(math.exp(-theta) * n * am)
    return SeqVector.from_dense(_scatter(a, np.array(out)))


def rank_function(x: SeqVector) -> tuple[int, ...]:
    """r(j) = 1 + #{coordinates of strictly larger modulus}, ties by index.

    Returned in the order of ``x.indices``.
    """
    _nonzero(x)
    mod = np.abs(np.array(x.values))
    order = sorted(range(len(mod)), key=lambda k: (-mod[k], k))
    r = [0] * len(mod)
    for rank, k in enumerate(order, start=1):
        r[k] = rank
    return tuple(r)


def omega_rank_J(x: SeqVector, p0: float = 1.0, p1: float = 2.0, theta: float = 0.5) -> SeqVector:
    """-x_j |log r_x(j)| for the lp-normalized x, rescaled back."""
    _nonzero(x)
    p = lp_exponent(p0, p1, theta)
    v = np.array(x.values)
    a = np.abs(v)
    nrm = a.max() * float(((a / a.max()) ** p).sum() ** (1.0 / p))
    r = np.array(rank_function(x), dtype=float)
    out = -(v / nrm) * np.abs(np.log(r)) * nrm
    return SeqVector.from_dense(_scatter(x, out))


# ---------------------------------------------------------------------------
# built-in couples

@dataclass(frozen=True)
class Couple:
    name: str
    B0: SpaceDescriptor
    B1: SpaceDescriptor

    def pair(self):
        return (self.B0, self.B1)


def slow_growth_weights(n: int) -> np.ndarray:
    j = np.arange(1, n + 1, dtype=float)
    return 1.0 + np.log1p(np.log1p(j))


def builtin_couple(name: str, n: int = 16) -> Couple:
    if name in ("l2", "l2,l2"):
        return Couple("l2", lp(2.0, n), lp(2.0, n))
    if name in ("c0", "c0,l1"):
        return Couple("c0", c0(n), lp(1.0, n))
    if name in ("T2", "T2,dual:T2"):
        B = tsirelson2(n)
        return Couple("T2", B, dual_of(B))
    if name in ("weighted", "slow"):
        B = weighted_l2(slow_growth_weights(n), n, label="wl2:slow")
        return Couple("weighted", B, dual_of(B))
    if "," in name:
        a, b = name.split(",", 1)
        return Couple(name, parse_space(a, n), parse_space(b, n))
    raise ParameterError(f"unknown couple {name!r}")


BUILTIN_COUPLES = ("l2", "c0", "T2", "weighted")


# ---------------------------------------------------------------------------
# critical points

_kappa_cache: dict[tuple, KappaResult] = {}
_kappa_lock = threading.Lock()


def cached_kappa(space: SpaceDescriptor, F, star: bool = False) -> KappaResult:
    key = (space, frozenset(F), star)
    with _kappa_lock:
        hit = _kappa_cache.get(key)
    if hit is None:
        hit = (kappa_star if star else kappa)(space, F)
        with _kappa_lock:
            _kappa_cache.setdefault(key, hit)
    return hit


@dataclass(frozen=True)
class CriticalOutput:
    witness: SeqVector
    closed_form: SeqVector
    machinery: SeqVector
    kappa: float
    floor_log: int
    certified: bool
    boundary: dict | None = None

    @property
    def exact(self) -> bool:
        return self.closed_form == self.machinery


def omega_critical_real(couple: Couple, F, dual_branch: bool = False) -> CriticalOutput:
    """Closed form and selector machinery on the critical point of F.

    Primal branch: the witness of kappa(F), N = -2 floor(log kappa), value
    -2 e^{-1/2} floor(log kappa) b.  Dual branch: the witness of kappa*(F),
    N = +2 floor(log kappa*), value +2 e^{-1/2} floor(log kappa*) b*.
    """
    B = couple.B0
    k = cached_kappa(B, F, star=dual_branch)
    fl = math.floor(math.log(k.value))
    b = k.witness
    sign = 1 if dual_branch else -1
    closed = b * ((-NEG_TWO_EXP_HALF if dual_branch else NEG_TWO_EXP_HALF) * fl)
    rep = single_slot_selector(b, fl, sign, 0.5, couple.pair())
    mach = delta_prime(rep.jseq)
    return CriticalOutput(b, closed, mach, k.value, fl, k.certified)


def omega_critical_complex(couple: Couple, F, tol: float = 1e-6) -> CriticalOutput:
    """-2 log kappa(F) b_* with the boundary values of the selector
    z -> exp(-2 (z - 1/2) log kappa) b_*, whose moduli do not depend on Im z."""
    from .seqspace.spaces import norm
    B = couple.B0
    k = cached_kappa(B, F)
    lk = math.log(k.value)
    b = k.witness
    out = b * (-2.0 * lk)
    nb = norm(B, b)
    nbs = norm(dual_of(B), b)
    l2 = b.l2()
    s0 = math.exp(lk) * nb          # |exp(-2(0 - 1/2) log k)| = k
    s1 = math.exp(-lk) * nbs        # |exp(-2(1 - 1/2) log k)| = 1/k
    boundary = {
        "S0_norm": s0, "kappa_times_norm": k.value * nb,
        "S1_dual_norm": s1, "l2": l2,
        "ok": abs(s0 - l2) <= tol * l2 + k.certified_gap * nb and s1 <= l2 * (1 + tol),
    }
    return CriticalOutput(b, out, out, k.value, math.floor(lk), k.certified, boundary)


# ---------------------------------------------------------------------------
# derivation maps on arbitrary vectors

@dataclass(frozen=True)
class DerivationMap:
    """A named homogeneous map on SeqVectors; ``omega(0) = 0``."""

    kind: str
    params: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ParameterError(f"unknown map kind {self.kind!r}; choose from {MAP_KINDS}")

    def __call__(self, b: SeqVector) -> SeqVector:
        if b.is_zero():
            return SeqVector()
        k, p = self.kind, self.params
        if k == "zero":
            return SeqVector()
        if k == "kalton_peck":
            return omega_kalton_peck(b)
        if k == "lions_peetre":
            return omega_lions_peetre(b, p.get("p0", 1.0), p.get("p1", 2.0), p.get("theta", 0.5))
        if k == "rank_J":
            return omega_rank_J(b, p.get("p0", 1.0), p.get("p1", 2.0), p.get("theta", 0.5))
        # critical maps applied at b: the closed form on F = supp b
        F = b.support
        if k == "weighted_demo":
            w = p["weights"]
            kap = max(w[j - 1] for j in F)
            return b * (NEG_TWO_EXP_HALF * math.floor(math.log(kap)))
        couple = builtin_couple(p.get("couple", "c0"), max(p.get("n", 16), b.dim))
        kap = cached_kappa(couple.B0, F).value
        if k == "critical_real":
            return b * (NEG_TWO_EXP_HALF * math.floor(math.log(kap)))
        return b * (-2.0 * math.log(kap))

    @property
    def sign_equivariant(self) -> bool:
        return True

    def to_json_obj(self) -> dict:
        return {"kind": self.kind, **{k: v for k, v in self.params.items() if k != "weights"}}

    @classmethod
    def from_json_obj(cls, obj) -> "DerivationMap":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValueError("map JSON missing field 'kind'")
        params = {k: v for k, v in obj.items() if k != "kind"}
        if obj["kind"] == "weighted_demo" and "weights" not in params:
            params["weights"] = tuple(slow_growth_weights(int(params.get("n", 16))))
        return cls(obj["kind"], params)


def make_map(kind: str, **params) -> DerivationMap:
    if kind == "weighted_demo" and "weights" not in params:
        params["weights"] = tuple(slow_growth_weights(int(params.get("n", 16))))
    return DerivationMap(kind, params)


def centralizer_defect(omega: DerivationMap, a: SeqVector, b: SeqVector) -> float:
    """||Omega(a b) - a Omega(b)||_2 / (||a||_inf ||b||_2)."""
    if a.is_zero() or b.is_zero():
        raise ParameterError("centralizer defect needs nonzero multiplier and vector")
    ainf = max(abs(v) for v in a.values)
    diff = omega(a * b) - a * omega(b)
    return diff.l2() / (ainf * b.l2())


def centralizer_defect_mc(omega: DerivationMap, n: int, trials: int, seed: int) -> dict:
    """Max defect over random multipliers in [-1, 1]^n and Gaussian vectors."""
    worst = 0.0
    for rng, count in spawn_generators(seed, trials):
        for _ in range(count):
            a = SeqVector.from_dense(rng.uniform(-1.0, 1.0, n))
            b = SeqVector.from_dense(rng.standard_normal(n))
            if a.is_zero() or b.is_zero():
                continue
            worst = max(worst, centralizer_defect(omega, a, b))
    return {"map": omega.kind, "n": n, "trials": trials, "seed": seed, "max_defect": worst}


# ---------------------------------------------------------------------------
# growth tables

def growth_diagnostic(couple: Couple, n_max: int, n_min: int = 1) -> dict:
    rows = []
    for n in range(n_min, n_max + 1):
        F = range(1, n + 1)
        k = cached_kappa(couple.B0, F)
        ks = cached_kappa(couple.B0, F, star=True)
        fl = math.floor(math.log(k.value))
        rows.append({
            "n": n, "kappa": k.value, "kappa_star": ks.value,
            "floor_log_kappa": fl,
            "floor_log_kappa_star": math.floor(math.log(ks.value)),
            "omega_scale": abs(NEG_TWO_EXP_HALF * fl),
            "certified_gap": max(k.certified_gap, ks.certified_gap),
        })
    scales = {r["omega_scale"] for r in rows}
    return {"couple": couple.name, "rows": rows, "nonconstant": len(scales) > 1}


def slow_growth_demo(delta, n_max: int) -> tuple[Couple, dict]:
    d = np.asarray(delta, dtype=float)[:n_max]
    if len(d) < n_max:
        raise ParameterError(f"need {n_max} terms of delta, got {len(d)}")
    if np.any(d < 1.0) or np.any(np.diff(d) < 0):
        raise ParameterError("delta must be nondecreasing and >= 1")
    B = weighted_l2(d, n_max, label="wl2:delta")
    couple = Couple("weighted", B, dual_of(B))
    return couple, growth_diagnostic(couple, n_max)


def couple_label(c: Couple) -> str:
    return f"{format_space(c.B0)},{format_space(c.B1)}"


def dump_map(m: DerivationMap) -> str:
    return json.dumps(m.to_json_obj())
