"""Z-indexed J-sequences for the l_q pseudolattice, evaluation maps, selectors.

A slot at offset ``n`` stores a vector ``v`` together with a log-scale
exponent ``c``; the slot's value is ``b_n = exp(c) * v``.  Keeping the scale
in the exponent lets the evaluation map and its derivative fold the weight
``exp(theta * n)`` into the same exponential, so that for the selectors built
here ``delta`` returns the input vector exactly and ``delta_prime`` returns
``n * exp(-theta) * v`` with a single rounding in the scalar factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .seqspace.spaces import SpaceDescriptor, format_space, norm, parse_space
from .seqspace.vector import SeqVector


@dataclass(frozen=True)
class Slot:
    n: int
    vector: SeqVector
    log_scale: float = 0.0

    def value(self) -> SeqVector:
        return self.vector * math.exp(self.log_scale)


@dataclass(frozen=True)
class JSequence:
    slots: tuple[Slot, ...]
    couple: tuple[SpaceDescriptor, SpaceDescriptor]
    q: tuple[float, float] = (2.0, 2.0)
    theta: float = 0.5

    def __post_init__(self):
        for qj in self.q:
            if not (1.0 <= qj < math.inf):
                raise ParameterError(f"pseudolattice exponent must satisfy 1 <= q < inf, got {qj}")
        offs = [s.n for s in self.slots]
        if len(set(offs)) != len(offs):
            raise ParameterError("duplicate slot offsets")
        bound = min(b.support_bound for b in self.couple)
        for s in self.slots:
            if s.vector.dim > bound:
                raise ParameterError(f"slot {s.n} reaches index {s.vector.dim} > {bound}")

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(s.n for s in self.slots)

    def shifted(self, k: int = 1) -> "JSequence":
        """Move slot n to n + k (values unchanged)."""
        return JSequence(tuple(Slot(s.n + k, s.vector, s.log_scale) for s in self.slots),
                         self.couple, self.q, self.theta)

    # -- JSON -----------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "theta": self.theta,
            "couple": [format_space(b) for b in self.couple],
            "q": list(self.q),
            "slots": [{"n": s.n, "vector": s.vector.to_json_obj(), "log_scale": s.log_scale}
                      for s in self.slots],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj, n: int = 16) -> "JSequence":
        if not isinstance(obj, dict):
            raise ValueError("J-sequence JSON must be an object")
        for key in ("couple", "slots"):
            if key not in obj:
                raise ValueError(f"J-sequence JSON missing field '{key}'")
        couple = obj["couple"]
        if not (isinstance(couple, list) and len(couple) == 2):
            raise ValueError("J-sequence JSON field 'couple' must be a list of two spaces")
        B = tuple(parse_space(str(t), n) for t in couple)
        slots = []
        for k, s in enumerate(obj["slots"]):
            if not isinstance(s, dict) or "n" not in s or "vector" not in s:
                raise ValueError(f"J-sequence JSON field 'slots[{k}]' needs 'n' and 'vector'")
            slots.append(Slot(int(s["n"]), SeqVector.from_json_obj(s["vector"]),
                              float(s.get("log_scale", 0.0))))
        q = tuple(float(v) for v in obj.get("q", (2, 2)))
        if len(q) != 2:
            raise ValueError("J-sequence JSON field 'q' must hold two exponents")
        return cls(tuple(slots), B, q, float(obj.get("theta", 0.5)))

    @classmethod
    def from_json(cls, text: str, n: int = 16) -> "JSequence":
        return cls.from_json_obj(json.loads(text), n)


def log_ratio(v: float, r: float) -> float:
    """log(v / r), falling back to a difference of logs when the quotient underflows."""
    t = v / r
    return math.log(t) if t > 0 else math.log(v) - math.log(r)


def _lq(vals, q):
    vals = np.asarray(vals, dtype=float)
    if len(vals) == 0:
        return 0.0
    if len(vals) == 1:
        return float(vals[0])
    top = vals.max()
    if top == 0:
        return 0.0
    return float(top * ((vals / top) ** q).sum() ** (1.0 / q))


def branch_norms(s: JSequence) -> tuple[float, float]:
    """(||{b_n}||_{l_q0(B0)}, ||{e^n b_n}||_{l_q1(B1)})."""
    out = []
    for j in (0, 1):
        vals = [math.exp(j * sl.n + sl.log_scale) * norm(s.couple[j], sl.vector)
                for sl in s.slots]
        out.append(_lq(vals, s.q[j]))
    return out[0], out[1]


def j_norm(s: JSequence) -> float:
    return max(branch_norms(s))


def _check_theta(theta):
    if not (0.0 < theta < 1.0):
        raise ParameterError(f"theta must lie in (0, 1), got {theta}")


def _weighted_sum(s: JSequence, weight) -> SeqVector:
    dim = max((sl.vector.dim for sl in s.slots), default=0)
    acc = np.zeros(dim)
    for sl in sorted(s.slots, key=lambda t: t.n):
        w = weight(sl)
        if w != 0.0:
            acc += w * sl.vector.to_dense(dim)
    return SeqVector.from_dense(acc)


def delta(s: JSequence, theta: float | None = None) -> SeqVector:
    """Evaluation map: sum of e^{theta n} b_n."""
    theta = s.theta if theta is None else theta
    _check_theta(theta)
    return _weighted_sum(s, lambda sl: math.exp(theta * sl.n + sl.log_scale))


def delta_prime(s: JSequence, theta: float | None = None) -> SeqVector:
    """Derivative of the evaluation map: sum of n e^{theta (n - 1)} b_n."""
    theta = s.theta if theta is None else theta
    _check_theta(theta)
    return _weighted_sum(s, lambda sl: sl.n * math.exp(theta * (sl.n - 1) + sl.log_scale))


# ---------------------------------------------------------------------------
# selectors

@dataclass(frozen=True)
class SelectorReport:
    jseq: JSequence
    bound_ratio: float
    target: SeqVector
    theta: float
    target_norm: float
    branches: tuple[float, float]
    flags: tuple[str, ...] = field(default=())

    def to_json_obj(self) -> dict:
        return {
            "theta": self.theta,
            "bound_ratio": self.bound_ratio,
            "target_norm": self.target_norm,
            "branch0": self.branches[0],
            "branch1": self.branches[1],
            "flags": list(self.flags),
            "target": self.target.to_json_obj(),
            "jseq": self.jseq.to_json_obj(),
        }


def _report(js, a, target_norm, theta, flags=()):
    b0, b1 = branch_norms(js)
    return SelectorReport(js, max(b0, b1) / target_norm, a, theta, target_norm, (b0, b1),
                          tuple(flags))


def single_slot_selector(a: SeqVector, log_kappa_floor: int, sign: int = -1,
                         theta: float = 0.5,
                         couple: tuple[SpaceDescriptor, SpaceDescriptor] | None = None,
                         q=(2.0, 2.0)) -> SelectorReport:
    """One slot at N = sign * 2 * log_kappa_floor holding e^{-N theta} a.

    ``bound_ratio`` is the J-norm over ||a||_2.  Without a couple, (l2, l2)
    on the support of ``a`` is used.
    """
    if a.is_zero():
        raise ParameterError("selector target is the zero vector")
    if sign not in (-1, 1):
        raise ParameterError("sign must be +1 or -1")
    _check_theta(theta)
    flags = [] if theta == 0.5 else ["experimental-theta"]
    N = sign * 2 * int(log_kappa_floor)
    if couple is None:
        from .seqspace.spaces import lp
        couple = (lp(2.0, max(a.dim, 1)), lp(2.0, max(a.dim, 1)))
    js = JSequence((Slot(N, a, -N * theta),), tuple(couple), tuple(float(v) for v in q), theta)
    return _report(js, a, a.l2(), theta, flags)


def lp_exponent(p0: float, p1: float, theta: float) -> float:
    """p with 1/p = (1 - theta)/p0 + theta/p1."""
    return 1.0 / ((1.0 - theta) / p0 + theta / p1)


def lp_lambda(p0: float, p1: float, theta: float) -> float:
    p = lp_exponent(p0, p1, theta)
    return p / p0 - p / p1


def _check_lp_params(p0, p1, theta):
    for pj in (p0, p1):
        if not (1.0 <= pj < math.inf):
            raise ParameterError(f"exponents must satisfy 1 <= p < inf, got {pj}")
    _check_theta(theta)
    return ["degenerate-lambda"] if p0 == p1 else []


def lions_peetre_slots(a: SeqVector, p0: float, p1: float, theta: float) -> dict[int, list[int]]:
    """Offset n -> list of positions m of ``a`` assigned to that slot."""
    p = lp_exponent(p0, p1, theta)
    lam = lp_lambda(p0, p1, theta)
    vals = np.abs(np.array(a.values))
    nrm = _lq(vals, p)
    out: dict[int, list[int]] = {}
    for k, (m, v) in enumerate(zip(a.indices, vals)):
        n = -math.floor(lam * log_ratio(v, nrm))
        out.setdefault(n, []).append(k)
    return out


def lions_peetre_selector(a: SeqVector, p0: float, p1: float, theta: float) -> SelectorReport:
    """Slot n holds e^{-n theta} a_m for every m with n = -floor(lambda log|a_m|/||a||_p).

    The couple is (l_p0, l_p1) with pseudolattice exponents (p0, p1).
    ``bound_ratio`` is the J-norm over ||a||_p.
    """
    if a.is_zero():
        raise ParameterError("selector target is the zero vector")
    flags = _check_lp_params(p0, p1, theta)
    from .seqspace.spaces import lp
    dim = a.dim
    groups = lions_peetre_slots(a, p0, p1, theta)
    slots = []
    for n in sorted(groups):
        ks = groups[n]
        v = SeqVector(tuple(a.indices[k] for k in ks), tuple(a.values[k] for k in ks))
        slots.append(Slot(n, v, -n * theta))
    js = JSequence(tuple(slots), (lp(p0, dim), lp(p1, dim)), (float(p0), float(p1)), theta)
    p = lp_exponent(p0, p1, theta)
    return _report(js, a, _lq(np.abs(a.values), p), theta, flags)


def check_single_slot_property(couple: tuple[SpaceDescriptor, SpaceDescriptor],
                               q0: float, q1: float, trials: int = 100, seed: int = 0,
                               n: int | None = None) -> dict:
    """Max deviation of one-slot branch values from the plain weighted norms."""
    rng = np.random.default_rng(seed)
    n = n or min(b.support_bound for b in couple)
    worst = 0.0
    for _ in range(trials):
        k = int(rng.integers(1, n + 1))
        x = np.zeros(n)
        x[:k] = rng.standard_normal(k)
        v = SeqVector.from_dense(x)
        if v.is_zero():
            continue
        off = int(rng.integers(-6, 7))
        c = float(rng.normal())
        js = JSequence((Slot(off, v, c),), tuple(couple), (q0, q1))
        b0, b1 = branch_norms(js)
        e0 = math.exp(c) * norm(couple[0], v)
        e1 = math.exp(off + c) * norm(couple[1], v)
        worst = max(worst, abs(b0 - e0), abs(b1 - e1))
    return {"q0": q0, "q1": q1, "trials": trials, "seed": seed, "max_deviation": worst}
