"""Derived space: pairs (x, y) under ||x - Omega(y)||_2 + ||y||_2."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .catalog import DerivationMap
from .errors import ParameterError
from .seeding import spawn_generators
from .seqspace.vector import SeqVector


@dataclass(frozen=True)
class DerivedVector:
    x: SeqVector
    y: SeqVector
    omega: DerivationMap

    def __add__(self, other: "DerivedVector") -> "DerivedVector":
        return DerivedVector(self.x + other.x, self.y + other.y, self.omega)

    def __mul__(self, t) -> "DerivedVector":
        return DerivedVector(self.x * t, self.y * t, self.omega)

    __rmul__ = __mul__

    def to_json_obj(self) -> dict:
        return {"x": self.x.to_json_obj(), "y": self.y.to_json_obj(),
                "omega": self.omega.to_json_obj()}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj) -> "DerivedVector":
        if not isinstance(obj, dict):
            raise ValueError("derived vector JSON must be an object")
        for key in ("x", "y", "omega"):
            if key not in obj:
                raise ValueError(f"derived vector JSON missing field '{key}'")
        return cls(SeqVector.from_json_obj(obj["x"]), SeqVector.from_json_obj(obj["y"]),
                   DerivationMap.from_json_obj(obj["omega"]))

    @classmethod
    def from_json(cls, text: str) -> "DerivedVector":
        return cls.from_json_obj(json.loads(text))


def derived_quasinorm(v: DerivedVector) -> float:
    return (v.x - v.omega(v.y)).l2() + v.y.l2()


def inclusion(x: SeqVector, omega: DerivationMap) -> DerivedVector:
    return DerivedVector(x, SeqVector(), omega)


def quotient(v: DerivedVector) -> SeqVector:
    return v.y


def basis_vector(k: int, omega: DerivationMap) -> DerivedVector:
    """v_{2j-1} = (e_j, 0), v_{2j} = (0, e_j)."""
    if k < 1:
        raise ParameterError("basis index starts at 1")
    j = (k + 1) // 2
    e = SeqVector.basis(j)
    if k % 2:
        return DerivedVector(e, SeqVector(), omega)
    return DerivedVector(SeqVector(), e, omega)


def _random_pair(rng, n, omega):
    # half the samples sit near the twisted diagonal x = Omega(y), where the
    # quasi-norm is small and the triangle defect shows up
    y = SeqVector.from_dense(rng.standard_normal(n) * np.exp(rng.standard_normal(n)))
    if rng.random() < 0.5:
        x = omega(y) + SeqVector.from_dense(1e-3 * rng.standard_normal(n))
    else:
        x = SeqVector.from_dense(rng.standard_normal(n))
    return DerivedVector(x, y, omega)


def quasi_triangle_constant(omega: DerivationMap, n: int, trials: int, seed: int) -> dict:
    """max ||u + v|| / (||u|| + ||v||) over random pairs."""
    best = 0.0
    for rng, count in spawn_generators(seed, trials):
        for _ in range(count):
            u = _random_pair(rng, n, omega)
            v = _random_pair(rng, n, omega)
            den = derived_quasinorm(u) + derived_quasinorm(v)
            if den > 0:
                best = max(best, derived_quasinorm(u + v) / den)
    return {"map": omega.kind, "n": n, "trials": trials, "seed": seed, "constant": best}


def unconditionality_estimate(omega: DerivationMap, n: int, trials: int, seed: int) -> dict:
    """max over signs and coefficients of ||sum eps c_j v_2j|| / ||sum c_j v_2j||.

    Exhaustive over sign patterns for n <= 10, sampled beyond.
    """
    best = 0.0
    for rng, count in spawn_generators(seed, trials):
        for _ in range(count):
            c = rng.standard_normal(n)
            base = derived_quasinorm(DerivedVector(SeqVector(), SeqVector.from_dense(c), omega))
            if n <= 10:
                signs = itertools.product((-1.0, 1.0), repeat=n)
            else:
                signs = (rng.choice((-1.0, 1.0), n) for _ in range(64))
            for eps in signs:
                y = SeqVector.from_dense(np.asarray(eps) * c)
                best = max(best, derived_quasinorm(DerivedVector(SeqVector(), y, omega)) / base)
    return {"map": omega.kind, "n": n, "trials": trials, "seed": seed,
            "ratio": best, "asserted_exact": omega.sign_equivariant}
