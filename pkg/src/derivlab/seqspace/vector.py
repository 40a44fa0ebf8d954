"""Finitely supported real sequences indexed from 1."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np


@dataclass(frozen=True)
class SeqVector:
    """Sparse coefficient sequence on the positive integers.

    Stored in canonical form: strictly increasing indices, no zero values.
    """

    indices: tuple[int, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        prev = 0
        for i, v in zip(self.indices, self.values):
            if int(i) != i or i < 1:
                raise ValueError(f"index {i!r} is not a positive integer")
            if i <= prev:
                raise ValueError("indices must be strictly increasing")
            if v == 0.0:
                raise ValueError(f"stored zero at index {i}")
            if not np.isfinite(v):
                raise ValueError(f"non-finite value at index {i}")
            prev = i

    # -- constructors -------------------------------------------------
    @classmethod
    def from_dense(cls, arr, offset: int = 1) -> "SeqVector":
        """Build from a dense array whose entry 0 sits at index ``offset``."""
        arr = np.asarray(arr, dtype=float).ravel()
        nz = np.flatnonzero(arr)
        return cls(tuple(int(k) + offset for k in nz), tuple(float(arr[k]) for k in nz))

    @classmethod
    def from_mapping(cls, entries: Mapping[int, float]) -> "SeqVector":
        items = sorted((int(k), float(v)) for k, v in entries.items() if v != 0.0)
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @classmethod
    def basis(cls, j: int, scale: float = 1.0) -> "SeqVector":
        return cls((int(j),), (float(scale),)) if scale != 0.0 else cls()

    @classmethod
    def ones(cls, support: Iterable[int], scale: float = 1.0) -> "SeqVector":
        return cls.from_mapping({j: scale for j in support})

    # -- views ----------------------------------------------------------
    @property
    def dim(self) -> int:
        """Largest stored index (0 for the zero vector)."""
        return self.indices[-1] if self.indices else 0

    @property
    def support(self) -> tuple[int, ...]:
        return self.indices

    def is_zero(self) -> bool:
        return not self.indices

    def __len__(self):
        return len(self.indices)

    def __getitem__(self, j: int) -> float:
        try:
            return self.values[self.indices.index(j)]
        except ValueError:
            return 0.0

    def to_dense(self, n: int | None = None) -> np.ndarray:
        """Dense array of length ``n``; entry ``k`` holds index ``k + 1``."""
        n = self.dim if n is None else n
        if self.dim > n:
            raise ValueError(f"support reaches index {self.dim} > {n}")
        out = np.zeros(n)
        if self.indices:
            out[np.array(self.indices) - 1] = self.values
        return out

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.indices, self.values))

    # -- arithmetic -----------------------------------------------------
    def _combine(self, other: "SeqVector", op) -> "SeqVector":
        n = max(self.dim, other.dim)
        return SeqVector.from_dense(op(self.to_dense(n), other.to_dense(n)))

    def __add__(self, other: "SeqVector") -> "SeqVector":
        return self._combine(other, np.add)

    def __sub__(self, other: "SeqVector") -> "SeqVector":
        return self._combine(other, np.subtract)

    def __neg__(self) -> "SeqVector":
        return SeqVector(self.indices, tuple(-v for v in self.values))

    def __mul__(self, t) -> "SeqVector":
        if isinstance(t, SeqVector):
            # coordinatewise product (multiplier action of l_infinity)
            return self._combine(t, np.multiply)
        t = float(t)
        if t == 0.0:
            return SeqVector()
        return SeqVector.from_dense(self.to_dense() * t)

    __rmul__ = __mul__

    def abs(self) -> "SeqVector":
        return SeqVector(self.indices, tuple(abs(v) for v in self.values))

    def l2(self) -> float:
        # hypot scales internally, so tiny or huge entries do not under/overflow
        return math.hypot(*self.values)

    # -- serialization ----------------------------------------------------
    def to_json_obj(self) -> dict:
        return {"indices": list(self.indices), "values": list(self.values)}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj) -> "SeqVector":
        if not isinstance(obj, dict):
            raise ValueError("vector JSON must be an object")
        for key in ("indices", "values"):
            if key not in obj:
                raise ValueError(f"vector JSON missing field '{key}'")
            if not isinstance(obj[key], list):
                raise ValueError(f"vector JSON field '{key}' must be a list")
        idx, vals = obj["indices"], obj["values"]
        if any(not isinstance(i, int) or isinstance(i, bool) for i in idx):
            raise ValueError("vector JSON field 'indices' must hold integers")
        if any(not isinstance(v, (int, float)) or isinstance(v, bool) for v in vals):
            raise ValueError("vector JSON field 'values' must hold numbers")
        try:
            return cls(tuple(idx), tuple(float(v) for v in vals))
        except ValueError as exc:
            raise ValueError(f"vector JSON field 'indices'/'values': {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SeqVector":
        return cls.from_json_obj(json.loads(text))
