"""Space descriptors and their norm engines.

Every built-in space is 1-unconditional on the unit vector basis, so norms
and dual norms only see ``|x|``.  Dense arrays passed around internally hold
index ``j`` at position ``j - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParameterError
from .tsirelson import MATERIALIZE_LIMIT, norming_functionals, tsirelson2_norms, tsirelson_norms
from .vector import SeqVector

DEFAULT_SUPPORT_BOUND = 16

PRIMAL_KINDS = ("lp", "c0", "T", "T2", "wl2")


@dataclass(frozen=True)
class SpaceDescriptor:
    """A named finite-dimensional sequence space on [1, support_bound]."""

    kind: str
    p: float | None = None
    weights: tuple[float, ...] | None = field(default=None, repr=False)
    inner: "SpaceDescriptor | None" = None
    support_bound: int = DEFAULT_SUPPORT_BOUND
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.support_bound < 1:
            raise ParameterError("support_bound must be positive")
        if self.kind == "lp":
            if self.p is None or not (1.0 <= self.p < math.inf):
                raise ParameterError(f"lp requires 1 <= p < inf, got p={self.p}")
        elif self.kind == "wl2":
            w = self.weights
            if not w:
                raise ParameterError("wl2 requires a weight sequence")
            if any(not (wi >= 1.0) or not math.isfinite(wi) for wi in w):
                raise ParameterError("wl2 weights must be finite and >= 1")
            if len(w) < self.support_bound:
                raise ParameterError(
                    f"wl2 has {len(w)} weights but support_bound={self.support_bound}")
        elif self.kind == "dual":
            if self.inner is None:
                raise ParameterError("dual requires an inner space")
        elif self.kind not in ("c0", "T", "T2"):
            raise ParameterError(f"unknown space kind {self.kind!r}")

    @property
    def is_dual(self) -> bool:
        return self.kind == "dual"

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "lp":
            return f"lp:{self.p:g}"
        if self.kind == "wl2":
            return "wl2"
        if self.kind == "dual":
            return f"dual:{self.inner.name}"
        return self.kind

    def with_bound(self, n: int) -> "SpaceDescriptor":
        inner = self.inner.with_bound(n) if self.inner is not None else None
        return SpaceDescriptor(self.kind, self.p, self.weights, inner, n, self.label)

    def w(self, n: int) -> np.ndarray:
        return np.asarray(self.weights[:n], dtype=float)


def lp(p: float, n: int = DEFAULT_SUPPORT_BOUND) -> SpaceDescriptor:
    return SpaceDescriptor("lp", p=float(p), support_bound=n)


def c0(n: int = DEFAULT_SUPPORT_BOUND) -> SpaceDescriptor:
    return SpaceDescriptor("c0", support_bound=n)


def tsirelson(n: int = DEFAULT_SUPPORT_BOUND) -> SpaceDescriptor:
    return SpaceDescriptor("T", support_bound=n)


def tsirelson2(n: int = DEFAULT_SUPPORT_BOUND) -> SpaceDescriptor:
    return SpaceDescriptor("T2", support_bound=n)


def weighted_l2(weights, n: int | None = None, label: str | None = None) -> SpaceDescriptor:
    """||x|| = (sum (x_j / w_j)^2)^(1/2)."""
    w = tuple(float(v) for v in weights)
    return SpaceDescriptor("wl2", weights=w, support_bound=len(w) if n is None else n,
                           label=label)


def dual_of(space: SpaceDescriptor) -> SpaceDescriptor:
    if space.is_dual:
        return space.inner  # finite-dimensional reflexivity
    return SpaceDescriptor("dual", inner=space, support_bound=space.support_bound)


def parse_space(text: str, n: int = DEFAULT_SUPPORT_BOUND) -> SpaceDescriptor:
    """Parse ``lp:2``, ``c0``, ``l1``, ``l2``, ``T``, ``T2``, ``wl2:<path>``,
    ``dual:<inner>``."""
    text = text.strip()
    if text.startswith("dual:"):
        return dual_of(parse_space(text[5:], n))
    if text.startswith("lp:"):
        try:
            p = float(text[3:])
        except ValueError:
            raise ParameterError(f"bad exponent in {text!r}") from None
        return lp(p, n)
    if text in ("l1", "l2"):
        return lp(float(text[1]), n)
    if text == "c0":
        return c0(n)
    if text == "T":
        return tsirelson(n)
    if text == "T2":
        return tsirelson2(n)
    if text.startswith("wl2:"):
        path = Path(text[4:])
        if not path.exists():
            raise ParameterError(f"weight file {path} does not exist")
        w = np.loadtxt(path, delimiter=",", ndmin=1).ravel()
        return weighted_l2(w, n=min(n, len(w)), label=text)
    raise ParameterError(f"unrecognized space {text!r}")


def format_space(space: SpaceDescriptor) -> str:
    return space.name


# ---------------------------------------------------------------------------
# dense evaluation

def check_support(space: SpaceDescriptor, v: SeqVector) -> None:
    if v.dim > space.support_bound:
        raise ParameterError(
            f"vector support reaches {v.dim} beyond support_bound {space.support_bound}")


def norms_dense(space: SpaceDescriptor, X) -> np.ndarray:
    """Norms of the rows of ``X`` (shape (m, n)); exact for primal kinds."""
    X = np.abs(np.atleast_2d(np.asarray(X, dtype=float)))
    n = X.shape[1]
    k = space.kind
    if k == "lp":
        p = space.p
        if p == 1.0:
            return X.sum(axis=1)
        if p == 2.0:
            return np.sqrt((X * X).sum(axis=1))
        scale = X.max(axis=1, initial=0.0)
        safe = np.where(scale > 0, scale, 1.0)
        return scale * ((X / safe[:, None]) ** p).sum(axis=1) ** (1.0 / p)
    if k == "c0":
        return X.max(axis=1, initial=0.0)
    if k == "wl2":
        return np.sqrt(((X / space.w(n)) ** 2).sum(axis=1))
    if k == "T":
        return tsirelson_norms(X)
    if k == "T2":
        return tsirelson2_norms(X)
    from .dual import dual_norm_dense
    return np.array([dual_norm_dense(space.inner, x).upper for x in X])


def norm_dense(space: SpaceDescriptor, x) -> float:
    return float(norms_dense(space, np.asarray(x, dtype=float)[None, :])[0])


def norm(space: SpaceDescriptor, v: SeqVector) -> float:
    """Norm of ``v`` in ``space``.

    Dual kinds report the upper end of the dual solver's certified interval.
    """
    check_support(space, v)
    if v.is_zero():
        return 0.0
    return norm_dense(space, v.to_dense())


def subgradient(space: SpaceDescriptor, x) -> np.ndarray:
    """A norming direction ``g`` at ``x``: <g, x> = ||x|| and ||g||_* <= 1."""
    x = np.asarray(x, dtype=float)
    s = np.sign(x)
    a = np.abs(x)
    k = space.kind
    if not a.any():
        return np.zeros_like(x)
    if k == "lp":
        p = space.p
        if p == 1.0:
            return s
        nrm = norm_dense(space, a)
        return s * (a / nrm) ** (p - 1.0)
    if k == "c0":
        g = np.zeros_like(x)
        j = int(np.argmax(a))
        g[j] = s[j]
        return g
    if k == "wl2":
        w2 = space.w(len(x)) ** 2
        return x / w2 / norm_dense(space, a)
    if k == "T":
        from .tsirelson import tsirelson_argmax
        _, f = tsirelson_argmax(a)
        return s * f
    if k == "T2":
        from .tsirelson import tsirelson_argmax
        z = a / a.max()
        val, f = tsirelson_argmax(z * z)
        return s * f * z / math.sqrt(val)
    from .dual import dual_norm_dense
    return s * dual_norm_dense(space.inner, a).maximizer


def linear_maximizer(space: SpaceDescriptor, d) -> np.ndarray:
    """argmax of <d, x> over the unit ball of ``space``."""
    d = np.asarray(d, dtype=float)
    if space.is_dual:
        return subgradient(space.inner, d)
    from .dual import dual_norm_dense
    return np.sign(d) * dual_norm_dense(space, np.abs(d)).maximizer


def subgradients_dense(space: SpaceDescriptor, X) -> tuple[np.ndarray, np.ndarray]:
    """Norms and norming directions of the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    k = space.kind
    if k in ("T", "T2") and 1 <= n <= MATERIALIZE_LIMIT:
        Fn = norming_functionals(n).functionals
        A = np.abs(X)
        if k == "T2":
            top = A.max(axis=1, keepdims=True)
            A = A / np.where(top > 0, top, 1.0)
        Y = A * A if k == "T2" else A
        V = Y @ Fn.T
        arg = V.argmax(axis=1)
        val = V[np.arange(m), arg]
        if k == "T":
            return val, np.sign(X) * Fn[arg]
        nr = np.sqrt(val)
        safe = np.where(nr > 0, nr, 1.0)
        return top[:, 0] * nr, np.sign(X) * Fn[arg] * A / safe[:, None]
    G = np.array([subgradient(space, x) for x in X])
    return norms_dense(space, X), G
