"""Tsirelson norm on finite supports.

The norm is the Figiel-Johnson one,

    ||x|| = max(||x||_inf, 1/2 sup sum_i ||E_i x||),

the sup running over successive sets k <= E_1 < ... < E_k.  For nonnegative
vectors, restriction norms are monotone in the set, so the sets can be taken
to be consecutive intervals tiling [s, b] with s >= k.  Tables are indexed
1-based: ``tab[a, b]`` holds the norm of ``x`` restricted to ``[a, b]``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ..errors import SizeError

DEFAULT_NORMING_CAP = 12


class NormingSetTooLarge(SizeError):
    """Raised when materializing the norming set would exceed the cap."""


def _table(X: np.ndarray) -> np.ndarray:
    """Interval-norm table for a batch of nonnegative rows ``X`` (m, n).

    Returns array of shape (n + 2, n + 2, m).  Left endpoints are processed in
    decreasing order and right endpoints in increasing order, so every value a
    cell depends on is final when the cell is filled; one sweep is the fixed
    point of the recursion.
    """
    m, n = X.shape
    tab = np.zeros((n + 2, n + 2, m))
    for a in range(n, 0, -1):
        # best[j, u]: best sum over tilings of [a, u] by exactly j intervals
        jmax = max(1, min(a, n - a + 1))
        best = np.full((jmax + 1, n + 2, m), -np.inf)
        for b in range(a, n + 1):
            if b == a:
                val = X[:, a - 1].copy()
            else:
                val = np.maximum(tab[a + 1, b], tab[a, b - 1])
                for j in range(2, min(a, b - a + 1) + 1):
                    # last interval is [v + 1, b], v ranges over a+j-2 .. b-1
                    v = np.arange(a + j - 2, b)
                    cand = best[j - 1, v] + tab[v + 1, b]
                    best[j, b] = cand.max(axis=0)
                    val = np.maximum(val, 0.5 * best[j, b])
            tab[a, b] = val
            best[1, b] = val
    return tab


def tsirelson_norms(X) -> np.ndarray:
    """Tsirelson norms of each row of ``X`` (absolute values are taken)."""
    X = np.abs(np.atleast_2d(np.asarray(X, dtype=float)))
    m, n = X.shape
    if n == 0:
        return np.zeros(m)
    return _table(X)[1, n].copy()


def tsirelson_norm(x) -> float:
    return float(tsirelson_norms(np.asarray(x, dtype=float)[None, :])[0])


def norming_functional(x) -> tuple[float, np.ndarray]:
    """Return ``(norm, f)`` with ``f`` a norming functional: <f, |x|> = norm.

    ``f`` is a nonnegative dyadic combination of coordinate functionals built
    by retracing the choices of the interval recursion.
    """
    x = np.abs(np.asarray(x, dtype=float))
    n = len(x)
    if n == 0:
        return 0.0, np.zeros(0)
    tab = _table(x[None, :])[:, :, 0]
    f = np.zeros(n)

    def tiling(a, b):
        # recompute the exact-j tilings of [a, b] with argmax pointers
        best = {1: {u: tab[a, u] for u in range(a, b + 1)}}
        arg = {}
        top, top_key = -np.inf, None
        for j in range(2, min(a, b - a + 1) + 1):
            best[j], arg[j] = {}, {}
            for u in range(a + j - 1, b + 1):
                vs = range(a + j - 2, u)
                cands = [best[j - 1][v] + tab[v + 1, u] for v in vs]
                k = int(np.argmax(cands))
                best[j][u], arg[j][u] = cands[k], vs[k]
            if 0.5 * best[j][b] > top:
                top, top_key = 0.5 * best[j][b], j
        pieces = []
        j, u = top_key, b
        while j > 1:
            v = arg[j][u]
            pieces.append((v + 1, u))
            j, u = j - 1, v
        pieces.append((a, u))
        return top, pieces

    stack = [(1, n, 1.0)]
    while stack:
        a, b, w = stack.pop()
        val = tab[a, b]
        if a == b:
            f[a - 1] += w
            continue
        if val == tab[a + 1, b]:
            stack.append((a + 1, b, w))
            continue
        if val == tab[a, b - 1]:
            stack.append((a, b - 1, w))
            continue
        top, pieces = tiling(a, b)
        if top != val:  # pragma: no cover - table and retrace disagree
            raise RuntimeError("traceback failed to reproduce the table value")
        stack.extend((s, t, 0.5 * w) for s, t in pieces)
    return float(tab[1, n]), f


def tsirelson2_norms(X) -> np.ndarray:
    """2-convexified norms: sqrt of the Tsirelson norm of squared rows."""
    X = np.abs(np.atleast_2d(np.asarray(X, dtype=float)))
    if X.shape[1] == 0:
        return np.zeros(X.shape[0])
    # scale each row by its largest entry so squaring cannot underflow or overflow
    top = X.max(axis=1)
    Z = X / np.where(top > 0, top, 1.0)[:, None]
    return top * np.sqrt(tsirelson_norms(Z * Z))


# ---------------------------------------------------------------------------
# Norming functionals

@dataclass(frozen=True)
class NormingFunctionalSet:
    """Pruned norming set for the Tsirelson norm on [1, n].

    ``functionals`` has one nonnegative row per member.  The induced norm of a
    vector is ``max(functionals @ |x|)``.
    """

    n: int
    functionals: np.ndarray = field(repr=False)
    generation_depth: int

    def __len__(self):
        return len(self.functionals)

    def induced_norms(self, X) -> np.ndarray:
        X = np.abs(np.atleast_2d(np.asarray(X, dtype=float)))
        return (X @ self.functionals.T).max(axis=1)

    def argmax(self, x) -> tuple[float, np.ndarray]:
        vals = self.functionals @ np.abs(np.asarray(x, dtype=float))
        k = int(np.argmax(vals))
        return float(vals[k]), self.functionals[k]


def _prune(F: np.ndarray) -> np.ndarray:
    """Drop rows dominated pointwise by another row (duplicates kept once)."""
    if len(F) <= 1:
        return F
    F = np.unique(F, axis=0)
    F = F[np.argsort(-F.sum(axis=1), kind="stable")]
    kept = np.zeros((0, F.shape[1]))
    block = 256
    for start in range(0, len(F), block):
        blk = F[start:start + block]
        if len(kept):
            dom = np.zeros(len(blk), dtype=bool)
            for ks in range(0, len(kept), 2048):
                kk = kept[ks:ks + 2048]
                dom |= np.all(kk[None, :, :] >= blk[:, None, :], axis=2).any(axis=1)
            blk = blk[~dom]
        if len(blk) > 1:
            ge = np.all(blk[None, :, :] >= blk[:, None, :], axis=2)
            # rows are sum-sorted and distinct, so a dominator precedes its victim
            d = np.tril(ge, -1).any(axis=1)
            blk = blk[~d]
        kept = np.vstack([kept, blk])
    return kept


# observed sizes of the pruned set; used to refuse hopeless builds early
_KNOWN_SIZES = {1: 1, 2: 2, 3: 4, 4: 9, 5: 15, 6: 39, 7: 83, 8: 203,
                9: 504, 10: 1277, 11: 3155, 12: 7921}


def estimated_cardinality(n: int) -> int:
    if n in _KNOWN_SIZES:
        return _KNOWN_SIZES[n]
    # successive sizes grow by roughly 2.5x
    return int(_KNOWN_SIZES[12] * 2.5 ** (n - 12))


_memo: dict[int, NormingFunctionalSet] = {}
_memo_lock = threading.Lock()


def norming_functionals(n: int, cap: int = DEFAULT_NORMING_CAP) -> NormingFunctionalSet:
    """Build (or fetch) the pruned norming set on [1, n].

    Members supported in an interval I are generated from the members of its
    subintervals: a tiling of [s, t] by j <= s intervals contributes half the
    sum of one member from each tile.  Pruning by domination is safe inside a
    fixed interval because replacing a tile member by a dominating member of
    the same tile keeps the family admissible.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap:
        raise NormingSetTooLarge(
            f"norming set for n={n} exceeds cap {cap}: "
            f"estimated cardinality {estimated_cardinality(n)}")
    with _memo_lock:
        hit = _memo.get(n)
    if hit is not None:
        return hit

    P: dict[tuple[int, int], np.ndarray] = {}
    depth = {}
    for length in range(1, n + 1):
        for s in range(1, n - length + 2):
            t = s + length - 1
            e = np.zeros((1, n))
            e[0, s - 1] = 1.0
            parts = [e]
            d = 0
            if length > 1:
                parts += [P[s + 1, t], P[s, t - 1]]
                d = max(depth[s + 1, t], depth[s, t - 1])
            if length > 1 and s >= 2:
                # Q[u]: pruned sums over tilings of [s, u] with j pieces
                Q = {u: P[s, u] for u in range(s, t)}
                for j in range(2, s + 1):
                    Qn = {}
                    for u in range(s + j - 1, t + 1):
                        cands = [
                            (Q[v][:, None, :] + P[v + 1, u][None, :, :]).reshape(-1, n)
                            for v in range(s + j - 2, u) if v in Q
                        ]
                        if cands:
                            Qn[u] = _prune(np.vstack(cands))
                    if t in Qn:
                        parts.append(0.5 * Qn[t])
                        d = max(d, 1 + max(depth[a, b] for a in range(s, t + 1)
                                           for b in range(a, t + 1) if (a, b) != (s, t)))
                    Q = {u: q for u, q in Qn.items() if u < t}
                    if not Q:
                        break
            P[s, t] = _prune(np.vstack(parts))
            depth[s, t] = d
    out = NormingFunctionalSet(n, P[1, n], depth[1, n])
    with _memo_lock:
        _memo.setdefault(n, out)
    return _memo[n]


MATERIALIZE_LIMIT = 10


def tsirelson_argmax(x) -> tuple[float, np.ndarray]:
    """Norm and norming functional, from the stored set when it is small."""
    x = np.abs(np.asarray(x, dtype=float))
    if 1 <= len(x) <= MATERIALIZE_LIMIT:
        return norming_functionals(len(x)).argmax(x)
    return norming_functional(x)
