"""Dual norms on finite supports, returned as certified intervals.

For the Tsirelson space the dual norm is a linear program over the norming
set.  For its 2-convexification,

    ||y||_* = max <|y|, x>  s.t.  sum_j f_j x_j^2 <= 1  for every norming f,

a maximization of a linear function over an intersection of diagonal
ellipsoids.  Any convex combination g of the constraints gives one ellipsoid
containing the feasible set, whose support value sqrt(sum y_j^2 / g_j) is an
upper bound; the maximizer of that ellipsoid, scaled back into the feasible
set, gives a lower bound.  The weights are driven to the optimum by a fully
corrective Frank-Wolfe loop whose linear oracle is the Tsirelson argmax.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from .spaces import SpaceDescriptor, check_support
from .tsirelson import (
    MATERIALIZE_LIMIT,
    norming_functionals,
    tsirelson_argmax,
    tsirelson_norm,
)
from .vector import SeqVector

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
MAX_ROUNDS = 200


@dataclass(frozen=True)
class DualNormResult:
    lower: float
    upper: float
    certified: bool
    maximizer: np.ndarray = field(repr=False, compare=False)
    rounds: int = 0

    @property
    def value(self) -> float:
        return self.upper

    @property
    def rel_gap(self) -> float:
        return 0.0 if self.upper == 0 else (self.upper - self.lower) / self.upper


def _exact(value: float, x: np.ndarray) -> DualNormResult:
    return DualNormResult(value, value, True, x)


def _dual_lp(y: np.ndarray, space: SpaceDescriptor) -> DualNormResult:
    n = len(y)
    if space.p == 1.0:
        j = int(np.argmax(y))
        x = np.zeros(n)
        x[j] = 1.0
        return _exact(float(y[j]), x)
    q = space.p / (space.p - 1.0)
    scale = y.max()
    val = scale * float(((y / scale) ** q).sum() ** (1.0 / q))
    return _exact(val, (y / val) ** (q - 1.0))


def _dual_tsirelson(y: np.ndarray, tol: float) -> DualNormResult:
    n = len(y)
    S = np.flatnonzero(y)
    if n <= MATERIALIZE_LIMIT:
        A = norming_functionals(n).functionals[:, S]
        rows = [A[A.any(axis=1)]]
        full = True
    else:
        rows = [np.eye(len(S))]
        full = False
    x = np.zeros(n)
    for rnd in range(1, MAX_ROUNDS + 1):
        A = np.vstack(rows)
        res = linprog(-y[S], A_ub=A, b_ub=np.ones(len(A)), bounds=(0, None), method="highs")
        if res.status != 0:  # pragma: no cover
            raise RuntimeError(f"LP failed: {res.message}")
        x[:] = 0.0
        x[S] = np.maximum(res.x, 0.0)
        upper = float(-res.fun)
        c, f = tsirelson_argmax(x)
        if full or c <= 1.0 + 1e-12:
            break
        rows.append(f[S][None, :])
    c = tsirelson_norm(x)
    lower = float(y @ x) / max(c, 1.0)
    upper = max(upper, lower)
    x = x / max(c, 1.0)
    return DualNormResult(lower, upper, (upper - lower) <= tol * upper, x, rnd)


def _restricted_weights(A: np.ndarray, y2: np.ndarray, mu0: np.ndarray) -> np.ndarray:
    """Minimize sum y2 / (mu @ A) over the simplex."""
    def phi(mu):
        g = mu @ A
        with np.errstate(divide="ignore"):
            return float((y2 / g).sum())

    def grad(mu):
        g = mu @ A
        with np.errstate(divide="ignore", invalid="ignore"):
            return -(A @ (y2 / (g * g)))

    if len(mu0) == 1:
        return np.ones(1)
    res = minimize(
        phi, mu0, jac=grad, method="SLSQP",
        bounds=[(0.0, 1.0)] * len(mu0),
        constraints=[{"type": "eq", "fun": lambda m: m.sum() - 1.0,
                      "jac": lambda m: np.ones_like(m)}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    mu = np.clip(res.x, 0.0, None)
    mu /= mu.sum()
    g = mu @ A
    if not np.all(g > 0) or phi(mu) > phi(mu0):
        return mu0
    return mu


def _dual_tsirelson2(y: np.ndarray, tol: float) -> DualNormResult:
    n = len(y)
    # coordinates whose squares underflow are left out; since |x_j| <= 1 on
    # the unit ball they add at most their sum, which widens the upper bound
    S = np.flatnonzero(y * y > 0)
    dropped = math.fsum(y) - math.fsum(y[S])
    yS = y[S]
    y2 = yS * yS
    # coordinate constraints keep every g_j positive on the support
    A = np.eye(len(S))
    mu = np.full(len(S), 1.0 / len(S))
    best_lower, best_x = 0.0, np.zeros(n)
    upper = math.inf
    certified = False
    rnd = 0
    for rnd in range(1, MAX_ROUNDS + 1):
        mu = _restricted_weights(A, y2, mu)
        g = mu @ A
        phi = float((y2 / g).sum())
        upper = min(upper, math.sqrt(phi) + dropped)
        x = np.zeros(n)
        x[S] = (yS / g) / math.sqrt(phi)
        c, f = tsirelson_argmax(x * x)
        lower = float(yS @ x[S]) / math.sqrt(max(c, 1.0))
        if lower > best_lower:
            best_lower, best_x = lower, x / math.sqrt(max(c, 1.0))
        if upper - best_lower <= tol * upper:
            certified = True
            break
        row = f[S]
        if np.any(np.all(np.isclose(A, row[None, :], rtol=0, atol=1e-15), axis=1)):
            # oracle returned a member already weighted; the restricted solve stalled
            log.debug("T2 dual: repeated column at round %d", rnd)
            mu = 0.5 * mu + 0.5 * np.full(len(mu), 1.0 / len(mu))
            continue
        A = np.vstack([A, row])
        mu = np.append(0.9 * mu, 0.1)
        keep = (mu > 1e-14) | (np.arange(len(mu)) < len(S))
        A, mu = A[keep], mu[keep] / mu[keep].sum()
    return DualNormResult(best_lower, max(upper, best_lower), certified, best_x, rnd)


_cache: dict[tuple, DualNormResult] = {}
_cache_lock = threading.Lock()


def dual_norm_dense(space: SpaceDescriptor, y, tol: float = DEFAULT_TOL) -> DualNormResult:
    """Dual norm of the dense vector ``y`` w.r.t. the primal ``space``.

    The maximizer is returned for ``|y|``; it is nonnegative with norm <= 1.
    """
    y = np.abs(np.asarray(y, dtype=float))
    n = len(y)
    if not y.any():
        return _exact(0.0, np.zeros(n))
    k = space.kind
    if k == "dual":
        # bidual: the norm of the inner space, maximizer from its norming direction
        from .spaces import norm_dense, subgradient
        val = norm_dense(space.inner, y)
        return _exact(val, np.abs(subgradient(space.inner, y)))
    if k == "lp":
        return _dual_lp(y, space)
    if k == "c0":
        return _exact(float(y.sum()), (y > 0).astype(float))
    if k == "wl2":
        w = space.w(n)
        val = math.hypot(*(w * y))
        return _exact(val, w * w * y / val)
    # the solvers work on y / max(y); the dual norm is homogeneous and the
    # maximizer does not depend on the scale
    top = float(y.max())
    y = y / top
    key = (k, tol, y.tobytes())
    with _cache_lock:
        out = _cache.get(key)
    if out is None:
        out = _dual_tsirelson(y, tol) if k == "T" else _dual_tsirelson2(y, tol)
        if not out.certified:
            log.warning("%s dual norm not certified: [%.9g, %.9g]", k, out.lower, out.upper)
        with _cache_lock:
            _cache.setdefault(key, out)
    if top == 1.0:
        return out
    return DualNormResult(out.lower * top, out.upper * top, out.certified, out.maximizer,
                          out.rounds)


def dual_norm(space: SpaceDescriptor, y: SeqVector, tol: float = DEFAULT_TOL) -> DualNormResult:
    """sup{<x, y> : ||x||_space <= 1} as a certified interval."""
    check_support(space, y)
    return dual_norm_dense(space, y.to_dense(max(y.dim, 1)), tol)
