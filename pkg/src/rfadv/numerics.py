"""Small deterministic numeric kernels: seed fan-out, bisection, leading
singular vector.

Everything here is pure and seed-stable so attack crafting and sweeps can be
replayed bit-for-bit.
"""
from __future__ import annotations

import hashlib
import math
from typing import Callable

import numpy as np

from .errors import BracketError, ConfigurationError

__all__ = [
    "derive_rng",
    "bisect",
    "bisect_predicate",
    "first_right_singular",
    "eval_bound",
]


def _key_to_int(key) -> int:
    """Map an arbitrary key (str, int, tuple) to a stable 64-bit int."""
    data = repr(key).encode("utf-8")
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "little")


def derive_rng(seed: int, *path) -> np.random.Generator:
    """Derive an independent Generator from a root seed and a key path.

    The same (seed, path) always yields the same stream, and distinct paths
    yield independent streams, so trials can run in any order or in parallel
    without changing results.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key_to_int(k) for k in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def eval_bound(lo: float, hi: float, tol: float) -> int:
    """Number of midpoint evaluations bisection needs for a bracket/tolerance."""
    if hi - lo <= tol:
        return 0
    return int(math.ceil(math.log2((hi - lo) / tol)))


def bisect_predicate(pred: Callable[[float], bool], lo: float, hi: float,
                     tol: float) -> tuple[float, float, int]:
    """Shrink [lo, hi] until hi - lo <= tol, keeping pred(lo)=False, pred(hi)=True.

    The endpoints themselves are never evaluated; the caller vouches for them.
    Returns (lo, hi, n_evals) where n_evals is the number of pred calls, at
    most ceil(log2((hi - lo)/tol)).
    """
    if not (tol > 0):
        raise ConfigurationError(f"bisection tolerance must be positive, got {tol}")
    if hi < lo:
        raise ConfigurationError(f"bad bracket [{lo}, {hi}]")
    n = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket collapsed to float resolution
        n += 1
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi, n


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of a monotone f by bisection; returns a point within tol of the crossing.

    f(lo) and f(hi) are evaluated once each to validate the bracket (raises
    BracketError if they do not straddle zero); after that at most
    ceil(log2((hi - lo)/tol)) midpoint evaluations are spent.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"f({lo})={flo} and f({hi})={fhi} do not bracket a root")
    rising = fhi > 0
    # pred: "f at x is on the same side as f(hi)"
    pred = (lambda x: f(x) >= 0) if rising else (lambda x: f(x) <= 0)
    a, b, _ = bisect_predicate(pred, lo, hi, tol)
    return 0.5 * (a + b)


def first_right_singular(m: np.ndarray, tol: float = 1e-12,
                         max_iter: int = 10000) -> tuple[float, np.ndarray]:
    """Leading singular value and right singular vector of a real matrix.

    Power iteration on the Gram matrix m.T @ m with a deterministic start
    vector (all-ones, then basis vectors if the start is degenerate). A full
    SVD is avoided on purpose: only the rank-1 component is needed and the
    iteration keeps the dependency surface small.

    Returns (sigma1, v1) with ||v1|| = 1. The sign of v1 is fixed so that its
    largest-magnitude component is positive (ties keep the earlier index).
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ConfigurationError(f"need a nonempty 2-d matrix, got shape {m.shape}")
    rows, cols = m.shape
    gram = m.T @ m  # cols x cols

    starts = [np.ones(cols) / math.sqrt(cols)]

    def basis(i):
        e = np.zeros(cols)
        e[i] = 1.0
        return e

    starts += [basis(i) for i in range(min(cols, 8))]

    v = None
    for start in starts:
        v = start
        converged = False
        for _ in range(max_iter):
            w = gram @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break  # start is in the null space; try the next one
            w /= nw
            # sign-insensitive convergence test
            if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < tol:
                v = w
                converged = True
                break
            v = w
        if converged or np.linalg.norm(gram @ v) > 0:
            break
    sigma = float(np.linalg.norm(m @ v))
    # canonical sign: largest-|.| component positive
    idx = int(np.argmax(np.abs(v)))
    if v[idx] < 0:
        v = -v
    return sigma, v
