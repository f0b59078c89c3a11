"""Optimization over affine maps x -> Vx + b with V in the Stiefel manifold.

The manifold here is the set of m x n matrices with orthonormal *rows*
(V V^T = I_m).  The minimizer is a multistart projected-gradient descent with
Armijo backtracking and a QR retraction.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, ObjectiveNonFinite, StepTooLarge

Objective = Callable[[np.ndarray, np.ndarray], float]
Gradient = Callable[[np.ndarray, np.ndarray], "tuple[np.ndarray, np.ndarray]"]

SEED_MODULUS = 2**64
_MIN_STEP = 1e-20
_STEP_RESOLUTION = 1e-16


@dataclass(frozen=True)
class OptimizerParams:
    restarts: int = 32
    max_iters: int = 500
    grad_tol: float = 1e-10
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise InvalidParameter("restarts must be >= 1")
        if self.max_iters < 0:
            raise InvalidParameter("max_iters must be >= 0")
        if not 0 < self.backtrack < 1:
            raise InvalidParameter("backtrack must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise InvalidParameter("armijo_c must lie in (0, 1)")
        if not 0 <= self.seed < SEED_MODULUS:
            raise InvalidParameter("seed must be an unsigned 64-bit integer")


@dataclass
class OptimizationOutcome:
    V: np.ndarray
    b: np.ndarray
    value: float
    iterations: int
    restart_index: int
    grad_norm: float
    converged: bool
    trace: list = field(default_factory=list, repr=False)
    restart_values: list = field(default_factory=list, repr=False)

    @property
    def restarts_agreeing(self) -> int:
        tol = 1e-8 * (1.0 + abs(self.value))
        return sum(1 for v in self.restart_values if v - self.value <= tol)


def haar_sample(m: int, n: int, seed: int) -> np.ndarray:
    """Draw V with orthonormal rows from the uniform (Haar) distribution."""
    if not 1 <= m <= n:
        raise DimensionMismatch(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(int(seed) % SEED_MODULUS)
    G = rng.standard_normal((n, m))
    Q, R = np.linalg.qr(G)
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    return np.ascontiguousarray(Q.T)


def random_projection(m: int, n: int, seed: int) -> "tuple[np.ndarray, np.ndarray]":
    """Haar V together with a standard-normal offset b drawn from the same seed."""
    V = haar_sample(m, n, seed)
    b = np.random.default_rng([int(seed) % SEED_MODULUS, 1]).standard_normal(m)
    return V, b


def tangent_project(V: np.ndarray, G: np.ndarray) -> np.ndarray:
    if V.shape != G.shape:
        raise DimensionMismatch(f"gradient shape {G.shape} does not match V {V.shape}")
    return G - 0.5 * (G @ V.T + V @ G.T) @ V


def retract_qr(V: np.ndarray, delta: np.ndarray, step: float) -> np.ndarray:
    A = V + step * delta
    Q, R = np.linalg.qr(A.T)
    d = np.diag(R)
    if np.min(np.abs(d)) <= 1e-14 * max(1.0, float(np.max(np.abs(A)))):
        raise StepTooLarge(f"V + {step:g} * delta is rank deficient")
    Q = Q * np.where(d < 0, -1.0, 1.0)
    return np.ascontiguousarray(Q.T)


def fd_gradient(objective: Objective, V: np.ndarray, b: np.ndarray, with_b: bool = True):
    """Central-difference Euclidean gradient in (V, b)."""
    gV = np.zeros_like(V)
    h = 1e-6 * (1.0 + float(np.max(np.abs(V))))
    for idx in np.ndindex(*V.shape):
        Vp = V.copy()
        Vm = V.copy()
        Vp[idx] += h
        Vm[idx] -= h
        gV[idx] = (objective(Vp, b) - objective(Vm, b)) / (2 * h)
    gb = np.zeros_like(b)
    if with_b and b.size:
        hb = 1e-6 * (1.0 + float(np.max(np.abs(b))))
        for i in range(b.size):
            bp = b.copy()
            bm = b.copy()
            bp[i] += hb
            bm[i] -= hb
            gb[i] = (objective(V, bp) - objective(V, bm)) / (2 * hb)
    return gV, gb


def thread_count() -> int:
    raw = os.environ.get("AUGDIST_THREADS", "1").strip() or "1"
    try:
        k = int(raw)
    except ValueError:
        raise InvalidParameter(f"AUGDIST_THREADS must be an integer, got {raw!r}") from None
    if k < 0:
        raise InvalidParameter("AUGDIST_THREADS must be >= 0")
    return k if k > 0 else (os.cpu_count() or 1)


def _eval(objective: Objective, V, b) -> float:
    f = float(objective(V, b))
    if not np.isfinite(f):
        raise ObjectiveNonFinite(f"objective returned {f} at a feasible point")
    return f


def _descend(objective, gradient, V, b, params: OptimizerParams, b_solver, optimize_b):
    if b_solver is not None:
        b = np.asarray(b_solver(V), dtype=float)
    f = _eval(objective, V, b)
    trace = [f]
    t = 1.0
    gnorm = np.inf
    converged = False
    it = 0
    prev = None  # (V, b, delta, gb) of the last accepted point, for the BB step
    while True:
        if gradient is None:
            gV, gb = fd_gradient(objective, V, b, with_b=optimize_b and b_solver is None)
        else:
            gV, gb = gradient(V, b)
            gV = np.asarray(gV, dtype=float)
            gb = np.asarray(gb, dtype=float)
        delta = tangent_project(V, gV)
        if b_solver is not None or not optimize_b:
            gb = np.zeros_like(b)
        gsq = float(np.sum(delta**2) + np.sum(gb**2))
        gnorm = gsq**0.5
        if gnorm <= params.grad_tol:
            converged = True
            break
        if it >= params.max_iters:
            break
        t = min(2.0 * t, 1e8)
        if prev is not None:
            # Barzilai-Borwein trial step; Armijo below still guards monotonicity
            sV, sb = V - prev[0], b - prev[1]
            yV, yb = delta - prev[2], gb - prev[3]
            sy = float(np.sum(sV * yV) + np.sum(sb * yb))
            if sy > 0:
                t = min(float(np.sum(sV**2) + np.sum(sb**2)) / sy, 1e8)
        accepted = False
        # steps shorter than this cannot move (V, b) in floating point
        min_step = _STEP_RESOLUTION * (1.0 + max(float(np.max(np.abs(V))), float(np.max(np.abs(b), initial=0.0)))) / gnorm
        while t >= max(min_step, _MIN_STEP):
            try:
                V_new = retract_qr(V, -delta, t)
            except StepTooLarge:
                t *= params.backtrack
                continue
            b_new = np.asarray(b_solver(V_new), dtype=float) if b_solver is not None else b - t * gb
            f_new = _eval(objective, V_new, b_new)
            if f_new <= f - params.armijo_c * t * gsq and f_new < f:
                accepted = True
                break
            t *= params.backtrack
        if not accepted:
            # no strict decrease left at machine precision
            break
        prev = (V, b, delta, gb)
        V, b, f = V_new, b_new, f_new
        trace.append(f)
        it += 1
    return V, b, f, it, gnorm, converged, trace


def minimize(
    objective: Objective,
    gradient: Optional[Gradient],
    m: int,
    n: int,
    params: OptimizerParams = OptimizerParams(),
    *,
    b_solver: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    optimize_b: bool = True,
    initial: Sequence = (),
) -> OptimizationOutcome:
    """Minimize ``objective(V, b)`` over V V^T = I_m and b in R^m.

    ``gradient`` returns the Euclidean gradient ``(dV, db)``; pass None to use
    central differences.  ``b_solver(V)`` gives the exact minimizing offset for
    a fixed V when one is known; ``optimize_b=False`` freezes b at zero (or at
    the value supplied through ``initial``).  ``initial`` holds ``(V, b)``
    starting points used for the first restarts; the remaining restarts start
    from Haar draws seeded by ``params.seed + restart_index``.
    """
    if not 1 <= m <= n:
        raise DimensionMismatch(f"need 1 <= m <= n, got m={m}, n={n}")
    starts = []
    for r in range(max(params.restarts, len(initial))):
        if r < len(initial):
            V0, b0 = initial[r]
            starts.append((np.array(V0, dtype=float), np.array(b0, dtype=float)))
        else:
            starts.append((haar_sample(m, n, params.seed + r), np.zeros(m)))

    def run(start):
        return _descend(objective, gradient, start[0], start[1], params, b_solver, optimize_b)

    workers = min(thread_count(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    values = [res[2] for res in results]
    best = min(range(len(results)), key=lambda r: (values[r], r))
    V, b, f, it, gnorm, converged, trace = results[best]
    return OptimizationOutcome(
        V=V,
        b=b,
        value=f,
        iterations=it,
        restart_index=best,
        grad_norm=gnorm,
        converged=converged,
        trace=trace,
        restart_values=values,
    )
