"""Exact discrete optimal transport by the transportation network simplex."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InfeasibleMarginals, NonFiniteEntry, WeightSumViolation

MARGINAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Coupling:
    """Nonnegative plan whose row/column sums match the two marginals."""

    plan: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        plan = np.array(self.plan, dtype=float)
        p = np.array(self.row_marginal, dtype=float)
        q = np.array(self.col_marginal, dtype=float)
        if plan.shape != (p.size, q.size):
            raise DimensionMismatch(f"plan shape {plan.shape} vs marginals ({p.size}, {q.size})")
        if np.any(plan < -1e-12):
            raise WeightSumViolation(f"plan has negative entry {plan.min():.3g}")
        plan = np.clip(plan, 0.0, None)
        if np.max(np.abs(plan.sum(axis=1) - p)) > MARGINAL_TOL or np.max(np.abs(plan.sum(axis=0) - q)) > MARGINAL_TOL:
            raise InfeasibleMarginals("plan marginals do not match")
        for name, a in (("plan", plan), ("row_marginal", p), ("col_marginal", q)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def triplets(self) -> list:
        """Nonzero entries as ``[i, j, mass]`` rows."""
        i, j = np.nonzero(self.plan)
        return [[int(a), int(b), float(self.plan[a, b])] for a, b in zip(i, j)]


def _check_weights(w, name):
    w = np.asarray(w, dtype=float).ravel()
    if not np.all(np.isfinite(w)):
        raise NonFiniteEntry(f"{name} contains NaN or Inf")
    if np.any(w < 0):
        raise WeightSumViolation(f"{name} has a negative entry")
    return w


def _least_cost_start(C: np.ndarray, p: np.ndarray, q: np.ndarray):
    """Greedy cheapest-cell start: k + l - 1 basic cells forming a spanning tree.

    Each allocation retires exactly one row or one column (a row when both
    run out together), which keeps the basis a tree even when degenerate.
    """
    k, l = p.size, q.size
    a = p.copy()
    c = q.copy()
    masked = C.astype(float).copy()
    row_open = np.ones(k, dtype=bool)
    col_open = np.ones(l, dtype=bool)
    flow = {}
    for step in range(k + l - 1):
        i, j = divmod(int(np.argmin(masked)), l)
        x = min(a[i], c[j])
        flow[(i, j)] = x
        a[i] -= x
        c[j] -= x
        last_row = row_open.sum() == 1
        if (a[i] <= c[j] and not last_row) or col_open.sum() == 1:
            row_open[i] = False
            masked[i, :] = np.inf
        else:
            col_open[j] = False
            masked[:, j] = np.inf
    return flow


def _network_simplex(C: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    k, l = p.size, q.size
    if k == 1:
        return q[None, :].copy()
    if l == 1:
        return p[:, None].copy()
    flow = _least_cost_start(C, p, q)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(C))))
    Cl = C.tolist()
    nodes = k + l
    bland = False  # Dantzig pricing until the first degenerate pivot, Bland's rule after
    max_pivots = 50 * (k + l) * max(k, l) + 1000
    for _ in range(max_pivots):
        adj = [[] for _ in range(nodes)]
        for (i, j) in flow:
            adj[i].append(k + j)
            adj[k + j].append(i)
        # potentials u_i + v_j = C_ij on basic cells, from a tree rooted at row 0
        u = [0.0] * k
        v = [0.0] * l
        parent = [-1] * nodes
        depth = [0] * nodes
        parent[0] = 0
        stack = [0]
        while stack:
            node = stack.pop()
            for nxt in adj[node]:
                if parent[nxt] >= 0:
                    continue
                parent[nxt] = node
                depth[nxt] = depth[node] + 1
                if node < k:
                    v[nxt - k] = Cl[node][nxt - k] - u[node]
                else:
                    u[nxt] = Cl[nxt][node - k] - v[node - k]
                stack.append(nxt)
        reduced = C - np.array(u)[:, None] - np.array(v)[None, :]
        for cell in flow:
            reduced[cell] = 0.0
        flat = reduced.ravel()
        if bland:
            candidates = np.flatnonzero(flat < -tol)
            if candidates.size == 0:
                break
            enter = int(candidates[0])
        else:
            enter = int(np.argmin(flat))
            if flat[enter] >= -tol:
                break
        ei, ej = divmod(enter, l)
        # tree path from column node ej to row node ei through their common ancestor
        a, b = k + ej, ei
        left, right = [a], [b]
        while a != b:
            if depth[a] >= depth[b]:
                a = parent[a]
                left.append(a)
            else:
                b = parent[b]
                right.append(b)
        path = left + right[-2::-1]
        minus, plus = [], []
        for step, (x, y) in enumerate(zip(path[:-1], path[1:])):
            cell = (x, y - k) if x < k else (y, x - k)
            (minus if step % 2 == 0 else plus).append(cell)
        theta = min(flow[c] for c in minus)
        leaving = min(c for c in minus if flow[c] <= theta)
        if theta <= 0.0:
            bland = True
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        del flow[leaving]
        flow[(ei, ej)] = theta
    else:  # pragma: no cover - guarded by Bland's rule
        raise RuntimeError("network simplex did not terminate")

    plan = np.zeros((k, l))
    for (i, j), x in flow.items():
        plan[i, j] = max(x, 0.0)
    return plan


def ot_solve(cost, p_row, q_col):
    """Solve min <plan, cost> over couplings of ``p_row`` and ``q_col``.

    Returns ``(value, Coupling)``.  The plan is a basic (vertex) solution with
    at most k + l - 1 nonzero entries.  Pivots use the most negative reduced
    cost until a degenerate pivot occurs, then Bland's rule, which rules out
    cycling.
    """
    C = np.atleast_2d(np.asarray(cost, dtype=float))
    p = _check_weights(p_row, "row weights")
    q = _check_weights(q_col, "column weights")
    k, l = p.size, q.size
    if C.shape != (k, l):
        raise DimensionMismatch(f"cost shape {C.shape} does not match weights ({k}, {l})")
    if not np.all(np.isfinite(C)):
        raise NonFiniteEntry("cost matrix contains NaN or Inf")
    if abs(p.sum() - q.sum()) > MARGINAL_TOL:
        raise InfeasibleMarginals(f"marginal masses differ: {p.sum()!r} vs {q.sum()!r}")
    if q.sum() > 0:
        q = q * (p.sum() / q.sum())
    plan = _network_simplex(C, p, q)
    return float(np.sum(plan * C)), Coupling(plan, p, q)
