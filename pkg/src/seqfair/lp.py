"""Small dense linear programs: maximize c.x s.t. equality rows, box bounds.

``solve`` is a two-phase tableau simplex with Bland's rule. The problems
here have at most eight variables, so robustness is preferred over speed.
``enumerate_vertices`` is an independent brute-force oracle for tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ValidationError

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
BOUND_TOL = 1e-12
MAX_VARS = 8


@dataclass(frozen=True)
class LPProblem:
    """maximize ``c @ x`` s.t. ``A_eq @ x == b_eq`` and ``lo <= x <= hi``."""

    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lo: np.ndarray = None
    hi: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        A = np.atleast_2d(np.asarray(self.A_eq, dtype=float))
        b = np.asarray(self.b_eq, dtype=float).ravel()
        lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=float).ravel()
        hi = np.ones(n) if self.hi is None else np.asarray(self.hi, dtype=float).ravel()
        if not 1 <= n <= MAX_VARS:
            raise ValidationError(f"LP needs 1..{MAX_VARS} variables, got {n}")
        if A.shape[1] != n or A.shape[0] != b.size:
            raise ValidationError(f"equality block shape {A.shape} does not match {n} vars / {b.size} rhs")
        if not 1 <= A.shape[0] <= n:
            raise ValidationError(f"LP needs 1..{n} equality rows, got {A.shape[0]}")
        if lo.size != n or hi.size != n:
            raise ValidationError("bounds must have one entry per variable")
        for name, arr in (("c", c), ("A_eq", A), ("b_eq", b), ("lo", lo), ("hi", hi)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"LP {name} has non-finite entries")
        if np.any(lo < 0) or np.any(hi > 1) or np.any(lo > hi):
            raise ValidationError("bounds must satisfy 0 <= lo <= hi <= 1")
        for name, arr in (("c", c), ("A_eq", A), ("b_eq", b), ("lo", lo), ("hi", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LPSolution:
    status: Literal["optimal", "infeasible"]
    x: np.ndarray | None = None
    objective: float = float("nan")
    iterations: int = field(default=0, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _simplex(T: np.ndarray, basis: list[int], ncols: int, max_iter: int = 10_000) -> int:
    """Maximize the objective stored as the last row of ``T`` (reduced costs
    are ``-T[-1, :ncols]``). Bland's rule: lowest-index entering column, and
    the lowest basis index among ratio-test ties. Returns the pivot count."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        obj = T[-1, :ncols]
        entering = next((j for j in range(ncols) if obj[j] < -PIVOT_TOL), None)
        if entering is None:
            return it
        col = T[:m, entering]
        best_row, best_ratio = None, np.inf
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = T[i, -1] / col[i]
                if ratio < best_ratio - 1e-15 or (
                    abs(ratio - best_ratio) <= 1e-15 and basis[i] < basis[best_row]
                ):
                    best_row, best_ratio = i, ratio
        # box bounds make every column bounded
        assert best_row is not None, "unbounded LP despite box bounds"
        _pivot(T, basis, best_row, entering)
    raise RuntimeError("simplex iteration limit reached")


def solve(problem: LPProblem) -> LPSolution:
    """Two-phase simplex on the shifted problem y = x - lo, 0 <= y <= hi - lo."""
    n = problem.n
    A = problem.A_eq
    me = A.shape[0]
    b = problem.b_eq - A @ problem.lo
    u = problem.hi - problem.lo

    # columns: y (n) | bound slacks (n) | artificials (me) | rhs
    m = me + n
    ncols = 2 * n + me
    T = np.zeros((m + 1, ncols + 1))
    for i in range(me):
        sign = -1.0 if b[i] < 0 else 1.0
        T[i, :n] = sign * A[i]
        T[i, 2 * n + i] = 1.0
        T[i, -1] = sign * b[i]
    for i in range(n):
        T[me + i, i] = 1.0
        T[me + i, n + i] = 1.0
        T[me + i, -1] = u[i]
    basis = [2 * n + i for i in range(me)] + [n + i for i in range(n)]

    # phase 1: maximize -sum(artificials)
    T[-1, 2 * n : 2 * n + me] = 1.0
    for i in range(me):
        T[-1] -= T[i]
    iters = _simplex(T, basis, ncols)
    if T[-1, -1] < -FEAS_TOL:
        return LPSolution("infeasible", iterations=iters)

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= 2 * n:
            j = next((j for j in range(2 * n) if abs(T[i, j]) > PIVOT_TOL), None)
            if j is None:
                continue
            _pivot(T, basis, i, j)
        keep.append(i)
    T = np.vstack([T[keep][:, list(range(2 * n)) + [ncols]], np.zeros((1, 2 * n + 1))])
    basis = [basis[i] for i in keep]

    # phase 2
    c = np.concatenate([problem.c, np.zeros(n)])
    T[-1, : 2 * n] = -c
    for i, bj in enumerate(basis):
        if T[-1, bj] != 0.0:
            T[-1] -= T[-1, bj] * T[i]
    iters += _simplex(T, basis, 2 * n)

    y = np.zeros(2 * n)
    for i, bj in enumerate(basis):
        y[bj] = T[i, -1]
    x = np.clip(problem.lo + y[:n], problem.lo, problem.hi)
    return LPSolution("optimal", x=x, objective=float(problem.c @ x), iterations=iters)


def _independent_rows(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows: list[int] = []
    for i in range(A.shape[0]):
        trial = rows + [i]
        if np.linalg.matrix_rank(A[trial], tol=1e-12) == len(trial):
            rows = trial
    return A[rows], b[rows]


def enumerate_vertices(problem: LPProblem) -> list[tuple[np.ndarray, float]]:
    """All basic feasible points with their objective values.

    Linearly dependent equality rows are reduced first; with rank k, every
    choice of n - k variables pinned at a bound is tried and the remaining
    k solved from the equalities. Singular subsystems are skipped.
    """
    n = problem.n
    A, b = _independent_rows(problem.A_eq, problem.b_eq)
    k = A.shape[0]
    found: dict[tuple, tuple[np.ndarray, float]] = {}
    for fixed in itertools.combinations(range(n), n - k):
        free = [j for j in range(n) if j not in fixed]
        Af = A[:, free]
        if k and abs(np.linalg.det(Af)) < 1e-14:
            continue
        for choice in itertools.product((0, 1), repeat=n - k):
            x = np.empty(n)
            for j, c in zip(fixed, choice):
                x[j] = problem.hi[j] if c else problem.lo[j]
            if k:
                rhs = b - A[:, list(fixed)] @ x[list(fixed)] if fixed else b
                x[free] = np.linalg.solve(Af, rhs)
            if np.any(x < problem.lo - FEAS_TOL) or np.any(x > problem.hi + FEAS_TOL):
                continue
            if np.max(np.abs(problem.A_eq @ x - problem.b_eq), initial=0.0) > FEAS_TOL:
                continue
            x = np.clip(x, problem.lo, problem.hi)
            key = tuple(np.round(x, 9))
            found.setdefault(key, (x, float(problem.c @ x)))
    return list(found.values())
