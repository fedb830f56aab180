"""Bounds-constrained equality-form linear programs and their solution.

Problems are minimize c'x subject to A x = b and lb <= x <= ub, with A
given as sparse triplets. Solution is delegated to the HiGHS dual
simplex (via scipy), which is deterministic for a fixed input; a local
presolve substitutes out fixed variables first, and an independent
residual routine verifies returned points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

DEFAULT_FEAS_TOL = 1e-7
DEFAULT_OPT_TOL = 1e-8

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_ITERATION_LIMIT = "iteration_limit"

_HIGHS_STATUS = {
    0: STATUS_OPTIMAL,
    1: STATUS_ITERATION_LIMIT,
    2: STATUS_INFEASIBLE,
    3: STATUS_UNBOUNDED,
}


class LpSolveError(RuntimeError):
    """Raised when the backend fails for reasons other than problem class."""


@dataclass(frozen=True)
class StandardLp:
    """minimize c'x  s.t.  A x = b,  lb <= x <= ub."""
    num_vars: int
    n_rows: int
    c: np.ndarray
    a_rows: np.ndarray      # int triplet rows
    a_cols: np.ndarray      # int triplet cols
    a_vals: np.ndarray      # float triplet values
    b: np.ndarray
    lb: np.ndarray          # -inf allowed
    ub: np.ndarray          # +inf allowed

    def __post_init__(self) -> None:
        if len(self.c) != self.num_vars or len(self.lb) != self.num_vars or len(self.ub) != self.num_vars:
            raise ValueError("c, lb, ub must all have num_vars entries")
        if len(self.b) != self.n_rows:
            raise ValueError(f"b has {len(self.b)} entries for {self.n_rows} rows")
        if not (len(self.a_rows) == len(self.a_cols) == len(self.a_vals)):
            raise ValueError("triplet arrays must have equal length")
        if len(self.a_rows) and (self.a_rows.min() < 0 or self.a_rows.max() >= self.n_rows):
            raise ValueError("triplet row index out of range")
        if len(self.a_cols) and (self.a_cols.min() < 0 or self.a_cols.max() >= self.num_vars):
            raise ValueError("triplet col index out of range")
        if np.any(self.lb > self.ub):
            raise ValueError("lb must be elementwise <= ub")

    def matrix(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (self.a_vals, (self.a_rows, self.a_cols)),
            shape=(self.n_rows, self.num_vars),
        )


@dataclass(frozen=True)
class LpResult:
    """Solver outcome; x and objective are meaningful when optimal."""
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int


@dataclass(frozen=True)
class PresolveMap:
    """Bookkeeping to lift a reduced solution back to the full space."""
    num_vars: int
    kept_vars: np.ndarray       # indices of free (non-fixed) variables
    fixed_values: np.ndarray    # values for every variable; only fixed slots used
    fixed_mask: np.ndarray
    infeasible: bool = False
    detail: str = ""

    def restore(self, x_reduced: np.ndarray) -> np.ndarray:
        x = self.fixed_values.copy()
        x[self.kept_vars] = x_reduced
        return x


def presolve(lp: StandardLp, feas_tol: float = DEFAULT_FEAS_TOL) -> tuple[StandardLp, PresolveMap]:
    """Substitute out fixed variables (lb == ub) and validate empty rows.

    Rows whose remaining coefficients are all zero must have a residual
    right-hand side below feas_tol, otherwise the problem is flagged
    trivially infeasible.
    """
    fixed_mask = lp.lb == lp.ub
    kept = np.flatnonzero(~fixed_mask)
    fixed_values = np.zeros(lp.num_vars)
    fixed_values[fixed_mask] = lp.lb[fixed_mask]

    # move fixed-variable contributions to the rhs
    b_new = lp.b.copy()
    trip_fixed = fixed_mask[lp.a_cols]
    if trip_fixed.any():
        np.subtract.at(
            b_new,
            lp.a_rows[trip_fixed],
            lp.a_vals[trip_fixed] * fixed_values[lp.a_cols[trip_fixed]],
        )
    keep_trip = ~trip_fixed
    rows = lp.a_rows[keep_trip]
    cols = lp.a_cols[keep_trip]
    vals = lp.a_vals[keep_trip]

    # rows with no remaining support must already balance
    row_support = np.zeros(lp.n_rows, dtype=bool)
    row_support[rows[vals != 0.0]] = True
    empty = ~row_support
    bad = empty & (np.abs(b_new) > feas_tol)
    mapping = PresolveMap(
        num_vars=lp.num_vars,
        kept_vars=kept,
        fixed_values=fixed_values,
        fixed_mask=fixed_mask,
    )
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        mapping = PresolveMap(
            num_vars=lp.num_vars,
            kept_vars=kept,
            fixed_values=fixed_values,
            fixed_mask=fixed_mask,
            infeasible=True,
            detail=f"row {first} has no free variables but residual {b_new[first]:.3e}",
        )

    col_map = np.full(lp.num_vars, -1, dtype=int)
    col_map[kept] = np.arange(len(kept))
    kept_rows = np.flatnonzero(row_support)
    row_map = np.full(lp.n_rows, -1, dtype=int)
    row_map[kept_rows] = np.arange(len(kept_rows))
    in_kept_rows = row_support[rows]

    reduced = StandardLp(
        num_vars=len(kept),
        n_rows=len(kept_rows),
        c=lp.c[kept],
        a_rows=row_map[rows[in_kept_rows]],
        a_cols=col_map[cols[in_kept_rows]],
        a_vals=vals[in_kept_rows],
        b=b_new[kept_rows],
        lb=lp.lb[kept],
        ub=lp.ub[kept],
    )
    return reduced, mapping


def primal_residuals(lp: StandardLp, x: np.ndarray) -> tuple[float, float]:
    """Independent feasibility check: (max |Ax-b|, max bound violation)."""
    if lp.n_rows:
        resid = float(np.max(np.abs(lp.matrix() @ x - lp.b)))
    else:
        resid = 0.0
    below = np.where(np.isfinite(lp.lb), lp.lb - x, -np.inf)
    above = np.where(np.isfinite(lp.ub), x - lp.ub, -np.inf)
    bound = float(max(0.0, np.max(below, initial=-np.inf), np.max(above, initial=-np.inf)))
    return resid, bound


# Above this size the interior-point backend (with crossover, so still a
# vertex solution) is markedly faster than dual simplex on staircase LPs.
IPM_SIZE_THRESHOLD = 2000


def solve(
    lp: StandardLp,
    feas_tol: float = DEFAULT_FEAS_TOL,
    opt_tol: float = DEFAULT_OPT_TOL,
    max_iter: int | None = None,
) -> LpResult:
    """Solve the LP; infeasible/unbounded are reported via status.

    The backend choice depends only on problem size, so identical inputs
    always take the identical, deterministic path.
    """
    if max_iter is None:
        max_iter = 20 * (lp.num_vars + lp.n_rows)
    reduced, mapping = presolve(lp, feas_tol)
    if mapping.infeasible:
        return LpResult(status=STATUS_INFEASIBLE, x=None, objective=None, iterations=0)

    if reduced.num_vars == 0:
        # everything fixed; feasibility already validated above
        x_full = mapping.fixed_values
        return LpResult(
            status=STATUS_OPTIMAL,
            x=x_full,
            objective=float(lp.c @ x_full),
            iterations=0,
        )

    a_eq = reduced.matrix() if reduced.n_rows else None
    b_eq = reduced.b if reduced.n_rows else None
    method = "highs-ds" if reduced.num_vars <= IPM_SIZE_THRESHOLD else "highs-ipm"
    res = linprog(
        c=reduced.c,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=np.column_stack([reduced.lb, reduced.ub]),
        method=method,
        options={
            "presolve": True,
            "primal_feasibility_tolerance": feas_tol,
            "dual_feasibility_tolerance": opt_tol,
            "maxiter": max_iter,
        },
    )
    status = _HIGHS_STATUS.get(res.status)
    if status is None:
        raise LpSolveError(f"solver failed: {res.message}")
    iterations = int(getattr(res, "nit", 0) or 0)
    if status != STATUS_OPTIMAL:
        return LpResult(status=status, x=None, objective=None, iterations=iterations)
    x_full = mapping.restore(np.asarray(res.x))
    return LpResult(
        status=STATUS_OPTIMAL,
        x=x_full,
        objective=float(lp.c @ x_full),
        iterations=iterations,
    )


def dump_lp(lp: StandardLp, path: str) -> None:
    """Plain-text dump (objective, triplets, bounds) for offline checking."""
    with open(path, "w") as f:
        f.write(f"vars {lp.num_vars} rows {lp.n_rows} nnz {len(lp.a_vals)}\n")
        f.write("objective\n")
        for j, cj in enumerate(lp.c):
            f.write(f"{j} {cj!r}\n")
        f.write("triplets\n")
        for r, col, v in zip(lp.a_rows, lp.a_cols, lp.a_vals):
            f.write(f"{int(r)} {int(col)} {v!r}\n")
        f.write("rhs\n")
        for i, bi in enumerate(lp.b):
            f.write(f"{i} {bi!r}\n")
        f.write("bounds\n")
        for j in range(lp.num_vars):
            f.write(f"{j} {lp.lb[j]!r} {lp.ub[j]!r}\n")
