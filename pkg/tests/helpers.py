"""Shared test utilities: random LP instances and the brute-force oracle."""
from __future__ import annotations

import itertools

import numpy as np

from dragplan.lp import StandardLp


def random_bounded_lp(rng: np.random.RandomState) -> StandardLp:
    """Random equality-form LP with finite bounds on every variable.

    Most instances are built around an interior point so they are
    feasible; the rest get a random right-hand side and may be infeasible.
    """
    n = rng.randint(2, 9)
    m = rng.randint(1, min(6, n) + 1)
    a = rng.uniform(-2.0, 2.0, size=(m, n))
    a[rng.rand(m, n) < 0.25] = 0.0
    # keep full row rank so every optimum is at an enumerable basic solution
    for i in range(m):
        if not a[i].any():
            a[i, rng.randint(n)] = rng.uniform(0.5, 2.0)
    lb = rng.uniform(-5.0, 0.0, size=n)
    ub = lb + rng.uniform(0.5, 6.0, size=n)
    if rng.rand() < 0.7:
        x_feas = lb + rng.rand(n) * (ub - lb)
        b = a @ x_feas
    else:
        b = rng.uniform(-4.0, 4.0, size=m)
    c = rng.uniform(-3.0, 3.0, size=n)
    rows, cols = np.nonzero(a)
    return StandardLp(
        num_vars=n,
        n_rows=m,
        c=c,
        a_rows=rows,
        a_cols=cols,
        a_vals=a[rows, cols],
        b=b,
        lb=lb,
        ub=ub,
    )


def enumerate_optimum(lp: StandardLp, tol: float = 1e-9) -> float | None:
    """Exhaustive basic-feasible-solution search; None if infeasible.

    Dependent equality rows are dropped first (after an exact consistency
    check), then every choice of basic columns and every lower/upper
    assignment of the nonbasic columns is solved and filtered by the
    bounds. A bounded feasible LP attains its optimum at one of them.
    """
    import scipy.linalg

    a_full = lp.matrix().toarray()
    rank = np.linalg.matrix_rank(a_full) if lp.n_rows else 0
    if lp.n_rows and np.linalg.matrix_rank(np.column_stack([a_full, lp.b])) > rank:
        return None  # equalities inconsistent regardless of bounds
    if rank < lp.n_rows:
        _, _, perm = scipy.linalg.qr(a_full.T, pivoting=True)
        keep = sorted(perm[:rank])
        a = a_full[keep]
        b = lp.b[keep]
    else:
        a = a_full
        b = lp.b
    m, n = len(b), lp.num_vars
    best = None
    for basis in itertools.combinations(range(n), m):
        a_b = a[:, basis]
        if abs(np.linalg.det(a_b)) < 1e-12:
            continue
        nonbasic = [j for j in range(n) if j not in basis]
        for assignment in itertools.product((0, 1), repeat=len(nonbasic)):
            x = np.empty(n)
            for j, side in zip(nonbasic, assignment):
                x[j] = lp.lb[j] if side == 0 else lp.ub[j]
            rhs = b - a[:, nonbasic] @ x[nonbasic] if nonbasic else b.copy()
            x_b = np.linalg.solve(a_b, rhs)
            x[list(basis)] = x_b
            if np.any(x < lp.lb - tol) or np.any(x > lp.ub + tol):
                continue
            obj = float(lp.c @ x)
            if best is None or obj < best:
                best = obj
    return best
