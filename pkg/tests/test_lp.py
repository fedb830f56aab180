"""LP solver tests against a brute-force basic-solution oracle."""
import numpy as np
import pytest

from dragplan.lp import (
    LpResult,
    StandardLp,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    dump_lp,
    presolve,
    primal_residuals,
    solve,
)

from helpers import enumerate_optimum, random_bounded_lp


def _lp(num_vars, rows, b, c, lb, ub):
    """rows: list of (row, col, val) triplets."""
    r = np.array([t[0] for t in rows], dtype=int)
    k = np.array([t[1] for t in rows], dtype=int)
    v = np.array([t[2] for t in rows], dtype=float)
    n_rows = len(b)
    return StandardLp(num_vars=num_vars, n_rows=n_rows, c=np.asarray(c, dtype=float),
                      a_rows=r, a_cols=k, a_vals=v, b=np.asarray(b, dtype=float),
                      lb=np.asarray(lb, dtype=float), ub=np.asarray(ub, dtype=float))


class TestSolveBasics:
    def test_maximize_single_variable(self):
        res = solve(_lp(1, [], [], [-1.0], [0.0], [1.0]))
        assert res.status == STATUS_OPTIMAL
        assert res.x[0] == pytest.approx(1.0)
        assert res.objective == pytest.approx(-1.0)

    def test_degenerate_optimum_set(self):
        # minimize x+y on the segment x+y=1 inside the unit box
        res = solve(_lp(2, [(0, 0, 1.0), (0, 1, 1.0)], [1.0], [1.0, 1.0], [0.0, 0.0], [1.0, 1.0]))
        assert res.status == STATUS_OPTIMAL
        assert res.objective == pytest.approx(1.0)

    def test_infeasible_by_bounds(self):
        res = solve(_lp(2, [(0, 0, 1.0), (0, 1, 1.0)], [10.0], [0.0, 0.0], [0.0, 0.0], [1.0, 1.0]))
        assert res.status == STATUS_INFEASIBLE
        assert res.x is None

    def test_unbounded(self):
        res = solve(_lp(1, [], [], [-1.0], [0.0], [np.inf]))
        assert res.status == "unbounded"

    def test_deterministic(self):
        rng = np.random.RandomState(3)
        lp = random_bounded_lp(rng)
        r1 = solve(lp)
        r2 = solve(lp)
        assert r1.status == r2.status
        if r1.status == STATUS_OPTIMAL:
            assert np.array_equal(r1.x, r2.x)
            assert r1.objective == r2.objective


class TestPresolve:
    def test_identity_when_nothing_fixed(self):
        lp = _lp(2, [(0, 0, 1.0), (0, 1, 2.0)], [3.0], [1.0, 1.0], [0.0, 0.0], [5.0, 5.0])
        red, mapping = presolve(lp)
        assert red.num_vars == 2 and red.n_rows == 1
        assert not mapping.infeasible
        assert np.array_equal(mapping.kept_vars, [0, 1])

    def test_all_fixed_consistent(self):
        lp = _lp(2, [(0, 0, 1.0), (0, 1, 1.0)], [3.0], [1.0, 1.0], [1.0, 2.0], [1.0, 2.0])
        red, mapping = presolve(lp)
        assert red.num_vars == 0
        assert not mapping.infeasible
        res = solve(lp)
        assert res.status == STATUS_OPTIMAL
        assert np.array_equal(res.x, [1.0, 2.0])
        assert res.objective == pytest.approx(3.0)

    def test_fixed_violation_is_infeasible(self):
        lp = _lp(2, [(0, 0, 1.0), (0, 1, 1.0)], [99.0], [1.0, 1.0], [1.0, 2.0], [1.0, 2.0])
        red, mapping = presolve(lp)
        assert mapping.infeasible
        assert "row 0" in mapping.detail
        assert solve(lp).status == STATUS_INFEASIBLE

    def test_restore_mixes_fixed_and_free(self):
        lp = _lp(3, [(0, 0, 1.0), (0, 2, 1.0)], [4.0], [0.0, 5.0, 1.0],
                 [1.0, -1.0, 0.0], [1.0, 1.0, 10.0])
        res = solve(lp)
        assert res.status == STATUS_OPTIMAL
        assert res.x[0] == 1.0
        assert res.x[2] == pytest.approx(3.0)


class TestOracle:
    def test_matches_enumeration_on_random_instances(self):
        rng = np.random.RandomState(2024)
        solved = infeasible = 0
        for _ in range(200):
            lp = random_bounded_lp(rng)
            res = solve(lp)
            truth = enumerate_optimum(lp)
            if truth is None:
                assert res.status == STATUS_INFEASIBLE
                infeasible += 1
            else:
                assert res.status == STATUS_OPTIMAL
                assert abs(res.objective - truth) <= 1e-6 * max(1.0, abs(truth))
                eq_resid, bound_viol = primal_residuals(lp, res.x)
                assert eq_resid <= 1e-7
                assert bound_viol <= 1e-7
                solved += 1
        # the generator must exercise both outcomes
        assert solved > 100
        assert infeasible > 5


class TestResidualsAndDump:
    def test_residuals_flag_violations(self):
        lp = _lp(2, [(0, 0, 1.0), (0, 1, 1.0)], [1.0], [1.0, 1.0], [0.0, 0.0], [1.0, 1.0])
        eq, bound = primal_residuals(lp, np.array([0.2, 0.3]))
        assert eq == pytest.approx(0.5)
        assert bound == 0.0
        eq, bound = primal_residuals(lp, np.array([1.5, -0.5]))
        assert bound == pytest.approx(0.5)

    def test_dump_round_trips_values(self, tmp_path):
        lp = _lp(2, [(0, 0, 1.25), (0, 1, -2.5)], [0.75], [1.0, -1.0], [0.0, 0.0], [1.0, 1.0])
        path = tmp_path / "lp.txt"
        dump_lp(lp, str(path))
        text = path.read_text()
        assert "vars 2 rows 1 nnz 2" in text
        assert repr(1.25) in text and repr(-2.5) in text

    def test_validation(self):
        with pytest.raises(ValueError):
            _lp(1, [(0, 5, 1.0)], [1.0], [1.0], [0.0], [1.0])
        with pytest.raises(ValueError):
            _lp(1, [], [], [1.0], [2.0], [1.0])
