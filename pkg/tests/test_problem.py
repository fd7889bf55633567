import math

import numpy as np
import pytest

from mofilter.errors import NonFiniteValue
from mofilter.problem import (
    EvalDatabase, Problem, evaluate, get_problem, infeasibility, max_scalarization, mw3, mw3_distance,
    two_parabolas, weighted_sum_problem,
)


class TestMeasures:
    def test_infeasibility_clamps_feasible_to_zero(self):
        assert infeasibility([], [-3.25]) == 0.0

    def test_infeasibility_equalities_use_abs(self):
        assert infeasibility([0.5, -2.0], []) == 2.0

    def test_infeasibility_mixed(self):
        assert infeasibility([0.1], [0.3, -1.0]) == pytest.approx(0.3)

    def test_infeasibility_unconstrained(self):
        assert infeasibility([], []) == 0.0

    def test_max_scalarization(self):
        assert max_scalarization([1.0, 3.0, 2.0]) == 3.0
        assert max_scalarization([-5.0]) == -5.0

    def test_max_scalarization_empty(self):
        with pytest.raises(ValueError):
            max_scalarization([])


class TestEvaluate:
    def test_two_parabolas_feasible_point(self, ex1, db):
        rec = evaluate(ex1, db, [2.0, 1.0])
        np.testing.assert_allclose(rec.f, [0.0, 4.0])
        np.testing.assert_allclose(rec.g, [-4.0])
        assert rec.theta == 0.0
        assert rec.phi == 4.0

    def test_two_parabolas_origin(self, ex1, db):
        rec = evaluate(ex1, db, [0.0, 0.0])
        np.testing.assert_allclose(rec.g, [1.0])
        assert rec.theta == 1.0

    def test_cache_short_circuits(self, counting_ex1, db):
        p = counting_ex1.problem
        a = evaluate(p, db, [0.3, -0.7])
        b = evaluate(p, db, np.array([0.3, -0.7]))
        assert a is b
        assert counting_ex1.calls == 1
        assert db.num_evals == 1

    def test_record_consistency(self, ex1, db):
        rec = evaluate(ex1, db, [0.2, 0.4])
        assert rec.theta == infeasibility(rec.h, rec.g)
        assert rec.phi == max_scalarization(rec.f)

    def test_wrong_dimension(self, ex1, db):
        with pytest.raises(ValueError):
            evaluate(ex1, db, [1.0, 2.0, 3.0])

    def test_non_finite_input(self, ex1, db):
        with pytest.raises(ValueError):
            evaluate(ex1, db, [math.nan, 0.0])

    def test_non_finite_output(self, db):
        p = Problem(n=1, num_obj=1, eval_f=lambda x: [math.inf])
        with pytest.raises(NonFiniteValue):
            evaluate(p, db, [0.0])
        assert db.num_evals == 0

    def test_wrong_output_length(self, db):
        p = Problem(n=1, num_obj=2, eval_f=lambda x: [0.0])
        with pytest.raises(ValueError):
            evaluate(p, db, [0.0])


class TestEvalDatabase:
    def test_evaluate_many_keeps_input_order(self, counting_ex1):
        db = EvalDatabase()
        pts = [[float(i), 0.5] for i in range(6)]
        recs = db.evaluate_many(counting_ex1.problem, pts + pts[:2], max_workers=4)
        assert [r.x[0] for r in recs] == [0, 1, 2, 3, 4, 5, 0, 1]
        assert [r.x[0] for r in db.records] == [0, 1, 2, 3, 4, 5]
        assert counting_ex1.calls == 6

    def test_points_within_sorted(self, ex1, db):
        for x in ([0.0, 0.0], [3.0, 0.0], [0.5, 0.0], [0.0, -1.0]):
            evaluate(ex1, db, x)
        near = db.points_within(np.zeros(2), 1.0)
        np.testing.assert_allclose([np.linalg.norm(r.x) for r in near], [0.0, 0.5, 1.0])

    def test_lookup(self, ex1, db):
        assert db.lookup(np.array([1.0, 1.0])) is None
        rec = evaluate(ex1, db, [1.0, 1.0])
        assert db.lookup(np.array([1.0, 1.0])) is rec


class TestBenchmarks:
    def test_unit_circle_boundary(self):
        p = two_parabolas()
        assert p.eval_g(np.array([1.0, 0.0]))[0] == 0.0
        assert p.eval_g(np.array([0.5, 0.5]))[0] > 0.0
        assert p.eval_g(np.array([2.0, 0.0]))[0] < 0.0

    def test_segment_is_critical(self):
        # gradients of f1 and f2 cancel on {2} x [-1, 1]
        p = two_parabolas()
        for t in (-1.0, 0.0, 0.5, 1.0):
            x = np.array([2.0, t])
            g1 = np.array([2 * (x[0] - 2), 2 * (x[1] - 1)])
            g2 = np.array([2 * (x[0] - 2), 2 * (x[1] + 1)])
            w = (1 - t) / 2
            np.testing.assert_allclose((1 - w) * g1 + w * g2, 0.0, atol=1e-12)
            assert infeasibility([], p.eval_g(x)) == 0.0

    def test_mw3_first_objective_is_x1(self):
        p = mw3()
        rng = np.random.default_rng(3)
        for x in rng.random((5, 3)):
            assert p.eval_f(x)[0] == x[0]

    def test_mw3_distance(self):
        assert mw3_distance([0.5, 1.0, 0.75]) == pytest.approx(1.0)
        assert mw3_distance([0.5, 1.0, 1.0]) == pytest.approx(1.125)

    def test_mw3_constraint_layout(self):
        p = mw3()
        assert (p.n, p.num_obj, p.num_eq, p.num_ineq) == (3, 2, 0, 8)
        g = np.asarray(p.eval_g(np.array([0.2, 0.5, 1.2])))
        np.testing.assert_allclose(g[2:], [-0.2, -0.5, -1.2, -0.8, -0.5, 0.2])

    def test_registry(self):
        assert get_problem("mw3").name == "mw3"
        with pytest.raises(KeyError):
            get_problem("nope")


class TestWeightedSum:
    def test_objective_and_constraints(self):
        base = two_parabolas()
        ws = weighted_sum_problem(base, [0.25, 0.75])
        x = np.array([0.3, 0.1])
        f = np.asarray(base.eval_f(x))
        assert ws.num_obj == 1 and ws.num_ineq == 1
        assert ws.eval_f(x)[0] == pytest.approx(0.25 * f[0] + 0.75 * f[1])
        assert ws.eval_g(x) == base.eval_g(x)

    @pytest.mark.parametrize("w", [[-0.5, 1.5], [0.5, 0.6], [1.0]])
    def test_bad_weights(self, w):
        with pytest.raises(ValueError):
            weighted_sum_problem(two_parabolas(), w)
