import numpy as np
import pytest

from mofilter.problem import EvalDatabase, Problem, evaluate
from mofilter.surrogates import (
    RBF_CUBIC, TAYLOR1, TAYLOR2, ModelBuilder, build_rbf, build_taylor, error_slope_probe, fd_steps,
    make_fully_linear,
)

from conftest import quadratic_k1

RADII = [0.5, 0.25, 0.125, 0.0625]


def cubic_1d() -> Problem:
    return Problem(n=1, num_obj=1, eval_f=lambda x: [x[0] ** 3 + x[0]], name="cubic")


def max_hessian_norms(problem: Problem, kind: str, x) -> list:
    """Größte Spektralnorm der Modell-Hesse-Matrizen, je Radius aus RADII."""
    norms = []
    for radius in RADII:
        models = ModelBuilder(problem, EvalDatabase(), kind=kind).build(x, radius)
        norms.append(max(np.linalg.norm(m.hessian(x), 2) for m in models.mf + models.mh + models.mg))
    return norms


class TestTaylor:
    def test_first_order_gradient(self, ex1, db):
        models = build_taylor(ex1, db, [0.0, 0.0], 0.5, degree=1)
        np.testing.assert_allclose(models.mf[0].gradient([0.0, 0.0]), [-4.0, -2.0], atol=1e-5)
        np.testing.assert_allclose(models.mf[0].hessian([0.0, 0.0]), np.zeros((2, 2)))
        assert models.kind == TAYLOR1

    def test_constraint_views(self, ex1, db):
        models = build_taylor(ex1, db, [0.5, 0.0], 0.5, degree=1)
        assert models.mh == [] and len(models.mg) == 1
        g = models.mg[0]
        assert g.value([0.5, 0.0]) == pytest.approx(0.75)
        np.testing.assert_allclose(g.gradient([0.5, 0.0]), [-1.0, 0.0], atol=1e-5)
        assert g.center is models.center and g.radius == 0.5

    def test_second_order_reproduces_quadratic(self, db):
        p = Problem(n=1, num_obj=1, eval_f=lambda x: [x[0] ** 2])
        models = build_taylor(p, db, [0.7], 0.3, degree=2)
        m = models.mf[0]
        np.testing.assert_allclose(m.gradient([0.7]), [1.4], atol=1e-6)
        np.testing.assert_allclose(m.hessian([0.7]), [[2.0]], atol=1e-4)
        np.testing.assert_allclose(m.value([1.2]), 1.44, atol=1e-4)

    def test_hessian_constant_in_xi(self, ex1, db):
        models = build_taylor(ex1, db, [0.5, -1.5], 0.5, degree=2)
        m = models.mf[1]
        np.testing.assert_allclose(m.hessian([0.5, -1.5]), m.hessian([3.0, 2.0]))
        np.testing.assert_allclose(m.hessian([0.5, -1.5]), 2.0 * np.eye(2), atol=1e-4)

    def test_constant_function(self, db):
        p = Problem(n=2, num_obj=1, eval_f=lambda x: [3.0])
        models = build_taylor(p, db, [1.0, 1.0], 0.5, degree=2)
        np.testing.assert_allclose(models.mf[0].gradient([1.0, 1.0]), 0.0)
        np.testing.assert_allclose(models.mf[0].hessian([1.0, 1.0]), 0.0)

    def test_interpolates_center(self, ex1, db):
        x = np.array([-2.0, 0.5])
        models = build_taylor(ex1, db, x, 0.5, degree=2)
        rec = evaluate(ex1, db, x)
        f, _, g = models.values(x)
        np.testing.assert_allclose(f, rec.f, rtol=1e-15)
        np.testing.assert_allclose(g, rec.g, rtol=1e-15)

    def test_fd_step_floor(self):
        h = fd_steps(np.array([0.0, 100.0]), 1e-20)
        np.testing.assert_allclose(h, [1e-8, 1e-6])

    def test_reuses_database(self, counting_ex1):
        db = EvalDatabase()
        build_taylor(counting_ex1.problem, db, [0.3, 0.3], 0.5, degree=1)
        calls = counting_ex1.calls
        again = build_taylor(counting_ex1.problem, db, [0.3, 0.3], 0.4, degree=1)
        assert counting_ex1.calls == calls == 5
        assert again.new_evals == 0


class TestRbf:
    def test_fresh_axis_points(self, counting_ex1):
        db = EvalDatabase()
        evaluate(counting_ex1.problem, db, [-2.0, 0.5])
        models = build_rbf(counting_ex1.problem, db, [-2.0, 0.5], 0.5)
        assert models.new_evals == 2
        assert counting_ex1.calls == 3
        assert models.kind == RBF_CUBIC and models.fully_linear

    def test_interpolation_conditions(self, ex1, db):
        for x in ([0.1, 0.2], [0.4, 0.0], [0.0, -0.3], [0.3, 0.3], [-0.2, 0.1]):
            evaluate(ex1, db, x)
        models = build_rbf(ex1, db, [0.1, 0.2], 0.4)
        assert len(models.points) >= 3
        for x in models.points:
            rec = db.lookup(x)
            f, _, g = models.values(x)
            np.testing.assert_allclose(f, rec.f, rtol=1e-9, atol=1e-12)
            np.testing.assert_allclose(g, rec.g, rtol=1e-9, atol=1e-12)

    def test_collinear_points_force_new_sample(self, ex1, db):
        for t in (0.0, 0.1, 0.2):
            evaluate(ex1, db, [t, t])
        before = db.num_evals
        models = build_rbf(ex1, db, [0.0, 0.0], 0.5)
        assert db.num_evals > before
        pts = models.points[:3] - models.points[0]
        assert np.linalg.matrix_rank(pts[1:]) == 2

    def test_jacobian_matches_finite_differences(self, ex1, db):
        models = build_rbf(ex1, db, [1.0, 1.0], 0.5)
        xi = np.array([1.1, 0.9])
        J = models.core.jacobian(xi)
        h = 1e-7
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (models.core.value(xi + e) - models.core.value(xi - e)) / (2 * h)
            np.testing.assert_allclose(J[:, i], fd, rtol=1e-5, atol=1e-6)


class TestMakeFullyLinear:
    def test_larger_radius_keeps_set(self, ex1, db):
        models = ModelBuilder(ex1, db).build([0.5, 1.5], 0.5)
        assert make_fully_linear(models, [0.5, 1.5], 1.0) is models

    def test_new_center(self, ex1, db):
        models = ModelBuilder(ex1, db).build([0.5, 1.5], 0.5)
        other = make_fully_linear(models, [1.0, 1.5], 0.5)
        np.testing.assert_array_equal(other.center, [1.0, 1.5])

    def test_shrunken_radius(self, ex1, db):
        models = ModelBuilder(ex1, db).build([0.5, 1.5], 0.5)
        small = make_fully_linear(models, [0.5, 1.5], 0.25)
        assert small.radius == 0.25 and small.fully_linear

    def test_unknown_kind(self, ex1, db):
        with pytest.raises(ValueError):
            ModelBuilder(ex1, db, kind="quadratic-spline")


class TestHessianBound:
    X = [0.5, 1.5]

    def test_taylor2_independent_of_radius(self, ex1):
        norms = max_hessian_norms(ex1, TAYLOR2, self.X)
        assert max(norms) < 10 * min(norms)
        np.testing.assert_allclose(norms, 2.0, atol=1e-3)

    def test_taylor1_is_linear(self, ex1):
        assert max_hessian_norms(ex1, TAYLOR1, self.X) == [0.0] * len(RADII)

    def test_rbf_on_minimal_set(self, ex1):
        # n + 1 points leave no room for curvature
        assert max(max_hessian_norms(ex1, RBF_CUBIC, self.X)) <= 1e-6


class TestErrorSlope:
    def test_taylor2_on_cubic(self):
        p = cubic_1d()
        est = error_slope_probe(p, ModelBuilder(p, EvalDatabase(), kind=TAYLOR2), [0.5], RADII)
        assert est.slope >= 2.5

    def test_taylor1_on_quadratic(self):
        p = quadratic_k1()
        est = error_slope_probe(p, ModelBuilder(p, EvalDatabase(), kind=TAYLOR1), [0.0, 0.0], RADII)
        assert 1.8 <= est.slope <= 2.2

    @pytest.mark.parametrize("kind", [RBF_CUBIC, TAYLOR1])
    @pytest.mark.parametrize("output", [0, 2])
    def test_fully_linear_decay_on_two_parabolas(self, ex1, kind, output):
        est = error_slope_probe(ex1, ModelBuilder(ex1, EvalDatabase(), kind=kind), [0.0, 0.0], RADII,
                                output=output)
        assert est.slope >= 1.8

    def test_radii_must_decrease(self, ex1):
        with pytest.raises(ValueError):
            error_slope_probe(ex1, ModelBuilder(ex1, EvalDatabase()), [0.0, 0.0], [0.1, 0.2, 0.3, 0.4])
