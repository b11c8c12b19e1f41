import numpy as np
import pytest
from numpy.testing import assert_allclose

from pplad import (DimensionMismatch, QcqpSpec, WholeSpace, compare,
                   fd_gradient, fd_jacobian, from_qcqp, validate)
from pplad.problems import (BUILTIN_PROBLEMS, DEFAULT_START, example1, example2,
                            example2_spec, example3)


class TestExample1:
    def test_solution_is_feasible(self):
        assert_allclose(example1().constraints([1.0, 0.0]), [0.0, 0.0])

    def test_objective_zero_at_solution(self):
        assert example1().objective([1.0, 0.0]) == 0.0

    def test_jacobian_rank_deficient_at_solution(self):
        jac = example1().constraint_jacobian(np.array([1.0, 0.0]))
        assert_allclose(jac, [[2.0, 0.0], [-2.0, 0.0]])
        assert np.linalg.matrix_rank(jac) == 1  # constraint gradients parallel

    def test_objective_and_gradient_at_start(self):
        p = example1()
        assert p.objective([3.0, 3.0]) == pytest.approx(5.0)
        assert_allclose(p.objective_gradient(np.array([3.0, 3.0])), [-4.0, 6.0])

    def test_box_projection_active(self):
        assert_allclose(example1().projection(np.array([4.0, -5.0])), [3.0, -3.0])


class TestExample2:
    def test_optimal_value(self):
        assert example2().objective(np.array([0.0, 0.0, 8.0])) == pytest.approx(224.0)

    def test_constraints_vanish_at_solution(self):
        # c1 = 0.5*4*64 - 32*8 + 128 = 0 and c2 = 0.5*64 - 8*8 + 32 = 0
        assert_allclose(example2().constraints(np.array([0.0, 0.0, 8.0])),
                        [0.0, 0.0], atol=1e-12)

    def test_constraint_gradients_vanish_at_solution(self):
        # both rows of the Jacobian are zero there: LICQ fails maximally
        jac = example2().constraint_jacobian(np.array([0.0, 0.0, 8.0]))
        assert_allclose(jac, np.zeros((2, 3)), atol=1e-12)

    def test_reproducible_from_spec(self):
        direct = example2()
        rebuilt = from_qcqp(example2_spec(), name="rebuilt")
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.uniform(-5.0, 5.0, 3)
            assert direct.objective(x) == rebuilt.objective(x)
            assert_allclose(direct.constraints(x), rebuilt.constraints(x), rtol=0)

    def test_projection_is_three_dimensional_orthant(self):
        p = example2()
        assert p.n == 3
        assert_allclose(p.projection(np.array([-1.0, 2.0, -3.0])), [0.0, 2.0, 0.0])


class TestExample3:
    def test_solution_feasible_with_value_four(self):
        p = example3()
        assert_allclose(p.constraints([2.0, 0.0]), [0.0, 0.0])
        assert p.objective([2.0, 0.0]) == pytest.approx(4.0)

    def test_jacobian_at_solution(self):
        jac = example3().constraint_jacobian(np.array([2.0, 0.0]))
        assert_allclose(jac, [[4.0, 0.0], [0.0, 2.0]])

    def test_bounds_live_in_projection_not_constraints(self):
        p = example3()
        assert p.m == 2
        assert_allclose(p.projection(np.array([-1.0, -2.0])), [0.0, 0.0])


class TestQcqpSpec:
    def test_symmetrization(self):
        spec = QcqpSpec(Q=[[0.0, 2.0], [0.0, 0.0]], q=[0.0, 0.0], Qj=(), qj=(),
                        bj=(), projection=WholeSpace())
        assert_allclose(spec.Q, [[0.0, 1.0], [1.0, 0.0]])

    def test_gradient_consistent_after_symmetrizing(self):
        # for nonsymmetric input M the correct gradient of 0.5 x'Mx is
        # 0.5(M + M')x, which is what symmetrizing delivers via Qx
        M = np.array([[1.0, 3.0], [-1.0, 2.0]])
        spec = QcqpSpec(Q=M, q=[0.0, 0.0], Qj=(), qj=(), bj=(),
                        projection=WholeSpace())
        p = from_qcqp(spec)
        x = np.array([0.7, -1.3])
        err, ok = compare(p.objective_gradient(x), fd_gradient(p.objective, x))
        assert ok, err

    def test_dimension_checks(self):
        with pytest.raises(DimensionMismatch):
            QcqpSpec(Q=[[1.0, 0.0]], q=[0.0], Qj=(), qj=(), bj=(),
                     projection=WholeSpace())
        with pytest.raises(DimensionMismatch):
            QcqpSpec(Q=np.eye(2), q=[0.0, 0.0, 0.0], Qj=(), qj=(), bj=(),
                     projection=WholeSpace())
        with pytest.raises(DimensionMismatch):
            QcqpSpec(Q=np.eye(2), q=[0.0, 0.0], Qj=(np.eye(3),),
                     qj=([0.0, 0.0],), bj=(0.0,), projection=WholeSpace())


class TestFromQcqp:
    def test_zero_data_gives_zero_objective(self):
        spec = QcqpSpec(Q=np.zeros((3, 3)), q=np.zeros(3), Qj=(), qj=(), bj=(),
                        projection=WholeSpace())
        p = from_qcqp(spec)
        rng = np.random.default_rng(2)
        x = rng.standard_normal(3)
        assert p.objective(x) == 0.0
        assert_allclose(p.objective_gradient(x), np.zeros(3))
        assert p.constraints(x).shape == (0,)
        assert p.constraint_jacobian(x).shape == (0, 3)

    def test_random_specs_match_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n, m = 4, 3
            def sym():
                M = rng.standard_normal((n, n))
                return 0.5 * (M + M.T)
            spec = QcqpSpec(Q=sym(), q=rng.standard_normal(n),
                            Qj=tuple(sym() for _ in range(m)),
                            qj=tuple(rng.standard_normal(n) for _ in range(m)),
                            bj=tuple(rng.standard_normal(m)),
                            projection=WholeSpace())
            p = from_qcqp(spec)
            x = rng.uniform(-2.0, 2.0, n)
            err, ok = compare(p.objective_gradient(x), fd_gradient(p.objective, x),
                              rel_tol=1e-6)
            assert ok, err
            err, ok = compare(p.constraint_jacobian(x), fd_jacobian(p.constraints, x),
                              rel_tol=1e-6)
            assert ok, err


def test_builtins_registry_and_start_points():
    assert set(BUILTIN_PROBLEMS) == {"example1", "example2", "example3"}
    for name, factory in BUILTIN_PROBLEMS.items():
        p = factory()
        assert p.name == name
        assert len(DEFAULT_START[name]) == p.n


@pytest.mark.parametrize("name", sorted(BUILTIN_PROBLEMS))
def test_builtins_validate_at_default_start(name):
    report = validate(BUILTIN_PROBLEMS[name](), np.array(DEFAULT_START[name]))
    assert report.passed, report.summary()
