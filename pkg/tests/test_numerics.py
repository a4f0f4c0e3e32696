import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayes_epi.exceptions import DimensionMismatchError, NotPositiveDefiniteError
from bayes_epi.numerics import cholesky, log1pexp, solve_spd, stable_sigmoid


class TestCholesky:
    def test_identity(self):
        f = cholesky(np.eye(3))
        np.testing.assert_array_equal(f.lower, np.eye(3))

    def test_two_by_two_factor(self):
        f = cholesky(np.array([[4.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(f.lower, [[2.0, 0.0], [1.0, math.sqrt(2)]])
        np.testing.assert_allclose(f.lower @ f.lower.T, [[4.0, 2.0], [2.0, 3.0]])

    def test_indefinite_rejected(self):
        # eigenvalues are 3 and -1
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_asymmetric_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(np.array([[1.0, 0.5], [0.1, 1.0]]))

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatchError):
            cholesky(np.ones((2, 3)))

    def test_reconstruction_random_spd(self):
        gen = np.random.default_rng(7)
        for _ in range(50):
            dim = int(gen.integers(1, 21))
            b = gen.standard_normal((dim, dim))
            a = b.T @ b + np.eye(dim)
            f = cholesky(a)
            err = np.linalg.norm(f.lower @ f.lower.T - a) / np.linalg.norm(a)
            assert err <= 1e-10

    def test_jitter_rescues_semidefinite(self):
        v = np.array([1.0, 2.0, 3.0])
        f = cholesky(np.outer(v, v))  # rank one, singular
        assert np.all(np.diag(f.lower) > 0)

    def test_logdet(self):
        a = np.array([[4.0, 2.0], [2.0, 3.0]])
        assert cholesky(a).logdet() == pytest.approx(np.log(np.linalg.det(a)))


class TestSolveSpd:
    def test_identity_system(self):
        f = cholesky(np.eye(2))
        np.testing.assert_array_equal(solve_spd(f, np.array([3.0, -1.0])), [3.0, -1.0])

    def test_two_by_two(self):
        f = cholesky(np.array([[4.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(solve_spd(f, np.array([10.0, 8.0])), [7 / 4, 3 / 2])

    def test_length_mismatch(self):
        f = cholesky(np.eye(2))
        with pytest.raises(DimensionMismatchError):
            solve_spd(f, np.ones(3))

    def test_recovers_solution_conditioned(self):
        gen = np.random.default_rng(11)
        for _ in range(30):
            dim = int(gen.integers(2, 15))
            b = gen.standard_normal((dim, dim))
            a = b.T @ b + np.eye(dim)
            if np.linalg.cond(a) > 1e6:
                continue
            x = gen.standard_normal(dim)
            rec = solve_spd(cholesky(a), a @ x)
            assert np.linalg.norm(rec - x) / np.linalg.norm(x) <= 1e-8


class TestStableSigmoid:
    def test_zero(self):
        assert stable_sigmoid(0.0) == 0.5

    def test_saturation(self):
        v = stable_sigmoid(500.0)
        assert 1 - 1e-12 < v <= 1.0
        assert stable_sigmoid(-500.0) >= 0.0

    def test_log_three(self):
        assert stable_sigmoid(math.log(3)) == pytest.approx(0.75, abs=1e-15)

    def test_symmetry_exact_bitwise(self):
        z = np.random.default_rng(3).uniform(-50, 50, 1000)
        for zi in z:
            assert stable_sigmoid(zi) + stable_sigmoid(-zi) == 1.0

    @given(st.floats(min_value=-700, max_value=700, allow_nan=False))
    def test_bounds_hold_everywhere(self, z):
        v = stable_sigmoid(z)
        assert 0.0 <= v <= 1.0

    def test_monotone(self):
        z = np.linspace(-60, 60, 5001)
        v = stable_sigmoid(z)
        assert np.all(np.diff(v) >= 0)

    def test_vectorized_matches_scalar(self):
        z = np.array([-3.0, 0.0, 2.5])
        np.testing.assert_array_equal(stable_sigmoid(z), [stable_sigmoid(x) for x in z])


class TestLog1pExp:
    def test_zero(self):
        assert log1pexp(0.0) == pytest.approx(math.log(2), rel=1e-15)

    def test_underflow_safe(self):
        v = log1pexp(-1000.0)
        assert 0.0 <= v <= 1e-300

    def test_dominant_branch(self):
        assert log1pexp(1000.0) == 1000.0

    def test_relative_accuracy_midrange(self):
        z = np.linspace(-30, 30, 2001)
        expected = np.log1p(np.exp(z))
        np.testing.assert_allclose(log1pexp(z), expected, rtol=1e-12)

    @settings(max_examples=200)
    @given(st.floats(min_value=-50, max_value=50, allow_nan=False))
    def test_branch_seams_continuous(self, z):
        # derivative of log1pexp is the sigmoid, bounded by 1
        h = 1e-6
        assert abs(log1pexp(z + h) - log1pexp(z)) <= 1.1 * h
