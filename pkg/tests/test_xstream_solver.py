import numpy as np
import pytest

from core.degradation.degradation import degrade_noiseless, gen_gaussian_kernel
from core.oracles.oracles import solve_x_oracle
from core.solvers.xstream_solver import solve_x_data, image_data_objective, data_gradient
from core.utils.error_handling import ParameterError, DimensionError

TRIALS = 3
GRID = [(size, k, s) for size in (8, 12, 16) for k in (3, 5) for s in (1, 2)]


def relative(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestImageSolve:
    @pytest.mark.parametrize("size,k,s", GRID)
    def test_matches_operator_oracle(self, rng, size, k, s):
        for _ in range(TRIALS):
            x_prev = rng.random((1, size, size))
            y = rng.random((1, size // s, size // s))
            kern = rng.random((k, k))
            kern /= kern.sum()
            alpha = float(rng.uniform(0.01, 1.0))
            fast = solve_x_data(y, kern, x_prev, alpha, s)
            assert relative(fast, solve_x_oracle(y, kern, x_prev, alpha, s)) <= 1e-6

    def test_multichannel_matches_oracle(self, rng):
        x_prev = rng.random((3, 12, 12))
        y = rng.random((3, 6, 6))
        kern = gen_gaussian_kernel(5, 1.2, 0.8, 0.3)
        assert relative(solve_x_data(y, kern, x_prev, 0.1, 2), solve_x_oracle(y, kern, x_prev, 0.1, 2)) <= 1e-6

    @pytest.mark.parametrize("s,offset", [(1, (0, 0)), (2, (0, 0)), (2, (1, 1)), (3, (2, 0))])
    def test_gradient_vanishes_at_solution(self, rng, s, offset):
        x_prev = rng.random((2, 12, 12))
        y = rng.random((2, 12 // s, 12 // s))
        kern = gen_gaussian_kernel(5, 1.5, 1.0, 0.6)
        x_new = solve_x_data(y, kern, x_prev, 0.05, s, offset)
        grad = data_gradient(y, kern, x_new, x_prev, 0.05, s, offset)
        assert np.linalg.norm(grad) <= 1e-8 * max(1.0, np.linalg.norm(y))

    def test_scale_is_inferred(self, rng):
        x_prev = rng.random((1, 12, 12))
        y = rng.random((1, 4, 4))
        kern = gen_gaussian_kernel(3, 1.0, 1.0)
        np.testing.assert_allclose(solve_x_data(y, kern, x_prev, 0.2), solve_x_data(y, kern, x_prev, 0.2, 3))

    def test_objective_does_not_increase(self, make_image, rng):
        x_gt = make_image(3, 16, 16)
        kern = gen_gaussian_kernel(5, 1.3, 1.3)
        y = degrade_noiseless(x_gt, kern, 2) + 0.01 * rng.standard_normal((3, 8, 8))
        x_prev = make_image(3, 16, 16)
        x_new = solve_x_data(y, kern, x_prev, 0.02, 2)
        before = image_data_objective(y, kern, x_prev, x_prev, 0.02, 2)
        after = image_data_objective(y, kern, x_new, x_prev, 0.02, 2)
        assert after <= before * (1 + 1e-9)

    @pytest.mark.parametrize("alpha", [0.0, -0.5])
    def test_non_positive_alpha_rejected(self, rng, alpha):
        with pytest.raises(ParameterError):
            solve_x_data(rng.random((1, 4, 4)), gen_gaussian_kernel(3, 1.0, 1.0), rng.random((1, 8, 8)), alpha, 2)

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionError):
            solve_x_data(rng.random((1, 5, 4)), gen_gaussian_kernel(3, 1.0, 1.0), rng.random((1, 8, 8)), 0.1, 2)

    def test_channel_mismatch(self, rng):
        with pytest.raises(DimensionError):
            solve_x_data(rng.random((3, 4, 4)), gen_gaussian_kernel(3, 1.0, 1.0), rng.random((1, 8, 8)), 0.1, 2)
