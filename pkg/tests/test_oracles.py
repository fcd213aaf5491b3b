import numpy as np
import pytest

from core.oracles.oracles import (patch_matrix, selection_matrix, gram_bruteforce, rhs_bruteforce, gram_entry_direct,
                                  conv_matrix, conv_direct, MAX_ORACLE_ENTRIES)
from core.utils.error_handling import OracleSizeError, DimensionError


class TestOperatorMatrices:
    def test_patch_matrix_center_column_is_image(self, rng):
        plane = rng.random((6, 7))
        patches = patch_matrix(plane, 5)
        assert patches.shape == (42, 25)
        np.testing.assert_array_equal(patches[:, 12], plane.reshape(-1))

    def test_patch_matrix_wraps(self):
        plane = np.arange(16, dtype=float).reshape(4, 4)
        # окно с центром (0, 0): левый верхний угол берётся из (3, 3)
        assert patch_matrix(plane, 3)[0, 0] == plane[3, 3]

    def test_selection_matrix(self):
        select = selection_matrix(4, 6, 2)
        assert select.shape == (6, 24)
        picked = select @ np.arange(24, dtype=float)
        np.testing.assert_array_equal(picked, np.arange(24, dtype=float).reshape(4, 6)[::2, ::2].reshape(-1))

    def test_selection_requires_divisibility(self):
        with pytest.raises(DimensionError):
            selection_matrix(5, 4, 2)

    def test_conv_matrix_matches_direct(self, rng):
        x = rng.random((7, 9))
        kern = rng.random((3, 3))
        np.testing.assert_allclose((conv_matrix(kern, 7, 9) @ x.reshape(-1)).reshape(7, 9),
                                   conv_direct(x, kern)[0], rtol=1e-12)


class TestBruteForce:
    def test_gram_is_symmetric_psd(self, rng):
        gram = gram_bruteforce(rng.random((2, 8, 8)), 5, 2)
        np.testing.assert_allclose(gram, gram.T, atol=1e-12)
        assert np.linalg.eigvalsh(gram).min() >= -1e-9

    def test_entry_agrees_with_matrix(self, rng):
        x = rng.random((1, 9, 9))
        gram = gram_bruteforce(x, 3, 3)
        assert gram[2, 7] == pytest.approx(gram_entry_direct(x, 3, 3, 2, 7), rel=1e-12)

    def test_rhs_rejects_wrong_observation(self, rng):
        with pytest.raises(DimensionError):
            rhs_bruteforce(rng.random((1, 8, 8)), rng.random((1, 3, 3)), 3, 2)

    def test_refuses_large_problems(self):
        assert 1000 * 1000 * 11 * 11 > MAX_ORACLE_ENTRIES
        with pytest.raises(OracleSizeError):
            gram_bruteforce(np.zeros((1, 1000, 1000)), 11, 2)
        with pytest.raises(MemoryError):
            gram_entry_direct(np.zeros((1, 1000, 1000)), 11, 2, 0, 0)
