import numpy as np
import pytest

from core.domain.tensors import as_image, as_kernel, delta_kernel, flat_kernel
from core.ops.image_ops import (conv2d_circular, conv2d_adjoint, downsample, zero_upsample, pixel_unshuffle,
                                pixel_unshuffle_view, pixel_shuffle, circular_pad, im2col, modcrop, fft2, ifft2,
                                psf2otf, bicubic_upsample)
from core.oracles.oracles import conv_direct, patch_matrix
from core.utils.error_handling import DimensionError, ParameterError


class TestCarriers:
    def test_two_dimensional_array_is_promoted(self):
        assert as_image(np.zeros((4, 5))).shape == (1, 4, 5)

    def test_non_finite_image_rejected(self):
        x = np.zeros((1, 4, 4))
        x[0, 1, 1] = np.nan
        with pytest.raises(ParameterError):
            as_image(x)

    def test_even_kernel_rejected(self):
        with pytest.raises(ParameterError):
            as_kernel(np.ones((4, 4)))

    def test_non_square_kernel_rejected(self):
        with pytest.raises(DimensionError):
            as_kernel(np.ones((3, 5)))

    def test_flat_kernel_sums_to_one(self):
        assert flat_kernel(7).sum() == pytest.approx(1.0)


class TestConvolution:
    def test_delta_kernel_is_identity(self, rng):
        x = rng.random((2, 9, 7))
        np.testing.assert_array_equal(conv2d_circular(x, delta_kernel(5)), x)

    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_matches_direct_summation(self, rng, k):
        x = rng.random((2, 8, 10))
        kern = rng.random((k, k))
        np.testing.assert_allclose(conv2d_circular(x, kern), conv_direct(x, kern), rtol=1e-12, atol=1e-12)

    def test_is_cross_correlation(self):
        # Ядро с единицей справа от центра читает соседа справа
        x = np.arange(25, dtype=float).reshape(1, 5, 5)
        kern = np.zeros((3, 3))
        kern[1, 2] = 1.0
        np.testing.assert_array_equal(conv2d_circular(x, kern), np.roll(x, -1, axis=2))

    def test_adjoint_identity(self, rng):
        x = rng.random((1, 8, 8))
        y = rng.random((1, 8, 8))
        kern = rng.random((3, 3))
        lhs = np.sum(conv2d_circular(x, kern) * y)
        rhs = np.sum(x * conv2d_adjoint(y, kern))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_kernel_larger_than_image(self):
        with pytest.raises(DimensionError):
            conv2d_circular(np.zeros((1, 4, 4)), np.ones((5, 5)))

    def test_spectral_product_matches_spatial(self, rng):
        x = rng.random((1, 12, 10))
        kern = rng.random((5, 5))
        spectral = ifft2(psf2otf(kern, 12, 10) * fft2(x))
        np.testing.assert_allclose(spectral, conv2d_circular(x, kern), atol=1e-12)

    def test_parseval(self, rng):
        x = rng.random((2, 9, 12))
        energy = np.sum(np.abs(fft2(x)) ** 2) / (9 * 12)
        assert energy == pytest.approx(np.sum(x ** 2), rel=1e-12)


class TestSampling:
    def test_downsample_offset(self):
        x = np.arange(16, dtype=float).reshape(1, 4, 4)
        np.testing.assert_array_equal(downsample(x, 2, (1, 0)), x[:, 1::2, 0::2])

    def test_zero_upsample_is_adjoint(self, rng):
        x = rng.random((1, 6, 6))
        y = rng.random((1, 3, 3))
        lhs = np.sum(downsample(x, 2, (1, 1)) * y)
        rhs = np.sum(x * zero_upsample(y, 2, (1, 1)))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_non_divisible_rejected(self):
        with pytest.raises(DimensionError):
            downsample(np.zeros((1, 5, 4)), 2)

    def test_offset_out_of_range(self):
        with pytest.raises(ParameterError):
            downsample(np.zeros((1, 4, 4)), 2, (2, 0))

    def test_modcrop(self):
        assert modcrop(np.zeros((3, 13, 10)), 4).shape == (3, 12, 8)


class TestPixelShuffle:
    def test_channel_order(self, rng):
        x = rng.random((2, 6, 6))
        out = pixel_unshuffle(x, 3)
        assert out.shape == (18, 2, 2)
        for c in range(2):
            for i in range(3):
                for j in range(3):
                    np.testing.assert_array_equal(out[c * 9 + i * 3 + j], x[c, i::3, j::3])

    def test_shuffle_inverts_unshuffle(self, rng):
        x = rng.random((3, 8, 12))
        np.testing.assert_array_equal(pixel_shuffle(pixel_unshuffle(x, 4), 4), x)

    def test_view_shares_memory(self, rng):
        x = rng.random((1, 8, 8))
        view = pixel_unshuffle_view(x, 2)
        assert view.shape == (1, 2, 2, 4, 4)
        assert np.shares_memory(view, x)

    def test_channel_count_must_divide(self):
        with pytest.raises(DimensionError):
            pixel_shuffle(np.zeros((3, 2, 2)), 2)


class TestWindows:
    def test_circular_pad(self, rng):
        x = rng.random((1, 4, 5))
        padded = circular_pad(x, 2)
        assert padded.shape == (1, 8, 9)
        np.testing.assert_array_equal(padded[:, 2:-2, 2:-2], x)
        np.testing.assert_array_equal(padded[:, 0, 2:-2], x[:, -2])

    def test_same_windows_are_centered(self, rng):
        x = rng.random((2, 6, 7))
        cols = im2col(x, 3)
        assert cols.shape == (2, 42, 9)
        for c in range(2):
            np.testing.assert_array_equal(cols[c], patch_matrix(x[c], 3))

    def test_valid_windows(self, rng):
        x = rng.random((1, 6, 7))
        cols = im2col(x, 3, same=False)
        assert cols.shape == (1, 4 * 5, 9)
        np.testing.assert_array_equal(cols[0, 0], x[0, :3, :3].reshape(-1))

    def test_even_window_rejected(self):
        with pytest.raises(ParameterError):
            im2col(np.zeros((1, 4, 4)), 2)


class TestBicubic:
    @pytest.mark.parametrize("s", [2, 3, 4])
    def test_nodes_are_interpolated(self, rng, s):
        y = rng.random((2, 5, 6))
        np.testing.assert_allclose(downsample(bicubic_upsample(y, s), s), y, atol=1e-12)

    def test_constant_is_preserved(self):
        y = np.full((1, 4, 4), 0.3)
        np.testing.assert_allclose(bicubic_upsample(y, 3), 0.3, atol=1e-12)

    def test_ramp_is_reproduced_inside(self):
        y = np.tile(np.arange(8, dtype=float), (8, 1))[None]
        out = bicubic_upsample(y, 2)
        # Вдали от края четыре узла опоры не задевают повтор краевых пикселей
        interior = out[:, :, 2:12]
        np.testing.assert_allclose(interior, np.broadcast_to(np.arange(2, 12) / 2.0, interior.shape), atol=1e-12)

    def test_unsupported_scale(self):
        with pytest.raises(ParameterError):
            bicubic_upsample(np.zeros((1, 4, 4)), 5)
