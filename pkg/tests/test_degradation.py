import numpy as np
import pytest

from core.degradation.degradation import (degrade, degrade_noiseless, make_rng, gen_gaussian_kernel,
                                          gen_random_kernel, random_envelope)
from core.degradation.kernel_pool import gen_kernel_pool
from core.domain.models import DegradationSpec, KernelPoolSpec
from core.domain.tensors import delta_kernel
from core.utils.error_handling import ParameterError, DataError
from core.utils.kernel_io import write_kernel, read_kernel


class TestDegrade:
    def test_delta_without_noise_is_identity(self, rng):
        x = rng.random((3, 8, 8))
        y = degrade(x, DegradationSpec(kernel=delta_kernel(3), s=1, sigma255=0.0))
        np.testing.assert_array_equal(y, x)

    def test_output_shape(self, rng):
        y = degrade(rng.random((1, 12, 12)), DegradationSpec(kernel=delta_kernel(5), s=3))
        assert y.shape == (1, 4, 4)

    def test_same_seed_same_noise(self, rng):
        x = rng.random((1, 8, 8))
        spec = DegradationSpec(kernel=delta_kernel(3), s=2, sigma255=5.0, seed=7, stream=3)
        np.testing.assert_array_equal(degrade(x, spec), degrade(x, spec))

    def test_streams_are_independent(self, rng):
        x = rng.random((1, 8, 8))
        first = degrade(x, DegradationSpec(kernel=delta_kernel(3), s=2, sigma255=5.0, seed=7, stream=0))
        second = degrade(x, DegradationSpec(kernel=delta_kernel(3), s=2, sigma255=5.0, seed=7, stream=1))
        assert not np.array_equal(first, second)

    def test_noise_level(self):
        x = np.zeros((1, 256, 256))
        y = degrade(x, DegradationSpec(kernel=delta_kernel(1), s=1, sigma255=10.0, seed=1))
        assert np.std(y) == pytest.approx(10.0 / 255.0, rel=0.05)

    def test_values_are_not_clipped(self):
        x = np.ones((1, 32, 32))
        y = degrade(x, DegradationSpec(kernel=delta_kernel(1), s=1, sigma255=25.0, seed=2))
        assert y.max() > 1.0 and y.min() < 1.0

    def test_noiseless_part_matches(self, rng):
        x = rng.random((1, 8, 8))
        kern = gen_gaussian_kernel(3, 1.0, 1.0)
        spec = DegradationSpec(kernel=kern, s=2, offset=(1, 0))
        np.testing.assert_array_equal(degrade(x, spec), degrade_noiseless(x, kern, 2, (1, 0)))

    def test_linear_without_noise(self, rng):
        x1, x2 = rng.random((2, 1, 16, 16))
        spec = DegradationSpec(kernel=gen_gaussian_kernel(5, 1.3, 0.8, 0.3), s=2)
        np.testing.assert_allclose(degrade(2.5 * x1 - 0.7 * x2, spec),
                                   2.5 * degrade(x1, spec) - 0.7 * degrade(x2, spec), atol=1e-12)

    def test_box_on_ramp(self):
        x = np.arange(16, dtype=float).reshape(1, 4, 4)
        y = degrade(x, DegradationSpec(kernel=np.full((3, 3), 1.0 / 9), s=2))
        # Окрестность пикселя (0, 0) с циклическим переносом: строки и столбцы 3, 0, 1
        expected = x[0][np.ix_([3, 0, 1], [3, 0, 1])].mean()
        assert y[0, 0, 0] == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("spec_kwargs", [{"s": 5}, {"sigma255": -1.0}])
    def test_invalid_parameters(self, rng, spec_kwargs):
        spec = DegradationSpec(kernel=delta_kernel(3), **spec_kwargs)
        with pytest.raises(ParameterError):
            degrade(rng.random((1, 20, 20)), spec)


class TestKernels:
    def test_gaussian_is_unit_sum_and_nonnegative(self):
        kern = gen_gaussian_kernel(11, 2.0, 1.0, 0.7)
        assert kern.sum() == pytest.approx(1.0)
        assert kern.min() >= 0.0

    def test_isotropic_gaussian_is_symmetric(self):
        kern = gen_gaussian_kernel(9, 1.5, 1.5)
        np.testing.assert_allclose(kern, kern.T, atol=1e-15)
        np.testing.assert_allclose(kern, kern[::-1, ::-1], atol=1e-15)

    def test_random_kernel_is_deterministic(self):
        first = gen_random_kernel(11, seed=3)
        np.testing.assert_array_equal(first, gen_random_kernel(11, seed=3))
        assert first.sum() == pytest.approx(1.0)
        assert first.min() >= 0.0

    def test_very_smooth_random_kernel_is_its_envelope(self):
        kern = gen_random_kernel(11, seed=3, smoothness=1e3)
        envelope = random_envelope(11, make_rng(3))
        assert np.corrcoef(kern.ravel(), envelope.ravel())[0, 1] >= 0.99

    def test_rng_streams_differ(self):
        assert make_rng(0, 0).random() != make_rng(0, 1).random()
        assert make_rng(5).random() == make_rng(5).random()


class TestKernelPool:
    @pytest.mark.parametrize("family", ["gauss-iso", "gauss-aniso", "random-nonparametric"])
    def test_pool_members_are_unit_sum(self, family):
        pool = gen_kernel_pool(KernelPoolSpec(family=family, k=7, count=4, seed=1))
        assert len(pool) == 4
        for kern in pool:
            assert kern.shape == (7, 7)
            assert kern.sum() == pytest.approx(1.0)
            assert kern.min() >= 0.0

    def test_pool_is_reproducible(self):
        spec = KernelPoolSpec(family="gauss-aniso", k=11, count=3, seed=9)
        for a, b in zip(gen_kernel_pool(spec), gen_kernel_pool(spec)):
            np.testing.assert_array_equal(a, b)

    def test_unknown_family(self):
        with pytest.raises(ParameterError):
            gen_kernel_pool(KernelPoolSpec(family="motion"))


class TestKernelFile:
    def test_written_kernel_reads_back_exactly(self, tmp_path):
        kern = gen_gaussian_kernel(5, 1.3, 0.9, 0.4)
        path = tmp_path / "k.txt"
        write_kernel(path, kern, comments=["seed 0"])
        np.testing.assert_array_equal(read_kernel(path), kern)
        assert path.read_text().splitlines()[-1] == "# seed 0"

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3\n1 0 0\n0 1\n0 0 1\n")
        with pytest.raises(DataError):
            read_kernel(path)

    def test_missing_rows_rejected(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("3\n1 0 0\n")
        with pytest.raises(DataError):
            read_kernel(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_kernel(tmp_path / "absent.txt")
