import logging

import numpy as np
import pytest

from core.domain.models import PriorConfig
from core.factories.prior_factory import PriorFactory
from core.priors.classical_priors import (classical_kernel_prior, classical_image_prior, ClassicalKernelPrior,
                                          ClassicalImagePrior, periodic_laplacian_symbol)
from core.priors.network_priors import NetworkKernelPrior, NetworkImagePrior
from core.runtime.network import random_network
from core.utils.error_handling import ParameterError, NetworkFormatError


def tiny_net_x(rng, image_channels=1):
    return random_network("NET_X", rng, weight_scale=0.1, channels=(4, 4, 4, 4), units_per_block=1,
                          image_channels=image_channels)


class TestClassicalKernelPrior:
    def test_projection_is_nonnegative_unit_sum(self, rng):
        kern = rng.standard_normal((7, 7))
        kern[3, 3] = 5.0
        out = classical_kernel_prior(kern)
        assert out.min() >= 0.0
        assert out.sum() == pytest.approx(1.0)

    def test_degenerate_kernel_becomes_flat(self):
        out = classical_kernel_prior(-np.ones((5, 5)))
        np.testing.assert_allclose(out, np.full((5, 5), 1.0 / 25))

    def test_without_normalization(self):
        kern = np.zeros((3, 3))
        kern[1, 1] = 2.0
        kern[0, 0] = -1.0
        out = ClassicalKernelPrior(unit_sum=False).apply(kern, 0.5)
        assert out[1, 1] == 2.0 and out[0, 0] == 0.0

    def test_describe(self):
        assert ClassicalKernelPrior().describe() == "kernel:classical"


class TestClassicalImagePrior:
    def test_mean_is_preserved(self, rng):
        x = rng.random((3, 12, 10))
        out = classical_image_prior(x, 0.5)
        np.testing.assert_allclose(out.mean(axis=(1, 2)), x.mean(axis=(1, 2)), atol=1e-12)

    def test_constant_image_unchanged(self):
        x = np.full((1, 8, 8), 0.4)
        np.testing.assert_allclose(classical_image_prior(x, 0.1), x, atol=1e-12)

    def test_zero_tau_is_identity(self, rng):
        x = rng.random((1, 8, 8))
        np.testing.assert_allclose(ClassicalImagePrior(tau=0.0).apply(x, 1.0), x, atol=1e-12)

    def test_smoothing_reduces_gradient_energy(self, rng):
        x = rng.random((1, 16, 16))
        out = classical_image_prior(x, 0.5)

        def energy(img):
            return np.sum(np.diff(img, axis=1) ** 2) + np.sum(np.diff(img, axis=2) ** 2)

        assert energy(out) < energy(x)

    def test_matches_dense_system(self, rng):
        h = w = 8
        tau, beta = 0.7, 0.3
        x = rng.random((1, h, w))
        laplacian = 4.0 * np.eye(h * w)
        for i in range(h):
            for j in range(w):
                p = i * w + j
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    laplacian[p, ((i + di) % h) * w + (j + dj) % w] -= 1.0
        expected = np.linalg.solve(tau * laplacian + beta * np.eye(h * w), beta * x.ravel())
        out = classical_image_prior(x, beta, tau=tau)
        np.testing.assert_allclose(out.ravel(), expected, atol=1e-8)

    @pytest.mark.parametrize("beta", [0.0, -1.0])
    def test_non_positive_beta(self, rng, beta):
        with pytest.raises(ParameterError):
            classical_image_prior(rng.random((1, 4, 4)), beta)

    def test_laplacian_symbol_has_single_zero(self):
        symbol = periodic_laplacian_symbol(6, 8)
        assert symbol[0, 0] == 0.0
        assert np.count_nonzero(np.isclose(symbol, 0.0)) == 1


class TestNetworkPriors:
    def test_kernel_prior_returns_unit_sum(self, rng):
        prior = NetworkKernelPrior(random_network("NET_K", rng, hidden=4))
        out = prior.apply(np.full((7, 7), 1.0 / 49), 0.3)
        assert out.shape == (7, 7)
        assert out.min() >= 0.0
        assert out.sum() == pytest.approx(1.0)
        assert prior.describe() == "kernel:network"

    def test_image_prior_keeps_shape_for_any_size(self, rng):
        prior = NetworkImagePrior(tiny_net_x(rng))
        x = rng.random((1, 12, 20))
        out = prior.apply(x, 0.1)
        assert out.shape == x.shape
        assert np.all(np.isfinite(out))

    def test_image_prior_channel_mismatch(self, rng):
        prior = NetworkImagePrior(tiny_net_x(rng, image_channels=1))
        with pytest.raises(NetworkFormatError):
            prior.apply(rng.random((3, 8, 8)), 0.1)

    def test_wrong_architecture_rejected(self, rng):
        hypanet = random_network("HYPANET", rng, hidden=4, stages=2)
        with pytest.raises(NetworkFormatError):
            NetworkKernelPrior(hypanet)
        with pytest.raises(NetworkFormatError):
            NetworkImagePrior(hypanet)


class TestPriorFactory:
    def test_classical_by_default(self, logger):
        kernel_prior, image_prior = PriorFactory.get_priors(PriorConfig(), logger)
        assert isinstance(kernel_prior, ClassicalKernelPrior)
        assert isinstance(image_prior, ClassicalImagePrior)

    def test_missing_weights_fall_back(self, logger, caplog):
        notes = []
        with caplog.at_level(logging.WARNING, logger='UDKE'):
            kernel_prior, image_prior = PriorFactory.get_priors(PriorConfig(kernel="network", image="network"),
                                                                logger, notes=notes)
        assert isinstance(kernel_prior, ClassicalKernelPrior)
        assert isinstance(image_prior, ClassicalImagePrior)
        assert len(notes) == 2
        assert any("NET_K" in record.message for record in caplog.records)

    def test_loaded_network_is_used(self, logger, rng):
        net_k = random_network("NET_K", rng, hidden=4)
        prior = PriorFactory.get_kernel_prior(PriorConfig(kernel="network"), logger, network=net_k)
        assert isinstance(prior, NetworkKernelPrior)

    def test_unknown_kind(self, logger):
        with pytest.raises(ParameterError):
            PriorFactory.get_kernel_prior(PriorConfig(kernel="dictionary"), logger)
