# core/priors/network_priors.py
import logging
from typing import Optional

import numpy as np

from core.domain.tensors import as_image, as_kernel
from core.priors.base_prior import BasePrior
from core.priors.classical_priors import classical_kernel_prior
from core.runtime.network import Network, forward
from core.utils.error_handling import NetworkFormatError

# NET_X понижает разрешение три раза с шагом 2
NET_X_MULTIPLE = 8


def _with_beta(x: np.ndarray, beta: float, enabled: bool) -> np.ndarray:
    """Добавляет β постоянным дополнительным каналом."""
    if not enabled:
        return x
    return np.concatenate([x, np.full((1,) + x.shape[1:], beta)], axis=0)


class NetworkKernelPrior(BasePrior):
    """
    Априорный шаг ядра через NET_K. Выход сети неотрицателен (завершающий ReLU);
    в режиме unit_sum результат дополнительно нормируется той же проекцией, что и классический оператор.
    """
    kind = "kernel"
    backing = "network"

    def __init__(self, network: Network, unit_sum: bool = True, logger: Optional[logging.Logger] = None):
        super().__init__(logger)
        if network.architecture not in ("NET_K", "CUSTOM"):
            raise NetworkFormatError(f"Для априорного шага ядра нужна сеть NET_K, получена {network.architecture}")
        self.network = network
        self.unit_sum = unit_sum

    def apply(self, x: np.ndarray, beta: float) -> np.ndarray:
        kern = as_kernel(x)
        out = forward(self.network, _with_beta(kern[None], beta, self.network.beta_input))
        if out.shape != (1,) + kern.shape:
            raise NetworkFormatError(f"NET_K вернула форму {out.shape}, ожидается {(1,) + kern.shape}")
        return classical_kernel_prior(out[0], beta, unit_sum=self.unit_sum)

    def __repr__(self):
        return f"NetworkKernelPrior(network={self.network}, unit_sum={self.unit_sum})"


class NetworkImagePrior(BasePrior):
    """
    Априорный шаг изображения через NET_X. Вход дополняется повтором краёв до кратного 8
    размера и после прохода обрезается обратно.
    """
    kind = "image"
    backing = "network"

    def __init__(self, network: Network, logger: Optional[logging.Logger] = None):
        super().__init__(logger)
        if network.architecture not in ("NET_X", "CUSTOM"):
            raise NetworkFormatError(f"Для априорного шага изображения нужна сеть NET_X, получена {network.architecture}")
        self.network = network

    def apply(self, x: np.ndarray, beta: float) -> np.ndarray:
        x = as_image(x)
        c, h, w = x.shape
        pad_h = (-h) % NET_X_MULTIPLE
        pad_w = (-w) % NET_X_MULTIPLE
        padded = np.pad(x, ((0, 0), (0, pad_h), (0, pad_w)), mode='edge')
        out = forward(self.network, _with_beta(padded, beta, self.network.beta_input))
        if out.shape[0] != c:
            raise NetworkFormatError(f"NET_X вернула {out.shape[0]} каналов, ожидается {c}")
        return out[:, :h, :w]

    def __repr__(self):
        return f"NetworkImagePrior(network={self.network})"
