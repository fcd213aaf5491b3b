# core/priors/classical_priors.py
"""
Классические априорные операторы: работают без обученных весов.
"""
import logging
from typing import Optional

import numpy as np

from core.domain.tensors import as_image, as_kernel, flat_kernel
from core.ops.image_ops import fft2, ifft2
from core.priors.base_prior import BasePrior
from core.utils.error_handling import ParameterError

DEGENERATE_SUM = 1e-12


def classical_kernel_prior(k_in, beta_K: Optional[float] = None, unit_sum: bool = True) -> np.ndarray:
    """
    Проекция ядра: отрицательные элементы обнуляются, затем (в режиме unit_sum)
    ядро нормируется к сумме 1. Если сумма не больше 1e-12, возвращается плоское ядро 1/k².

    beta_K не влияет на проекцию и принимается для единообразия с сетевым оператором.
    """
    kern = np.clip(as_kernel(k_in), 0.0, None)
    total = kern.sum()
    if total <= DEGENERATE_SUM:
        return flat_kernel(kern.shape[0])
    return kern / total if unit_sum else kern


def periodic_laplacian_symbol(h: int, w: int) -> np.ndarray:
    """Спектр периодического оператора ∇ᵀ∇ (прямые разности): 4 − 2cos(2πu/h) − 2cos(2πv/w)."""
    u = np.arange(h)[:, None]
    v = np.arange(w)[None, :]
    return 4.0 - 2.0 * np.cos(2.0 * np.pi * u / h) - 2.0 * np.cos(2.0 * np.pi * v / w)


def classical_image_prior(x_in, beta_X: float, tau: float = 0.5) -> np.ndarray:
    """
    argmin_X (τ/2)‖∇X‖² + (β_X/2)‖X − X_in‖², решение в частотной области.

    Среднее по каждому каналу сохраняется: постоянная составляющая лежит в ядре лапласиана.
    """
    if not beta_X > 0:
        raise ParameterError(f"beta_X должен быть положительным, получено {beta_X}")
    if tau < 0:
        raise ParameterError(f"tau не может быть отрицательным: {tau}")
    x_in = as_image(x_in)
    mean = x_in.mean(axis=(1, 2), keepdims=True)
    centered = x_in - mean
    _, h, w = x_in.shape
    symbol = periodic_laplacian_symbol(h, w)
    return ifft2(beta_X * fft2(centered) / (tau * symbol + beta_X)) + mean


class ClassicalKernelPrior(BasePrior):
    kind = "kernel"
    backing = "classical"

    def __init__(self, unit_sum: bool = True, logger: Optional[logging.Logger] = None):
        super().__init__(logger)
        self.unit_sum = unit_sum

    def apply(self, x: np.ndarray, beta: float) -> np.ndarray:
        return classical_kernel_prior(x, beta, unit_sum=self.unit_sum)

    def __repr__(self):
        return f"ClassicalKernelPrior(unit_sum={self.unit_sum})"


class ClassicalImagePrior(BasePrior):
    kind = "image"
    backing = "classical"

    def __init__(self, tau: float = 0.5, logger: Optional[logging.Logger] = None):
        super().__init__(logger)
        self.tau = tau

    def apply(self, x: np.ndarray, beta: float) -> np.ndarray:
        return classical_image_prior(x, beta, tau=self.tau)

    def __repr__(self):
        return f"ClassicalImagePrior(tau={self.tau})"
