# core/solvers/xstream_solver.py
"""
Явное решение задачи данных для изображения:

    X′ = argmin_X ½‖(K⊛X)↓_s − Y‖² + (α_X/2)‖X − X_prev‖²

в частотной области при циклических граничных условиях.
"""
from typing import Optional, Tuple

import numpy as np

from core.degradation.degradation import degrade_noiseless
from core.domain.tensors import as_image, as_kernel
from core.ops.image_ops import (conv2d_adjoint, fft2, ifft2, psf2otf, zero_upsample,
                                check_offset, check_scale)
from core.solvers.kstream_solver import infer_scale
from core.utils.error_handling import DimensionError, ParameterError


def _block_mean(spectrum: np.ndarray, s: int) -> np.ndarray:
    """Среднее по s×s блокам спектра (наложение частот при прореживании)."""
    c, h, w = spectrum.shape
    return spectrum.reshape(c, s, h // s, s, w // s).mean(axis=(1, 3))


def _solve_aligned(y: np.ndarray, kern: np.ndarray, x_prev: np.ndarray, alpha: float, s: int) -> np.ndarray:
    _, h, w = x_prev.shape
    otf = psf2otf(kern, h, w)
    otf_conj = np.conj(otf)
    otf_power = np.abs(otf) ** 2

    if s == 1:
        z = otf_conj * fft2(y) + alpha * fft2(x_prev)
        return ifft2(z / (otf_power + alpha))

    fr = otf_conj * fft2(zero_upsample(y, s)) + alpha * fft2(x_prev)
    fbr = _block_mean(otf[None] * fr, s)
    inv_w = _block_mean(otf_power[None], s)
    correction = otf_conj * np.tile(fbr / (inv_w + alpha), (1, s, s))
    return ifft2((fr - correction) / alpha)


def solve_x_data(y, kern, x_prev, alpha_X: float, s: Optional[int] = None,
                 offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """
    Точный минимизатор задачи данных для изображения.

    При s = 1 решение - поточечное деление спектров Z / (|O|² + α) с Z = Ō·Ŷ + α·X̂_prev.
    При s > 1 используется разложение спектра на s×s блоков наложения (формула Вудбери
    с усреднением по блокам). Ненулевое смещение решётки сводится к нулевому циклическим сдвигом.

    Args:
        y: LR-наблюдение (C, h/s, w/s)
        kern: Ядро (k, k)
        x_prev: Проксимальная точка (C, h, w)
        alpha_X: Вес проксимального члена, > 0
        s: Масштаб; по умолчанию выводится из форм
        offset: Фаза прореживания

    Returns:
        Изображение (C, h, w)
    """
    if not alpha_X > 0:
        raise ParameterError(f"alpha_X должен быть положительным, получено {alpha_X}")
    y = as_image(y, name="y")
    x_prev = as_image(x_prev, name="x_prev")
    kern = as_kernel(kern)
    s = infer_scale(x_prev, y) if s is None else check_scale(s)
    c, h, w = x_prev.shape
    if y.shape != (c, h // s, w // s) or h % s or w % s:
        raise DimensionError(f"Наблюдение {y.shape} не согласовано с x_prev {x_prev.shape} и масштабом {s}")
    oy, ox = check_offset(offset, s)

    if (oy, ox) == (0, 0):
        return _solve_aligned(y, kern, x_prev, alpha_X, s)
    shifted_prev = np.roll(x_prev, (-oy, -ox), axis=(1, 2))
    solution = _solve_aligned(y, kern, shifted_prev, alpha_X, s)
    return np.roll(solution, (oy, ox), axis=(1, 2))


def image_data_objective(y, kern, x, x_ref, alpha: float, s: int, offset: Tuple[int, int] = (0, 0)) -> float:
    """½‖(K⊛X)↓_s − Y‖² + (α/2)‖X − X_ref‖²."""
    residual = degrade_noiseless(x, kern, s, offset) - as_image(y, name="y")
    proximal = as_image(x) - as_image(x_ref, name="x_ref")
    return 0.5 * float(np.sum(residual ** 2)) + 0.5 * alpha * float(np.sum(proximal ** 2))


def data_gradient(y, kern, x, x_ref, alpha: float, s: int, offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """Градиент α(X − X_ref) + A*(A·X − Y), где A = downsample∘conv, A* = conv_adjoint∘zero_upsample."""
    residual = degrade_noiseless(x, kern, s, offset) - as_image(y, name="y")
    back = conv2d_adjoint(zero_upsample(residual, s, offset), kern)
    return alpha * (as_image(x) - as_image(x_ref, name="x_ref")) + back
