# core/degradation/degradation.py
"""
Синтез LR-наблюдений по модели Y = (K⊛X)↓_s + n и генерация ядер размытия.
"""
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from core.domain.models import DegradationSpec
from core.domain.tensors import as_image, as_kernel
from core.ops.image_ops import conv2d_circular, downsample, SUPPORTED_SCALES
from core.utils.error_handling import ParameterError


def make_rng(seed: int, stream: Optional[int] = None) -> np.random.Generator:
    """
    Переносимый счётчиковый генератор (Philox).

    Args:
        seed: Базовый сид
        stream: Номер независимого потока (например, индекс изображения в пакете)
    """
    if stream is None:
        sequence = np.random.SeedSequence(seed)
    else:
        sequence = np.random.SeedSequence(seed, spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(sequence))


def degrade_noiseless(x_hr, kern, s: int, offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """Линейная часть модели деградации: (K⊛X)↓_s."""
    return downsample(conv2d_circular(x_hr, kern), s, offset)


def degrade(x_hr, spec: DegradationSpec) -> np.ndarray:
    """
    Синтезирует LR-наблюдение. Значения не обрезаются: обрезка выполняется только при экспорте в PNG.

    Args:
        x_hr: HR-изображение (C, h, w), h и w кратны s
        spec: Параметры деградации

    Returns:
        LR-изображение (C, h/s, w/s)
    """
    if spec.s not in SUPPORTED_SCALES:
        raise ParameterError(f"Масштаб должен быть из {SUPPORTED_SCALES}, получено s={spec.s}")
    if spec.sigma255 < 0:
        raise ParameterError(f"СКО шума не может быть отрицательным: {spec.sigma255}")
    y = degrade_noiseless(as_image(x_hr), spec.kernel, spec.s, spec.offset)
    if spec.sigma255 > 0:
        rng = make_rng(spec.seed, spec.stream)
        y = y + rng.standard_normal(y.shape) * (spec.sigma255 / 255.0)
    return y


def sigma_matrix2(sigma_x: float, sigma_y: float, theta: float) -> np.ndarray:
    """Ковариационная матрица повёрнутого гауссиана: U·diag(σx², σy²)·Uᵀ."""
    d = np.array([[sigma_x ** 2, 0.0], [0.0, sigma_y ** 2]])
    u = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    return u @ d @ u.T


def mesh_grid(k: int) -> np.ndarray:
    """Сетка координат (k, k, 2) с нулём в центре ядра; последняя ось - (x, y)."""
    ax = np.arange(-(k - 1) / 2.0, (k - 1) / 2.0 + 1.0)
    xx, yy = np.meshgrid(ax, ax)
    return np.stack((xx, yy), axis=-1)


def gen_gaussian_kernel(k: int, sigma_x: float, sigma_y: float, theta: float = 0.0) -> np.ndarray:
    """
    Анизотропное гауссово ядро k×k с центром в ((k-1)/2, (k-1)/2), нормированное к сумме 1.

    Args:
        k: Нечётный размер ядра
        sigma_x: Ширина вдоль главной оси
        sigma_y: Ширина вдоль второй оси
        theta: Угол поворота в радианах
    """
    if sigma_x <= 0 or sigma_y <= 0:
        raise ParameterError(f"Ширины гауссиана должны быть положительными: sigma_x={sigma_x}, sigma_y={sigma_y}")
    if k < 1 or k % 2 == 0:
        raise ParameterError(f"Размер ядра должен быть нечётным, получено k={k}")
    inverse = np.linalg.inv(sigma_matrix2(sigma_x, sigma_y, theta))
    grid = mesh_grid(k)
    kern = np.exp(-0.5 * np.einsum('ijm,mn,ijn->ij', grid, inverse, grid))
    return as_kernel(kern / kern.sum())


def random_envelope(k: int, rng: np.random.Generator) -> np.ndarray:
    """Случайная анизотропная гауссова огибающая (ширины из [0.6, k/3], угол из [0, π))."""
    upper = max(k / 3.0, 0.8)
    sigma_x, sigma_y = rng.uniform(0.6, upper, size=2)
    theta = rng.uniform(0.0, np.pi)
    return gen_gaussian_kernel(k, float(sigma_x), float(sigma_y), float(theta))


def gen_random_kernel(k: int, seed: int, smoothness: float = 1.0, stream: Optional[int] = None) -> np.ndarray:
    """
    Гладкое случайное непараметрическое ядро.

    Экспоненциальное поле k×k сглаживается периодическим гауссианом ширины smoothness,
    умножается на случайную анизотропную огибающую и нормируется. Огибающая
    выбирается первой из того же потока ГСЧ.
    """
    if smoothness < 0:
        raise ParameterError(f"Параметр гладкости не может быть отрицательным: {smoothness}")
    rng = make_rng(seed, stream)
    envelope = random_envelope(k, rng)
    field = rng.exponential(1.0, size=(k, k))
    if smoothness > 0:
        field = np.fft.ifft2(ndimage.fourier_gaussian(np.fft.fft2(field), sigma=smoothness)).real
    field = np.clip(field, 0.0, None)
    kern = field * envelope
    total = kern.sum()
    if total <= 1e-12:
        return envelope
    return as_kernel(kern / total)
