# core/metrics/metrics.py
import math

import numpy as np
from skimage.metrics import structural_similarity

from core.domain.tensors import as_image, as_kernel
from core.utils.error_handling import DimensionError, ParameterError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def rgb_to_luma(x) -> np.ndarray:
    """Яркость ITU-R BT.601 на единичной шкале (диапазон [16/255, 235/255]); одноканальные изображения не меняются."""
    x = as_image(x)
    if x.shape[0] == 1:
        return x
    if x.shape[0] != 3:
        raise DimensionError(f"Перевод в яркость требует 1 или 3 канала, получено {x.shape[0]}")
    return (16.0 + 65.481 * x[0] + 128.553 * x[1] + 24.966 * x[2])[None] / 255.0


def _prepare(a, b, shave: int, luma: bool):
    a, b = as_image(a, name="a"), as_image(b, name="b")
    if a.shape != b.shape:
        raise DimensionError(f"Формы изображений не совпадают: {a.shape} и {b.shape}")
    if shave < 0:
        raise ParameterError(f"Ширина обрезки не может быть отрицательной: {shave}")
    if luma:
        a, b = rgb_to_luma(a), rgb_to_luma(b)
    if shave:
        a, b = a[:, shave:-shave, shave:-shave], b[:, shave:-shave, shave:-shave]
        if a.size == 0:
            raise DimensionError(f"Обрезка {shave} не оставляет пикселей")
    return a, b


def _psnr_from_mse(mse: float, peak: float) -> float:
    if mse == 0:
        return math.inf
    return -10.0 * math.log10(mse / (peak * peak))


def psnr(a, b, peak: float = 1.0, shave: int = 0, luma: bool = False) -> float:
    """PSNR в дБ; +inf при совпадении изображений."""
    a, b = _prepare(a, b, shave, luma)
    return _psnr_from_mse(float(np.mean((a - b) ** 2)), peak)


def ssim(a, b, peak: float = 1.0, shave: int = 0, luma: bool = False) -> float:
    """
    Средний локальный SSIM с гауссовым окном 11×11 (σ = 1.5), C1 = (0.01·peak)², C2 = (0.03·peak)².

    Считается по каналам в области, где окно целиком лежит внутри изображения, и усредняется.
    """
    a, b = _prepare(a, b, shave, luma)
    if min(a.shape[1:]) < SSIM_WINDOW:
        raise DimensionError(f"SSIM требует изображение не меньше {SSIM_WINDOW}×{SSIM_WINDOW}, получено {a.shape[1:]}")
    scores = [
        structural_similarity(pa, pb, data_range=peak, gaussian_weights=True, sigma=SSIM_SIGMA,
                              use_sample_covariance=False, K1=0.01, K2=0.03)
        for pa, pb in zip(a, b)
    ]
    return float(np.mean(scores))


def kernel_psnr(k_est, k_gt) -> float:
    """PSNR между ядрами с пиком 1: ядра сравниваются поэлементно, без выравнивания и перенормировки."""
    k_est, k_gt = as_kernel(k_est, name="k_est"), as_kernel(k_gt, name="k_gt")
    if k_est.shape != k_gt.shape:
        raise DimensionError(f"Размеры ядер не совпадают: {k_est.shape} и {k_gt.shape}")
    return _psnr_from_mse(float(np.mean((k_est - k_gt) ** 2)), 1.0)

