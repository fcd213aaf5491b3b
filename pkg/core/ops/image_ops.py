# core/ops/image_ops.py
"""
Детерминированные примитивы над изображениями и ядрами.

Соглашение проекта: оператор ⊛ - это взаимная корреляция (без отражения ядра)
с периодическим продолжением границ. Все функции чистые и не логируют.
"""
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from core.domain.tensors import as_image, as_kernel
from core.utils.error_handling import DimensionError, ParameterError

# Параметр кубической интерполяции Кейса (семейство Catmull-Rom)
BICUBIC_A = -0.5
SUPPORTED_SCALES = (1, 2, 3, 4)


def check_scale(s: int) -> int:
    if int(s) != s or s < 1:
        raise ParameterError(f"Масштаб должен быть целым >= 1, получено s={s}")
    return int(s)


def check_offset(offset: Tuple[int, int], s: int) -> Tuple[int, int]:
    oy, ox = int(offset[0]), int(offset[1])
    if not (0 <= oy < s and 0 <= ox < s):
        raise ParameterError(f"Смещение {offset} вне диапазона [0, {s})")
    return oy, ox


def check_divisible(x: np.ndarray, s: int):
    if x.shape[-2] % s or x.shape[-1] % s:
        raise DimensionError(f"Размер {x.shape[-2]}×{x.shape[-1]} не делится на масштаб {s}")


def conv2d_circular(x, kern) -> np.ndarray:
    """
    Циклическая взаимная корреляция каждого канала изображения с ядром.

    Args:
        x: Изображение (C, h, w)
        kern: Ядро (k, k), k нечётное, k <= min(h, w)

    Returns:
        Изображение той же формы
    """
    x = as_image(x)
    kern = as_kernel(kern)
    if kern.shape[0] > min(x.shape[1:]):
        raise DimensionError(f"Ядро {kern.shape[0]}×{kern.shape[0]} больше изображения {x.shape[1]}×{x.shape[2]}")
    return ndimage.correlate(x, kern[None], mode='wrap')


def conv2d_adjoint(x, kern) -> np.ndarray:
    """Сопряжённый к conv2d_circular оператор: корреляция с отражённым ядром."""
    kern = as_kernel(kern)
    return conv2d_circular(x, kern[::-1, ::-1])


def downsample(x, s: int, offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """Оставляет пиксели строк ≡ oy (mod s) и столбцов ≡ ox (mod s)."""
    x = as_image(x)
    s = check_scale(s)
    check_divisible(x, s)
    oy, ox = check_offset(offset, s)
    return np.ascontiguousarray(x[:, oy::s, ox::s])


def zero_upsample(y, s: int, offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """Сопряжённый к downsample оператор: пиксели на решётке шага s, нули в остальных позициях."""
    y = as_image(y)
    s = check_scale(s)
    oy, ox = check_offset(offset, s)
    c, h, w = y.shape
    out = np.zeros((c, h * s, w * s))
    out[:, oy::s, ox::s] = y
    return out


def pixel_unshuffle_view(x, s: int) -> np.ndarray:
    """
    Представление без копирования формы (C, s, s, h/s, w/s):
    элемент [c, i, j] - подрешётка x[c, i::s, j::s].
    """
    x = np.ascontiguousarray(as_image(x))
    s = check_scale(s)
    check_divisible(x, s)
    c, h, w = x.shape
    return x.reshape(c, h // s, s, w // s, s).transpose(0, 2, 4, 1, 3)


def pixel_unshuffle(x, s: int) -> np.ndarray:
    """
    Переводит подрешётки в каналы: канал c·s² + i·s + j равен x[c, i::s, j::s].

    Returns:
        Изображение (C·s², h/s, w/s)
    """
    view = pixel_unshuffle_view(x, s)
    c, _, _, hs, ws = view.shape
    return view.reshape(c * s * s, hs, ws)


def pixel_shuffle(x, s: int) -> np.ndarray:
    """Обратное к pixel_unshuffle преобразование: (C·s², h, w) -> (C, h·s, w·s)."""
    x = as_image(x)
    s = check_scale(s)
    cs, h, w = x.shape
    if cs % (s * s):
        raise DimensionError(f"Число каналов {cs} не делится на s²={s * s}")
    c = cs // (s * s)
    return np.ascontiguousarray(
        x.reshape(c, s, s, h, w).transpose(0, 3, 1, 4, 2).reshape(c, h * s, w * s)
    )


def circular_pad(x, pad: int) -> np.ndarray:
    """Периодическое продолжение на pad пикселей с каждой стороны (оператор P_a)."""
    x = as_image(x)
    if pad < 0:
        raise ParameterError(f"Отрицательная ширина паддинга: {pad}")
    if pad == 0:
        return x.copy()
    return np.pad(x, ((0, 0), (pad, pad), (pad, pad)), mode='wrap')


def im2col(x, a: int, same: bool = True) -> np.ndarray:
    """
    Развёртка скользящих окон a×a в строки матрицы.

    Args:
        x: Изображение (C, h, w)
        a: Нечётный размер окна
        same: При True изображение предварительно циклически дополняется на (a-1)/2,
              и строка p содержит окно с центром в пикселе p

    Returns:
        Массив (C, число окон, a·a); порядок элементов окна построчный
    """
    x = as_image(x)
    if a < 1 or a % 2 == 0:
        raise ParameterError(f"Размер окна im2col должен быть нечётным, получено a={a}")
    src = circular_pad(x, (a - 1) // 2) if same else x
    if min(src.shape[1:]) < a:
        raise DimensionError(f"Окно {a}×{a} больше изображения {src.shape[1]}×{src.shape[2]}")
    windows = sliding_window_view(src, (a, a), axis=(1, 2))
    c, oh, ow = windows.shape[:3]
    return windows.reshape(c, oh * ow, a * a)


def modcrop(x, s: int) -> np.ndarray:
    """Обрезает h и w до кратных s."""
    x = as_image(x)
    s = check_scale(s)
    _, h, w = x.shape
    return x[:, :h - h % s, :w - w % s].copy()


def fft2(x) -> np.ndarray:
    return np.fft.fft2(np.asarray(x, dtype=np.float64), axes=(-2, -1))


def ifft2(spectrum, real: bool = True) -> np.ndarray:
    out = np.fft.ifft2(spectrum, axes=(-2, -1))
    return out.real if real else out


def psf2otf(kern, h: int, w: int) -> np.ndarray:
    """
    Оптическая передаточная функция ядра на холсте h×w.

    Ядро кладётся на нулевой холст отражённым, затем циклически сдвигается так,
    что центральный элемент попадает в (0, 0). Поточечное произведение спектров
    тогда совпадает с conv2d_circular (взаимной корреляцией).
    """
    kern = as_kernel(kern)
    k = kern.shape[0]
    if k > min(h, w):
        raise DimensionError(f"Ядро {k}×{k} больше холста {h}×{w}")
    r = (k - 1) // 2
    canvas = np.zeros((h, w))
    canvas[:k, :k] = kern[::-1, ::-1]
    canvas = np.roll(canvas, (-r, -r), axis=(0, 1))
    return np.fft.fft2(canvas)


def _cubic(t: np.ndarray, a: float = BICUBIC_A) -> np.ndarray:
    t = np.abs(t)
    t2, t3 = t * t, t * t * t
    near = (a + 2) * t3 - (a + 3) * t2 + 1
    far = a * t3 - 5 * a * t2 + 8 * a * t - 4 * a
    return np.where(t <= 1, near, np.where(t < 2, far, 0.0))


def _bicubic_weights(n: int, s: int) -> np.ndarray:
    """Матрица (n·s, n): выходной отсчёт u берётся в точке u/s входной сетки."""
    u = np.arange(n * s)
    t = u / s
    base = np.floor(t).astype(int)
    weights = np.zeros((n * s, n))
    for m in range(-1, 3):
        idx = base + m
        wgt = _cubic(t - idx)
        np.add.at(weights, (u, np.clip(idx, 0, n - 1)), wgt)
    return weights


def bicubic_upsample(y, s: int) -> np.ndarray:
    """
    Бикубическое увеличение в s раз (ядро Кейса, a = -0.5, повторение краевых пикселей).

    Узлы интерполяции лежат в позициях s·i, поэтому downsample(результат, s) возвращает y.
    """
    y = as_image(y)
    s = check_scale(s)
    if s not in SUPPORTED_SCALES:
        raise ParameterError(f"Бикубическое увеличение поддерживает s из {SUPPORTED_SCALES}, получено s={s}")
    if s == 1:
        return y.copy()
    _, h, w = y.shape
    wy = _bicubic_weights(h, s)
    wx = _bicubic_weights(w, s)
    return np.einsum('ui,cij,vj->cuv', wy, y, wx)
