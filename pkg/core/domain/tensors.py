# core/domain/tensors.py
"""
Носители данных решателя.

Image    - numpy.ndarray float64 формы (C, h, w); 2-D массив трактуется как C = 1.
Kernel   - numpy.ndarray float64 формы (k, k), k нечётное.
Spectrum - numpy.ndarray complex128 формы (..., h, w).
"""
import numpy as np

from core.utils.error_handling import DimensionError, ParameterError


def as_image(x, name: str = "image") -> np.ndarray:
    """
    Приводит массив к носителю Image и проверяет его инварианты.

    Args:
        x: Массив формы (h, w) или (C, h, w)
        name: Имя аргумента для сообщений об ошибках

    Returns:
        Массив float64 формы (C, h, w)
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise DimensionError(f"{name}: ожидается массив (C, h, w), получена размерность {arr.ndim}")
    if min(arr.shape) < 1:
        raise DimensionError(f"{name}: пустая размерность {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name}: содержит нечисловые значения")
    return arr


def as_kernel(kern, name: str = "kernel") -> np.ndarray:
    arr = np.asarray(kern, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name}: ожидается квадратная матрица k×k, получено {arr.shape}")
    if arr.shape[0] % 2 == 0:
        raise ParameterError(f"{name}: размер ядра должен быть нечётным, получено k={arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name}: содержит нечисловые значения")
    return arr


def flat_kernel(k: int) -> np.ndarray:
    """Плоское ядро 1/k², начальное приближение K_0."""
    if k < 1 or k % 2 == 0:
        raise ParameterError(f"Размер ядра должен быть нечётным и положительным, получено k={k}")
    return np.full((k, k), 1.0 / (k * k))


def delta_kernel(k: int) -> np.ndarray:
    """Центрированная дельта (тождественное ядро)."""
    kern = np.zeros((k, k))
    kern[k // 2, k // 2] = 1.0
    return as_kernel(kern)
