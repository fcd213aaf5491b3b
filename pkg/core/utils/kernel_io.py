# core/utils/kernel_io.py
"""
Текстовый формат ядра: первая строка - целое k, далее k строк по k чисел через пробел
(17 значащих цифр), затем необязательные строки комментариев, начинающиеся с '#'.
"""
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from core.domain.tensors import as_kernel
from core.utils.error_handling import DataError, UDKEError


def format_kernel(kern, comments: Optional[Iterable[str]] = None) -> str:
    kern = as_kernel(kern)
    lines = [str(kern.shape[0])]
    lines += [" ".join(f"{value:.17g}" for value in row) for row in kern]
    for comment in comments or []:
        lines.append(f"# {comment}")
    return "\n".join(lines) + "\n"


def write_kernel(path: Path, kern, comments: Optional[Iterable[str]] = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_kernel(kern, comments), encoding='utf-8')


def read_kernel(path: Path) -> np.ndarray:
    """
    Читает ядро из текстового файла.

    Raises:
        DataError: Файл отсутствует, пуст или не соответствует формату
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise DataError(f"Не удалось прочитать файл ядра {path}: {e}") from e

    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith('#')]
    if not lines:
        raise DataError(f"Пустой файл ядра: {path}")
    try:
        k = int(lines[0])
        if k < 1 or len(lines) - 1 < k:
            raise DataError(f"Файл ядра {path}: объявлено k={k}, строк данных {len(lines) - 1}")
        rows = [[float(value) for value in line.split()] for line in lines[1:k + 1]]
    except ValueError as e:
        raise DataError(f"Файл ядра {path}: некорректное число ({e})") from e
    if any(len(row) != k for row in rows):
        raise DataError(f"Файл ядра {path}: в каждой строке должно быть {k} значений")
    try:
        return as_kernel(np.array(rows))
    except UDKEError as e:
        raise DataError(f"Файл ядра {path}: {e}") from e
