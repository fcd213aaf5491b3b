# core/utils/image_io.py
"""
Чтение и запись PNG. Внутреннее представление - float64 (C, h, w) на единичной шкале.
Экспорт: обрезка в [0, 1], затем floor(v·255 + 0.5) (округление половины вверх), 8 бит.
"""
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from core.domain.tensors import as_image
from core.utils.error_handling import DataError

IMAGE_SUFFIXES = (".png",)


def read_png(path: Path) -> np.ndarray:
    """
    Читает 8- или 16-битный PNG (серый, RGB, RGBA; альфа-канал отбрасывается).

    Returns:
        Массив (C, h, w), C = 1 или 3, значения в [0, 1]
    """
    path = Path(path)
    try:
        with PILImage.open(path) as img:
            img.load()
            mode = img.mode
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                data = np.asarray(img, dtype=np.float64) / 65535.0
            elif mode in ("L", "RGB"):
                data = np.asarray(img, dtype=np.float64) / 255.0
            elif mode in ("LA", "RGBA", "P", "1"):
                target = "L" if mode in ("LA", "1") else "RGB"
                data = np.asarray(img.convert(target), dtype=np.float64) / 255.0
            else:
                raise DataError(f"Неподдерживаемый режим PNG {mode}: {path}")
    except (OSError, ValueError) as e:
        raise DataError(f"Не удалось прочитать изображение {path}: {e}") from e

    if data.ndim == 2:
        data = data[None]
    else:
        data = np.ascontiguousarray(data.transpose(2, 0, 1))
    return as_image(data)


def quantize_8bit(x) -> np.ndarray:
    """Обрезка в [0, 1] и округление половины вверх: 0.5 -> 128."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return np.floor(x * 255.0 + 0.5).astype(np.uint8)


def write_png(path: Path, x) -> Path:
    """Записывает изображение (C, h, w) с C = 1 или 3 как 8-битный PNG."""
    path = Path(path)
    x = as_image(x)
    if x.shape[0] not in (1, 3):
        raise DataError(f"PNG поддерживает 1 или 3 канала, получено {x.shape[0]}")
    data = quantize_8bit(x)
    path.parent.mkdir(parents=True, exist_ok=True)
    if x.shape[0] == 1:
        PILImage.fromarray(data[0]).save(path)
    else:
        PILImage.fromarray(np.ascontiguousarray(data.transpose(1, 2, 0))).save(path)
    return path


def list_images(directory: Path) -> list:
    """Отсортированный список PNG в директории."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"Директория не найдена: {directory}")
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
