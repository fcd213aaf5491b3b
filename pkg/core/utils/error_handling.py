# core/utils/error_handling.py
import json
import logging
from typing import Optional


class UDKEError(Exception):
    """Базовое исключение всех ошибок решателя UDKE."""


class DimensionError(UDKEError, ValueError):
    """Несогласованные размеры изображений, ядер или нарушение делимости на масштаб."""


class ParameterError(UDKEError, ValueError):
    """Недопустимое скалярное значение параметра (alpha <= 0, чётный размер блока и т.п.)."""


class SingularSystemError(UDKEError, ArithmeticError):
    """
    Разложение Холецкого не удалось даже после эскалации ridge-регуляризации.

    Attributes:
        condition: Оценка числа обусловленности последней попытки
        ridge: Значение ridge, с которым была сделана последняя попытка
    """
    def __init__(self, message: str, condition: float, ridge: float):
        super().__init__(message)
        self.condition = condition
        self.ridge = ridge


class OracleSizeError(UDKEError, MemoryError):
    """Эталонная (brute-force) реализация вызвана на задаче не настольного масштаба."""


class NetworkFormatError(UDKEError, ValueError):
    """Манифест или blob весов сети повреждены либо не совпадают с архитектурой."""


class DataError(UDKEError):
    """Пустые директории, нечитаемые файлы ядер или изображений."""


class StageError(UDKEError):
    """
    Ошибка решателя внутри этапа развёртки.

    Attributes:
        stage: Номер этапа (с 1)
        cause: Исходное исключение
    """
    def __init__(self, stage: int, cause: Exception):
        super().__init__(f"этап {stage}: {cause}")
        self.stage = stage
        self.cause = cause


# Коды выхода CLI
EXIT_OK = 0
EXIT_SOLVER_ERROR = 1
EXIT_USAGE_ERROR = 2


def exit_code_for(exception: BaseException) -> int:
    """Сопоставляет исключение коду выхода CLI (1 - ошибка решателя, 2 - ошибка данных/использования)."""
    if isinstance(exception, (DataError, DimensionError, ParameterError,
                              NetworkFormatError, OracleSizeError, FileNotFoundError, json.JSONDecodeError)):
        return EXIT_USAGE_ERROR
    return EXIT_SOLVER_ERROR


def log_unhandled_exception(logger: logging.Logger, exception: Exception, context: Optional[str] = None):
    prefix = f"[{context}] " if context else ""
    logger.error(f"{prefix}Необработанное исключение: {str(exception)}")
    logger.exception("Детали исключения:")
