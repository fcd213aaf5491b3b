# core/utils/logger.py
import logging
import logging.handlers
import sys
import time
from pathlib import Path
from typing import Any, Dict

LOGGER_NAME = 'UDKE'
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(processName)s - %(message)s'
MAX_LOG_BYTES = 15 * 1024 * 1024
LOG_BACKUPS = 5


def _level(name: str, default: int) -> int:
    level = logging.getLevelName(str(name).upper())
    return level if isinstance(level, int) else default


def setup_logger(settings: Dict[str, Any], base_dir: Path) -> logging.Logger:
    """
    Настраивает логгер 'UDKE' по секции logging конфигурации.

    Консоль получает только сообщения не ниже console_level и пишет в stderr:
    stdout отдан отчётам команд. Файл ротируется по размеру, старые копии чистятся.
    Предупреждения numpy/scipy (warnings) перенаправляются в тот же логгер.

    Args:
        settings: Секция logging (level, log_to_console, console_level, log_to_file, log_file_path)
        base_dir: Каталог, от которого отсчитывается относительный log_file_path

    Returns:
        Настроенный логгер
    """
    logger = logging.getLogger(LOGGER_NAME)
    level = _level(settings.get('level', 'DEBUG'), logging.DEBUG)
    logger.setLevel(level)

    # Повторный вызов (тесты, несколько команд в одном процессе) не должен дублировать хэндлеры
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)

    if settings.get('log_to_console', True):
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        console_handler.setLevel(_level(settings.get('console_level', 'INFO'), logging.INFO))
        logger.addHandler(console_handler)

    if settings.get('log_to_file', False):
        log_file_path = Path(settings['log_file_path'])
        if not log_file_path.is_absolute():
            log_file_path = base_dir / log_file_path
        log_file_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            filename=log_file_path, maxBytes=MAX_LOG_BYTES, backupCount=LOG_BACKUPS, encoding='utf-8')
        file_handler.setFormatter(formatter)
        file_handler.setLevel(level)
        logger.addHandler(file_handler)

        cleanup_old_logs(log_file_path)

    logging.captureWarnings(True)
    warnings_logger = logging.getLogger('py.warnings')
    warnings_logger.handlers = list(logger.handlers)
    warnings_logger.propagate = False

    return logger


def cleanup_old_logs(log_file_path: Path, days_to_keep: int = 14) -> int:
    """Удаляет ротированные копии лога старше days_to_keep дней; возвращает число удалённых."""
    logger = logging.getLogger(LOGGER_NAME)
    cutoff = time.time() - days_to_keep * 24 * 3600
    removed = 0
    for old in log_file_path.parent.glob(f"{log_file_path.name}.*"):
        if old.stat().st_mtime >= cutoff:
            continue
        try:
            old.unlink()
            removed += 1
            logger.info(f"Удален старый лог-файл: {old}")
        except OSError as e:
            logger.error(f"Ошибка при удалении лог-файла {old}: {e}")
    return removed
