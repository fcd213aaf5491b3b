# core/utils/localization/translator.py
import json
import logging
from pathlib import Path
from typing import Dict

FALLBACK_LANGUAGE = "en"
LOCALES_DIR = Path(__file__).resolve().parent


class Translator:
    """Сообщения CLI на языке из config.json; неизвестный язык заменяется английским."""

    def __init__(self, language: str, locales_dir: Path = LOCALES_DIR):
        self.logger = logging.getLogger('UDKE')
        self.translations: Dict[str, Dict[str, str]] = self._load_catalogs(locales_dir)
        if language not in self.translations:
            self.logger.warning(f"Язык '{language}' не найден, используется '{FALLBACK_LANGUAGE}'")
            language = FALLBACK_LANGUAGE
        self.language = language

    def _load_catalogs(self, locales_dir: Path) -> Dict[str, Dict[str, str]]:
        catalogs = {}
        for catalog in sorted(locales_dir.glob("*.json")):
            try:
                catalogs[catalog.stem] = json.loads(catalog.read_text(encoding='utf-8'))
            except (OSError, json.JSONDecodeError) as e:
                self.logger.error(f"Каталог сообщений {catalog.name} не загружен: {e}")
        self.logger.debug(f"Загружены каталоги сообщений: {list(catalogs)}")
        return catalogs

    def translate(self, key: str, **kwargs) -> str:
        """
        Возвращает сообщение по ключу; без перевода возвращается английский текст или сам ключ.

        Ошибка подстановки параметров не прерывает команду: возвращается шаблон без подстановки.
        """
        template = self.translations.get(self.language, {}).get(key)
        if template is None:
            template = self.translations.get(FALLBACK_LANGUAGE, {}).get(key, key)
        if not kwargs:
            return template
        try:
            return template.format(**kwargs)
        except (KeyError, IndexError, ValueError):
            self.logger.debug(f"Не удалось подставить параметры в сообщение '{key}'")
            return template
