import sys
import io
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

PROJECT_ROOT = Path(__file__).resolve().parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

if sys.platform.startswith('win'):
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

from core.domain.models import UDKEConfig
from core.utils.logger import setup_logger
from core.utils.error_handling import log_unhandled_exception, exit_code_for
from core.utils.config_loader import load_config, load_udke_config
from core.utils.localization.translator import Translator
from interface.cli import build_parser, CLIInterface

APP_CONFIG_PATH = PROJECT_ROOT / 'configs' / 'config.json'


def configure_logging(app_config: Dict[str, Any], log_level: Optional[str]) -> logging.Logger:
    """Флаг --log-level перекрывает оба уровня из config.json."""
    settings = dict(app_config['logging'])
    if log_level:
        settings['level'] = settings['console_level'] = log_level
    return setup_logger(settings, PROJECT_ROOT)


def resolve_udke_config(app_config: Dict[str, Any], override: Optional[Path]) -> UDKEConfig:
    path = override or PROJECT_ROOT / app_config['udke_config']
    return load_udke_config(path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Точка входа: python main.py <команда> [флаги].

    Returns:
        Код выхода: 0 успех, 1 ошибка решателя или проваленная проверка оракулов,
        2 неверные входные данные (ошибки argparse завершают процесс с кодом 2 сами)
    """
    args = build_parser().parse_args(argv)
    logger: Optional[logging.Logger] = None
    try:
        app_config = load_config(APP_CONFIG_PATH)
        logger = configure_logging(app_config, args.log_level)
        logger.info(f"Команда '{args.command}', язык интерфейса: {app_config['language']}")
        logger.debug(f"Версия Python: {sys.version}")

        udke_config = resolve_udke_config(app_config, args.config)
        translator = Translator(app_config['language'])
        code = CLIInterface(app_config, udke_config, logger, translator).run(args)
        logger.info(f"Команда '{args.command}' завершена с кодом {code}")
        return code

    except Exception as e:
        if logger:
            logger.critical(f"Необработанное исключение при выполнении '{args.command}'")
            log_unhandled_exception(logger, e)
        else:
            print(f"Error before logger initialization: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
