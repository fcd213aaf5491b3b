# core/utils/config_loader.py
import json
import logging
from pathlib import Path
from typing import Dict, Any, Optional

from core.domain.models import (UDKEConfig, UnfoldConfig, ScheduleConfig, SolverConfig, PriorConfig,
                                DegradationConfig, MetricsConfig)

logger = logging.getLogger('UDKE')


def _read_json(config_path: Path, label: str) -> Dict[str, Any]:
    logger.info(f"Загружаю {label} из: {config_path}")
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        logger.debug(f"Сырые данные ({label}) из файла: {json.dumps(data, indent=2, ensure_ascii=False)}")
    except FileNotFoundError:
        logger.critical(f"Файл конфигурации не найден: {config_path}")
        raise
    except json.JSONDecodeError as e:
        logger.critical(f"Ошибка декодирования JSON в файле конфигурации {config_path}: {e}")
        raise
    return data


def _optional_path(value: Optional[str], base_dir: Path) -> Optional[Path]:
    """Относительные пути весов разрешаются от директории файла конфигурации."""
    if not value:
        return None
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def load_udke_config(config_path: Path) -> UDKEConfig:
    """Загружает конфигурацию решателя из JSON файла."""
    config_path = Path(config_path)
    data = _read_json(config_path, "конфигурацию решателя")
    base_dir = config_path.parent

    schedule_data = data.get("schedule", {})
    schedule_config = ScheduleConfig(
        mu_start=schedule_data.get("mu_start", 1e-2),
        mu_end=schedule_data.get("mu_end", 1e2),
        sigma_floor=schedule_data.get("sigma_floor", 2e-2),
        kernel_weight=schedule_data.get("kernel_weight", 1e4),
    )
    logger.debug(f"ScheduleConfig создан: mu={schedule_config.mu_start}..{schedule_config.mu_end}, "
                 f"sigma_floor={schedule_config.sigma_floor}, kernel_weight={schedule_config.kernel_weight}")

    solver_data = data.get("solver", {})
    solver_config = SolverConfig(
        ridge_rel=solver_data.get("ridge_rel", 1e-10),
        ridge_escalation=solver_data.get("ridge_escalation", 100.0),
        ridge_retries=solver_data.get("ridge_retries", 2),
    )
    logger.debug(f"SolverConfig создан: ridge_rel={solver_config.ridge_rel}, retries={solver_config.ridge_retries}")

    priors_data = data.get("priors", {})
    prior_config = PriorConfig(
        kernel=priors_data.get("kernel", "classical"),
        image=priors_data.get("image", "classical"),
        unit_sum=priors_data.get("unit_sum", True),
        tau=priors_data.get("tau", 0.5),
        net_k_manifest=_optional_path(priors_data.get("net_k_manifest"), base_dir),
        net_x_manifest=_optional_path(priors_data.get("net_x_manifest"), base_dir),
        hypanet_manifest=_optional_path(priors_data.get("hypanet_manifest"), base_dir),
    )
    logger.debug(f"PriorConfig создан: kernel={prior_config.kernel}, image={prior_config.image}")

    unfolding_data = data.get("unfolding", {})
    unfold_config = UnfoldConfig(
        stages=unfolding_data.get("stages", 6),
        kernel_size=unfolding_data.get("kernel_size", 11),
        scale=unfolding_data.get("scale", 2),
        sigma255=unfolding_data.get("sigma255", 0.0),
        lam=unfolding_data.get("lambda", 10.0),
        schedule=unfolding_data.get("schedule", "fixed"),
        trace=unfolding_data.get("trace", True),
        offset=tuple(unfolding_data.get("offset", [0, 0])),
        schedule_params=schedule_config,
        solver=solver_config,
        priors=prior_config,
    )
    logger.debug(f"UnfoldConfig создан: {unfold_config}")

    degradation_data = data.get("degradation", {})
    degradation_config = DegradationConfig(
        family=degradation_data.get("family", "gauss-aniso"),
        count=degradation_data.get("count", 10),
        sigma_range=tuple(degradation_data.get("sigma_range", [0.7, 2.5])),
        rotation_range=tuple(degradation_data.get("rotation_range", [0.0, 3.141592653589793])),
        smoothness=degradation_data.get("smoothness", 1.0),
        seed=degradation_data.get("seed", 0),
    )
    logger.debug(f"DegradationConfig создан: family={degradation_config.family}, count={degradation_config.count}")

    metrics_data = data.get("metrics", {})
    metrics_config = MetricsConfig(
        shave=metrics_data.get("shave", 0),
        luma=metrics_data.get("luma", False),
    )

    general_data = data.get("general", {})
    return UDKEConfig(
        unfolding=unfold_config,
        degradation=degradation_config,
        metrics=metrics_config,
        seed=general_data.get("seed", 0),
        jobs=general_data.get("jobs", 1),
    )


def load_config(config_path: Path) -> Dict[str, Any]:
    """Загружает основную конфигурацию приложения из JSON файла."""
    config = _read_json(config_path, "основную конфигурацию")

    # Применяем дефолтные значения, если они отсутствуют
    default_config = {
        "language": "en",
        "udke_config": "configs/udke_config.json",
        "logging": {
            "level": "INFO",
            "log_to_console": True,
            "console_level": "WARNING",
            "log_to_file": True,
            "log_file_path": "logs/udke.log"
        }
    }

    # Рекурсивное обновление словаря с дефолтными значениями
    def update_dict(d, u):
        for k, v in u.items():
            if isinstance(v, dict):
                d[k] = update_dict(d.get(k, {}), v)
            else:
                d[k] = u[k]
        return d

    config = update_dict(default_config, config)

    logger.debug(f"Загруженная основная конфигурация: {config}")
    return config
