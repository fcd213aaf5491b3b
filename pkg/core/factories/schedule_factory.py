# core/factories/schedule_factory.py
import logging
from pathlib import Path
from typing import Optional, List

from core.domain.models import UnfoldConfig
from core.engine.schedule import BaseSchedule, FixedSchedule, HypaNetSchedule
from core.runtime.network import Network, load_network
from core.utils.error_handling import ParameterError


class ScheduleFactory:
    """
    Фабрика источников гиперпараметров этапов.
    """
    _schedule_map = {
        "fixed": FixedSchedule,
        "hypanet": HypaNetSchedule,
    }

    @staticmethod
    def get_schedule(config: UnfoldConfig,
                     logger: logging.Logger,
                     network: Optional[Network] = None,
                     notes: Optional[List[str]] = None) -> BaseSchedule:
        """
        Args:
            config: Конфигурация развёртки (поле schedule выбирает источник)
            logger: Логгер
            network: Уже загруженная HypaNet (иначе берётся из priors.hypanet_manifest)
            notes: Список пометок трассы, дополняется при откате на фиксированное расписание
        """
        schedule_class = ScheduleFactory._schedule_map.get(config.schedule)
        if not schedule_class:
            logger.error(f"Неизвестный источник гиперпараметров: {config.schedule}")
            raise ParameterError(f"Неизвестный источник гиперпараметров: {config.schedule}")

        if schedule_class is HypaNetSchedule:
            if network is None and config.priors.hypanet_manifest is not None:
                network = load_network(Path(config.priors.hypanet_manifest), logger)
            if network is not None:
                logger.info("Создаю расписание гиперпараметров: HypaNetSchedule")
                return HypaNetSchedule(network, config.stages, config.sigma255, config.scale, logger)
            logger.warning("Веса HypaNet не заданы, использую фиксированное расписание")
            if notes is not None:
                notes.append("schedule: HypaNet weights missing, fixed schedule used")

        logger.info("Создаю расписание гиперпараметров: FixedSchedule")
        return FixedSchedule(config.stages, config.sigma255, config.scale, config.lam, config.schedule_params)
