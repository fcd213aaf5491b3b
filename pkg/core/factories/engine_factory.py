# core/factories/engine_factory.py
import logging
from typing import Optional, Dict, Tuple, List

from core.domain.models import UnfoldConfig
from core.engine.udke_engine import UDKEEngine
from core.factories.prior_factory import PriorFactory
from core.factories.schedule_factory import ScheduleFactory
from core.priors.base_prior import BasePrior
from core.runtime.network import Network


def create_udke_engine(config: UnfoldConfig,
                       logger: logging.Logger,
                       priors: Optional[Tuple[BasePrior, BasePrior]] = None,
                       networks: Optional[Dict[str, Network]] = None) -> UDKEEngine:
    """
    Фабрика для создания движка развёртки.

    Args:
        config: Конфигурация развёртки
        logger: Логгер
        priors: Готовая пара операторов (ядро, изображение); иначе создаются по config.priors
        networks: Загруженные сети по ключам "net_k", "net_x", "hypanet"

    Returns:
        Экземпляр UDKEEngine
    """
    logger.debug("Создание движка развёртки...")
    networks = networks or {}
    notes: List[str] = []
    try:
        if priors is None:
            priors = PriorFactory.get_priors(config.priors, logger,
                                             net_k=networks.get("net_k"), net_x=networks.get("net_x"),
                                             notes=notes)
        schedule = ScheduleFactory.get_schedule(config, logger, network=networks.get("hypanet"), notes=notes)
        kernel_prior, image_prior = priors
        return UDKEEngine(config=config, kernel_prior=kernel_prior, image_prior=image_prior,
                          schedule=schedule, logger=logger, notes=notes)
    except Exception as e:
        logger.critical(f"Ошибка при создании движка развёртки: {e}", exc_info=True)
        raise
