# core/factories/prior_factory.py
import logging
from pathlib import Path
from typing import Optional, Tuple, List

from core.domain.models import PriorConfig
from core.priors.base_prior import BasePrior
from core.priors.classical_priors import ClassicalKernelPrior, ClassicalImagePrior
from core.priors.network_priors import NetworkKernelPrior, NetworkImagePrior
from core.runtime.network import Network, load_network
from core.utils.error_handling import ParameterError


class PriorFactory:
    """
    Фабрика операторов априорных шагов.
    Сетевой оператор без весов заменяется классическим с предупреждением и пометкой в трассе.
    """
    _kernel_prior_map = {
        "classical": ClassicalKernelPrior,
        "network": NetworkKernelPrior,
    }
    _image_prior_map = {
        "classical": ClassicalImagePrior,
        "network": NetworkImagePrior,
    }

    @staticmethod
    def _resolve_network(network: Optional[Network], manifest: Optional[Path],
                         logger: logging.Logger) -> Optional[Network]:
        if network is not None:
            return network
        if manifest is None:
            return None
        return load_network(Path(manifest), logger)

    @staticmethod
    def get_kernel_prior(config: PriorConfig,
                         logger: logging.Logger,
                         network: Optional[Network] = None,
                         notes: Optional[List[str]] = None) -> BasePrior:
        prior_class = PriorFactory._kernel_prior_map.get(config.kernel)
        if not prior_class:
            logger.error(f"Неизвестный тип априорного оператора ядра: {config.kernel}")
            raise ParameterError(f"Неизвестный тип априорного оператора ядра: {config.kernel}")

        if prior_class is NetworkKernelPrior:
            network = PriorFactory._resolve_network(network, config.net_k_manifest, logger)
            if network is None:
                logger.warning("Веса NET_K не заданы, использую классическую проекцию ядра")
                if notes is not None:
                    notes.append("kernel prior: NET_K weights missing, classical projection used")
                return ClassicalKernelPrior(unit_sum=config.unit_sum, logger=logger)
            logger.info(f"Создаю априорный оператор ядра: {prior_class.__name__}")
            return NetworkKernelPrior(network, unit_sum=config.unit_sum, logger=logger)

        logger.info(f"Создаю априорный оператор ядра: {prior_class.__name__}")
        return ClassicalKernelPrior(unit_sum=config.unit_sum, logger=logger)

    @staticmethod
    def get_image_prior(config: PriorConfig,
                        logger: logging.Logger,
                        network: Optional[Network] = None,
                        notes: Optional[List[str]] = None) -> BasePrior:
        prior_class = PriorFactory._image_prior_map.get(config.image)
        if not prior_class:
            logger.error(f"Неизвестный тип априорного оператора изображения: {config.image}")
            raise ParameterError(f"Неизвестный тип априорного оператора изображения: {config.image}")

        if prior_class is NetworkImagePrior:
            network = PriorFactory._resolve_network(network, config.net_x_manifest, logger)
            if network is None:
                logger.warning("Веса NET_X не заданы, использую классический спектральный оператор")
                if notes is not None:
                    notes.append("image prior: NET_X weights missing, classical spectral prior used")
                return ClassicalImagePrior(tau=config.tau, logger=logger)
            logger.info(f"Создаю априорный оператор изображения: {prior_class.__name__}")
            return NetworkImagePrior(network, logger=logger)

        logger.info(f"Создаю априорный оператор изображения: {prior_class.__name__}")
        return ClassicalImagePrior(tau=config.tau, logger=logger)

    @staticmethod
    def get_priors(config: PriorConfig,
                   logger: logging.Logger,
                   net_k: Optional[Network] = None,
                   net_x: Optional[Network] = None,
                   notes: Optional[List[str]] = None) -> Tuple[BasePrior, BasePrior]:
        return (PriorFactory.get_kernel_prior(config, logger, net_k, notes),
                PriorFactory.get_image_prior(config, logger, net_x, notes))
