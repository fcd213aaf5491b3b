# core/degradation/kernel_pool.py
import logging
from typing import List, Callable, Dict

import numpy as np

from core.degradation.degradation import make_rng, gen_gaussian_kernel, gen_random_kernel
from core.domain.models import KernelPoolSpec
from core.utils.error_handling import ParameterError

logger = logging.getLogger('UDKE')


def _gauss_iso(spec: KernelPoolSpec, index: int) -> np.ndarray:
    rng = make_rng(spec.seed, index)
    sigma = float(rng.uniform(*spec.sigma_range))
    return gen_gaussian_kernel(spec.k, sigma, sigma, 0.0)


def _gauss_aniso(spec: KernelPoolSpec, index: int) -> np.ndarray:
    # Случайные "длина" (две ширины) и угол поворота
    rng = make_rng(spec.seed, index)
    sigma_x, sigma_y = rng.uniform(*spec.sigma_range, size=2)
    theta = float(rng.uniform(*spec.rotation_range))
    return gen_gaussian_kernel(spec.k, float(sigma_x), float(sigma_y), theta)


def _random_nonparametric(spec: KernelPoolSpec, index: int) -> np.ndarray:
    return gen_random_kernel(spec.k, spec.seed, spec.smoothness, stream=index)


_family_map: Dict[str, Callable[[KernelPoolSpec, int], np.ndarray]] = {
    "gauss-iso": _gauss_iso,
    "gauss-aniso": _gauss_aniso,
    "random-nonparametric": _random_nonparametric,
}


def gen_kernel_pool(spec: KernelPoolSpec) -> List[np.ndarray]:
    """
    Генерирует пул ядер; ядро i строится из потока ГСЧ i, поэтому пул воспроизводим по сиду.

    Args:
        spec: Описание семейства и параметров пула

    Returns:
        Список ядер (k, k), неотрицательных, с суммой 1
    """
    builder = _family_map.get(spec.family)
    if builder is None:
        logger.error(f"Неизвестное семейство ядер: {spec.family}")
        raise ParameterError(f"Неизвестное семейство ядер: {spec.family}. Доступны: {list(_family_map)}")
    if spec.count < 0:
        raise ParameterError(f"Размер пула не может быть отрицательным: {spec.count}")
    logger.debug(f"Генерация пула ядер: {spec}")
    return [builder(spec, index) for index in range(spec.count)]
