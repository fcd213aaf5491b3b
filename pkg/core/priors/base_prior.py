# core/priors/base_prior.py
import logging
from abc import ABC, abstractmethod
from typing import Literal, Optional

import numpy as np


class BasePrior(ABC):
    """
    Абстрактный базовый класс операторов априорных шагов.
    Оператор сохраняет форму входа; операторы ядра возвращают неотрицательный результат.
    """
    kind: Literal["kernel", "image"] = "image"
    backing: Literal["classical", "network"] = "classical"

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger('UDKE')

    @abstractmethod
    def apply(self, x: np.ndarray, beta: float) -> np.ndarray:
        """
        Применяет априорный шаг.

        Args:
            x: Ядро (k, k) или изображение (C, h, w)
            beta: Вес проксимального члена этапа (β_K или β_X)

        Returns:
            Массив той же формы
        """
        pass

    def describe(self) -> str:
        return f"{self.kind}:{self.backing}"

    def __repr__(self):
        return f"{self.__class__.__name__}()"
