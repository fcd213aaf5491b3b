# core/engine/schedule.py
"""
Источники гиперпараметров этапов {α_K, α_X, β_K, β_X}.

Связь с порождающими величинами: α = μ·σ², β = μ/λ.
"""
import logging
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from core.domain.models import StageHyperParams, ScheduleConfig
from core.runtime.network import Network, forward
from core.utils.error_handling import NetworkFormatError, ParameterError

# Нижняя граница для выходов HypaNet: softplus положителен, но может уйти в ноль в float64
MIN_HYPER = 1e-12


def fixed_schedule(t: int, T: int, sigma255: float, s: int, lam: float,
                   mu_start: float = 1e-2, mu_end: float = 1e2,
                   sigma_floor: float = 2e-2, kernel_weight: float = 1e4) -> StageHyperParams:
    """
    Фиксированное расписание: μ растёт логарифмически от mu_start до mu_end по этапам.

    Args:
        t: Номер этапа, 1..T
        T: Число этапов
        sigma255: СКО шума в шкале 0..255
        s: Масштаб (в фиксированном расписании не используется)
        lam: λ = λ_K = λ_X
        sigma_floor: Нижняя граница σ на единичной шкале, чтобы α не обращался в ноль при σ = 0
        kernel_weight: μ_K = kernel_weight·μ_X. Матрица Грама ядра масштабируется как h·w·E[x²],
            а гессиан шага по X ограничен единицей; при kernel_weight = 1 проксимальный член
            ядра теряется и K скатывается к дельта-функции

    Returns:
        StageHyperParams; μ_X идёт по расписанию, μ_K = kernel_weight·μ_X
    """
    if not 1 <= t <= T:
        raise ParameterError(f"Номер этапа {t} вне диапазона 1..{T}")
    if lam <= 0:
        raise ParameterError(f"λ должен быть положительным, получено {lam}")
    if kernel_weight <= 0:
        raise ParameterError(f"Вес потока ядра должен быть положительным, получено {kernel_weight}")
    mu_X = float(np.geomspace(mu_start, mu_end, T)[t - 1])
    mu_K = kernel_weight * mu_X
    sigma2 = max(sigma255 / 255.0, sigma_floor) ** 2
    return StageHyperParams(alpha_K=mu_K * sigma2, alpha_X=mu_X * sigma2,
                            beta_K=mu_K / lam, beta_X=mu_X / lam, mu_K=mu_K, mu_X=mu_X)


class BaseSchedule(ABC):
    name = "base"

    @abstractmethod
    def hyper(self, t: int) -> StageHyperParams:
        pass


class FixedSchedule(BaseSchedule):
    name = "fixed"

    def __init__(self, stages: int, sigma255: float, s: int, lam: float,
                 config: Optional[ScheduleConfig] = None):
        self.stages = stages
        self.sigma255 = sigma255
        self.s = s
        self.lam = lam
        self.config = config or ScheduleConfig()

    def hyper(self, t: int) -> StageHyperParams:
        return fixed_schedule(t, self.stages, self.sigma255, self.s, self.lam,
                              mu_start=self.config.mu_start, mu_end=self.config.mu_end,
                              sigma_floor=self.config.sigma_floor,
                              kernel_weight=self.config.kernel_weight)


class HypaNetSchedule(BaseSchedule):
    """
    Гиперпараметры из HypaNet.

    Режим per_stage: вход (s, σ255), выход 4T, этап t читает выходы [4(t−1), 4t).
    Режим stage_input: вход (s, σ255, t), выход 4.
    Порядок выходов: α_K, α_X, β_K, β_X.
    """
    name = "hypanet"

    def __init__(self, network: Network, stages: int, sigma255: float, s: int,
                 logger: Optional[logging.Logger] = None):
        if network.architecture not in ("HYPANET", "CUSTOM"):
            raise NetworkFormatError(f"Для расписания нужна сеть HYPANET, получена {network.architecture}")
        self.network = network
        self.stages = stages
        self.sigma255 = sigma255
        self.s = s
        self.mode = network.params.get("mode", "per_stage")
        self.logger = logger or logging.getLogger('UDKE')
        self._per_stage_output: Optional[np.ndarray] = None

    def _outputs(self, t: int) -> np.ndarray:
        if self.mode == "stage_input":
            return forward(self.network, np.array([self.s, self.sigma255, t], dtype=np.float64))
        if self._per_stage_output is None:
            self._per_stage_output = forward(self.network, np.array([self.s, self.sigma255], dtype=np.float64))
            if self._per_stage_output.shape != (4 * self.stages,):
                raise NetworkFormatError(
                    f"HypaNet вернула {self._per_stage_output.shape[0]} значений, ожидается {4 * self.stages}")
        return self._per_stage_output[4 * (t - 1):4 * t]

    def hyper(self, t: int) -> StageHyperParams:
        if not 1 <= t <= self.stages:
            raise ParameterError(f"Номер этапа {t} вне диапазона 1..{self.stages}")
        values = np.maximum(self._outputs(t), MIN_HYPER)
        if values.shape != (4,):
            raise NetworkFormatError(f"HypaNet вернула {values.shape}, ожидается 4 значения на этап")
        alpha_K, alpha_X, beta_K, beta_X = (float(v) for v in values)
        self.logger.debug(f"HypaNet, этап {t}: alpha_K={alpha_K:.3g}, alpha_X={alpha_X:.3g}, "
                          f"beta_K={beta_K:.3g}, beta_X={beta_X:.3g}")
        return StageHyperParams(alpha_K=alpha_K, alpha_X=alpha_X, beta_K=beta_K, beta_X=beta_X)
