# core/engine/udke_engine.py
import logging
from typing import Optional, Dict, List, Tuple

import numpy as np

from core.degradation.degradation import degrade_noiseless
from core.domain.models import UnfoldConfig, UnfoldResult, UnfoldTrace, StageRecord
from core.domain.tensors import as_image, flat_kernel
from core.engine.schedule import BaseSchedule
from core.ops.image_ops import bicubic_upsample
from core.priors.base_prior import BasePrior
from core.runtime.network import Network
from core.solvers.kstream_solver import solve_k_data, kernel_data_objective
from core.solvers.xstream_solver import solve_x_data, image_data_objective
from core.utils.error_handling import UDKEError, StageError, DimensionError
from core.utils.observer import Observable


class UDKEEngine(Observable):
    """
    Развёртка из T этапов: на каждом этапе решается задача данных для ядра,
    применяется априорный шаг ядра, затем задача данных для изображения и априорный шаг изображения.
    """
    def __init__(self,
                 config: UnfoldConfig,
                 kernel_prior: BasePrior,
                 image_prior: BasePrior,
                 schedule: BaseSchedule,
                 logger: logging.Logger,
                 notes: Optional[List[str]] = None):
        super().__init__()
        self.config = config
        self.kernel_prior = kernel_prior
        self.image_prior = image_prior
        self.schedule = schedule
        self.logger = logger
        self.notes = list(notes or [])

    def _initial_state(self, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        s, k = self.config.scale, self.config.kernel_size
        x0 = bicubic_upsample(y, s)
        if k > min(x0.shape[1:]):
            raise DimensionError(f"Ядро {k}×{k} больше HR-изображения {x0.shape[1]}×{x0.shape[2]}")
        return x0, flat_kernel(k)

    def run(self, y) -> UnfoldResult:
        """
        Запускает развёртку.

        Args:
            y: LR-наблюдение (C, h, w)

        Returns:
            UnfoldResult(x_pred, k_pred, trace)

        Raises:
            StageError: Ошибка решателя с номером этапа
        """
        cfg = self.config
        y = as_image(y, name="y")
        s, offset, T = cfg.scale, cfg.offset, cfg.stages
        if T < 1:
            raise UDKEError(f"Число этапов должно быть >= 1, получено {T}")

        trace = UnfoldTrace(config=cfg.to_dict())
        trace.kernel_prior = self.kernel_prior.describe()
        trace.image_prior = self.image_prior.describe()
        trace.schedule = self.schedule.name
        trace.notes.extend(self.notes)

        x, kern = self._initial_state(y)
        self.logger.info(f"Запуск развёртки: {cfg}, вход {y.shape}, априорные шаги "
                         f"{trace.kernel_prior}/{trace.image_prior}, расписание {trace.schedule}")
        self.notify_observers("status", {"message": "unfold_started", "stages": T})

        for t in range(1, T + 1):
            try:
                hyper = self.schedule.hyper(t)
                self.logger.debug(f"Этап {t}/{T}: {hyper}")

                k_before = kernel_data_objective(y, x, kern, kern, hyper.alpha_K, s, offset)
                k_step = solve_k_data(y, kern, x, hyper.alpha_K, s, offset, cfg.solver, self.logger)
                k_after = kernel_data_objective(y, x, k_step, kern, hyper.alpha_K, s, offset)
                kern = self.kernel_prior.apply(k_step, hyper.beta_K)

                x_before = image_data_objective(y, kern, x, x, hyper.alpha_X, s, offset)
                x_step = solve_x_data(y, kern, x, hyper.alpha_X, s, offset)
                x_after = image_data_objective(y, kern, x_step, x, hyper.alpha_X, s, offset)
                x = self.image_prior.apply(x_step, hyper.beta_X)

                residual = float(np.linalg.norm(degrade_noiseless(x, kern, s, offset) - y))
            except StageError:
                raise
            except UDKEError as e:
                self.logger.error(f"Ошибка на этапе {t}: {e}")
                self.notify_observers("error", {"stage": t, "message": str(e)})
                raise StageError(t, e) from e

            self.logger.debug(f"Этап {t}: K-цель {k_before:.6g} -> {k_after:.6g}, "
                              f"X-цель {x_before:.6g} -> {x_after:.6g}, невязка {residual:.6g}")
            trace.records.append(StageRecord(
                stage=t, hyper=hyper, residual=residual,
                k_objective_before=k_before, k_objective_after=k_after,
                x_objective_before=x_before, x_objective_after=x_after,
                kernel=kern.copy() if cfg.trace else None,
                image=x.copy() if cfg.trace else None,
            ))
            self.report_progress("unfold", t, T)

        self.logger.info(f"Развёртка завершена: невязки по этапам {[f'{r:.4g}' for r in trace.residuals]}")
        self.notify_observers("complete", {"stage": "unfold", "residual": trace.residuals[-1]})
        return UnfoldResult(x_pred=x, k_pred=kern, trace=trace)


def run_udke(y,
             cfg: Optional[UnfoldConfig] = None,
             priors: Optional[Tuple[BasePrior, BasePrior]] = None,
             networks: Optional[Dict[str, Network]] = None,
             logger: Optional[logging.Logger] = None) -> UnfoldResult:
    """
    Однократный запуск развёртки.

    Args:
        y: LR-наблюдение
        cfg: Конфигурация развёртки (по умолчанию T=6, k=11, s=2, λ=10)
        priors: Пара (априорный оператор ядра, априорный оператор изображения); по умолчанию из cfg.priors
        networks: Уже загруженные сети по ключам "net_k", "net_x", "hypanet"
        logger: Логгер

    Returns:
        UnfoldResult, распаковывается как (x_pred, k_pred, trace)
    """
    from core.factories.engine_factory import create_udke_engine

    engine = create_udke_engine(cfg or UnfoldConfig(), logger or logging.getLogger('UDKE'),
                                priors=priors, networks=networks)
    return engine.run(y)
