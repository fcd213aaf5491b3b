# core/services/verification_service.py
import itertools
import logging
from typing import Sequence, Optional, List

import numpy as np

from core.degradation.degradation import make_rng
from core.domain.models import OracleCheckRow, OracleCheckReport
from core.oracles.oracles import gram_bruteforce, rhs_bruteforce, solve_x_oracle
from core.solvers.kstream_solver import build_gram_fast, build_rhs_fast
from core.solvers.xstream_solver import solve_x_data
from core.utils.observer import Observable

GRAM_TOLERANCE = 1e-9
X_SOLVER_TOLERANCE = 1e-6
X_SOLVER_MAX_SIDE = 16
X_SOLVER_MAX_KERNEL = 5

DEFAULT_SIZES = (8, 12, 16, 24, 32)
DEFAULT_KERNELS = (1, 3, 5, 7, 11)
DEFAULT_SCALES = (1, 2, 3, 4)
DEFAULT_CHANNELS = (1, 3)


def relative_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    """‖a − b‖_F / ‖b‖_F; для нулевого эталона - абсолютная ошибка."""
    diff = float(np.linalg.norm(estimate - reference))
    scale = float(np.linalg.norm(reference))
    return diff / scale if scale > 0 else diff


class VerificationService(Observable):
    """
    Сверка быстрых путей с эталонами на сетке (h, w, k, s, C).

    Ячейки с h или w, не кратными s, и с k > min(h, w) пропускаются.
    Параметр perturb вносит относительное искажение в быструю матрицу Грама,
    чтобы убедиться, что сверка ловит ошибку.
    """
    def __init__(self,
                 logger: logging.Logger,
                 sizes: Sequence[int] = DEFAULT_SIZES,
                 kernels: Sequence[int] = DEFAULT_KERNELS,
                 scales: Sequence[int] = DEFAULT_SCALES,
                 channels: Sequence[int] = DEFAULT_CHANNELS,
                 trials: int = 100,
                 perturb: float = 0.0,
                 seed: int = 0):
        super().__init__()
        self.logger = logger
        self.sizes = tuple(sizes)
        self.kernels = tuple(kernels)
        self.scales = tuple(scales)
        self.channels = tuple(channels)
        self.trials = trials
        self.perturb = perturb
        self.seed = seed

    def grid(self) -> List[tuple]:
        cells = []
        for h, w, k, s, c in itertools.product(self.sizes, self.sizes, self.kernels, self.scales, self.channels):
            if h % s or w % s or k > min(h, w):
                continue
            cells.append((h, w, k, s, c))
        return cells

    def _check_cell(self, cell_index: int, h: int, w: int, k: int, s: int, c: int) -> List[OracleCheckRow]:
        rng = make_rng(self.seed, cell_index)
        gram_worst = rhs_worst = 0.0
        x_worst: Optional[float] = None
        run_x = max(h, w) <= X_SOLVER_MAX_SIDE and k <= X_SOLVER_MAX_KERNEL

        for _ in range(self.trials):
            x = rng.random((c, h, w))
            y = rng.random((c, h // s, w // s))

            gram_fast = build_gram_fast(x, k, s)
            if self.perturb:
                gram_fast = gram_fast * (1.0 + self.perturb)
            gram_worst = max(gram_worst, relative_error(gram_fast, gram_bruteforce(x, k, s)))
            rhs_worst = max(rhs_worst, relative_error(build_rhs_fast(x, y, k, s), rhs_bruteforce(x, y, k, s)))

            if run_x:
                kern = rng.random((k, k))
                kern /= kern.sum()
                alpha = float(rng.uniform(1e-3, 1.0))
                x_fast = solve_x_data(y, kern, x, alpha, s)
                error = relative_error(x_fast, solve_x_oracle(y, kern, x, alpha, s))
                x_worst = error if x_worst is None else max(x_worst, error)

        rows = [OracleCheckRow("gram", h, w, k, s, c, self.trials, gram_worst, GRAM_TOLERANCE),
                OracleCheckRow("rhs", h, w, k, s, c, self.trials, rhs_worst, GRAM_TOLERANCE)]
        if x_worst is not None:
            rows.append(OracleCheckRow("x_solver", h, w, k, s, c, self.trials, x_worst, X_SOLVER_TOLERANCE))
        return rows

    def run(self) -> OracleCheckReport:
        cells = self.grid()
        total = len(cells)
        self.logger.info(f"Сверка с эталонами: {total} ячеек, {self.trials} испытаний на ячейку, "
                         f"искажение {self.perturb}")
        rows: List[OracleCheckRow] = []
        for index, (h, w, k, s, c) in enumerate(cells):
            cell_rows = self._check_cell(index, h, w, k, s, c)
            for row in cell_rows:
                if not row.passed:
                    self.logger.warning(f"Проверка {row.check} не пройдена: h={h}, w={w}, k={k}, s={s}, C={c}, "
                                        f"ошибка {row.worst_error:.3e} > {row.tolerance:.0e}")
            rows.extend(cell_rows)
            self.report_progress("oracle", index + 1, total)

        report = OracleCheckReport(rows=rows, perturb=self.perturb, config={
            "sizes": list(self.sizes), "kernels": list(self.kernels), "scales": list(self.scales),
            "channels": list(self.channels), "trials": self.trials, "seed": self.seed})
        self.logger.info(f"Сверка завершена: {'пройдена' if report.passed else 'НЕ пройдена'}, "
                         f"наихудшие ошибки {report.worst()}")
        self.notify_observers("complete", {"stage": "oracle", "cells": total, "passed": report.passed})
        return report
