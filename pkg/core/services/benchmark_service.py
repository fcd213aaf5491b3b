# core/services/benchmark_service.py
import logging
import time
import tracemalloc
from typing import Sequence, Tuple, List

from core.degradation.degradation import make_rng
from core.domain.models import BenchRow
from core.oracles.oracles import gram_bruteforce, MAX_ORACLE_ENTRIES
from core.solvers.kstream_solver import build_gram_fast
from core.utils.observer import Observable

# Полноразмерный пример, для которого закон h·w/k² предсказывает экономию более 17000×
LAW_ROW = (2048, 1024)


def brute_force_bytes(h: int, w: int, k: int, channels: int) -> int:
    """Объём явной матрицы окон 𝔛 (C·h·w × k²) в float64."""
    return channels * h * w * k * k * 8


class BenchmarkService(Observable):
    """
    Время и пиковая вспомогательная память быстрого построения матрицы Грама
    против явной матрицы окон.
    """
    def __init__(self,
                 logger: logging.Logger,
                 sizes: Sequence[Tuple[int, int]] = ((64, 64), (128, 128), (256, 256)),
                 k: int = 11,
                 s: int = 2,
                 channels: int = 1,
                 run_brute: bool = True,
                 seed: int = 0):
        super().__init__()
        self.logger = logger
        self.sizes = [tuple(size) for size in sizes]
        self.k = k
        self.s = s
        self.channels = channels
        self.run_brute = run_brute
        self.seed = seed

    def _measure(self, index: int, h: int, w: int) -> BenchRow:
        k, s, c = self.k, self.s, self.channels
        x = make_rng(self.seed, index).random((c, h, w))

        tracemalloc.start()
        start = time.perf_counter()
        build_gram_fast(x, k, s)
        fast_seconds = time.perf_counter() - start
        _, fast_peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()

        brute_seconds = None
        if self.run_brute and h * w * k * k <= MAX_ORACLE_ENTRIES:
            start = time.perf_counter()
            gram_bruteforce(x, k, s)
            brute_seconds = time.perf_counter() - start
        elif self.run_brute:
            self.logger.warning(f"Полный эталон для {h}×{w}, k={k} пропущен: слишком большая задача")

        row = BenchRow(h, w, k, s, c, fast_seconds=fast_seconds, brute_seconds=brute_seconds,
                       fast_peak_bytes=fast_peak, brute_bytes=brute_force_bytes(h, w, k, c))
        self.logger.info(f"Бенчмарк {h}×{w}, k={k}, s={s}: быстрый {fast_seconds:.4f} с, пик {fast_peak} байт, "
                         f"𝔛 {row.brute_bytes} байт, отношение {row.measured_ratio}")
        return row

    def run(self) -> List[BenchRow]:
        total = len(self.sizes)
        rows = []
        for index, (h, w) in enumerate(self.sizes):
            rows.append(self._measure(index, h, w))
            self.report_progress("bench", index + 1, total)

        h, w = LAW_ROW
        rows.append(BenchRow(h, w, self.k, self.s, self.channels, fast_seconds=None, brute_seconds=None,
                             fast_peak_bytes=None, brute_bytes=brute_force_bytes(h, w, self.k, self.channels),
                             measured=False))
        self.notify_observers("complete", {"stage": "bench", "rows": len(rows)})
        return rows

    def to_dict(self, rows: List[BenchRow]) -> dict:
        return {"config": {"sizes": [list(size) for size in self.sizes], "k": self.k, "s": self.s,
                           "channels": self.channels, "seed": self.seed, "run_brute": self.run_brute},
                "rows": [row.to_dict() for row in rows]}
