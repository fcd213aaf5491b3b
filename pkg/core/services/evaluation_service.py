# core/services/evaluation_service.py
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Optional, Dict, Any, List, Tuple

import numpy as np

from core.degradation.degradation import degrade
from core.degradation.kernel_pool import gen_kernel_pool
from core.domain.models import (UDKEConfig, DegradationSpec, KernelPoolSpec, EvaluationReport, ImageResult)
from core.engine.udke_engine import run_udke
from core.metrics.metrics import psnr, ssim, kernel_psnr, SSIM_WINDOW
from core.ops.image_ops import modcrop
from core.runtime.network import Network
from core.utils.error_handling import DataError
from core.utils.image_io import read_png, write_png, quantize_8bit, list_images
from core.utils.kernel_io import read_kernel, write_kernel
from core.utils.observer import Observable


def _evaluate_one(task: Dict[str, Any]) -> Tuple[int, ImageResult, np.ndarray, np.ndarray]:
    """
    Обработка одного изображения. Функция верхнего уровня, чтобы её можно было передать в пул процессов.

    Метрики считаются по квантованному 8-битному результату, то есть ровно по тому, что попадает в PNG.
    """
    config: UDKEConfig = task["config"]
    hr = task["hr"]
    kernel_gt = task["kernel_gt"]

    start = time.perf_counter()
    result = run_udke(task["y"], config.unfolding, networks=task["networks"], logger=logging.getLogger('UDKE'))
    wall_time = time.perf_counter() - start

    sr = quantize_8bit(result.x_pred) / 255.0
    shave, luma = config.metrics.shave, config.metrics.luma
    score_ssim = None
    if min(hr.shape[1:]) - 2 * shave >= SSIM_WINDOW:
        score_ssim = ssim(sr, hr, shave=shave, luma=luma)
    score_kernel = None
    if kernel_gt is not None and kernel_gt.shape == result.k_pred.shape:
        score_kernel = kernel_psnr(result.k_pred, kernel_gt)

    row = ImageResult(name=task["name"], psnr=psnr(sr, hr, shave=shave, luma=luma), ssim=score_ssim,
                      kernel_psnr=score_kernel, wall_time=wall_time)
    return task["index"], row, result.x_pred, result.k_pred


class EvaluationService(Observable):
    """
    Пакетная оценка: синтез LR из директории HR и пула ядер (или чтение готовых LR),
    оценка ядра и изображения, отчёт с метриками по изображениям и средними.
    """
    def __init__(self,
                 config: UDKEConfig,
                 logger: logging.Logger,
                 networks: Optional[Dict[str, Network]] = None):
        super().__init__()
        self.config = config
        self.logger = logger
        self.networks = networks or {}

    def load_kernel_pool(self, kernel_dir: Optional[Path] = None) -> List[np.ndarray]:
        """Ядра из директории (*.txt, по имени) или пул, сгенерированный по секции degradation."""
        if kernel_dir is not None:
            paths = sorted(Path(kernel_dir).glob("*.txt"))
            if not paths:
                raise DataError(f"В директории {kernel_dir} нет файлов ядер")
            self.logger.info(f"Загружаю {len(paths)} ядер из {kernel_dir}")
            return [read_kernel(path) for path in paths]

        deg = self.config.degradation
        spec = KernelPoolSpec(family=deg.family, k=self.config.unfolding.kernel_size, count=max(deg.count, 1),
                              seed=deg.seed, sigma_range=deg.sigma_range, rotation_range=deg.rotation_range,
                              smoothness=deg.smoothness)
        self.logger.info(f"Генерирую пул ядер: {spec}")
        return gen_kernel_pool(spec)

    def _build_tasks(self, hr_paths: List[Path], kernels: Optional[List[np.ndarray]],
                     lr_dir: Optional[Path]) -> List[Dict[str, Any]]:
        unfolding = self.config.unfolding
        s = unfolding.scale
        tasks = []
        for index, path in enumerate(hr_paths):
            hr = modcrop(read_png(path), s)
            kernel_gt = kernels[index % len(kernels)] if kernels else None
            if lr_dir is not None:
                lr_path = Path(lr_dir) / path.name
                if not lr_path.is_file():
                    raise DataError(f"Нет LR-изображения для {path.name} в {lr_dir}")
                y = read_png(lr_path)
                if y.shape[0] != hr.shape[0] or y.shape[1] * s != hr.shape[1] or y.shape[2] * s != hr.shape[2]:
                    raise DataError(f"Размер LR {y.shape} не согласован с HR {hr.shape} при s={s}")
            else:
                spec = DegradationSpec(kernel=kernel_gt, s=s, sigma255=unfolding.sigma255, seed=self.config.seed,
                                       stream=index, offset=unfolding.offset)
                y = degrade(hr, spec)
            tasks.append({"index": index, "name": path.name, "hr": hr, "y": y, "kernel_gt": kernel_gt,
                          "config": self.config, "networks": self.networks})
        return tasks

    def evaluate(self,
                 hr_dir: Path,
                 out_dir: Path,
                 kernel_dir: Optional[Path] = None,
                 lr_dir: Optional[Path] = None,
                 jobs: Optional[int] = None) -> EvaluationReport:
        """
        Args:
            hr_dir: Директория эталонных HR PNG
            out_dir: Куда писать SR-изображения, оценённые ядра и отчёт
            kernel_dir: Директория ядер (истинные ядра для синтеза и PSNR ядра)
            lr_dir: Готовые LR PNG с теми же именами; тогда синтез не выполняется
            jobs: Число процессов (по умолчанию из секции general)

        Returns:
            EvaluationReport

        Raises:
            DataError: Пустая директория или несогласованные входы
        """
        hr_paths = list_images(Path(hr_dir))
        if not hr_paths:
            self.logger.error(f"В директории {hr_dir} нет PNG-изображений")
            raise DataError(f"В директории {hr_dir} нет PNG-изображений")
        jobs = max(1, int(jobs if jobs is not None else self.config.jobs))

        kernels = None
        if lr_dir is None or kernel_dir is not None:
            kernels = self.load_kernel_pool(kernel_dir)
        tasks = self._build_tasks(hr_paths, kernels, lr_dir)
        total = len(tasks)
        self.logger.info(f"Оценка {total} изображений, процессов: {jobs}")
        self.notify_observers("status", {"message": "evaluate_started", "images": total})

        out_dir = Path(out_dir)
        rows: Dict[int, ImageResult] = {}
        done = 0

        def _store(index: int, row: ImageResult, x_pred: np.ndarray, k_pred: np.ndarray):
            nonlocal done
            name = tasks[index]["name"]
            write_png(out_dir / "sr" / name, x_pred)
            write_kernel(out_dir / "kernels" / f"{Path(name).stem}.txt", k_pred,
                         comments=[f"estimated for {name}", f"seed {self.config.seed}"])
            rows[index] = row
            done += 1
            self.logger.info(f"{name}: PSNR {row.psnr:.3f} дБ, SSIM {row.ssim}, PSNR ядра {row.kernel_psnr}, "
                             f"{row.wall_time:.2f} с")
            self.report_progress("evaluate", done, total)

        if jobs == 1:
            for task in tasks:
                _store(*_evaluate_one(task))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_evaluate_one, task) for task in tasks]
                for future in as_completed(futures):
                    _store(*future.result())

        report = EvaluationReport(rows=[rows[i] for i in range(total)], config=self.config_echo(kernel_dir, lr_dir),
                                  seed=self.config.seed)
        self.write_report(report, out_dir)
        self.notify_observers("complete", {"stage": "evaluate", "images": total, "aggregate": report.aggregate})
        return report

    def config_echo(self, kernel_dir: Optional[Path] = None, lr_dir: Optional[Path] = None) -> Dict[str, Any]:
        deg = self.config.degradation
        return {
            "unfolding": self.config.unfolding.to_dict(),
            "degradation": {"family": deg.family, "count": deg.count, "sigma_range": list(deg.sigma_range),
                            "rotation_range": list(deg.rotation_range), "smoothness": deg.smoothness,
                            "seed": deg.seed},
            "metrics": {"shave": self.config.metrics.shave, "luma": self.config.metrics.luma},
            "kernel_dir": str(kernel_dir) if kernel_dir is not None else None,
            "lr_dir": str(lr_dir) if lr_dir is not None else None,
        }

    def write_report(self, report: EvaluationReport, out_dir: Path) -> Tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path, csv_path = out_dir / "report.json", out_dir / "report.csv"
        with open(json_path, 'w', encoding='utf-8') as f:
            json.dump(report.to_dict(), f, ensure_ascii=False, indent=2)
        csv_path.write_text(report.to_csv(), encoding='utf-8')
        self.logger.info(f"Отчёт сохранён: {json_path}, {csv_path}")
        return json_path, csv_path
