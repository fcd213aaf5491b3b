# core/domain/models.py
import csv
import io
import math
from pathlib import Path
from typing import List, Optional, Literal, Dict, Any, Tuple

import numpy as np


class DegradationSpec:
    """
    DTO параметров синтеза LR-наблюдения: Y = (K⊛X)↓_s + n.
    """
    def __init__(self,
                 kernel: np.ndarray,
                 s: int = 2,
                 sigma255: float = 0.0,  # СКО шума в шкале 0..255
                 seed: int = 0,
                 stream: Optional[int] = None,  # Номер потока ГСЧ (индекс изображения в пакете)
                 offset: Tuple[int, int] = (0, 0)):
        self.kernel = kernel
        self.s = s
        self.sigma255 = sigma255
        self.seed = seed
        self.stream = stream
        self.offset = tuple(offset)

    def to_dict(self) -> Dict[str, Any]:
        return {"k": int(self.kernel.shape[0]), "s": self.s, "sigma255": self.sigma255,
                "seed": self.seed, "stream": self.stream, "offset": list(self.offset)}

    def __repr__(self):
        return (f"DegradationSpec(k={self.kernel.shape[0]}, s={self.s}, "
                f"sigma255={self.sigma255}, seed={self.seed}, stream={self.stream})")


class KernelPoolSpec:
    """
    DTO для генерации пула ядер размытия.
    """
    def __init__(self,
                 family: Literal["gauss-iso", "gauss-aniso", "random-nonparametric"] = "gauss-aniso",
                 k: int = 11,
                 count: int = 10,
                 seed: int = 0,
                 sigma_range: Tuple[float, float] = (0.7, 2.5),
                 rotation_range: Tuple[float, float] = (0.0, math.pi),
                 smoothness: float = 1.0):
        self.family = family
        self.k = k
        self.count = count
        self.seed = seed
        self.sigma_range = tuple(sigma_range)
        self.rotation_range = tuple(rotation_range)
        self.smoothness = smoothness

    def __repr__(self):
        return (f"KernelPoolSpec(family='{self.family}', k={self.k}, count={self.count}, "
                f"seed={self.seed}, sigma_range={self.sigma_range})")


class GramSystem:
    """
    Редуцированная система нормальных уравнений для ядра: A·vec(K) = b.

    A - (k², k²), сумма по каналам 𝔛ᵀM_sᵀM_s𝔛; b - (k²,), сумма по каналам 𝔛ᵀM_sᵀvec(Y).
    """
    def __init__(self, A: np.ndarray, b: np.ndarray, k: int, s: int):
        self.A = A
        self.b = b
        self.k = k
        self.s = s

    def check(self, sym_tol: float = 1e-10, psd_tol: float = 1e-9) -> bool:
        """Проверяет симметричность и положительную полуопределённость A."""
        scale = max(np.linalg.norm(self.A), np.finfo(float).tiny)
        if np.linalg.norm(self.A - self.A.T) > sym_tol * scale:
            return False
        trace = float(np.trace(self.A))
        min_eig = float(np.linalg.eigvalsh(self.A).min())
        return min_eig >= -psd_tol * max(trace, 0.0) / (self.k * self.k)

    def __repr__(self):
        return f"GramSystem(k={self.k}, s={self.s}, trace={float(np.trace(self.A)):.4g})"


class StageHyperParams:
    """
    DTO гиперпараметров этапа: {α_K, α_X, β_K, β_X}.
    """
    def __init__(self,
                 alpha_K: float,
                 alpha_X: float,
                 beta_K: float,
                 beta_X: float,
                 mu_K: Optional[float] = None,
                 mu_X: Optional[float] = None):
        self.alpha_K = alpha_K
        self.alpha_X = alpha_X
        self.beta_K = beta_K
        self.beta_X = beta_X
        self.mu_K = mu_K
        self.mu_X = mu_X

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha_K": self.alpha_K, "alpha_X": self.alpha_X,
                "beta_K": self.beta_K, "beta_X": self.beta_X,
                "mu_K": self.mu_K, "mu_X": self.mu_X}

    def __repr__(self):
        return (f"StageHyperParams(alpha_K={self.alpha_K:.3g}, alpha_X={self.alpha_X:.3g}, "
                f"beta_K={self.beta_K:.3g}, beta_X={self.beta_X:.3g})")


class ScheduleConfig:
    """
    DTO для фиксированного расписания гиперпараметров.
    """
    def __init__(self,
                 mu_start: float = 1e-2,
                 mu_end: float = 1e2,
                 sigma_floor: float = 2e-2,  # Нижняя граница σ на единичной шкале
                 kernel_weight: float = 1e4):  # μ_K / μ_X
        self.mu_start = mu_start
        self.mu_end = mu_end
        self.sigma_floor = sigma_floor
        self.kernel_weight = kernel_weight


class SolverConfig:
    """
    DTO политики ridge-регуляризации K-решателя.
    """
    def __init__(self,
                 ridge_rel: float = 1e-10,
                 ridge_escalation: float = 100.0,
                 ridge_retries: int = 2):
        self.ridge_rel = ridge_rel
        self.ridge_escalation = ridge_escalation
        self.ridge_retries = ridge_retries


class PriorConfig:
    """
    DTO выбора операторов априорных шагов.
    """
    def __init__(self,
                 kernel: Literal["classical", "network"] = "classical",
                 image: Literal["classical", "network"] = "classical",
                 unit_sum: bool = True,
                 tau: float = 0.5,
                 net_k_manifest: Optional[Path] = None,
                 net_x_manifest: Optional[Path] = None,
                 hypanet_manifest: Optional[Path] = None):
        self.kernel = kernel
        self.image = image
        self.unit_sum = unit_sum
        self.tau = tau
        self.net_k_manifest = net_k_manifest
        self.net_x_manifest = net_x_manifest
        self.hypanet_manifest = hypanet_manifest


class UnfoldConfig:
    """
    DTO конфигурации развёртки (число этапов, размер ядра, масштаб, шум, λ).
    """
    def __init__(self,
                 stages: int = 6,
                 kernel_size: int = 11,
                 scale: int = 2,
                 sigma255: float = 0.0,
                 lam: float = 10.0,
                 schedule: Literal["fixed", "hypanet"] = "fixed",
                 trace: bool = True,
                 offset: Tuple[int, int] = (0, 0),
                 schedule_params: Optional[ScheduleConfig] = None,
                 solver: Optional[SolverConfig] = None,
                 priors: Optional[PriorConfig] = None):
        self.stages = stages
        self.kernel_size = kernel_size
        self.scale = scale
        self.sigma255 = sigma255
        self.lam = lam
        self.schedule = schedule
        self.trace = trace
        self.offset = tuple(offset)
        self.schedule_params = schedule_params if schedule_params is not None else ScheduleConfig()
        self.solver = solver if solver is not None else SolverConfig()
        self.priors = priors if priors is not None else PriorConfig()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stages": self.stages, "kernel_size": self.kernel_size, "scale": self.scale,
            "sigma255": self.sigma255, "lambda": self.lam, "schedule": self.schedule,
            "trace": self.trace, "offset": list(self.offset),
            "schedule_params": vars(self.schedule_params).copy(),
            "solver": vars(self.solver).copy(),
            "priors": {key: (str(value) if isinstance(value, Path) else value)
                       for key, value in vars(self.priors).items()},
        }

    def __repr__(self):
        return (f"UnfoldConfig(T={self.stages}, k={self.kernel_size}, s={self.scale}, "
                f"sigma255={self.sigma255}, lambda={self.lam}, schedule='{self.schedule}')")


class DegradationConfig:
    """
    DTO настроек пула ядер по умолчанию (секция degradation).
    """
    def __init__(self,
                 family: str = "gauss-aniso",
                 count: int = 10,
                 sigma_range: Tuple[float, float] = (0.7, 2.5),
                 rotation_range: Tuple[float, float] = (0.0, math.pi),
                 smoothness: float = 1.0,
                 seed: int = 0):
        self.family = family
        self.count = count
        self.sigma_range = tuple(sigma_range)
        self.rotation_range = tuple(rotation_range)
        self.smoothness = smoothness
        self.seed = seed


class MetricsConfig:
    def __init__(self, shave: int = 0, luma: bool = False):
        self.shave = shave
        self.luma = luma


class UDKEConfig:
    """
    Общий DTO конфигурации решателя.
    """
    def __init__(self,
                 unfolding: UnfoldConfig,
                 degradation: DegradationConfig,
                 metrics: MetricsConfig,
                 seed: int = 0,
                 jobs: int = 1):
        self.unfolding = unfolding
        self.degradation = degradation
        self.metrics = metrics
        self.seed = seed
        self.jobs = jobs


class StageRecord:
    """
    DTO результатов одного этапа развёртки.
    """
    def __init__(self,
                 stage: int,
                 hyper: StageHyperParams,
                 residual: float,  # ‖(K_t⊛X_t)↓_s − Y‖
                 k_objective_before: float,
                 k_objective_after: float,
                 x_objective_before: float,
                 x_objective_after: float,
                 kernel: Optional[np.ndarray] = None,
                 image: Optional[np.ndarray] = None):
        self.stage = stage
        self.hyper = hyper
        self.residual = residual
        self.k_objective_before = k_objective_before
        self.k_objective_after = k_objective_after
        self.x_objective_before = x_objective_before
        self.x_objective_after = x_objective_after
        self.kernel = kernel
        self.image = image

    def to_dict(self, include_arrays: bool = False) -> Dict[str, Any]:
        data = {
            "stage": self.stage,
            "hyper": self.hyper.to_dict(),
            "residual": self.residual,
            "k_objective": [self.k_objective_before, self.k_objective_after],
            "x_objective": [self.x_objective_before, self.x_objective_after],
        }
        if include_arrays and self.kernel is not None:
            data["kernel"] = self.kernel.tolist()
        return data


class UnfoldTrace:
    """
    DTO трассы развёртки: записи по этапам и пометки о выбранных операторах.
    """
    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.records: List[StageRecord] = []
        self.notes: List[str] = []
        self.config = config if config is not None else {}
        self.kernel_prior = ""
        self.image_prior = ""
        self.schedule = ""

    @property
    def residuals(self) -> List[float]:
        return [record.residual for record in self.records]

    def __len__(self):
        return len(self.records)

    def to_dict(self, include_arrays: bool = False) -> Dict[str, Any]:
        return {
            "config": self.config,
            "kernel_prior": self.kernel_prior,
            "image_prior": self.image_prior,
            "schedule": self.schedule,
            "notes": list(self.notes),
            "residuals": self.residuals,
            "stages": [record.to_dict(include_arrays) for record in self.records],
        }

    def __repr__(self):
        return f"UnfoldTrace(stages={len(self.records)}, notes={self.notes})"


class UnfoldResult:
    def __init__(self, x_pred: np.ndarray, k_pred: np.ndarray, trace: UnfoldTrace):
        self.x_pred = x_pred
        self.k_pred = k_pred
        self.trace = trace

    def __iter__(self):
        # Позволяет распаковку: x, k, trace = run_udke(...)
        return iter((self.x_pred, self.k_pred, self.trace))

    def __repr__(self):
        return f"UnfoldResult(x_pred={self.x_pred.shape}, k_pred={self.k_pred.shape}, stages={len(self.trace)})"


class ImageResult:
    """
    DTO строки отчёта об оценке одного изображения.
    """
    FIELDS = ("name", "psnr", "ssim", "kernel_psnr", "wall_time")

    def __init__(self, name: str, psnr: float, ssim: float, kernel_psnr: Optional[float], wall_time: float):
        self.name = name
        self.psnr = psnr
        self.ssim = ssim
        self.kernel_psnr = kernel_psnr
        self.wall_time = wall_time

    def to_dict(self) -> Dict[str, Any]:
        return {field: getattr(self, field) for field in self.FIELDS}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ImageResult":
        return cls(**{field: data.get(field) for field in cls.FIELDS})

    def __eq__(self, other):
        return isinstance(other, ImageResult) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"ImageResult(name='{self.name}', psnr={self.psnr:.3f}, ssim={self.ssim:.4f})"


class EvaluationReport:
    """
    DTO отчёта пакетной оценки: строки по изображениям, средние значения, эхо конфигурации и сид.
    """
    METRICS = ("psnr", "ssim", "kernel_psnr", "wall_time")

    def __init__(self, rows: List[ImageResult], config: Dict[str, Any], seed: int):
        self.rows = rows
        self.config = config
        self.seed = seed

    @property
    def aggregate(self) -> Dict[str, Optional[float]]:
        """Среднее арифметическое по строкам (None, если значений нет)."""
        result = {}
        for metric in self.METRICS:
            values = [getattr(row, metric) for row in self.rows if getattr(row, metric) is not None]
            result[metric] = float(np.mean(values)) if values else None
        return result

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "config": self.config,
            "rows": [row.to_dict() for row in self.rows],
            "aggregate": self.aggregate,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvaluationReport":
        rows = [ImageResult.from_dict(row) for row in data.get("rows", [])]
        return cls(rows=rows, config=data.get("config", {}), seed=data.get("seed", 0))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(ImageResult.FIELDS)
        for row in self.rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in
                             (getattr(row, field) for field in ImageResult.FIELDS)])
        aggregate = self.aggregate
        writer.writerow(["mean"] + [repr(aggregate[m]) if aggregate[m] is not None else "" for m in self.METRICS])
        return buffer.getvalue()

    def __eq__(self, other):
        return isinstance(other, EvaluationReport) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"EvaluationReport(rows={len(self.rows)}, seed={self.seed}, aggregate={self.aggregate})"


class OracleCheckRow:
    """
    DTO одной ячейки сетки сверки быстрых путей с эталонами.
    """
    def __init__(self, check: str, h: int, w: int, k: int, s: int, channels: int,
                 trials: int, worst_error: float, tolerance: float):
        self.check = check
        self.h = h
        self.w = w
        self.k = k
        self.s = s
        self.channels = channels
        self.trials = trials
        self.worst_error = worst_error
        self.tolerance = tolerance

    @property
    def passed(self) -> bool:
        return self.worst_error <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        data = vars(self).copy()
        data["passed"] = self.passed
        return data


class OracleCheckReport:
    def __init__(self, rows: List[OracleCheckRow], perturb: float, config: Dict[str, Any]):
        self.rows = rows
        self.perturb = perturb
        self.config = config

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def grid_size(self) -> int:
        """Число проверенных ячеек (h, w, k, s, C)."""
        return len({(row.h, row.w, row.k, row.s, row.channels) for row in self.rows})

    def worst(self) -> Dict[str, float]:
        """Наихудшая относительная ошибка по каждому виду проверки."""
        result: Dict[str, float] = {}
        for row in self.rows:
            result[row.check] = max(result.get(row.check, 0.0), row.worst_error)
        return result

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "perturb": self.perturb, "config": self.config,
                "grid_size": self.grid_size, "worst": self.worst(),
                "rows": [row.to_dict() for row in self.rows]}


class BenchRow:
    """
    DTO строки отчёта бенчмарка памяти/времени построения матрицы Грама.
    """
    def __init__(self, h: int, w: int, k: int, s: int, channels: int,
                 fast_seconds: Optional[float],
                 brute_seconds: Optional[float],
                 fast_peak_bytes: Optional[int],
                 brute_bytes: int,
                 measured: bool = True):
        self.h = h
        self.w = w
        self.k = k
        self.s = s
        self.channels = channels
        self.fast_seconds = fast_seconds
        self.brute_seconds = brute_seconds
        self.fast_peak_bytes = fast_peak_bytes
        self.brute_bytes = brute_bytes
        self.measured = measured

    @property
    def measured_ratio(self) -> Optional[float]:
        if not self.fast_peak_bytes:
            return None
        return self.brute_bytes / self.fast_peak_bytes

    @property
    def law_prediction(self) -> float:
        """Предсказание закона экономии памяти h·w/k²."""
        return self.h * self.w / (self.k * self.k)

    def to_dict(self) -> Dict[str, Any]:
        data = vars(self).copy()
        data["measured_ratio"] = self.measured_ratio
        data["law_prediction"] = self.law_prediction
        return data
