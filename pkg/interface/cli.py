# interface/cli.py
import argparse
import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from tqdm import tqdm

from core.degradation.degradation import degrade
from core.degradation.kernel_pool import gen_kernel_pool
from core.domain.models import UDKEConfig, DegradationSpec, KernelPoolSpec
from core.factories.engine_factory import create_udke_engine
from core.ops.image_ops import modcrop
from core.services.benchmark_service import BenchmarkService
from core.services.evaluation_service import EvaluationService
from core.services.verification_service import (VerificationService, DEFAULT_SIZES, DEFAULT_KERNELS,
                                                 DEFAULT_SCALES, DEFAULT_CHANNELS)
from core.utils.error_handling import exit_code_for, EXIT_OK, EXIT_SOLVER_ERROR
from core.utils.image_io import read_png, write_png
from core.utils.kernel_io import read_kernel, write_kernel
from core.utils.localization.translator import Translator
from core.utils.observer import Observer


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается список целых через запятую: {text}")


def _size_list(text: str) -> List[tuple]:
    """'64x64,128x96' -> [(64, 64), (128, 96)]; одно число N означает N×N."""
    sizes = []
    for item in text.split(","):
        item = item.strip().lower()
        if not item:
            continue
        try:
            if "x" in item:
                h, w = item.split("x", 1)
                sizes.append((int(h), int(w)))
            else:
                sizes.append((int(item), int(item)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"некорректный размер: {item}")
    return sizes


def _add_unfolding_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("unfolding overrides")
    group.add_argument("--stages", type=int, help="число этапов T")
    group.add_argument("--kernel-size", type=int, help="размер ядра k (нечётный)")
    group.add_argument("--scale", type=int, help="масштаб s")
    group.add_argument("--sigma", type=float, help="СКО шума в шкале 0..255")
    group.add_argument("--lambda", dest="lam", type=float, help="вес λ")
    group.add_argument("--schedule", choices=["fixed", "hypanet"])
    group.add_argument("--kernel-prior", choices=["classical", "network"])
    group.add_argument("--image-prior", choices=["classical", "network"])
    group.add_argument("--net-k", type=Path, help="манифест весов NET_K")
    group.add_argument("--net-x", type=Path, help="манифест весов NET_X")
    group.add_argument("--hypanet", type=Path, help="манифест весов HypaNet")
    group.add_argument("--offset", type=int, nargs=2, metavar=("I", "J"), help="смещение решётки прореживания")
    group.add_argument("--seed", type=int, help="базовый сид")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py",
                                     description="Blind super-resolution by unfolded kernel and image estimation")
    parser.add_argument("--config", type=Path, default=None, help="JSON конфигурация решателя")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-kernels", help="сгенерировать пул ядер")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--family", choices=["gauss-iso", "gauss-aniso", "random-nonparametric"])
    p.add_argument("--k", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma-range", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--rotation-range", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--smoothness", type=float)

    p = sub.add_parser("degrade", help="синтезировать LR-наблюдение")
    p.add_argument("--hr", type=Path, required=True)
    p.add_argument("--kernel", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--scale", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--stream", type=int, default=None)
    p.add_argument("--offset", type=int, nargs=2, metavar=("I", "J"))

    p = sub.add_parser("estimate", help="оценить ядро и HR-изображение")
    p.add_argument("--lr", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="директория результатов")
    p.add_argument("--trace-arrays", action="store_true", help="записать ядра этапов в трассу")
    _add_unfolding_flags(p)

    p = sub.add_parser("evaluate", help="пакетная оценка с отчётом")
    p.add_argument("--hr", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--kernels", type=Path, default=None)
    p.add_argument("--lr", type=Path, default=None)
    p.add_argument("--jobs", type=int, default=None)
    _add_unfolding_flags(p)

    p = sub.add_parser("oracle-check", help="сверка быстрых путей с эталонами")
    p.add_argument("--sizes", type=_int_list, default=list(DEFAULT_SIZES))
    p.add_argument("--kernels", type=_int_list, default=list(DEFAULT_KERNELS))
    p.add_argument("--scales", type=_int_list, default=list(DEFAULT_SCALES))
    p.add_argument("--channels", type=_int_list, default=list(DEFAULT_CHANNELS))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--perturb", type=float, nargs="?", const=1e-6, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--report", type=Path, default=None)

    p = sub.add_parser("bench", help="время и память построения матрицы Грама")
    p.add_argument("--sizes", type=_size_list, default=[(64, 64), (128, 128), (256, 256)])
    p.add_argument("--kernel-size", type=int, default=11)
    p.add_argument("--scale", type=int, default=2)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--no-brute", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, default=Path("bench.json"))
    return parser


class CLIInterface(Observer):
    """Интерфейс командной строки решателя"""

    def __init__(self, config: dict, udke_config: UDKEConfig, logger: logging.Logger, translator: Translator):
        super().__init__()
        self.config = config
        self.udke_config = udke_config
        self.logger = logger
        self.translator = translator
        self.progress_bars = {}

        self._commands = {
            "gen-kernels": self.cmd_gen_kernels,
            "degrade": self.cmd_degrade,
            "estimate": self.cmd_estimate,
            "evaluate": self.cmd_evaluate,
            "oracle-check": self.cmd_oracle_check,
            "bench": self.cmd_bench,
        }

    def run(self, args: argparse.Namespace) -> int:
        """Выполняет подкоманду и возвращает код выхода."""
        handler = self._commands[args.command]
        self.logger.info(f"Команда: {args.command}")
        try:
            return handler(args)
        except Exception as e:
            self.logger.error(f"Команда {args.command} завершилась ошибкой: {e}", exc_info=True)
            tqdm.write(self.translator.translate("fatal_error", error=e))
            return exit_code_for(e)
        finally:
            self._close_bars()

    # ---- настройка конфигурации из флагов ----

    def _apply_overrides(self, args: argparse.Namespace) -> UDKEConfig:
        cfg = self.udke_config
        unfolding = cfg.unfolding
        overrides = {
            "stages": "stages", "kernel_size": "kernel_size", "scale": "scale",
            "sigma": "sigma255", "lam": "lam", "schedule": "schedule",
        }
        for flag, field in overrides.items():
            value = getattr(args, flag, None)
            if value is not None:
                setattr(unfolding, field, value)
        if getattr(args, "offset", None) is not None:
            unfolding.offset = tuple(args.offset)
        priors = unfolding.priors
        if getattr(args, "kernel_prior", None):
            priors.kernel = args.kernel_prior
        if getattr(args, "image_prior", None):
            priors.image = args.image_prior
        if getattr(args, "net_k", None):
            priors.net_k_manifest = args.net_k
        if getattr(args, "net_x", None):
            priors.net_x_manifest = args.net_x
        if getattr(args, "hypanet", None):
            priors.hypanet_manifest = args.hypanet
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        if getattr(args, "jobs", None) is not None:
            cfg.jobs = args.jobs
        self.logger.debug(f"Конфигурация после флагов: {unfolding.to_dict()}, seed={cfg.seed}")
        return cfg

    @staticmethod
    def _write_json(path: Path, data: Dict[str, Any]):
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, ensure_ascii=False, indent=2)

    # ---- подкоманды ----

    def cmd_gen_kernels(self, args: argparse.Namespace) -> int:
        deg = self.udke_config.degradation
        spec = KernelPoolSpec(
            family=args.family or deg.family,
            k=args.k if args.k is not None else self.udke_config.unfolding.kernel_size,
            count=args.count if args.count is not None else deg.count,
            seed=args.seed if args.seed is not None else deg.seed,
            sigma_range=args.sigma_range or deg.sigma_range,
            rotation_range=args.rotation_range or deg.rotation_range,
            smoothness=args.smoothness if args.smoothness is not None else deg.smoothness,
        )
        kernels = gen_kernel_pool(spec)
        header = json.dumps({"family": spec.family, "k": spec.k, "count": spec.count, "seed": spec.seed,
                             "sigma_range": list(spec.sigma_range), "rotation_range": list(spec.rotation_range),
                             "smoothness": spec.smoothness})
        for index, kern in enumerate(kernels):
            write_kernel(args.out / f"kernel_{index:03d}.txt", kern, comments=[f"index {index}", f"pool {header}"])
        self.logger.info(f"Записано {len(kernels)} ядер в {args.out}")
        tqdm.write(self.translator.translate("kernels_written", count=len(kernels), path=args.out))
        return EXIT_OK

    def cmd_degrade(self, args: argparse.Namespace) -> int:
        unfolding = self.udke_config.unfolding
        s = args.scale if args.scale is not None else unfolding.scale
        spec = DegradationSpec(
            kernel=read_kernel(args.kernel),
            s=s,
            sigma255=args.sigma if args.sigma is not None else unfolding.sigma255,
            seed=args.seed if args.seed is not None else self.udke_config.seed,
            stream=args.stream,
            offset=tuple(args.offset) if args.offset is not None else unfolding.offset,
        )
        hr = modcrop(read_png(args.hr), s)
        y = degrade(hr, spec)
        write_png(args.out, y)
        sidecar = dict(spec.to_dict(), kernel_path=str(args.kernel), hr_path=str(args.hr))
        self._write_json(args.out.with_suffix(".json"), sidecar)
        self.logger.info(f"LR-изображение записано: {args.out} ({spec})")
        tqdm.write(self.translator.translate("lr_written", path=args.out))
        return EXIT_OK

    def cmd_estimate(self, args: argparse.Namespace) -> int:
        cfg = self._apply_overrides(args)
        y = read_png(args.lr)
        engine = create_udke_engine(cfg.unfolding, self.logger)
        engine.add_observer(self)
        start = time.perf_counter()
        x_pred, k_pred, trace = engine.run(y)
        wall_time = time.perf_counter() - start

        stem = args.lr.stem
        image_path = write_png(args.out / f"{stem}_sr.png", x_pred)
        kernel_path = args.out / f"{stem}_kernel.txt"
        write_kernel(kernel_path, k_pred, comments=[f"estimated from {args.lr.name}",
                                                    f"config {json.dumps(cfg.unfolding.to_dict())}"])
        trace_path = args.out / f"{stem}_trace.json"
        self._write_json(trace_path, dict(trace.to_dict(include_arrays=args.trace_arrays),
                                          input=str(args.lr), seed=cfg.seed, wall_time=wall_time))
        self.logger.info(f"Результаты оценки записаны в {args.out}")
        tqdm.write(self.translator.translate("estimate_written", image=image_path, kernel=kernel_path,
                                             trace=trace_path))
        return EXIT_OK

    def cmd_evaluate(self, args: argparse.Namespace) -> int:
        cfg = self._apply_overrides(args)
        service = EvaluationService(cfg, self.logger)
        service.add_observer(self)
        report = service.evaluate(args.hr, args.out, kernel_dir=args.kernels, lr_dir=args.lr, jobs=args.jobs)
        aggregate = report.aggregate
        tqdm.write(self.translator.translate("aggregate_line", **{key: (f"{value:.4f}" if value is not None else "-")
                                                                  for key, value in aggregate.items()}))
        tqdm.write(self.translator.translate("report_written", path=args.out / "report.json"))
        return EXIT_OK

    def cmd_oracle_check(self, args: argparse.Namespace) -> int:
        seed = args.seed if args.seed is not None else self.udke_config.seed
        service = VerificationService(self.logger, sizes=args.sizes, kernels=args.kernels, scales=args.scales,
                                      channels=args.channels, trials=args.trials, perturb=args.perturb, seed=seed)
        service.add_observer(self)
        report = service.run()
        tqdm.write(self.translator.translate("oracle_grid", cells=report.grid_size))
        for check, error in report.worst().items():
            tqdm.write(self.translator.translate("oracle_worst", check=check, error=error))
        if args.report is not None:
            self._write_json(args.report, report.to_dict())
            tqdm.write(self.translator.translate("report_written", path=args.report))
        tqdm.write(self.translator.translate("oracle_passed" if report.passed else "oracle_failed"))
        return EXIT_OK if report.passed else EXIT_SOLVER_ERROR

    def cmd_bench(self, args: argparse.Namespace) -> int:
        seed = args.seed if args.seed is not None else self.udke_config.seed
        service = BenchmarkService(self.logger, sizes=args.sizes, k=args.kernel_size, s=args.scale,
                                   channels=args.channels, run_brute=not args.no_brute, seed=seed)
        service.add_observer(self)
        rows = service.run()
        for row in rows:
            tqdm.write(self.translator.translate(
                "bench_row", h=row.h, w=row.w, k=row.k, s=row.s,
                fast=f"{row.fast_seconds:.4f}" if row.fast_seconds is not None else "-",
                brute=f"{row.brute_seconds:.4f}" if row.brute_seconds is not None else "-",
                ratio=f"{row.measured_ratio:.1f}" if row.measured_ratio is not None else "not measured",
                law=row.law_prediction))
        self._write_json(args.out, service.to_dict(rows))
        tqdm.write(self.translator.translate("report_written", path=args.out))
        return EXIT_OK

    # ---- наблюдатель ----

    def _close_bars(self):
        for pbar_key in list(self.progress_bars.keys()):
            self.progress_bars.pop(pbar_key).close()

    def update(self, message_type: str, data: Any):
        """
        Обрабатывает уведомления от наблюдаемых объектов (движка развёртки, сервисов).
        """
        if message_type == "progress":
            stage = data.get("stage")
            current, total = data.get("current", 0), data.get("total", 0)
            pbar_key = f"{stage}_overall"
            if pbar_key not in self.progress_bars:
                if not total:
                    return
                self.progress_bars[pbar_key] = tqdm(total=total, desc=self.translator.translate(f"progress_{stage}"),
                                                    leave=True, position=0)
            pbar = self.progress_bars[pbar_key]
            if pbar.n < current:
                pbar.update(current - pbar.n)

        elif message_type == "complete":
            stage = data.get("stage")
            pbar_key = f"{stage}_overall"
            if pbar_key in self.progress_bars:
                self.progress_bars.pop(pbar_key).close()
            if stage == "unfold":
                tqdm.write(self.translator.translate("unfold_complete", residual=data.get("residual")))
            elif stage == "evaluate":
                tqdm.write(self.translator.translate("evaluate_complete", images=data.get("images")))
            elif stage == "oracle":
                tqdm.write(self.translator.translate("oracle_complete", cells=data.get("cells")))
            elif stage == "bench":
                tqdm.write(self.translator.translate("bench_complete", rows=data.get("rows")))

        elif message_type == "status":
            message = data.get("message")
            if message == "unfold_started":
                tqdm.write(self.translator.translate("unfold_started", stages=data.get("stages")))
            else:
                self.logger.debug(f"Статус: {data}")

        elif message_type == "error":
            stage = data.get("stage")
            error_msg = data.get("message")
            self.logger.error(self.translator.translate("error_in_stage", stage=stage, error=error_msg))
            tqdm.write(self.translator.translate("error_in_stage", stage=stage, error=error_msg))


def run_cli(argv: Optional[Sequence[str]], config: dict, udke_config: UDKEConfig,
            logger: logging.Logger, translator: Translator) -> int:
    """Разбор аргументов и запуск подкоманды; точка входа для тестов (main.py разбирает аргументы сам)."""
    args = build_parser().parse_args(argv)
    return CLIInterface(config, udke_config, logger, translator).run(args)
