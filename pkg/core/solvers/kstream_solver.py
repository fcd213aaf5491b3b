# core/solvers/kstream_solver.py
"""
Явное решение задачи данных для ядра:

    K′ = argmin_K ½‖(K⊛X)↓_s − Y‖² + (α_K/2)‖K − K_prev‖²

через замкнутую форму (A + α_K·I)⁻¹(b + α_K·vec(K_prev)). Матрица A = Σ_c 𝔛ᵀM_sᵀM_s𝔛
строится без материализации матрицы окон 𝔛 размера (h·w)×k²: по взаимным корреляциям
подрешёток (pixel-unshuffle) изображения с его циклически дополненной копией.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from core.domain.models import GramSystem, SolverConfig
from core.domain.tensors import as_image, as_kernel
from core.degradation.degradation import degrade_noiseless
from core.ops.image_ops import circular_pad, pixel_unshuffle_view, pixel_shuffle, check_offset
from core.utils.error_handling import DimensionError, ParameterError, SingularSystemError

logger = logging.getLogger('UDKE')


def _check_geometry(x: np.ndarray, k: int, s: int):
    if k < 1 or k % 2 == 0:
        raise ParameterError(f"Размер ядра должен быть нечётным, получено k={k}")
    if s < 1:
        raise ParameterError(f"Масштаб должен быть >= 1, получено s={s}")
    _, h, w = x.shape
    if h % s or w % s:
        raise DimensionError(f"Размер {h}×{w} не делится на масштаб {s}")
    if k > min(h, w):
        raise DimensionError(f"Ядро {k}×{k} больше изображения {h}×{w}")


def _lag_range(k: int, s: int) -> Tuple[int, int]:
    """Диапазон сдвигов q на подрешётке: q = floor((φ + d) / s), φ ∈ [0, s), |d| <= k-1."""
    return -((k - 1 + s - 1) // s), (s - 1 + k - 1) // s


def _phase_correlations(x: np.ndarray, k: int, s: int) -> np.ndarray:
    """
    Взаимные корреляции подрешёток: corr[qy, qx, φy, φx, ρy, ρx] = Σ_c Σ_m X_φ[m] · X_ρ[m + q].

    Returns:
        Массив (nq, nq, s, s, s, s); индекс сдвига смещён на q_min
    """
    q_min, q_max = _lag_range(k, s)
    margin = max(-q_min, q_max)
    _, h, w = x.shape
    hs, ws = h // s, w // s

    phases = pixel_unshuffle_view(x, s)
    # Единственная крупная вспомогательная копия: x, дополненный на s·margin по решётке HR
    padded = pixel_unshuffle_view(circular_pad(x, s * margin), s)

    n_lags = q_max - q_min + 1
    corr = np.empty((n_lags, n_lags, s, s, s, s))
    for iy, qy in enumerate(range(q_min, q_max + 1)):
        for ix, qx in enumerate(range(q_min, q_max + 1)):
            shifted = padded[:, :, :, qy + margin:qy + margin + hs, qx + margin:qx + margin + ws]
            corr[iy, ix] = np.einsum('cpqmn,crsmn->pqrs', phases, shifted)
    return corr


def _phase_of(index: np.ndarray, k: int, s: int, offset: int) -> np.ndarray:
    """Фаза φ(a) = (a − r + o) mod s: подрешётка, на которую попадает элемент окна a."""
    return (index - (k - 1) // 2 + offset) % s


def build_gram_fast(x, k: int, s: int, offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """
    Матрица A = Σ_c 𝔛ᵀM_sᵀM_s𝔛 размера (k², k²) без построения 𝔛.

    Порядок построения:
      1. корреляции подрешёток X_φ и X_ρ для всех сдвигов q;
      2. перестановка пар каналов (φ, ρ) в карты H[g(φ)] по смещению d внутри окна;
      3. pixel-shuffle карт в объединённую карту F размера s(2k−1)×s(2k−1);
      4. извлечение окон k×k из F с шагом s и отражение каждой строки.

    Args:
        x: HR-изображение (C, h, w), h и w кратны s
        k: Нечётный размер ядра, k <= min(h, w)
        s: Масштаб
        offset: Фаза прореживания (oy, ox)

    Returns:
        Симметричная матрица (k², k²)
    """
    x = as_image(x)
    _check_geometry(x, k, s)
    oy, ox = check_offset(offset, s)
    q_min, _ = _lag_range(k, s)
    corr = _phase_correlations(x, k, s)

    # H[g(φ)][z] = G_φ(k − 1 − z), G_φ(d) = corr[(φ + d) // s][φ, (φ + d) % s]
    z = np.arange(2 * k - 1)
    phi = np.arange(s)
    t = phi[:, None] + (k - 1 - z)[None, :]  # (φ, z)
    q_idx, rho = t // s - q_min, t % s
    stack = corr[q_idx[:, None, :, None], q_idx[None, :, None, :],
                 phi[:, None, None, None], phi[None, :, None, None],
                 rho[:, None, :, None], rho[None, :, None, :]]  # (φy, φx, zy, zx)
    merged = pixel_shuffle(stack.reshape(s * s, 2 * k - 1, 2 * k - 1), s)[0]

    # Окно строки (a, b) начинается в F[s·a + φ(a), s·b + φ(b)] и идёт с шагом s
    a = np.arange(k)
    e = np.arange(k)
    rows_y = s * (a[:, None] + e[None, :]) + _phase_of(a, k, s, oy)[:, None]  # (a, e1)
    rows_x = s * (a[:, None] + e[None, :]) + _phase_of(a, k, s, ox)[:, None]  # (b, e2)
    windows = merged[rows_y[:, None, :, None], rows_x[None, :, None, :]]  # (a, b, e1, e2)

    gram = windows[:, :, ::-1, ::-1].reshape(k * k, k * k)
    return 0.5 * (gram + gram.T)


def build_rhs_fast(x, y, k: int, s: int, offset: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """
    Вектор b = Σ_c 𝔛ᵀM_sᵀvec(Y_c): корреляция дополненного x с наблюдением на решётке шага s.

    Returns:
        Вектор длины k²
    """
    x = as_image(x)
    y = as_image(y, name="y")
    _check_geometry(x, k, s)
    oy, ox = check_offset(offset, s)
    c, h, w = x.shape
    if y.shape != (c, h // s, w // s):
        raise DimensionError(f"Наблюдение {y.shape} не согласовано с изображением {x.shape} и масштабом {s}")
    padded = circular_pad(x, (k - 1) // 2)
    rhs = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            window = padded[:, a + oy:a + oy + h:s, b + ox:b + ox + w:s]
            rhs[a, b] = np.einsum('chw,chw->', y, window)
    return rhs.reshape(-1)


def infer_scale(x: np.ndarray, y: np.ndarray) -> int:
    """Масштаб по формам HR и LR изображений."""
    _, h, w = x.shape
    _, hy, wy = y.shape
    if hy == 0 or h % hy or w % wy or h // hy != w // wy:
        raise DimensionError(f"Формы {x.shape} и {y.shape} не задают целый общий масштаб")
    return h // hy


def build_gram_system(x, y, k: int, s: Optional[int] = None, offset: Tuple[int, int] = (0, 0)) -> GramSystem:
    x = as_image(x)
    y = as_image(y, name="y")
    s = infer_scale(x, y) if s is None else s
    return GramSystem(A=build_gram_fast(x, k, s, offset), b=build_rhs_fast(x, y, k, s, offset), k=k, s=s)


def solve_gram_system(system: GramSystem,
                      k_prev,
                      alpha_K: float,
                      solver_config: Optional[SolverConfig] = None,
                      log: Optional[logging.Logger] = None) -> np.ndarray:
    """
    Решает (A + α_K·I + ε·I)·vec(K) = b + α_K·vec(K_prev) разложением Холецкого.

    ε = ridge_rel · tr(A)/k²; при неудаче разложения ε увеличивается в ridge_escalation раз
    не более ridge_retries раз.

    Raises:
        SingularSystemError: Разложение не удалось после всех эскалаций
    """
    log = log or logger
    cfg = solver_config or SolverConfig()
    if alpha_K < 0:
        raise ParameterError(f"alpha_K не может быть отрицательным: {alpha_K}")
    k = system.k
    k_prev = as_kernel(k_prev, name="k_prev")
    if k_prev.shape[0] != k:
        raise DimensionError(f"Размер предыдущего ядра {k_prev.shape[0]} не совпадает с k={k}")

    base = system.A + alpha_K * np.eye(k * k)
    trace = float(np.trace(system.A))
    ridge = cfg.ridge_rel * trace / (k * k) if trace > 0 else cfg.ridge_rel
    rhs = system.b + alpha_K * k_prev.reshape(-1)

    for attempt in range(cfg.ridge_retries + 1):
        matrix = base + ridge * np.eye(k * k)
        try:
            factor = linalg.cho_factor(matrix)
        except linalg.LinAlgError:
            if attempt == cfg.ridge_retries:
                condition = float(np.linalg.cond(matrix))
                log.error(f"Разложение Холецкого не удалось: ridge={ridge:.3e}, cond={condition:.3e}")
                raise SingularSystemError(
                    f"Система для ядра вырождена (cond={condition:.3e}, ridge={ridge:.3e})",
                    condition=condition, ridge=ridge)
            log.warning(f"Разложение Холецкого не удалось при ridge={ridge:.3e}, увеличиваю в {cfg.ridge_escalation} раз")
            ridge *= cfg.ridge_escalation
            continue
        return linalg.cho_solve(factor, rhs).reshape(k, k)


def solve_k_data(y,
                 k_prev,
                 x,
                 alpha_K: float,
                 s: Optional[int] = None,
                 offset: Tuple[int, int] = (0, 0),
                 solver_config: Optional[SolverConfig] = None,
                 log: Optional[logging.Logger] = None) -> np.ndarray:
    """
    Замкнутое решение задачи данных для ядра.

    Args:
        y: LR-наблюдение (C, h/s, w/s)
        k_prev: Текущее ядро (k, k), проксимальная точка
        x: Текущее HR-изображение (C, h, w)
        alpha_K: Вес проксимального члена, >= 0
        s: Масштаб; по умолчанию выводится из форм x и y

    Returns:
        Ядро (k, k); знак элементов не ограничивается
    """
    k_prev = as_kernel(k_prev, name="k_prev")
    system = build_gram_system(x, y, k_prev.shape[0], s, offset)
    return solve_gram_system(system, k_prev, alpha_K, solver_config, log)


def kernel_data_objective(y, x, kern, k_ref, alpha: float, s: int, offset: Tuple[int, int] = (0, 0)) -> float:
    """½‖(K⊛X)↓_s − Y‖² + (α/2)‖K − K_ref‖², вычисленная в пространственной области."""
    residual = degrade_noiseless(x, kern, s, offset) - as_image(y, name="y")
    proximal = as_kernel(kern) - as_kernel(k_ref, name="k_ref")
    return 0.5 * float(np.sum(residual ** 2)) + 0.5 * alpha * float(np.sum(proximal ** 2))
