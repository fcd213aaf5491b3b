# core/oracles/oracles.py
"""
Эталонные реализации настольного масштаба.

Реализованы независимо от быстрых путей (собственная индексная арифметика, без общих
процедур свёртки): матрица окон 𝔛 и матрица прореживания M_s строятся явно.
Решётка прореживания всегда со смещением (0, 0).
"""
import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from core.utils.error_handling import OracleSizeError, DimensionError, UDKEError

MAX_ORACLE_ENTRIES = 10 ** 8
DENSE_SOLVE_LIMIT = 4096


def _as_planes(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    return arr[None] if arr.ndim == 2 else arr


def _guard(h: int, w: int, k: int):
    if h * w * k * k > MAX_ORACLE_ENTRIES:
        raise OracleSizeError(f"Эталон отказывается работать на задаче h·w·k² = {h * w * k * k} > {MAX_ORACLE_ENTRIES}")


def patch_matrix(plane: np.ndarray, k: int) -> np.ndarray:
    """Матрица окон (h·w, k²) одного канала: строка p - окно k×k с центром в p, построчно, с циклическим переносом."""
    h, w = plane.shape
    r = (k - 1) // 2
    py, px = np.divmod(np.arange(h * w), w)
    a, b = np.divmod(np.arange(k * k), k)
    rows = (py[:, None] + a[None, :] - r) % h
    cols = (px[:, None] + b[None, :] - r) % w
    return plane[rows, cols]


def selection_matrix(h: int, w: int, s: int) -> sparse.csr_matrix:
    """Разреженная матрица M_s (h/s·w/s, h·w), выбирающая пиксели (s·i, s·j)."""
    if h % s or w % s:
        raise DimensionError(f"Размер {h}×{w} не делится на масштаб {s}")
    hs, ws = h // s, w // s
    my, mx = np.divmod(np.arange(hs * ws), ws)
    cols = (s * my) * w + s * mx
    data = np.ones(hs * ws)
    return sparse.csr_matrix((data, (np.arange(hs * ws), cols)), shape=(hs * ws, h * w))


def gram_bruteforce(x, k: int, s: int) -> np.ndarray:
    """Σ_c 𝔛_cᵀM_sᵀM_s𝔛_c по явной матрице окон."""
    planes = _as_planes(x)
    _, h, w = planes.shape
    _guard(h, w, k)
    select = selection_matrix(h, w, s)
    gram = np.zeros((k * k, k * k))
    for plane in planes:
        sampled = select @ patch_matrix(plane, k)
        gram += sampled.T @ sampled
    return gram


def rhs_bruteforce(x, y, k: int, s: int) -> np.ndarray:
    """Σ_c 𝔛_cᵀM_sᵀvec(Y_c)."""
    planes = _as_planes(x)
    observed = _as_planes(y)
    c, h, w = planes.shape
    _guard(h, w, k)
    if observed.shape != (c, h // s, w // s):
        raise DimensionError(f"Наблюдение {observed.shape} не согласовано с {planes.shape} и s={s}")
    select = selection_matrix(h, w, s)
    rhs = np.zeros(k * k)
    for plane, obs in zip(planes, observed):
        rhs += (select @ patch_matrix(plane, k)).T @ obs.reshape(-1)
    return rhs


def gram_entry_direct(x, k: int, s: int, row: int, col: int) -> float:
    """Один элемент A[row, col] двойным циклом по прореженным пикселям."""
    planes = _as_planes(x)
    c, h, w = planes.shape
    _guard(h, w, k)
    r = (k - 1) // 2
    a1, b1 = divmod(row, k)
    a2, b2 = divmod(col, k)
    total = 0.0
    for ch in range(c):
        for i in range(0, h, s):
            for j in range(0, w, s):
                total += (planes[ch, (i + a1 - r) % h, (j + b1 - r) % w]
                          * planes[ch, (i + a2 - r) % h, (j + b2 - r) % w])
    return total


def solve_k_oracle(y, k_prev, x, alpha: float, s: int) -> np.ndarray:
    """Плотное решение нормальных уравнений для ядра по явным 𝔛 и M_s."""
    k_prev = np.asarray(k_prev, dtype=np.float64)
    k = k_prev.shape[0]
    gram = gram_bruteforce(x, k, s) + alpha * np.eye(k * k)
    rhs = rhs_bruteforce(x, y, k, s) + alpha * k_prev.reshape(-1)
    solution, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    return solution.reshape(k, k)


def conv_matrix(kern, h: int, w: int) -> sparse.csr_matrix:
    """Разреженная матрица (h·w, h·w) циклической взаимной корреляции с ядром."""
    kern = np.asarray(kern, dtype=np.float64)
    k = kern.shape[0]
    _guard(h, w, k)
    patches = patch_matrix(np.arange(h * w, dtype=np.float64).reshape(h, w), k).astype(np.int64)
    rows = np.repeat(np.arange(h * w), k * k)
    data = np.tile(kern.reshape(-1), h * w)
    return sparse.coo_matrix((data, (rows, patches.reshape(-1))), shape=(h * w, h * w)).tocsr()


def solve_x_oracle(y, kern, x_prev, alpha: float, s: int) -> np.ndarray:
    """
    Минимизатор ½‖M_s·T·x − y‖² + (α/2)‖x − x_prev‖² по явным операторным матрицам.

    При h·w <= 4096 система решается плотно, иначе методом сопряжённых градиентов
    до относительной невязки 1e-10.
    """
    observed = _as_planes(y)
    previous = _as_planes(x_prev)
    c, h, w = previous.shape
    operator = selection_matrix(h, w, s) @ conv_matrix(kern, h, w)
    normal = (operator.T @ operator + alpha * sparse.identity(h * w)).tocsr()
    dense = normal.toarray() if h * w <= DENSE_SOLVE_LIMIT else None

    out = np.empty_like(previous)
    for ch in range(c):
        rhs = operator.T @ observed[ch].reshape(-1) + alpha * previous[ch].reshape(-1)
        if dense is not None:
            solution = np.linalg.solve(dense, rhs)
        else:
            solution, info = cg(normal, rhs, x0=previous[ch].reshape(-1), rtol=1e-10, atol=0.0,
                                maxiter=20 * h * w)
            if info != 0:
                raise UDKEError(f"Метод сопряжённых градиентов не сошёлся (info={info})")
        out[ch] = solution.reshape(h, w)
    return out


def conv_direct(x, kern) -> np.ndarray:
    """Наивная циклическая взаимная корреляция четырьмя вложенными циклами."""
    planes = _as_planes(x)
    kern = np.asarray(kern, dtype=np.float64)
    c, h, w = planes.shape
    k = kern.shape[0]
    r = (k - 1) // 2
    out = np.zeros_like(planes)
    for ch in range(c):
        for i in range(h):
            for j in range(w):
                acc = 0.0
                for a in range(k):
                    for b in range(k):
                        acc += kern[a, b] * planes[ch, (i + a - r) % h, (j + b - r) % w]
                out[ch, i, j] = acc
    return out
