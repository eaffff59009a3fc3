"""
Собственные пары симметричной матрицы циклическим методом Якоби.

Вращения внутри одного раунда затрагивают непересекающиеся пары индексов
(круговое расписание), поэтому раунд применяется векторно и результат
не зависит от порядка пар.
"""

import logging

import numpy as np

from .exceptions import EigensolverError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_SWEEPS = 100


def round_robin(size: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Круговое расписание для чётного size: size − 1 раундов по size/2 непересекающихся пар"""
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        pairs = [(players[k], players[size - 1 - k]) for k in range(size // 2)]
        p = np.array([min(pair) for pair in pairs])
        q = np.array([max(pair) for pair in pairs])
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def off_diagonal_norm(a: np.ndarray) -> float:
    # Сумма по самим внедиагональным элементам: разность ‖A‖² − Σdiag² теряет точность
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(
    matrix: np.ndarray, tol: float = DEFAULT_TOLERANCE, max_sweeps: int = DEFAULT_MAX_SWEEPS
) -> tuple[np.ndarray, np.ndarray]:
    """
    Собственные значения по убыванию и собственные векторы (столбцы).
    Сходимость: внедиагональная норма Фробениуса ≤ tol·‖M‖_F.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ValueError(f"Ожидалась непустая квадратная матрица, получена форма {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
        raise ValueError("Матрица не симметрична")

    n = matrix.shape[0]
    size = n + n % 2
    a = np.zeros((size, size))
    a[:n, :n] = (matrix + matrix.T) / 2.0
    v = np.eye(size)

    norm = float(np.linalg.norm(matrix))
    rounds = round_robin(size) if size > 1 else []
    sweeps = 0

    while off_diagonal_norm(a) > tol * norm:
        if sweeps == max_sweeps:
            raise EigensolverError(
                f"Метод Якоби не сошёлся за {max_sweeps} проходов: внедиагональная норма {off_diagonal_norm(a):.3e}"
            )
        for p, q in rounds:
            _rotate(a, v, p, q)
        sweeps += 1

    logger.debug("Якоби: матрица %dx%d, проходов %d", n, n, sweeps)

    values = np.diag(a)[:n].copy()
    vectors = v[:n, :n].copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def _rotate(a: np.ndarray, v: np.ndarray, p: np.ndarray, q: np.ndarray) -> None:
    app, aqq, apq = a[p, p], a[q, q], a[p, q]
    active = apq != 0.0

    c = np.ones_like(apq)
    s = np.zeros_like(apq)
    if active.any():
        with np.errstate(over="ignore"):
            theta = (aqq[active] - app[active]) / (2.0 * apq[active])
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
        c[active] = 1.0 / np.sqrt(1.0 + t * t)
        s[active] = t * c[active]

    rows_p, rows_q = a[p, :].copy(), a[q, :].copy()
    a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
    a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q

    cols_p, cols_q = a[:, p].copy(), a[:, q].copy()
    a[:, p] = cols_p * c - cols_q * s
    a[:, q] = cols_p * s + cols_q * c

    vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
    v[:, p] = vec_p * c - vec_q * s
    v[:, q] = vec_p * s + vec_q * c
