import numpy as np

from .exceptions import DimensionMismatchError, UndefinedCorrelationError


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """
    Коэффициент корреляции двух наборов пикселей одинаковой формы:
    Σ(a−ā)(b−b̄) / sqrt(Σ(a−ā)² · Σ(b−b̄)²).

    Общее ядро нормированной взаимной корреляции при сшивке, поиска оси
    симметрии и метрики качества CR.
    """
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Формы не совпадают: {a.shape} и {b.shape}")
    if a.size == 0:
        raise UndefinedCorrelationError("Пустая область корреляции")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise UndefinedCorrelationError("Нулевая дисперсия: корреляция не определена")

    da = a - a.mean()
    db = b - b.mean()
    denominator = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if denominator == 0:
        raise UndefinedCorrelationError("Нулевая дисперсия: корреляция не определена")
    return float(np.clip(np.sum(da * db) / denominator, -1.0, 1.0))
