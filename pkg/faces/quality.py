"""Метрики качества дорисовки: MSE, CR и средняя знаковая ошибка (8-битная шкала для MSE)"""

from dataclasses import asdict, dataclass

import numpy as np

from .correlation import pearson
from .exceptions import DimensionMismatchError
from .imaging import GrayImage

PIXEL_SCALE = 255.0


@dataclass(frozen=True)
class QualityReport:
    mse: float
    cr: float
    mean_signed_error: float

    def as_dict(self) -> dict:
        return asdict(self)


def _check_shapes(original: GrayImage, stitched: GrayImage) -> None:
    if original.shape != stitched.shape:
        raise DimensionMismatchError(
            f"Размеры не совпадают: {original.width}x{original.height} и {stitched.width}x{stitched.height}"
        )


def mse(original: GrayImage, stitched: GrayImage) -> float:
    _check_shapes(original, stitched)
    diff = PIXEL_SCALE * (original.pixels - stitched.pixels)
    return float(np.mean(diff * diff))


def cr(original: GrayImage, stitched: GrayImage) -> float:
    """Коэффициент корреляции Пирсона; не определён для постоянного операнда"""
    _check_shapes(original, stitched)
    return pearson(original.pixels, stitched.pixels)


def mean_signed_error(original: GrayImage, stitched: GrayImage) -> float:
    """Средняя разность (original − stitched) без возведения в квадрат, 8-битная шкала"""
    _check_shapes(original, stitched)
    return float(np.mean(PIXEL_SCALE * (original.pixels - stitched.pixels)))


def crop_to_common(original: GrayImage, stitched: GrayImage, origin: int = 0) -> tuple[GrayImage, GrayImage]:
    """
    Общая область двух изображений разного размера; столбец 0 stitched
    соответствует столбцу origin оригинала, строки совпадают сверху
    """
    height = min(original.height, stitched.height)
    x0, x1 = max(0, origin), min(original.width, origin + stitched.width)
    if x1 <= x0:
        raise DimensionMismatchError(
            f"Нет общих столбцов: ширины {original.width} и {stitched.width}, начало {origin}"
        )
    return (
        GrayImage(original.pixels[:height, x0:x1]),
        GrayImage(stitched.pixels[:height, x0 - origin : x1 - origin]),
    )


def assess(original: GrayImage, stitched: GrayImage, common_region: bool = False, origin: int = 0) -> QualityReport:
    if common_region:
        original, stitched = crop_to_common(original, stitched, origin)
    return QualityReport(
        mse=mse(original, stitched),
        cr=cr(original, stitched),
        mean_signed_error=mean_signed_error(original, stitched),
    )
