"""
Вертикальная ось симметрии лица: по центру прямоугольника носа (каскад)
или перебором столбцов с зеркальной корреляцией.

Столбец оси задаёт координату границы: ось c проходит между пикселями c − 1 и c,
зеркальные пары столбцов: (c − 1 − k, c + k).
"""

import logging
import math
from dataclasses import dataclass

from django.db import models

from .cascade import DEFAULT_MIN_NEIGHBORS, DEFAULT_SCALE_STEP, BoundingBox, CascadeModel, detect_nose
from .correlation import pearson
from .exceptions import DegenerateBandError, DetectionError, UndefinedCorrelationError
from .imaging import GrayImage

logger = logging.getLogger(__name__)

MAX_MIRROR_BAND = 40


class AxisMethod(models.TextChoices):
    CASCADE = "cascade", "Каскад (центр носа)"
    MIRROR_SEARCH = "mirror_search", "Зеркальный поиск"
    MANUAL = "manual", "Задана вручную"


@dataclass(frozen=True)
class SymmetryAxis:
    column: float
    method: str
    confidence: float = 1.0

    @classmethod
    def manual(cls, column: float) -> "SymmetryAxis":
        return cls(column=float(column), method=AxisMethod.MANUAL, confidence=1.0)

    def check_inside(self, width: int) -> None:
        if not 0 <= self.column <= width - 1:
            raise ValueError(f"Ось {self.column} вне изображения шириной {width}")


def axis_from_nose(bb: BoundingBox) -> SymmetryAxis:
    """Ось через центр прямоугольника носа: x0 + b/2"""
    return SymmetryAxis(column=bb.rect.x0 + bb.rect.w / 2, method=AxisMethod.CASCADE, confidence=bb.score)


def default_search_range(width: int) -> tuple[int, int]:
    return max(1, math.floor(0.25 * width)), min(width - 2, math.ceil(0.75 * width))


def mirror_search_axis(img: GrayImage, c_min: int | None = None, c_max: int | None = None) -> SymmetryAxis:
    """
    Перебор столбцов c ∈ [c_min, c_max]: корреляция полосы [c − bw, c) с
    отражённой полосой [c, c + bw), bw = min(c, width − 1 − c, 40).
    Возвращает столбец с максимальной корреляцией; при равенстве берётся меньший.
    """
    width = img.width
    default_min, default_max = default_search_range(width)
    c_min = default_min if c_min is None else c_min
    c_max = default_max if c_max is None else c_max
    if not 1 <= c_min <= c_max <= width - 2:
        raise ValueError(f"Диапазон поиска оси [{c_min}, {c_max}] недопустим для ширины {width}")

    pixels = img.pixels
    best_column, best_value = None, -math.inf
    degenerate = True

    for c in range(c_min, c_max + 1):
        band = min(c, width - 1 - c, MAX_MIRROR_BAND)
        if band < 1 or band * img.height < 2:
            continue
        degenerate = False
        try:
            value = pearson(pixels[:, c - band : c], pixels[:, c : c + band][:, ::-1])
        except UndefinedCorrelationError:
            continue
        if value > best_value:
            best_column, best_value = c, value

    if degenerate:
        raise DegenerateBandError(f"Полоса сравнения вырождена для всех столбцов [{c_min}, {c_max}]")
    if best_column is None:
        raise UndefinedCorrelationError("Корреляция не определена ни для одного столбца-кандидата")

    logger.debug("Зеркальный поиск: ось %d, корреляция %.6f", best_column, best_value)
    return SymmetryAxis(column=float(best_column), method=AxisMethod.MIRROR_SEARCH, confidence=best_value)


def locate_axis(
    img: GrayImage,
    cascade: CascadeModel | None = None,
    scale_step: float = DEFAULT_SCALE_STEP,
    min_neighbors: int = DEFAULT_MIN_NEIGHBORS,
) -> SymmetryAxis:
    """Ось по каскаду, если он задан и нашёл нос; иначе зеркальный поиск"""
    if cascade is not None:
        try:
            bb = detect_nose(img, cascade, scale_step=scale_step, min_neighbors=min_neighbors)
        except DetectionError as exc:
            logger.warning("Каскад неприменим к %s: %s", img, exc)
            bb = None
        if bb is not None:
            axis = axis_from_nose(bb)
            if 1 <= axis.column <= img.width - 1:
                return axis
        logger.info("Нос не найден на %s, используется зеркальный поиск оси", img)
    return mirror_search_axis(img)
