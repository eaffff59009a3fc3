"""
Дорисовка лица по видимой половине: отражение половины относительно оси,
подбор смещения по максимуму нормированной взаимной корреляции в полосе шва
и многополосное (пирамида Лапласа) смешивание.

Смещение Offset(i, j): пиксель шва левого изображения (x, y) соответствует
пикселю правого (x + i, y + j).
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from django.db import models
from scipy import ndimage

from .axis import SymmetryAxis
from .correlation import pearson
from .exceptions import RectOutOfBoundsError, StitchGeometryError, UndefinedCorrelationError
from .imaging import GrayImage, Rect, crop, hflip

logger = logging.getLogger(__name__)

PYRAMID_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


class StitchSide(models.TextChoices):
    AUTO = "auto", "Автоматически"
    LEFT = "left", "Левая половина"
    RIGHT = "right", "Правая половина"


@dataclass(frozen=True)
class Offset:
    i: int
    j: int

    def as_tuple(self) -> tuple[int, int]:
        return self.i, self.j


@dataclass(frozen=True)
class StitchParams:
    search_radius: int = 10
    band_width: int = 16
    blend_levels: int = 4
    feather_width: int = 8

    def __post_init__(self):
        if self.search_radius < 0:
            raise ValueError(f"search_radius не может быть отрицательным: {self.search_radius}")
        if self.band_width < 2:
            raise ValueError(f"band_width должен быть не меньше 2: {self.band_width}")
        if self.blend_levels < 1:
            raise ValueError(f"blend_levels должен быть не меньше 1: {self.blend_levels}")
        if self.feather_width < 1:
            raise ValueError(f"feather_width должен быть не меньше 1: {self.feather_width}")


@dataclass(frozen=True)
class StitchOutcome:
    image: GrayImage
    offset: Offset
    # None, если за осью нет сигнала и смещение принято номинальным (0, 0)
    peak_ncc: float | None
    axis: SymmetryAxis
    side: str
    # Столбец исходного изображения, на который приходится столбец 0 результата
    origin: int = 0


def ncc(w_img: GrayImage, f_img: GrayImage, off: Offset, region: Rect) -> float:
    """
    Нормированная взаимная корреляция w по области region и f по той же
    области, сдвинутой на (i, j); средние берутся внутри области.
    """
    if not region.fits(w_img.width, w_img.height):
        raise RectOutOfBoundsError(f"{region} выходит за изображение {w_img.width}x{w_img.height}")
    x0, y0 = region.x0 + off.i, region.y0 + off.j
    if x0 < 0 or y0 < 0 or x0 + region.w > f_img.width or y0 + region.h > f_img.height:
        raise RectOutOfBoundsError(f"{region} со смещением {off} выходит за изображение {f_img.width}x{f_img.height}")

    shifted = f_img.pixels[y0 : y0 + region.h, x0 : x0 + region.w]
    return pearson(w_img.pixels[region.slices], shifted)


def find_best_offset(left: GrayImage, right: GrayImage, p: StitchParams) -> tuple[Offset, float]:
    """
    Полный перебор смещений в полосе шва: band_width правых столбцов left
    против band_width левых столбцов right. Строки [R, H − R), |j| ≤ R,
    |i| ≤ min(R, band_width − 2). При равной корреляции выигрывает меньшее
    |i| + |j|, затем меньшее j, затем меньшее i.
    """
    band, radius = p.band_width, p.search_radius
    height = min(left.height, right.height)
    if left.width < band or right.width < band:
        raise StitchGeometryError(f"Ширина изображений меньше полосы шва {band}")
    if height < 2 * radius + 2:
        raise StitchGeometryError(f"Высота {height} меньше 2·{radius} + 2")

    start = left.width - band
    rows = height - 2 * radius
    max_i = min(radius, band - 2)

    best_key, best = None, None
    for j in range(-radius, radius + 1):
        for i in range(-max_i, max_i + 1):
            region = Rect(start + max(0, -i), radius, band - abs(i), rows)
            try:
                value = ncc(left, right, Offset(i - start, j), region)
            except UndefinedCorrelationError:
                continue
            key = (-value, abs(i) + abs(j), j, i)
            if best_key is None or key < best_key:
                best_key, best = key, (Offset(i, j), value)

    if best is None:
        raise UndefinedCorrelationError("Корреляция не определена ни для одного смещения: полосы шва постоянны")

    logger.debug("Лучшее смещение %s, корреляция %.6f", best[0], best[1])
    return best


# Многополосное смешивание

def _reflect_index(index: np.ndarray, size: int) -> np.ndarray:
    m = np.mod(index, 2 * size)
    return np.where(m >= size, 2 * size - 1 - m, m)


def _extend(pixels: np.ndarray, width: int, height: int, dx: int, dy: int) -> np.ndarray:
    """Слой холста: пиксель (x, y) ← src(x − dx, y − dy); по горизонтали отражение, по вертикали повтор края"""
    cols = _reflect_index(np.arange(width) - dx, pixels.shape[1])
    rows = np.clip(np.arange(height) - dy, 0, pixels.shape[0] - 1)
    return pixels[np.ix_(rows, cols)]


def _blur(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(arr, kernel, axis=0, mode="mirror")
    return ndimage.correlate1d(out, kernel, axis=1, mode="mirror")


def _reduce(arr: np.ndarray) -> np.ndarray:
    return _blur(arr, PYRAMID_KERNEL)[::2, ::2]


def _expand(arr: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    up = np.zeros(shape)
    up[::2, ::2] = arr
    return _blur(up, 2.0 * PYRAMID_KERNEL)


def _gaussian_pyramid(arr: np.ndarray, levels: int) -> list[np.ndarray]:
    pyramid = [arr]
    for _ in range(levels - 1):
        pyramid.append(_reduce(pyramid[-1]))
    return pyramid


def _laplacian_pyramid(arr: np.ndarray, levels: int) -> list[np.ndarray]:
    gaussian = _gaussian_pyramid(arr, levels)
    laplacian = [g - _expand(gaussian[k + 1], g.shape) for k, g in enumerate(gaussian[:-1])]
    laplacian.append(gaussian[-1])
    return laplacian


def effective_levels(levels: int, width: int, height: int) -> int:
    while levels > 1 and 2**levels > min(width, height):
        levels -= 1
    return levels


def seam_mask(width: int, height: int, seam: int, feather: int) -> np.ndarray:
    """Вес левого слоя: линейный спад на feather столбцах с центром на шве"""
    centers = np.arange(width) + 0.5
    ramp = np.clip(0.5 + (seam - centers) / feather, 0.0, 1.0)
    return np.tile(ramp, (height, 1))


def multiband_blend(left: GrayImage, right: GrayImage, off: Offset, p: StitchParams) -> GrayImage:
    """
    Правое изображение ставится вплотную к левому со смещением off
    (пиксель (u, v) правого → (W_left + u − i, v − j)); строки холста совпадают со строками left.
    Пирамиды Лапласа обоих слоёв смешиваются по сглаженной на каждом уровне
    маске шва; результат обрезается в [0, 1].
    """
    height = left.height
    width = left.width - off.i + right.width
    if width < 1:
        raise StitchGeometryError(f"Смещение {off} даёт пустой холст")

    layer_left = _extend(left.pixels, width, height, 0, 0)
    layer_right = _extend(right.pixels, width, height, left.width - off.i, -off.j)
    mask = seam_mask(width, height, left.width + math.floor(-off.i / 2), p.feather_width)

    levels = effective_levels(p.blend_levels, width, height)
    if levels != p.blend_levels:
        logger.debug("Уровней пирамиды уменьшено до %d для холста %dx%d", levels, width, height)

    pyr_left = _laplacian_pyramid(layer_left, levels)
    pyr_right = _laplacian_pyramid(layer_right, levels)
    pyr_mask = _gaussian_pyramid(mask, levels)
    blended = [m * a + (1.0 - m) * b for a, b, m in zip(pyr_left, pyr_right, pyr_mask)]

    out = blended[-1]
    for level in reversed(blended[:-1]):
        out = level + _expand(out, level.shape)
    return GrayImage(np.clip(out, 0.0, 1.0))


# Сквозной процесс

def choose_side(img: GrayImage, boundary: int) -> str:
    """Более широкая сторона оси; при равенстве та, что с большей дисперсией, затем левая"""
    left_width, right_width = boundary, img.width - boundary
    if left_width != right_width:
        return StitchSide.LEFT if left_width > right_width else StitchSide.RIGHT
    left_var = float(img.pixels[:, :boundary].var())
    right_var = float(img.pixels[:, boundary:].var())
    return StitchSide.RIGHT if right_var > left_var else StitchSide.LEFT


def stitch_face(
    img: GrayImage,
    axis: SymmetryAxis,
    p: StitchParams | None = None,
    side: str = StitchSide.AUTO,
    visible: tuple[int, int] | None = None,
) -> StitchOutcome:
    """
    Видимая половина I_1 обрезается по floor(axis.column), I_2 = hflip(I_1),
    смещение ищется по столбцам за осью исходного изображения, затем
    I_1 и I_2 смешиваются. Правая половина обрабатывается в отражённом виде.

    visible = (x0, x1): заведомо видимые столбцы [x0, x1). Если ось лежит
    за их границей, I_1 обрезается по границе, а I_2 ставится так, чтобы
    ось осталась на своём столбце; промежуток между ними заполняется смешиванием.
    """
    p = p or StitchParams()
    axis.check_inside(img.width)
    boundary = math.floor(axis.column)
    if not 1 <= boundary <= img.width - 1:
        raise StitchGeometryError(f"Ось {axis.column} слишком близко к краю изображения шириной {img.width}")

    if side == StitchSide.AUTO:
        side = choose_side(img, boundary)

    # reach: сколько столбцов от внешнего края видимой стороны доступно
    work, reach = img, img.width
    if visible is not None:
        x0, x1 = visible
        if not 0 <= x0 < x1 <= img.width:
            raise ValueError(f"Видимые столбцы [{x0}, {x1}) вне изображения шириной {img.width}")
        reach = x1 if side == StitchSide.LEFT else img.width - x0
    if side == StitchSide.RIGHT:
        work = hflip(img)
        boundary = img.width - boundary
    limit = min(boundary, reach)
    if limit < 1:
        raise StitchGeometryError(f"Видимая часть по сторону {side} от оси {axis.column} пуста")

    first = crop(work, Rect(0, 0, limit, work.height))
    second = hflip(first)

    gap = boundary - limit
    context = min(p.band_width, reach - boundary, boundary)
    peak = None
    offset = Offset(0, 0)
    if gap > 0:
        # Столбцы [limit, boundary) и их зеркальные пары закрыты
        offset = Offset(-2 * gap, 0)
        logger.info("Ось за видимой частью на %d столбцов, I_2 сдвинута на %s", gap, offset)
    elif context >= 2 and np.ptp(work.pixels[:, boundary : boundary + context]) > 0:
        composite = crop(work, Rect(0, 0, boundary + context, work.height))
        offset, peak = find_best_offset(composite, second, replace(p, band_width=context))
    else:
        logger.info("За осью нет сигнала, используется номинальное смещение (0, 0)")

    image = multiband_blend(first, second, offset, p)
    origin = 0
    if side == StitchSide.RIGHT:
        image = hflip(image)
        origin = img.width - image.width

    logger.debug("Сшивка: сторона %s, ось %.1f, смещение %s, корреляция %s", side, axis.column, offset, peak)
    return StitchOutcome(image=image, offset=offset, peak_ncc=peak, axis=axis, side=str(side), origin=origin)
