"""
Полутоновые изображения: контейнер пикселей, чтение/запись PGM и PNG,
элементарные геометрические и фотометрические преобразования.

Внутри пиксели хранятся как float64 в [0, 1]; квантование в 8 бит
происходит только на границе с файлом.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .exceptions import (
    CorruptImageError,
    ImageNotFoundError,
    ImageWriteError,
    RectOutOfBoundsError,
    UnsupportedImageFormatError,
)

logger = logging.getLogger(__name__)

# ITU-R BT.601
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PGM_MAGICS = (b"P2", b"P5")


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Неизменяемое полутоновое изображение; pixels[y, x], значения в [0, 1]"""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.array(self.pixels, dtype=np.float64)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ValueError(f"Ожидался непустой двумерный массив, получена форма {pixels.shape}")
        if not np.isfinite(pixels).all():
            raise ValueError("Изображение содержит нечисловые значения")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ValueError("Значения пикселей должны лежать в [0, 1]")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def at(self, x: int, y: int) -> float:
        return float(self.pixels[y, x])

    @classmethod
    def filled(cls, width: int, height: int, value: float) -> "GrayImage":
        return cls(np.full((height, width), value, dtype=np.float64))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True)
class Rect:
    """Прямоугольник: левый верхний пиксель (x0, y0), размеры w × h"""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError(f"Начало прямоугольника должно быть неотрицательным: {self}")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"Размеры прямоугольника должны быть не меньше 1: {self}")

    @property
    def x1(self) -> int:
        return self.x0 + self.w

    @property
    def y1(self) -> int:
        return self.y0 + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.y0, self.y1), slice(self.x0, self.x1)

    def fits(self, width: int, height: int) -> bool:
        return self.x1 <= width and self.y1 <= height

    def translated(self, dx: int, dy: int) -> "Rect":
        return Rect(self.x0 + dx, self.y0 + dy, self.w, self.h)

    @classmethod
    def covering(cls, img: GrayImage) -> "Rect":
        return cls(0, 0, img.width, img.height)


# Чтение

def _check_format(path: Path) -> None:
    """Принимаются только PGM (P2/P5) и PNG, хотя Pillow открывает и другие форматы"""
    if not path.is_file():
        raise ImageNotFoundError(f"Файл изображения не найден: {path}")
    with path.open("rb") as fh:
        head = fh.read(len(PNG_SIGNATURE))
    if head[:2] not in PGM_MAGICS and not head.startswith(PNG_SIGNATURE):
        raise UnsupportedImageFormatError(f"Неподдерживаемый формат изображения: {path}")


def load_image(path) -> GrayImage:
    """Загрузка PGM (P2/P5, 8 или 16 бит) или PNG (серый или RGB) в GrayImage"""
    path = Path(path)
    _check_format(path)
    try:
        with Image.open(path) as im:
            im.load()
            pixels = _to_unit_range(im, path)
    except UnidentifiedImageError as exc:
        raise UnsupportedImageFormatError(f"Файл не распознан как изображение: {path}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"Повреждённое изображение {path}: {exc}") from exc

    return GrayImage(np.clip(pixels, 0.0, 1.0))


def read_size(path) -> tuple[int, int]:
    """Размеры (width, height): Pillow читает только заголовок"""
    path = Path(path)
    _check_format(path)
    try:
        with Image.open(path) as im:
            return im.size
    except UnidentifiedImageError as exc:
        raise UnsupportedImageFormatError(f"Файл не распознан как изображение: {path}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"Повреждённый заголовок {path}: {exc}") from exc


def _to_unit_range(im: Image.Image, path: Path) -> np.ndarray:
    # Pillow приводит PGM с произвольным maxval к 255 (режим L) или 65535 (режим I)
    if im.mode in ("L", "LA", "1"):
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    if im.mode.startswith("I"):
        return np.asarray(im, dtype=np.float64) / 65535.0
    if im.mode in ("RGB", "RGBA", "P"):
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
        return (rgb @ LUMA_WEIGHTS) / 255.0
    raise UnsupportedImageFormatError(f"Режим изображения {im.mode} не поддерживается: {path}")


# Запись

def quantize(img: GrayImage) -> np.ndarray:
    """8-битные коды, округление половины вверх"""
    return np.floor(img.pixels * 255.0 + 0.5).astype(np.uint8)


def save_image(img: GrayImage, path) -> None:
    """Запись в бинарный PGM (P5) или PNG по расширению файла"""
    path = Path(path)
    fmt = "PNG" if path.suffix.lower() == ".png" else "PPM"
    try:
        Image.fromarray(quantize(img)).save(path, format=fmt)
    except OSError as exc:
        raise ImageWriteError(f"Не удалось записать изображение {path}: {exc}") from exc
    logger.debug("Изображение %s записано в %s (%s)", img, path, fmt)


# Преобразования

def crop(img: GrayImage, r: Rect) -> GrayImage:
    if not r.fits(img.width, img.height):
        raise RectOutOfBoundsError(f"{r} выходит за границы изображения {img.width}x{img.height}")
    return GrayImage(img.pixels[r.slices])


def hflip(img: GrayImage) -> GrayImage:
    return GrayImage(img.pixels[:, ::-1])


def photometric_normalize(img: GrayImage) -> GrayImage:
    """
    Нормализация яркости: нулевое среднее и единичное СКО,
    затем аффинное отображение в [0, 1]. Постоянное изображение → 0.5.
    """
    pixels = img.pixels
    if np.ptp(pixels) == 0:
        return GrayImage.filled(img.width, img.height, 0.5)

    z = (pixels - pixels.mean()) / pixels.std()
    z = (z - z.min()) / (z.max() - z.min())
    return GrayImage(np.clip(z, 0.0, 1.0))


def fit_to(img: GrayImage, width: int, height: int, origin: int = 0) -> GrayImage:
    """
    Кадр width × height, в котором столбец 0 изображения стоит на столбце origin
    (origin может быть отрицательным). Лишнее обрезается, недостающее
    дополняется повтором крайних столбцов и строк.
    """
    rows = np.clip(np.arange(height), 0, img.height - 1)
    cols = np.clip(np.arange(width) - origin, 0, img.width - 1)
    return GrayImage(img.pixels[np.ix_(rows, cols)])
