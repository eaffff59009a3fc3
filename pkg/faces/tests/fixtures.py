"""Синтетические изображения для тестов"""

import numpy as np
from scipy import ndimage

from faces.imaging import GrayImage


def smooth_texture(rng, height, width, sigma=3.0):
    """Гладкая случайная текстура со значениями в [0.1, 0.9]"""
    noise = ndimage.gaussian_filter(rng.random((height, width)), sigma, mode="reflect")
    noise = (noise - noise.min()) / (noise.max() - noise.min())
    return 0.1 + 0.8 * noise


def symmetric_face(rng, height=200, width=180, sigma=3.0):
    """Лицо, зеркально симметричное относительно столбца width / 2"""
    half = smooth_texture(rng, height, width // 2, sigma)
    return GrayImage(np.hstack([half, half[:, ::-1]]))


def symmetric_about(pixels, column):
    """Короткая сторона от границы column заменяется отражением длинной: пары (column − 1 − k, column + k)"""
    pixels = np.array(pixels, dtype=np.float64)
    width = pixels.shape[1]
    short = range(column, width) if 2 * column >= width else range(column)
    for x in short:
        pixels[:, x] = pixels[:, 2 * column - 1 - x]
    return pixels


def off_centre_face(rng, column, height=200, width=180, sigma=3.0):
    """Лицо, симметричное относительно произвольного столбца-границы"""
    return GrayImage(symmetric_about(smooth_texture(rng, height, width, sigma), column))


def quantized(pixels):
    """Значения, точно представимые в 8 битах (k / 255)"""
    return GrayImage(np.floor(np.asarray(pixels) * 255.0 + 0.5) / 255.0)


def blob_image(size=40, x0=18, y0=18, blob=4):
    pixels = np.ones((size, size))
    pixels[y0 : y0 + blob, x0 : x0 + blob] = 0.0
    return GrayImage(pixels)
