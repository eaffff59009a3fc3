"""Синтетические корпуса лиц на диске"""

from faces.imaging import GrayImage, save_image
from faces.tests.fixtures import quantized, smooth_texture, symmetric_about


def write_corpus(root, persons, per_person, rng, height=32, width=40, category="", suffix=".pgm", axis=None):
    """
    Каталог root[/category]/<человек>/<NN><suffix>. У каждого человека своя
    базовая текстура; снимки отличаются небольшим шумом и симметричны
    относительно столбца-границы axis (по умолчанию width // 2).
    """
    axis = width // 2 if axis is None else axis
    base_dir = root / category if category else root
    for person in persons:
        person_dir = base_dir / person
        person_dir.mkdir(parents=True, exist_ok=True)
        base = smooth_texture(rng, height, width)
        for index in range(per_person):
            noisy = (base + rng.normal(0.0, 0.01, base.shape)).clip(0.0, 1.0)
            save_image(quantized(symmetric_about(noisy, axis)), person_dir / f"{index:02d}{suffix}")
    return root


def write_constant(path, height=32, width=40, value=0.5):
    save_image(GrayImage.filled(width, height, value), path)
