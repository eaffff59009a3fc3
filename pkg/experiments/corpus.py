"""
Корпус лиц: обход каталога, проверка геометрии, разбиение на обучающую
и тестовую части и синтез закрытия половины лица.

Поддерживаются две раскладки:
    root/<человек>/<изображения>
    root/<категория>/<человек>/<изображения>   (female / male / malestaff)
"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.cache import cache
from django.db import models

from faces.exceptions import CorpusError, EmptyCorpusError, GeometryMismatchError, SplitInfeasibleError
from faces.imaging import GrayImage, read_size

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".pgm", ".png")


class OcclusionMode(models.TextChoices):
    NONE = "none", "Без закрытия"
    MASK_RIGHT_HALF = "mask_right_half", "Закрыта правая половина"
    MASK_LEFT_HALF = "mask_left_half", "Закрыта левая половина"


@dataclass(frozen=True)
class CorpusEntry:
    person_id: str
    path: Path
    category: str = ""


@dataclass(frozen=True)
class Corpus:
    root: Path
    entries: tuple[CorpusEntry, ...]
    width: int
    height: int

    @property
    def persons(self) -> list[str]:
        return sorted({entry.person_id for entry in self.entries})

    @property
    def categories(self) -> list[str]:
        return sorted({entry.category for entry in self.entries if entry.category})

    def by_person(self) -> dict[str, list[CorpusEntry]]:
        groups = {}
        for entry in self.entries:
            groups.setdefault(entry.person_id, []).append(entry)
        return groups

    def __len__(self):
        return len(self.entries)


def _images_in(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _subdirs(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.is_dir())


def _enumerate(root: Path) -> list[CorpusEntry]:
    entries = []
    owners = {}
    for top in _subdirs(root):
        images = _images_in(top)
        if images:
            groups = [("", top, images)]
        else:
            groups = [(top.name, person, _images_in(person)) for person in _subdirs(top)]

        for category, person_dir, person_images in groups:
            if not person_images:
                continue
            person_id = person_dir.name
            if person_id in owners and owners[person_id] != category:
                raise CorpusError(f"Человек {person_id} встречается в категориях {owners[person_id]!r} и {category!r}")
            owners[person_id] = category
            entries.extend(CorpusEntry(person_id, path, category) for path in person_images)
    return entries


def _signature(entries: list[CorpusEntry]) -> str:
    digest = hashlib.sha1()
    for entry in entries:
        stat = entry.path.stat()
        digest.update(f"{entry.path}:{stat.st_mtime_ns}:{stat.st_size}\n".encode())
    return digest.hexdigest()


def ingest(root, use_cache: bool = True) -> Corpus:
    """
    Лексикографический обход корпуса; идентификатор человека равен имени каталога.
    Геометрия сверяется с первым изображением; результат проверки кешируется
    по подписи файлов (путь, mtime, размер).
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"Каталог корпуса не найден: {root}")

    entries = _enumerate(root)
    if not entries:
        raise EmptyCorpusError(f"В каталоге {root} нет изображений PGM/PNG")

    cache_key = f"corpus_geometry_{_signature(entries)}" if use_cache else None
    geometry = cache.get(cache_key) if cache_key else None

    if geometry is None:
        geometry = read_size(entries[0].path)
        for entry in entries[1:]:
            size = read_size(entry.path)
            if size != geometry:
                raise GeometryMismatchError(
                    f"{entry.path}: размер {size[0]}x{size[1]}, ожидался {geometry[0]}x{geometry[1]}"
                )
        if cache_key:
            cache.set(cache_key, geometry, settings.HALFFACE_CORPUS_CACHE_TIMEOUT)
    else:
        logger.debug("Геометрия корпуса %s взята из кеша", root)

    corpus = Corpus(root=root, entries=tuple(entries), width=geometry[0], height=geometry[1])
    logger.info("Корпус %s: изображений %d, людей %d, размер %dx%d", root, len(corpus), len(corpus.persons), *geometry)
    return corpus


def split(
    corpus: Corpus,
    seed: int = 42,
    train_fraction: float | None = 0.8,
    train_per_person: int | None = None,
) -> tuple[list[CorpusEntry], list[CorpusEntry]]:
    """
    Разбиение по людям с перемешиванием (numpy default_rng(seed)).
    Доля: n_train = min(max(1, round(f·n)), n − 1); люди с единственным
    изображением целиком уходят в обучение. Количество: нужно n ≥ c + 1.
    """
    if (train_fraction is None) == (train_per_person is None):
        raise ValueError("Нужно задать ровно одно из train_fraction и train_per_person")
    if train_fraction is not None and not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction должна лежать в (0, 1): {train_fraction}")
    if train_per_person is not None and train_per_person < 1:
        raise ValueError(f"train_per_person должно быть не меньше 1: {train_per_person}")

    rng = np.random.default_rng(seed)
    train, test = [], []
    for person, entries in sorted(corpus.by_person().items()):
        count = len(entries)
        if train_per_person is not None:
            if count < train_per_person + 1:
                raise SplitInfeasibleError(
                    f"У человека {person} {count} изображений, нужно не меньше {train_per_person + 1}"
                )
            n_train = train_per_person
        elif count == 1:
            logger.warning("У человека %s одно изображение: только в галерее", person)
            n_train = 1
        else:
            n_train = min(max(1, int(np.floor(train_fraction * count + 0.5))), count - 1)

        order = rng.permutation(count)
        chosen = set(order[:n_train].tolist())
        for index, entry in enumerate(entries):
            (train if index in chosen else test).append(entry)

    return train, test


def occlude(img: GrayImage, mode: str) -> GrayImage:
    """Правая половина: обнуляются столбцы ≥ floor(W/2); левая: столбцы < ceil(W/2)"""
    if mode == OcclusionMode.NONE:
        return img
    pixels = img.pixels.copy()
    if mode == OcclusionMode.MASK_RIGHT_HALF:
        pixels[:, img.width // 2 :] = 0.0
    elif mode == OcclusionMode.MASK_LEFT_HALF:
        pixels[:, : (img.width + 1) // 2] = 0.0
    else:
        raise ValueError(f"Неизвестный режим закрытия: {mode}")
    return GrayImage(pixels)


def visible_columns(mode: str, width: int) -> tuple[int, int] | None:
    """Столбцы [x0, x1), которые occlude оставляет видимыми; None без закрытия"""
    if mode == OcclusionMode.MASK_RIGHT_HALF:
        return 0, width // 2
    if mode == OcclusionMode.MASK_LEFT_HALF:
        return (width + 1) // 2, width
    return None
