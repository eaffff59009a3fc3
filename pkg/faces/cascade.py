"""
Каскад Хаара для поиска носа: интегральное изображение, загрузка
каскада в устаревшем XML-формате OpenCV и сканирование скользящим окном.

Поддерживаются только одноузловые деревья (пни) и прямые (не наклонные) признаки.
"""

import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .exceptions import CascadeFormatError, DetectionError
from .imaging import GrayImage, Rect

logger = logging.getLogger(__name__)

# Окна с меньшим СКО отбрасываются
MIN_WINDOW_STD = 1e-6
GROUP_IOU = 0.5
DEFAULT_SCALE_STEP = 1.1
DEFAULT_MIN_NEIGHBORS = 3


@dataclass(frozen=True)
class HaarRect:
    x: int
    y: int
    w: int
    h: int
    weight: float


@dataclass(frozen=True)
class WeakClassifier:
    rects: tuple[HaarRect, ...]
    threshold: float
    left_val: float
    right_val: float


@dataclass(frozen=True)
class Stage:
    threshold: float
    classifiers: tuple[WeakClassifier, ...]


@dataclass(frozen=True)
class CascadeModel:
    """Каскад: базовое окно window_w × window_h и упорядоченные стадии"""

    window_w: int
    window_h: int
    stages: tuple[Stage, ...]

    def __post_init__(self):
        if self.window_w < 1 or self.window_h < 1:
            raise CascadeFormatError(f"Некорректный размер окна {self.window_w}x{self.window_h}")
        if not self.stages:
            raise CascadeFormatError("Каскад не содержит ни одной стадии")
        for number, stage in enumerate(self.stages):
            if not stage.classifiers:
                raise CascadeFormatError(f"Стадия {number} не содержит слабых классификаторов")
            for classifier in stage.classifiers:
                if not classifier.rects:
                    raise CascadeFormatError(f"Стадия {number}: признак без прямоугольников")
                for r in classifier.rects:
                    if r.x < 0 or r.y < 0 or r.w < 1 or r.h < 1:
                        raise CascadeFormatError(f"Стадия {number}: некорректный прямоугольник {r}")
                    if r.x + r.w > self.window_w or r.y + r.h > self.window_h:
                        raise CascadeFormatError(f"Стадия {number}: прямоугольник {r} выходит за базовое окно")


@dataclass(frozen=True)
class BoundingBox:
    """Найденный прямоугольник носа и уверенность детектора"""

    rect: Rect
    score: float

    @property
    def centroid(self) -> tuple[float, float]:
        """Пересечение диагоналей: (x0 + b/2, y0 + h/2)"""
        return self.rect.x0 + self.rect.w / 2, self.rect.y0 + self.rect.h / 2

    @property
    def centroid_pixel(self) -> tuple[int, int]:
        return self.rect.x0 + self.rect.w // 2, self.rect.y0 + self.rect.h // 2


@dataclass(frozen=True, eq=False)
class SummedAreaTable:
    """Таблица сумм: table[y + 1, x + 1] = Σ img(u, v) по u ≤ x, v ≤ y"""

    table: np.ndarray

    def at(self, x: int, y: int) -> float:
        return float(self.table[y + 1, x + 1])

    def rect_sum(self, r: Rect) -> float:
        t = self.table
        return float(t[r.y1, r.x1] - t[r.y0, r.x1] - t[r.y1, r.x0] + t[r.y0, r.x0])


def integral_image(img: GrayImage) -> SummedAreaTable:
    return SummedAreaTable(_summed_area(img.pixels))


def _summed_area(values: np.ndarray) -> np.ndarray:
    height, width = values.shape
    table = np.zeros((height + 1, width + 1), dtype=np.float64)
    table[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    return table


def _box_sums(table: np.ndarray, xs: np.ndarray, ys: np.ndarray, w: int, h: int) -> np.ndarray:
    return table[ys + h, xs + w] - table[ys, xs + w] - table[ys + h, xs] + table[ys, xs]


# Загрузка каскада

def load_cascade(path) -> CascadeModel:
    """Чтение каскада Хаара в устаревшем XML-формате (opencv-haar-classifier)"""
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise CascadeFormatError(f"Некорректный XML каскада {path}: {exc}") from exc

    node = root if root.find("size") is not None else None
    if node is None:
        node = next((child for child in root if child.find("size") is not None), None)
    if node is None:
        raise CascadeFormatError(f"В файле {path} нет описания каскада (элемент <size>)")

    try:
        window_w, window_h = (int(value) for value in node.findtext("size").split())
        stages_node = node.find("stages")
        if stages_node is None:
            raise CascadeFormatError(f"В файле {path} нет элемента <stages>")
        stages = tuple(_parse_stage(stage_node, number) for number, stage_node in enumerate(stages_node.findall("_")))
    except (ValueError, TypeError, AttributeError) as exc:
        raise CascadeFormatError(f"Некорректное описание каскада {path}: {exc}") from exc

    model = CascadeModel(window_w, window_h, stages)
    logger.debug("Каскад %s: окно %dx%d, стадий %d", path, window_w, window_h, len(stages))
    return model


def _parse_stage(stage_node, number: int) -> Stage:
    classifiers = []
    trees = stage_node.find("trees")
    for tree in trees.findall("_") if trees is not None else []:
        nodes = tree.findall("_")
        if len(nodes) != 1:
            raise CascadeFormatError(f"Стадия {number}: поддерживаются только одноузловые деревья")
        classifiers.append(_parse_stump(nodes[0], number))
    return Stage(threshold=float(stage_node.findtext("stage_threshold")), classifiers=tuple(classifiers))


def _parse_stump(node, number: int) -> WeakClassifier:
    if node.find("left_node") is not None or node.find("right_node") is not None:
        raise CascadeFormatError(f"Стадия {number}: поддерживаются только одноузловые деревья")

    feature = node.find("feature")
    if int(feature.findtext("tilted", "0")) != 0:
        raise CascadeFormatError(f"Стадия {number}: наклонные признаки не поддерживаются")

    rects = []
    for rect_node in feature.find("rects").findall("_"):
        x, y, w, h, weight = rect_node.text.split()
        rects.append(HaarRect(int(x), int(y), int(w), int(h), float(weight)))

    return WeakClassifier(
        rects=tuple(rects),
        threshold=float(node.findtext("threshold")),
        left_val=float(node.findtext("left_val")),
        right_val=float(node.findtext("right_val")),
    )


# Детектирование

def detect_nose(
    img: GrayImage,
    model: CascadeModel,
    scale_step: float = DEFAULT_SCALE_STEP,
    min_neighbors: int = DEFAULT_MIN_NEIGHBORS,
) -> BoundingBox | None:
    """
    Сканирование окном на масштабах base × scale_step^k. Окно принимается,
    если на каждой стадии сумма слабых классификаторов не меньше порога стадии;
    признаки нормируются на СКО окна. Пересекающиеся срабатывания (IoU ≥ 0.5)
    объединяются, группы меньше min_neighbors отбрасываются.
    """
    if scale_step <= 1.0:
        raise ValueError(f"scale_step должен быть больше 1, получено {scale_step}")
    if min_neighbors < 0:
        raise ValueError(f"min_neighbors не может быть отрицательным: {min_neighbors}")
    if img.width < model.window_w or img.height < model.window_h:
        raise DetectionError(
            f"Изображение {img.width}x{img.height} меньше базового окна {model.window_w}x{model.window_h}"
        )

    sums = _summed_area(img.pixels)
    squares = _summed_area(img.pixels * img.pixels)

    candidates = []
    scale = 1.0
    previous = None
    while True:
        window = (_round(model.window_w * scale), _round(model.window_h * scale))
        if window[0] > img.width or window[1] > img.height:
            break
        if window != previous:
            candidates.extend(_scan(sums, squares, model, scale, window, img.width, img.height))
            previous = window
        scale *= scale_step

    logger.debug("Каскад: %d срабатываний до группировки", len(candidates))
    return _best_group(candidates, min_neighbors, img.width, img.height)


def _round(value: float) -> int:
    return int(math.floor(value + 0.5))


def _scale_rect(r: HaarRect, scale: float, win_w: int, win_h: int) -> tuple[int, int, int, int]:
    x = min(_round(r.x * scale), win_w - 1)
    y = min(_round(r.y * scale), win_h - 1)
    w = min(max(1, _round(r.w * scale)), win_w - x)
    h = min(max(1, _round(r.h * scale)), win_h - y)
    return x, y, w, h


def _scan(sums, squares, model: CascadeModel, scale: float, window, width: int, height: int):
    win_w, win_h = window
    nx = width - win_w + 1
    ny = height - win_h + 1
    ys, xs = np.divmod(np.arange(nx * ny), nx)
    area = win_w * win_h

    mean = _box_sums(sums, xs, ys, win_w, win_h) / area
    variance = _box_sums(squares, xs, ys, win_w, win_h) / area - mean * mean
    std = np.sqrt(np.maximum(variance, 0.0))

    alive = std >= MIN_WINDOW_STD
    xs, ys, std = xs[alive], ys[alive], std[alive]
    stage_sum = np.zeros(0)

    for stage in model.stages:
        if xs.size == 0:
            return []
        stage_sum = np.zeros(xs.size)
        for classifier in stage.classifiers:
            value = np.zeros(xs.size)
            for r in classifier.rects:
                rx, ry, rw, rh = _scale_rect(r, scale, win_w, win_h)
                value += r.weight * _box_sums(sums, xs + rx, ys + ry, rw, rh)
            value /= area * std
            stage_sum += np.where(value < classifier.threshold, classifier.left_val, classifier.right_val)
        passed = stage_sum >= stage.threshold
        xs, ys, std, stage_sum = xs[passed], ys[passed], std[passed], stage_sum[passed]

    return [(Rect(int(x), int(y), win_w, win_h), float(s)) for x, y, s in zip(xs, ys, stage_sum)]


def _best_group(candidates, min_neighbors: int, width: int, height: int) -> BoundingBox | None:
    count = len(candidates)
    if count == 0:
        return None

    boxes = np.array([[r.x0, r.y0, r.x1, r.y1] for r, _ in candidates], dtype=np.float64)
    areas = (boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1])
    parent = list(range(count))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(count - 1):
        rest = boxes[i + 1 :]
        inter_w = np.clip(np.minimum(boxes[i, 2], rest[:, 2]) - np.maximum(boxes[i, 0], rest[:, 0]), 0, None)
        inter_h = np.clip(np.minimum(boxes[i, 3], rest[:, 3]) - np.maximum(boxes[i, 1], rest[:, 1]), 0, None)
        inter = inter_w * inter_h
        iou = inter / (areas[i] + areas[i + 1 :] - inter)
        for j in np.nonzero(iou >= GROUP_IOU)[0] + i + 1:
            root_i, root_j = find(i), find(int(j))
            if root_i != root_j:
                parent[max(root_i, root_j)] = min(root_i, root_j)

    groups = {}
    for index in range(count):
        groups.setdefault(find(index), []).append(index)

    best_key, best_members = None, None
    for members in groups.values():
        if len(members) < min_neighbors:
            continue
        key = (len(members), float(np.mean([candidates[m][1] for m in members])))
        if best_key is None or key > best_key:
            best_key, best_members = key, members

    if best_members is None:
        logger.debug("Каскад: все группы меньше min_neighbors=%d", min_neighbors)
        return None

    x0, y0, x1, y1 = boxes[best_members].mean(axis=0)
    w = max(1, _round(x1 - x0))
    h = max(1, _round(y1 - y0))
    x0 = min(max(0, _round(x0)), width - w)
    y0 = min(max(0, _round(y0)), height - h)
    return BoundingBox(Rect(x0, y0, w, h), score=best_key[1])
