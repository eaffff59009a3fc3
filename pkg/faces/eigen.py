"""
Eigenfaces: обучение PCA через матрицу Грама (N×N вместо d×d),
проекция в пространство собственных лиц, классификация ближайшим соседом
с порогом «известен / неизвестен» и бинарный формат модели.
"""

import logging
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.db import models

from .exceptions import (
    CorruptModelError,
    DimensionMismatchError,
    GeometryMismatchError,
    ModelFormatError,
    ModelInvariantError,
    ModelVersionError,
)
from .imaging import GrayImage
from .linalg import jacobi_eigh

logger = logging.getLogger(__name__)

UNKNOWN_LABEL = "unknown"
ORTHONORMAL_TOLERANCE = 1e-6
EIGENVALUE_TOLERANCE = 1e-9
# Доля от полной нормы данных, ниже которой обратная проекция считается нулевой
DEGENERATE_TOLERANCE = 1e-9

MODEL_MAGIC = b"EIGF"
MODEL_VERSION = 1
HEADER = struct.Struct("<4sH5I")
TRAILER = struct.Struct("<I")


class DistanceMetric(models.TextChoices):
    SQUARED_EUCLIDEAN = "squared_euclidean", "Квадрат евклидова расстояния"
    CITY_BLOCK = "city_block", "Манхэттенское расстояние"


class EigenSolver(models.TextChoices):
    AUTO = "auto", "Автоматически"
    JACOBI = "jacobi", "Метод Якоби"
    LAPACK = "lapack", "LAPACK (numpy.linalg.eigh)"


# Порядок порогов в файле модели
METRIC_ORDER = (DistanceMetric.SQUARED_EUCLIDEAN, DistanceMetric.CITY_BLOCK)


def _frozen(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ModelInvariantError(f"Ожидался массив размерности {ndim}, получена форма {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EigenModel:
    """
    Обученная модель: средний вектор, базис (k × d, по строкам собственные лица),
    собственные значения ковариации по убыванию, коэффициенты галереи (N × k)
    с метками и пороги для каждой метрики.
    """

    width: int
    height: int
    mean: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray
    gallery: np.ndarray
    labels: tuple[str, ...]
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean, 1))
        object.__setattr__(self, "basis", _frozen(self.basis, 2))
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues, 1))
        object.__setattr__(self, "gallery", _frozen(self.gallery, 2))
        object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))
        object.__setattr__(self, "thresholds", {str(m): float(t) for m, t in self.thresholds.items()})
        self.validate()

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        return self.gallery.shape[0]

    def validate(self) -> None:
        if self.width < 1 or self.height < 1 or self.width * self.height != self.d:
            raise ModelInvariantError(f"Геометрия {self.width}x{self.height} не соответствует d={self.d}")
        if self.k < 1 or self.basis.shape[1] != self.d:
            raise ModelInvariantError(f"Базис формы {self.basis.shape} не соответствует d={self.d}")
        if self.eigenvalues.shape[0] != self.k:
            raise ModelInvariantError(f"Собственных значений {self.eigenvalues.shape[0]}, ожидалось {self.k}")
        if self.n < 1 or self.gallery.shape[1] != self.k:
            raise ModelInvariantError(f"Галерея формы {self.gallery.shape} не соответствует k={self.k}")
        if len(self.labels) != self.n:
            raise ModelInvariantError(f"Меток {len(self.labels)}, векторов галереи {self.n}")

        arrays = (self.mean, self.basis, self.eigenvalues, self.gallery)
        if not all(np.isfinite(arr).all() for arr in arrays):
            raise ModelInvariantError("Модель содержит нечисловые значения")

        gram = self.basis @ self.basis.T
        deviation = float(np.abs(gram - np.eye(self.k)).max())
        if deviation > ORTHONORMAL_TOLERANCE:
            raise ModelInvariantError(f"Базис не ортонормирован: отклонение {deviation:.3e}")

        if (self.eigenvalues < -EIGENVALUE_TOLERANCE).any() or (np.diff(self.eigenvalues) > 0).any():
            raise ModelInvariantError("Собственные значения должны быть неотрицательны и упорядочены по убыванию")

        for metric in METRIC_ORDER:
            threshold = self.thresholds.get(str(metric))
            if threshold is None or np.isnan(threshold) or threshold < 0:
                raise ModelInvariantError(f"Некорректный порог для метрики {metric}: {threshold}")

    def threshold_for(self, metric: str) -> float:
        return self.thresholds[str(metric)]

    def truncated(self, k: int) -> "EigenModel":
        """Модель с первыми k собственными лицами; пороги пересчитываются по усечённой галерее"""
        if not 1 <= k <= self.k:
            raise ValueError(f"k должно лежать в [1, {self.k}], получено {k}")
        gallery = self.gallery[:, :k]
        return EigenModel(
            width=self.width,
            height=self.height,
            mean=self.mean,
            basis=self.basis[:k],
            eigenvalues=self.eigenvalues[:k],
            gallery=gallery,
            labels=self.labels,
            thresholds=calibrate_thresholds(gallery, self.labels),
        )

    def __repr__(self):
        return f"EigenModel({self.width}x{self.height}, k={self.k}, N={self.n})"


@dataclass(frozen=True)
class RecognitionResult:
    label: str
    nearest_label: str
    distance: float
    metric: str
    runner_up_distance: float
    gallery_index: int

    @property
    def is_known(self) -> bool:
        return self.label != UNKNOWN_LABEL


# Обучение

def train(
    images: list[GrayImage],
    labels: list[str],
    k: int,
    solver: str = EigenSolver.AUTO,
    jacobi_max_size: int = 400,
) -> EigenModel:
    if not images:
        raise ValueError("Пустой обучающий набор")
    height, width = images[0].shape
    for index, img in enumerate(images):
        if img.shape != (height, width):
            raise GeometryMismatchError(
                f"Изображение {index} имеет размер {img.width}x{img.height}, ожидался {width}x{height}"
            )
    vectors = np.stack([img.pixels.reshape(-1) for img in images])
    return train_vectors(vectors, labels, k, width, height, solver=solver, jacobi_max_size=jacobi_max_size)


def train_vectors(
    vectors: np.ndarray,
    labels: list[str],
    k: int,
    width: int,
    height: int,
    solver: str = EigenSolver.AUTO,
    jacobi_max_size: int = 400,
) -> EigenModel:
    """Обучение по матрице векторов лиц (N × d, построчно)"""
    vectors = np.asarray(vectors, dtype=np.float64)
    count, d = vectors.shape
    if count < 2:
        raise ValueError(f"Нужно не меньше двух обучающих лиц, получено {count}")
    if len(labels) != count:
        raise ValueError(f"Меток {len(labels)}, лиц {count}")
    if d != width * height:
        raise GeometryMismatchError(f"Длина вектора {d} не равна {width}x{height}")
    if not 1 <= k <= min(count - 1, d):
        raise ValueError(f"k должно лежать в [1, {min(count - 1, d)}], получено {k}")

    mean = vectors.mean(axis=0)
    centered = vectors - mean
    gram = centered @ centered.T

    values, vectors_n = _decompose(gram, solver, jacobi_max_size)
    values, vectors_n = values[:k], vectors_n[:, :k]

    basis, eigenvalues = _back_project(centered, values, vectors_n, float(np.trace(gram)))
    gallery = centered @ basis.T
    model = EigenModel(
        width=width,
        height=height,
        mean=mean,
        basis=basis,
        eigenvalues=eigenvalues,
        gallery=gallery,
        labels=tuple(labels),
        thresholds=calibrate_thresholds(gallery, labels),
    )
    logger.info("Обучена модель %s, доля объяснённой дисперсии %.4f", model, _explained(eigenvalues, gram, count))
    return model


def _explained(eigenvalues: np.ndarray, gram: np.ndarray, count: int) -> float:
    total = float(np.trace(gram)) / count
    return float(eigenvalues.sum() / total) if total > 0 else 0.0


def _decompose(gram: np.ndarray, solver: str, jacobi_max_size: int) -> tuple[np.ndarray, np.ndarray]:
    if solver not in EigenSolver.values:
        raise ValueError(f"Неизвестный метод разложения: {solver}")
    use_jacobi = solver == EigenSolver.JACOBI or (solver == EigenSolver.AUTO and gram.shape[0] <= jacobi_max_size)
    if use_jacobi:
        return jacobi_eigh(gram)

    logger.debug("Матрица Грама %dx%d разлагается через LAPACK", *gram.shape)
    values, vectors = np.linalg.eigh(gram)
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def _back_project(centered: np.ndarray, values: np.ndarray, vectors_n: np.ndarray, trace: float):
    """
    u = Aᵀv / ‖Aᵀv‖; вырожденные направления (нулевая дисперсия) дополняются
    ортогонализацией единичных векторов. Знак: наибольший по модулю элемент положителен.
    """
    count, d = centered.shape
    projected = centered.T @ vectors_n
    norms = np.linalg.norm(projected, axis=0)
    floor = DEGENERATE_TOLERANCE * np.sqrt(trace) if trace > 0 else np.inf

    columns = []
    eigenvalues = np.clip(values / count, 0.0, None)
    for index, norm in enumerate(norms):
        if norm > floor:
            columns.append(projected[:, index] / norm)
        else:
            columns.append(None)
            eigenvalues[index] = 0.0

    accepted = [column for column in columns if column is not None]
    if len(accepted) < len(columns):
        logger.debug("Дополнено вырожденных направлений: %d", len(columns) - len(accepted))
    candidate = 0
    for index, column in enumerate(columns):
        if column is not None:
            continue
        while True:
            vector = np.zeros(d)
            vector[candidate] = 1.0
            candidate += 1
            for _ in range(2):
                for other in accepted:
                    vector -= (other @ vector) * other
            norm = np.linalg.norm(vector)
            if norm > 0.5:
                break
        vector /= norm
        columns[index] = vector
        accepted.append(vector)

    basis, _ = np.linalg.qr(np.column_stack(columns))
    basis = basis.T
    # QR может сменить знаки; правило знака применяется после
    peaks = np.argmax(np.abs(basis), axis=1)
    signs = np.where(basis[np.arange(basis.shape[0]), peaks] < 0, -1.0, 1.0)
    eigenvalues[eigenvalues < EIGENVALUE_TOLERANCE] = 0.0
    return basis * signs[:, None], eigenvalues


def calibrate_thresholds(gallery: np.ndarray, labels) -> dict[str, float]:
    """
    Порог «известен / неизвестен» для каждой метрики: μ + 2σ расстояний между
    разными лицами одного человека; +∞, если у кого-то одно изображение.
    """
    labels = np.asarray([str(label) for label in labels])
    classes = {}
    for index, label in enumerate(labels):
        classes.setdefault(label, []).append(index)

    thresholds = {}
    for metric in METRIC_ORDER:
        if any(len(members) < 2 for members in classes.values()):
            thresholds[str(metric)] = float("inf")
            continue
        distances = []
        for members in classes.values():
            sub = gallery[members]
            pairwise = np.stack([_distances(sub, row, metric) for row in sub])
            distances.append(pairwise[~np.eye(len(members), dtype=bool)])
        distances = np.concatenate(distances)
        thresholds[str(metric)] = float(distances.mean() + 2.0 * distances.std())
    return thresholds


# Проекция и классификация

def _vector(model: EigenModel, img: GrayImage) -> np.ndarray:
    if img.shape != (model.height, model.width):
        raise GeometryMismatchError(
            f"Изображение {img.width}x{img.height} не совпадает с геометрией модели {model.width}x{model.height}"
        )
    return img.pixels.reshape(-1)


def project_vector(model: EigenModel, vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (model.d,):
        raise GeometryMismatchError(f"Длина вектора {vector.shape} не равна d={model.d}")
    return model.basis @ (vector - model.mean)


def project(model: EigenModel, img: GrayImage) -> np.ndarray:
    return project_vector(model, _vector(model, img))


def reconstruct(model: EigenModel, coefficients: np.ndarray) -> np.ndarray:
    """
    mean + Bᵀc в форме (height, width). Возвращается массив, а не GrayImage:
    при малых k значения выходят за [0, 1] и не обрезаются.
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.shape != (model.k,):
        raise DimensionMismatchError(f"Ожидалось {model.k} коэффициентов, получено {coefficients.shape}")
    return (model.mean + model.basis.T @ coefficients).reshape(model.height, model.width)


def _distances(gallery: np.ndarray, coefficients: np.ndarray, metric: str) -> np.ndarray:
    diff = gallery - coefficients
    if metric == DistanceMetric.SQUARED_EUCLIDEAN:
        return np.sum(diff * diff, axis=1)
    if metric == DistanceMetric.CITY_BLOCK:
        return np.sum(np.abs(diff), axis=1)
    raise ValueError(f"Неизвестная метрика: {metric}")


def classify_coefficients(
    model: EigenModel, coefficients: np.ndarray, metric: str, threshold: float | None = None
) -> RecognitionResult:
    """Ближайший сосед в галерее; при равных расстояниях меньший индекс"""
    distances = _distances(model.gallery, coefficients, metric)
    nearest = int(np.argmin(distances))
    nearest_label = model.labels[nearest]

    others = np.array([label != nearest_label for label in model.labels])
    runner_up = float(distances[others].min()) if others.any() else float("inf")

    distance = float(distances[nearest])
    limit = model.threshold_for(metric) if threshold is None else threshold
    return RecognitionResult(
        label=UNKNOWN_LABEL if distance > limit else nearest_label,
        nearest_label=nearest_label,
        distance=distance,
        metric=str(metric),
        runner_up_distance=runner_up,
        gallery_index=nearest,
    )


def classify(model: EigenModel, img: GrayImage, metric: str, threshold: float | None = None) -> RecognitionResult:
    return classify_coefficients(model, project(model, img), metric, threshold)


# Файл модели

def encode_model(model: EigenModel) -> bytes:
    parts = [
        HEADER.pack(MODEL_MAGIC, MODEL_VERSION, model.d, model.k, model.n, model.width, model.height),
        model.mean.astype("<f8").tobytes(),
        model.basis.astype("<f8").tobytes(),
        model.eigenvalues.astype("<f8").tobytes(),
        np.array([model.threshold_for(m) for m in METRIC_ORDER], dtype="<f8").tobytes(),
        model.gallery.astype("<f8").tobytes(),
    ]
    for label in model.labels:
        raw = label.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)) + raw)
    payload = b"".join(parts)
    return payload + TRAILER.pack(zlib.crc32(payload))


def decode_model(data: bytes) -> EigenModel:
    if len(data) < HEADER.size + TRAILER.size:
        raise CorruptModelError(f"Файл модели слишком короткий: {len(data)} байт")
    magic, version, d, k, n, width, height = HEADER.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"Неизвестная сигнатура файла модели: {magic!r}")
    if version != MODEL_VERSION:
        raise ModelVersionError(f"Версия формата {version} не поддерживается (ожидалась {MODEL_VERSION})")

    payload, (checksum,) = data[: -TRAILER.size], TRAILER.unpack(data[-TRAILER.size :])
    if zlib.crc32(payload) != checksum:
        raise CorruptModelError("Контрольная сумма файла модели не совпадает")

    reader = _Reader(payload, HEADER.size)
    mean = reader.floats(d)
    basis = reader.floats(k * d).reshape(k, d)
    eigenvalues = reader.floats(k)
    thresholds = dict(zip((str(m) for m in METRIC_ORDER), reader.floats(len(METRIC_ORDER))))
    gallery = reader.floats(n * k).reshape(n, k)
    labels = []
    for _ in range(n):
        (length,) = struct.unpack("<I", reader.take(4))
        try:
            labels.append(reader.take(length).decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise CorruptModelError("Метка не является строкой UTF-8") from exc
    if reader.pos != len(payload):
        raise CorruptModelError(f"Лишние данные в конце файла модели: {len(payload) - reader.pos} байт")

    return EigenModel(
        width=width,
        height=height,
        mean=mean,
        basis=basis,
        eigenvalues=eigenvalues,
        gallery=gallery,
        labels=tuple(labels),
        thresholds=thresholds,
    )


class _Reader:
    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise CorruptModelError("Файл модели оборван")
        chunk = self.data[self.pos : self.pos + size]
        self.pos += size
        return chunk

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


def save_model(model: EigenModel, path) -> None:
    Path(path).write_bytes(encode_model(model))
    logger.info("Модель %s сохранена в %s", model, path)


def load_model(path) -> EigenModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Файл модели не найден: {path}")
    return decode_model(path.read_bytes())
