"""
Прогон эксперимента: обучение на галерее, подготовка проб
(закрытие → дорисовка → нормализация) и таблица точности по (k, метрика).
"""

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder
from django.db import models

from faces.axis import AxisMethod, locate_axis, mirror_search_axis
from faces.cascade import CascadeModel
from faces.eigen import DistanceMetric, EigenSolver, classify_coefficients, project, train
from faces.exceptions import HalffaceError, SplitInfeasibleError, UndefinedCorrelationError
from faces.imaging import GrayImage, fit_to, load_image, photometric_normalize
from faces.quality import assess
from faces.stitching import StitchParams, StitchSide, stitch_face

from .corpus import Corpus, CorpusEntry, OcclusionMode, occlude, split, visible_columns

logger = logging.getLogger(__name__)

CSV_HEADER = ["k", "metric", "correct", "total", "rate", "mean_mse", "mean_cr"]

SIDE_FOR_OCCLUSION = {
    OcclusionMode.NONE.value: StitchSide.AUTO,
    OcclusionMode.MASK_RIGHT_HALF.value: StitchSide.LEFT,
    OcclusionMode.MASK_LEFT_HALF.value: StitchSide.RIGHT,
}


class ProbeSet(models.TextChoices):
    TEST = "test", "Тестовая часть"
    TRAIN = "train", "Обучающая часть (проверка запоминания)"


@dataclass(frozen=True)
class ExperimentConfig:
    k_values: tuple[int, ...] = (100, 150, 200, 250, 300)
    metrics: tuple[str, ...] = (DistanceMetric.SQUARED_EUCLIDEAN, DistanceMetric.CITY_BLOCK)
    train_fraction: float | None = 0.8
    train_per_person: int | None = None
    occlusion: str = OcclusionMode.NONE
    stitch_enabled: bool = True
    seed: int = 42
    normalize: bool = True
    probe_set: str = ProbeSet.TEST
    reject_unknown: bool = False
    axis_method: str = AxisMethod.MIRROR_SEARCH
    stitch: StitchParams = field(default_factory=StitchParams)

    def __post_init__(self):
        if not self.k_values or any(k < 1 for k in self.k_values):
            raise ValueError(f"k_values должны быть непустым списком чисел ≥ 1: {self.k_values}")
        if not self.metrics or any(m not in DistanceMetric.values for m in self.metrics):
            raise ValueError(f"Неизвестные метрики: {self.metrics}")
        if self.occlusion not in OcclusionMode.values:
            raise ValueError(f"Неизвестный режим закрытия: {self.occlusion}")
        if self.axis_method not in (AxisMethod.MIRROR_SEARCH, AxisMethod.CASCADE):
            raise ValueError(f"Неизвестный метод поиска оси: {self.axis_method}")
        if self.seed < 0:
            raise ValueError(f"seed не может быть отрицательным: {self.seed}")

    def as_dict(self) -> dict:
        data = asdict(self)
        data["k_values"] = list(self.k_values)
        data["metrics"] = [str(m) for m in self.metrics]
        return data


@dataclass
class SweepRow:
    k: int
    metric: str
    correct: int
    total: int
    unknown: int = 0
    mean_mse: float | None = None
    mean_cr: float | None = None
    category: str = ""

    @property
    def rate(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        data = asdict(self)
        data["rate"] = self.rate
        return data


@dataclass
class ProbeOutcome:
    """Подготовленная проба: вектор для классификации или текст ошибки"""

    entry: CorpusEntry
    image: GrayImage | None = None
    mse: float | None = None
    cr: float | None = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.image is not None


@dataclass
class SweepReport:
    config: dict
    rows: list[SweepRow]
    category_rows: list[SweepRow]
    probes: list[ProbeOutcome]
    train_count: int
    test_count: int
    timings: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(1 for probe in self.probes if not probe.ok)

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "train_count": self.train_count,
            "test_count": self.test_count,
            "failures": self.failures,
            "rows": [row.as_dict() for row in self.rows],
            "categories": [row.as_dict() for row in self.category_rows],
            "timings": self.timings,
        }


def _prepare_gallery_image(entry: CorpusEntry, normalize: bool) -> GrayImage:
    img = load_image(entry.path)
    return photometric_normalize(img) if normalize else img


def prepare_probe(
    entry: CorpusEntry,
    cfg: ExperimentConfig,
    width: int,
    height: int,
    cascade: CascadeModel | None = None,
) -> ProbeOutcome:
    """
    Закрытие половины, дорисовка (ось ищется по незакрытому изображению,
    сторона следует из режима закрытия), возврат результата в кадр исходного
    изображения и нормализация. Ошибка библиотеки не прерывает прогон.
    """
    outcome = ProbeOutcome(entry=entry)
    try:
        original = load_image(entry.path)
        probe = occlude(original, cfg.occlusion)
        origin = 0

        if cfg.stitch_enabled:
            if cfg.axis_method == AxisMethod.CASCADE:
                axis = locate_axis(original, cascade=cascade)
            else:
                axis = mirror_search_axis(original)
            stitched = stitch_face(
                probe,
                axis,
                cfg.stitch,
                side=SIDE_FOR_OCCLUSION[str(cfg.occlusion)],
                visible=visible_columns(cfg.occlusion, probe.width),
            )
            probe, origin = stitched.image, stitched.origin
            try:
                report = assess(original, probe, common_region=True, origin=origin)
                outcome.mse, outcome.cr = report.mse, report.cr
            except UndefinedCorrelationError:
                logger.debug("CR не определён для %s", entry.path)

        probe = fit_to(probe, width, height, origin=origin)
        outcome.image = photometric_normalize(probe) if cfg.normalize else probe
    except HalffaceError as exc:
        outcome.error = f"{type(exc).__name__}: {exc}"
        logger.warning("Проба %s пропущена: %s", entry.path, outcome.error)
    return outcome


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def run_sweep(
    corpus: Corpus,
    cfg: ExperimentConfig,
    threads: int = 1,
    solver: str = EigenSolver.AUTO,
    jacobi_max_size: int = 400,
    cascade: CascadeModel | None = None,
) -> SweepReport:
    """
    Разложение выполняется один раз для max(k_values); модели для меньших k
    получаются усечением базиса. Пробы готовятся параллельно, порядок
    результатов совпадает с порядком проб.
    """
    started = time.perf_counter()
    train_entries, test_entries = split(
        corpus,
        seed=cfg.seed,
        train_fraction=cfg.train_fraction if cfg.train_per_person is None else None,
        train_per_person=cfg.train_per_person,
    )
    probe_entries = train_entries if cfg.probe_set == ProbeSet.TRAIN else test_entries
    if not probe_entries:
        raise SplitInfeasibleError("Нет изображений для проверки: тестовая часть пуста")

    k_max = max(cfg.k_values)
    if k_max > len(train_entries) - 1:
        raise ValueError(f"max(k_values) = {k_max} больше |train| − 1 = {len(train_entries) - 1}")

    gallery = [_prepare_gallery_image(entry, cfg.normalize) for entry in train_entries]
    base = train(gallery, [entry.person_id for entry in train_entries], k_max, solver, jacobi_max_size)
    trained = time.perf_counter()

    workers = max(1, threads)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        probes = list(pool.map(lambda e: prepare_probe(e, cfg, corpus.width, corpus.height, cascade), probe_entries))
    prepared = time.perf_counter()

    coefficients = [project(base, probe.image) if probe.ok else None for probe in probes]
    mean_mse = _mean(probe.mse for probe in probes) if cfg.stitch_enabled else None
    mean_cr = _mean(probe.cr for probe in probes) if cfg.stitch_enabled else None
    categories = sorted({probe.entry.category for probe in probes if probe.entry.category})

    rows, category_rows = [], []
    for k in sorted(set(cfg.k_values)):
        model = base.truncated(k) if k < base.k else base
        for metric in cfg.metrics:
            row = SweepRow(k=k, metric=str(metric), correct=0, total=len(probes), mean_mse=mean_mse, mean_cr=mean_cr)
            per_category = {c: SweepRow(k=k, metric=str(metric), correct=0, total=0, category=c) for c in categories}

            for probe, coeff in zip(probes, coefficients):
                hit = False
                if coeff is not None:
                    result = classify_coefficients(model, coeff[:k], metric)
                    truth = probe.entry.person_id
                    hit = result.label == truth if cfg.reject_unknown else result.nearest_label == truth
                    row.unknown += 0 if result.is_known else 1
                row.correct += int(hit)
                if probe.entry.category:
                    per_category[probe.entry.category].total += 1
                    per_category[probe.entry.category].correct += int(hit)

            rows.append(row)
            category_rows.extend(per_category.values())
            logger.info("k=%d %s: %d/%d (%.4f)", k, metric, row.correct, row.total, row.rate)

    finished = time.perf_counter()
    return SweepReport(
        config=cfg.as_dict(),
        rows=rows,
        category_rows=category_rows,
        probes=probes,
        train_count=len(train_entries),
        test_count=len(probe_entries),
        timings={
            "train_seconds": trained - started,
            "probe_seconds": prepared - trained,
            "classify_seconds": finished - prepared,
            "total_seconds": finished - started,
        },
    )


def _csv_value(value) -> str:
    return "" if value is None else repr(value) if isinstance(value, float) else str(value)


def write_report(report: SweepReport, out_dir) -> tuple[Path, Path]:
    """sweep.csv (k,metric,correct,total,rate,mean_mse,mean_cr; LF) и sweep.json"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    csv_path = out_dir / "sweep.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in report.rows:
            writer.writerow([_csv_value(row.as_dict()[column]) for column in CSV_HEADER])

    json_path = out_dir / "sweep.json"
    json_path.write_text(json.dumps(report.as_dict(), cls=DjangoJSONEncoder, indent=2), encoding="utf-8")
    logger.info("Отчёт записан в %s", out_dir)
    return csv_path, json_path
