import logging

from django.core.management.base import BaseCommand, CommandError

from faces.eigen import DistanceMetric, classify, load_model
from faces.imaging import fit_to, load_image, photometric_normalize
from faces.mixins import ConsoleReportMixin, StitchOptionsMixin
from faces.stitching import stitch_face

logger = logging.getLogger(__name__)

METRIC_ALIASES = {
    "sed": DistanceMetric.SQUARED_EUCLIDEAN,
    "cityblock": DistanceMetric.CITY_BLOCK,
}


class Command(ConsoleReportMixin, StitchOptionsMixin, BaseCommand):
    help = "Распознавание лица по модели Eigenfaces (с дорисовкой закрытой половины)"

    def add_arguments(self, parser):
        parser.add_argument("--model", required=True, help="Файл модели, созданный командой train")
        parser.add_argument("--input", required=True, help="Изображение лица")
        parser.add_argument("--metric", choices=sorted(METRIC_ALIASES), default="sed", help="Метрика расстояния")
        parser.add_argument("--threshold", type=float, help="Порог «неизвестен» вместо откалиброванного")
        parser.add_argument("--no-stitch", action="store_true", help="Не дорисовывать лицо перед распознаванием")
        parser.add_argument("--no-normalize", action="store_true", help="Без фотометрической нормализации")
        self.add_stitch_arguments(parser)

    def handle(self, *args, **options):
        metric = METRIC_ALIASES[options["metric"]]
        if options.get("threshold") is not None and options["threshold"] < 0:
            raise CommandError("Порог не может быть отрицательным")

        with self.library_errors():
            model = load_model(options["model"])
            img = load_image(options["input"])
            origin = 0

            if not options["no_stitch"]:
                axis = self.axis_from_options(img, options)
                outcome = stitch_face(img, axis, self.stitch_params(options), side=options["side"])
                img, origin = outcome.image, outcome.origin
                logger.info("Изображение дорисовано: ось %.1f, смещение %s", axis.column, outcome.offset)

            img = fit_to(img, model.width, model.height, origin=origin)
            if not options["no_normalize"]:
                img = photometric_normalize(img)

            result = classify(model, img, metric, threshold=options.get("threshold"))

        threshold = model.threshold_for(metric) if options.get("threshold") is None else options["threshold"]
        style = self.style.SUCCESS if result.is_known else self.style.WARNING
        self.stdout.write(style(f"Метка: {result.label}"))
        self.print_summary(
            "РЕЗУЛЬТАТ РАСПОЗНАВАНИЯ",
            {
                "Ближайшая метка": result.nearest_label,
                "Расстояние": f"{result.distance:.6f}",
                "Расстояние до другого человека": f"{result.runner_up_distance:.6f}",
                "Метрика": result.metric,
                "Порог": f"{threshold:.6f}",
            },
        )
