import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand
from django.core.serializers.json import DjangoJSONEncoder

from faces.imaging import load_image, save_image
from faces.mixins import ConsoleReportMixin, StitchOptionsMixin
from faces.quality import assess
from faces.stitching import stitch_face

logger = logging.getLogger(__name__)


class Command(ConsoleReportMixin, StitchOptionsMixin, BaseCommand):
    help = "Дорисовка лица по видимой половине: ось симметрии, отражение, поиск смещения и смешивание"

    def add_arguments(self, parser):
        parser.add_argument("--input", required=True, help="Исходное изображение (PGM или PNG)")
        parser.add_argument("--output", required=True, help="Файл результата (.png или .pgm)")
        parser.add_argument("--reference", help="Эталонное полное лицо для расчёта MSE и CR")
        parser.add_argument("--report", help="Путь к JSON-отчёту")
        self.add_stitch_arguments(parser)

    def handle(self, *args, **options):
        self.print_banner("ДОРИСОВКА ЛИЦА")
        params = self.stitch_params(options)

        with self.library_errors():
            img = load_image(options["input"])
            self.stdout.write(f"Исходное изображение: {options['input']} ({img.width}x{img.height})")

            axis = self.axis_from_options(img, options)
            self.stdout.write(f"Ось симметрии: столбец {axis.column:.1f} ({axis.method})")

            outcome = stitch_face(img, axis, params, side=options["side"])
            save_image(outcome.image, options["output"])

            report = {
                "input": options["input"],
                "output": options["output"],
                "axis": {"column": axis.column, "method": str(axis.method), "confidence": axis.confidence},
                "side": outcome.side,
                "offset": list(outcome.offset.as_tuple()),
                "origin": outcome.origin,
                "peak_ncc": outcome.peak_ncc,
                "width": outcome.image.width,
                "height": outcome.image.height,
            }
            if options.get("reference"):
                reference = load_image(options["reference"])
                common = reference.shape != outcome.image.shape
                quality = assess(reference, outcome.image, common_region=common, origin=outcome.origin)
                report["quality"] = quality.as_dict()

        if options.get("report"):
            Path(options["report"]).write_text(json.dumps(report, cls=DjangoJSONEncoder, indent=2), encoding="utf-8")
            logger.info("Отчёт сшивки записан в %s", options["report"])

        peak = "нет (номинальное смещение)" if outcome.peak_ncc is None else f"{outcome.peak_ncc:.6f}"
        summary = {
            "Сторона": outcome.side,
            "Смещение (i, j)": outcome.offset.as_tuple(),
            "Пиковая корреляция": peak,
            "Размер результата": f"{outcome.image.width}x{outcome.image.height}",
        }
        if "quality" in report:
            summary["MSE"] = f"{report['quality']['mse']:.4f}"
            summary["CR"] = f"{report['quality']['cr']:.4f}"
        self.print_summary("ИТОГИ ДОРИСОВКИ", summary)
