import json

from django.core.management.base import BaseCommand

from faces.imaging import load_image
from faces.mixins import ConsoleReportMixin
from faces.quality import assess


class Command(ConsoleReportMixin, BaseCommand):
    help = "Сравнение дорисованного лица с оригиналом: MSE и коэффициент корреляции"

    def add_arguments(self, parser):
        parser.add_argument("--original", required=True, help="Оригинальное изображение")
        parser.add_argument("--stitched", required=True, help="Дорисованное изображение")
        parser.add_argument("--common-region", action="store_true", help="Общая область при разных размерах")
        parser.add_argument("--json", action="store_true", help="Вывести результат в формате JSON")

    def handle(self, *args, **options):
        with self.library_errors():
            report = assess(
                load_image(options["original"]),
                load_image(options["stitched"]),
                common_region=options["common_region"],
            )

        if options["json"]:
            self.stdout.write(json.dumps(report.as_dict()))
        else:
            self.stdout.write(f"MSE={report.mse:.4f} CR={report.cr:.4f}")
