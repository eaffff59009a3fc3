import logging
from contextlib import contextmanager

from django.conf import settings
from django.core.management.base import CommandError

from .axis import SymmetryAxis, locate_axis
from .cascade import load_cascade
from .exceptions import HalffaceError
from .stitching import StitchParams

logger = logging.getLogger(__name__)


class ConsoleReportMixin:
    """Mixin для команд: заголовки, итоги и перевод ошибок библиотеки в CommandError"""

    def print_banner(self, title, style=None):
        style = style or self.style.SUCCESS
        self.stdout.write(style("=" * 60))
        self.stdout.write(style(title))
        self.stdout.write(style("=" * 60))

    def print_summary(self, title, rows):
        """Итоговая таблица «параметр: значение»"""
        self.print_banner(title)
        for name, value in rows.items():
            self.stdout.write(f"{name}: {value}")

    @contextmanager
    def library_errors(self):
        try:
            yield
        except HalffaceError as exc:
            logger.debug("Ошибка библиотеки", exc_info=True)
            raise CommandError(str(exc)) from exc
        except FileNotFoundError as exc:
            raise CommandError(str(exc)) from exc


class StitchOptionsMixin:
    """Общие параметры сшивки и поиска оси для команд stitch и recognize"""

    def add_stitch_arguments(self, parser):
        parser.add_argument("--cascade", type=str, help="XML-файл каскада Хаара для поиска носа")
        parser.add_argument("--axis", type=float, help="Столбец оси симметрии (вместо автоматического поиска)")
        parser.add_argument("--side", choices=["auto", "left", "right"], default="auto", help="Видимая половина")
        parser.add_argument("--radius", type=int, default=10, help="Радиус поиска смещения, пикселей")
        parser.add_argument("--band", type=int, default=16, help="Ширина полосы шва, пикселей")
        parser.add_argument("--levels", type=int, default=4, help="Число уровней пирамиды смешивания")
        parser.add_argument("--feather", type=int, default=8, help="Ширина линейного перехода маски, пикселей")

    def stitch_params(self, options):
        try:
            return StitchParams(
                search_radius=options["radius"],
                band_width=options["band"],
                blend_levels=options["levels"],
                feather_width=options["feather"],
            )
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

    def cascade_from_options(self, options):
        """Каскад из --cascade либо из HALFFACE_CASCADE_PATH; None, если не задан"""
        path = options.get("cascade") or settings.HALFFACE_CASCADE_PATH
        if not path:
            return None
        return load_cascade(path)

    def axis_from_options(self, img, options):
        """Ось из --axis; иначе каскад (если задан) с запасным зеркальным поиском"""
        if options.get("axis") is not None:
            axis = SymmetryAxis.manual(options["axis"])
            try:
                axis.check_inside(img.width)
            except ValueError as exc:
                raise CommandError(str(exc)) from exc
            return axis
        return locate_axis(
            img,
            cascade=self.cascade_from_options(options),
            scale_step=settings.HALFFACE_SCALE_STEP,
            min_neighbors=settings.HALFFACE_MIN_NEIGHBORS,
        )
