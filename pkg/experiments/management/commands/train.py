import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from experiments.corpus import ingest
from faces.eigen import EigenSolver, save_model, train
from faces.imaging import load_image, photometric_normalize
from faces.mixins import ConsoleReportMixin

logger = logging.getLogger(__name__)


class Command(ConsoleReportMixin, BaseCommand):
    help = "Обучение модели Eigenfaces на всех изображениях корпуса"

    def add_arguments(self, parser):
        parser.add_argument("--corpus", required=True, help="Каталог корпуса")
        parser.add_argument("--k", type=int, required=True, help="Число собственных лиц")
        parser.add_argument("--out", required=True, help="Файл модели (.eigf)")
        parser.add_argument("--solver", choices=EigenSolver.values, help="Метод разложения матрицы Грама")
        parser.add_argument("--no-normalize", action="store_true", help="Без фотометрической нормализации")

    def handle(self, *args, **options):
        self.print_banner("ОБУЧЕНИЕ МОДЕЛИ EIGENFACES")
        solver = options.get("solver") or settings.HALFFACE_EIGEN_SOLVER

        with self.library_errors():
            corpus = ingest(options["corpus"])
            self.stdout.write(f"Корпус: {len(corpus)} изображений, {len(corpus.persons)} людей")

            images = [load_image(entry.path) for entry in corpus.entries]
            if not options["no_normalize"]:
                images = [photometric_normalize(img) for img in images]

            try:
                model = train(
                    images,
                    [entry.person_id for entry in corpus.entries],
                    options["k"],
                    solver=solver,
                    jacobi_max_size=settings.HALFFACE_JACOBI_MAX_SIZE,
                )
            except ValueError as exc:
                raise CommandError(str(exc)) from exc

            try:
                save_model(model, options["out"])
            except OSError as exc:
                raise CommandError(f"Не удалось записать модель {options['out']}: {exc}") from exc

        self.print_summary(
            "ИТОГИ ОБУЧЕНИЯ",
            {
                "Модель": options["out"],
                "Геометрия": f"{model.width}x{model.height}",
                "Собственных лиц": model.k,
                "Векторов в галерее": model.n,
                "Наибольшее собственное значение": f"{model.eigenvalues[0]:.6f}",
                "Порог (SED)": f"{model.threshold_for('squared_euclidean'):.6f}",
                "Порог (City-Block)": f"{model.threshold_for('city_block'):.6f}",
            },
        )
