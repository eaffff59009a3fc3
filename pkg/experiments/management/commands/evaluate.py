import logging
import time

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import transaction
from django.utils import timezone

from experiments.corpus import ingest
from experiments.forms import ExperimentConfigForm
from experiments.models import ExperimentRun, ProbeAttempt, SweepResult
from experiments.services import run_sweep, write_report
from faces.axis import AxisMethod
from faces.exceptions import HalffaceError
from faces.mixins import ConsoleReportMixin, StitchOptionsMixin

logger = logging.getLogger(__name__)


class Command(ConsoleReportMixin, StitchOptionsMixin, BaseCommand):
    help = "Прогон эксперимента: точность распознавания по числу собственных лиц и метрике"

    def add_arguments(self, parser):
        parser.add_argument("--corpus", required=True, help="Каталог корпуса")
        parser.add_argument("--config", help="Файл конфигурации эксперимента (TOML)")
        parser.add_argument("--out", required=True, help="Каталог для sweep.csv и sweep.json")
        parser.add_argument("--threads", type=int, help="Потоков подготовки проб (по умолчанию HALFFACE_THREADS)")
        parser.add_argument("--cascade", help="XML-файл каскада (для axis_method = cascade)")

    def handle(self, *args, **options):
        self.print_banner("ЗАПУСК ЭКСПЕРИМЕНТА")

        cfg = self.load_config(options.get("config"))
        threads = options.get("threads") or settings.HALFFACE_THREADS
        self.stdout.write(f"Значения k: {', '.join(map(str, cfg.k_values))}")
        self.stdout.write(f"Закрытие: {cfg.occlusion}, дорисовка: {'да' if cfg.stitch_enabled else 'нет'}")

        run = ExperimentRun.objects.create(
            corpus_root=options["corpus"], config=cfg.as_dict(), status="running", report_dir=options["out"]
        )
        started = time.perf_counter()

        try:
            with self.library_errors():
                cascade = self.cascade_from_options(options) if cfg.axis_method == AxisMethod.CASCADE else None
                corpus = ingest(options["corpus"])
                report = run_sweep(
                    corpus,
                    cfg,
                    threads=threads,
                    solver=settings.HALFFACE_EIGEN_SOLVER,
                    jacobi_max_size=settings.HALFFACE_JACOBI_MAX_SIZE,
                    cascade=cascade,
                )
                write_report(report, options["out"])
        except (CommandError, HalffaceError, ValueError, OSError) as exc:
            run.status = "failed"
            run.error_message = str(exc)
            run.finished_at = timezone.now()
            run.duration_seconds = time.perf_counter() - started
            run.save()
            logger.error("Прогон #%s завершился ошибкой: %s", run.id, exc)
            raise CommandError(str(exc)) from exc

        self.store_results(run, report, time.perf_counter() - started)
        self.print_table(report)
        self.print_summary(
            "ИТОГИ ЭКСПЕРИМЕНТА",
            {
                "Прогон": f"#{run.id}",
                "Изображений в галерее": report.train_count,
                "Проверено проб": report.test_count,
                "Пропущено проб": report.failures,
                "Отчёт": options["out"],
                "Длительность, с": f"{run.duration_seconds:.2f}",
            },
        )

    def load_config(self, path):
        """Чтение TOML и проверка через ExperimentConfigForm"""
        data = {}
        if path:
            try:
                with open(path, "rb") as fh:
                    data = tomllib.load(fh)
            except OSError as exc:
                raise CommandError(f"Не удалось прочитать конфигурацию {path}: {exc}") from exc
            except tomllib.TOMLDecodeError as exc:
                raise CommandError(f"Некорректный TOML в {path}: {exc}") from exc

        form = ExperimentConfigForm(data)
        if not form.is_valid():
            errors = "; ".join(f"{field}: {', '.join(messages)}" for field, messages in form.errors.items())
            raise CommandError(f"Ошибки конфигурации: {errors}")
        try:
            return form.to_config()
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

    @transaction.atomic
    def store_results(self, run, report, duration):
        for row in report.rows:
            SweepResult.objects.create(
                run=run,
                k=row.k,
                metric=row.metric,
                correct=row.correct,
                total=row.total,
                unknown=row.unknown,
                rate=row.rate,
                mean_mse=row.mean_mse,
                mean_cr=row.mean_cr,
            )
        ProbeAttempt.objects.bulk_create(
            ProbeAttempt(
                run=run,
                person_id=probe.entry.person_id,
                image_path=str(probe.entry.path),
                status="success" if probe.ok else "failed",
                message=probe.error,
                mse=probe.mse,
                cr=probe.cr,
            )
            for probe in report.probes
        )
        run.status = "completed"
        run.train_count = report.train_count
        run.test_count = report.test_count
        run.failed_count = report.failures
        run.duration_seconds = duration
        run.finished_at = timezone.now()
        run.save()

    def print_table(self, report):
        self.stdout.write(self.style.SUCCESS("-" * 40))
        self.stdout.write(f"{'k':>5} {'метрика':<18} {'верно':>7} {'всего':>7} {'точность':>9}")
        for row in report.rows:
            self.stdout.write(f"{row.k:>5} {row.metric:<18} {row.correct:>7} {row.total:>7} {row.rate:>9.4f}")
        for row in report.category_rows:
            self.stdout.write(f"  [{row.category}] k={row.k} {row.metric}: {row.correct}/{row.total}")
