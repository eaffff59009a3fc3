from django.core.management.base import BaseCommand

from experiments.corpus import ingest
from faces.mixins import ConsoleReportMixin


class Command(ConsoleReportMixin, BaseCommand):
    help = "Проверка корпуса лиц: обход каталога, подсчёт людей и изображений, проверка геометрии"

    def add_arguments(self, parser):
        parser.add_argument("root", help="Каталог корпуса: <человек>/<изображения> или <категория>/<человек>/...")
        parser.add_argument("--no-cache", action="store_true", help="Не использовать кеш проверки геометрии")
        parser.add_argument("--verbose-persons", action="store_true", help="Вывести число изображений по людям")

    def handle(self, *args, **options):
        self.print_banner("ПРОВЕРКА КОРПУСА")

        with self.library_errors():
            corpus = ingest(options["root"], use_cache=not options["no_cache"])

        groups = corpus.by_person()
        if options["verbose_persons"]:
            for person, entries in sorted(groups.items()):
                category = f" [{entries[0].category}]" if entries[0].category else ""
                self.stdout.write(f"  {person}{category}: {len(entries)}")

        counts = [len(entries) for entries in groups.values()]
        summary = {
            "Каталог": corpus.root,
            "Изображений": len(corpus),
            "Людей": len(corpus.persons),
            "Размер изображений": f"{corpus.width}x{corpus.height}",
            "Изображений на человека": f"от {min(counts)} до {max(counts)}",
        }
        if corpus.categories:
            summary["Категории"] = ", ".join(
                f"{c} ({sum(1 for e in corpus.entries if e.category == c)})" for c in corpus.categories
            )
        self.print_summary("ИТОГИ ПРОВЕРКИ", summary)

        if len(set(counts)) > 1:
            self.stdout.write(self.style.WARNING("Число изображений у разных людей различается"))
