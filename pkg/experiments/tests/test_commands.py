import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.cache import cache
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from experiments.models import ExperimentRun, ProbeAttempt, SweepResult
from faces.eigen import load_model

from .fixtures import write_corpus


class CommandTestMixin:
    def setUp(self):
        cache.clear()
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.dir = Path(tmp.name)
        self.root = self.dir / "corpus"
        self.rng = np.random.default_rng(0)

    def call(self, name, *args, **options):
        out = StringIO()
        call_command(name, *args, stdout=out, **options)
        return out.getvalue()


class IngestCommandTestCase(CommandTestMixin, TestCase):
    def test_summary(self):
        write_corpus(self.root, ["alice", "bob"], 3, self.rng)
        output = self.call("ingest", str(self.root), verbose_persons=True)
        self.assertIn("Изображений: 6", output)
        self.assertIn("Людей: 2", output)
        self.assertIn("Размер изображений: 40x32", output)
        self.assertIn("  alice: 3", output)
        self.assertNotIn("различается", output)

    def test_categories_and_uneven_counts(self):
        write_corpus(self.root, ["anna"], 2, self.rng, category="female")
        write_corpus(self.root, ["ivan"], 3, self.rng, category="male")
        output = self.call("ingest", str(self.root), no_cache=True)
        self.assertIn("Категории: female (2), male (3)", output)
        self.assertIn("различается", output)

    def test_missing_directory(self):
        with self.assertRaises(CommandError):
            self.call("ingest", str(self.dir / "missing"))


class TrainCommandTestCase(CommandTestMixin, TestCase):
    def test_writes_model(self):
        write_corpus(self.root, ["anna", "boris", "vera"], 3, self.rng)
        model_path = self.dir / "model.eigf"
        output = self.call("train", corpus=str(self.root), k=4, out=str(model_path), solver="jacobi")
        self.assertIn("ИТОГИ ОБУЧЕНИЯ", output)

        model = load_model(model_path)
        self.assertEqual((model.k, model.n, model.width, model.height), (4, 9, 40, 32))
        self.assertEqual(model.labels, ("anna",) * 3 + ("boris",) * 3 + ("vera",) * 3)

    def test_k_too_large(self):
        write_corpus(self.root, ["anna", "boris"], 2, self.rng)
        with self.assertRaises(CommandError):
            self.call("train", corpus=str(self.root), k=4, out=str(self.dir / "model.eigf"))


class EvaluateCommandTestCase(CommandTestMixin, TestCase):
    def setUp(self):
        super().setUp()
        write_corpus(self.root, ["anna", "boris", "vera", "gleb"], 3, self.rng)
        self.out = self.dir / "report"

    def write_config(self, text):
        path = self.dir / "experiment.toml"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_successful_run(self):
        config = self.write_config(
            'k_values = [1, 3]\ntrain_per_person = 2\nocclusion = "mask_right_half"\n'
            'metrics = ["squared_euclidean", "city_block"]\n'
        )
        output = self.call("evaluate", corpus=str(self.root), config=config, out=str(self.out), threads=2)
        self.assertIn("ИТОГИ ЭКСПЕРИМЕНТА", output)

        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, "completed")
        self.assertEqual((run.train_count, run.test_count, run.failed_count), (8, 4, 0))
        self.assertEqual(run.config["k_values"], [1, 3])
        self.assertIsNotNone(run.finished_at)

        self.assertEqual(SweepResult.objects.filter(run=run).count(), 4)
        self.assertEqual(ProbeAttempt.objects.filter(run=run, status="success").count(), 4)

        lines = (self.out / "sweep.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "k,metric,correct,total,rate,mean_mse,mean_cr")
        self.assertEqual(len(lines), 5)
        report = json.loads((self.out / "sweep.json").read_text(encoding="utf-8"))
        self.assertEqual(report["test_count"], 4)

    def test_failed_run_is_recorded(self):
        config = self.write_config("k_values = [50]\ntrain_per_person = 2\n")
        with self.assertRaises(CommandError):
            self.call("evaluate", corpus=str(self.root), config=config, out=str(self.out))
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, "failed")
        self.assertIn("50", run.error_message)
        self.assertFalse(run.results.exists())

    def test_invalid_config(self):
        for text in ("k_values = [\n", "unknown_key = 1\n", "train_fraction = 1.5\n"):
            with self.subTest(text=text), self.assertRaises(CommandError):
                self.call("evaluate", corpus=str(self.root), config=self.write_config(text), out=str(self.out))
        self.assertFalse(ExperimentRun.objects.exists())

    def test_missing_corpus(self):
        with self.assertRaises(CommandError):
            self.call("evaluate", corpus=str(self.dir / "missing"), out=str(self.out))
        self.assertEqual(ExperimentRun.objects.get().status, "failed")
