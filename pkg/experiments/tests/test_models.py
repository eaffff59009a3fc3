from django.core.exceptions import ValidationError
from django.test import TestCase

from experiments.models import ExperimentRun, ProbeAttempt, SweepResult


class ExperimentRunModelTestCase(TestCase):
    def test_defaults(self):
        run = ExperimentRun.objects.create(corpus_root="/data/faces94", config={"k_values": [100]})
        self.assertEqual(run.status, "created")
        self.assertEqual(run.failed_count, 0)
        self.assertIsNone(run.finished_at)
        self.assertEqual(str(run), f"Прогон #{run.id} (/data/faces94) - Создан")


class SweepResultModelTestCase(TestCase):
    def setUp(self):
        self.run = ExperimentRun.objects.create(corpus_root="/data/faces94")

    def create(self, **kwargs):
        values = {"run": self.run, "k": 100, "metric": "squared_euclidean", "correct": 3, "total": 4, "rate": 0.75}
        values.update(kwargs)
        return SweepResult.objects.create(**values)

    def test_create(self):
        result = self.create()
        self.assertEqual(self.run.results.count(), 1)
        self.assertEqual(str(result), "k=100 squared_euclidean: 3/4")

    def test_rate_must_match(self):
        with self.assertRaises(ValidationError):
            self.create(rate=0.5)

    def test_correct_not_above_total(self):
        with self.assertRaises(ValidationError):
            self.create(correct=5, rate=1.25)

    def test_empty_result_rejected(self):
        with self.assertRaises(ValidationError):
            self.create(correct=0, total=0, rate=0.0)

    def test_unknown_metric(self):
        with self.assertRaises(ValidationError):
            self.create(metric="cosine")

    def test_unique_per_run(self):
        self.create()
        with self.assertRaises(ValidationError):
            self.create(correct=4, rate=1.0)
        self.create(metric="city_block")
        self.assertEqual(self.run.results.count(), 2)


class ProbeAttemptModelTestCase(TestCase):
    def test_attempts(self):
        run = ExperimentRun.objects.create(corpus_root="/data/faces94")
        ProbeAttempt.objects.create(run=run, person_id="anna", image_path="/data/anna/1.pgm", status="success")
        failed = ProbeAttempt.objects.create(
            run=run, person_id="boris", image_path="/data/boris/2.pgm", status="failed", message="нет оси"
        )
        self.assertEqual(run.attempts.count(), 2)
        self.assertEqual(run.attempts.filter(status="failed").get(), failed)
        self.assertEqual(str(failed), "boris: /data/boris/2.pgm (failed)")
