# Generated by Django 6.0.2 on 2026-10-19 10:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("corpus_root", models.CharField(max_length=500, verbose_name="Каталог корпуса")),
                ("config", models.JSONField(default=dict, verbose_name="Конфигурация")),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("created", "Создан"),
                            ("running", "Выполняется"),
                            ("completed", "Завершён"),
                            ("failed", "Ошибка"),
                        ],
                        default="created",
                        max_length=20,
                        verbose_name="Статус",
                    ),
                ),
                ("train_count", models.PositiveIntegerField(default=0, verbose_name="Изображений в галерее")),
                ("test_count", models.PositiveIntegerField(default=0, verbose_name="Изображений для проверки")),
                ("failed_count", models.PositiveIntegerField(default=0, verbose_name="Пропущено проб")),
                ("report_dir", models.CharField(blank=True, max_length=500, verbose_name="Каталог отчёта")),
                ("duration_seconds", models.FloatField(blank=True, null=True, verbose_name="Длительность, с")),
                ("error_message", models.TextField(blank=True, verbose_name="Текст ошибки")),
                ("created_at", models.DateTimeField(auto_now_add=True, verbose_name="Дата создания")),
                ("finished_at", models.DateTimeField(blank=True, null=True, verbose_name="Дата завершения")),
            ],
            options={
                "verbose_name": "Прогон эксперимента",
                "verbose_name_plural": "Прогоны экспериментов",
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="SweepResult",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("k", models.PositiveIntegerField(verbose_name="Число собственных лиц")),
                (
                    "metric",
                    models.CharField(
                        choices=[
                            ("squared_euclidean", "Квадрат евклидова расстояния"),
                            ("city_block", "Манхэттенское расстояние"),
                        ],
                        max_length=20,
                        verbose_name="Метрика",
                    ),
                ),
                ("correct", models.PositiveIntegerField(verbose_name="Распознано верно")),
                ("total", models.PositiveIntegerField(verbose_name="Всего проб")),
                ("unknown", models.PositiveIntegerField(default=0, verbose_name="Признано неизвестными")),
                ("rate", models.FloatField(verbose_name="Точность")),
                ("mean_mse", models.FloatField(blank=True, null=True, verbose_name="Средний MSE дорисовки")),
                ("mean_cr", models.FloatField(blank=True, null=True, verbose_name="Средний CR дорисовки")),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="results",
                        to="experiments.experimentrun",
                        verbose_name="Прогон",
                    ),
                ),
            ],
            options={
                "verbose_name": "Результат прогона",
                "verbose_name_plural": "Результаты прогонов",
                "ordering": ["run", "k", "metric"],
                "constraints": [models.UniqueConstraint(fields=("run", "k", "metric"), name="unique_sweep_result")],
            },
        ),
        migrations.CreateModel(
            name="ProbeAttempt",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("person_id", models.CharField(max_length=255, verbose_name="Человек")),
                ("image_path", models.CharField(max_length=500, verbose_name="Файл изображения")),
                (
                    "status",
                    models.CharField(
                        choices=[("success", "Успешно"), ("failed", "Не успешно")],
                        max_length=20,
                        verbose_name="Статус",
                    ),
                ),
                ("message", models.TextField(blank=True, verbose_name="Сообщение")),
                ("mse", models.FloatField(blank=True, null=True, verbose_name="MSE дорисовки")),
                ("cr", models.FloatField(blank=True, null=True, verbose_name="CR дорисовки")),
                ("attempt_time", models.DateTimeField(auto_now_add=True, verbose_name="Дата и время попытки")),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="attempts",
                        to="experiments.experimentrun",
                        verbose_name="Прогон",
                    ),
                ),
            ],
            options={
                "verbose_name": "Попытка подготовки пробы",
                "verbose_name_plural": "Попытки подготовки проб",
                "ordering": ["run", "id"],
            },
        ),
    ]
