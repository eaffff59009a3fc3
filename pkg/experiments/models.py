from django.core.exceptions import ValidationError
from django.db import models

from faces.eigen import DistanceMetric


class ExperimentRun(models.Model):
    """Модель прогона эксперимента по корпусу"""

    STATUS_CHOICES = [
        ("created", "Создан"),
        ("running", "Выполняется"),
        ("completed", "Завершён"),
        ("failed", "Ошибка"),
    ]

    corpus_root = models.CharField(max_length=500, verbose_name="Каталог корпуса")
    config = models.JSONField(default=dict, verbose_name="Конфигурация")
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default="created", verbose_name="Статус")
    train_count = models.PositiveIntegerField(default=0, verbose_name="Изображений в галерее")
    test_count = models.PositiveIntegerField(default=0, verbose_name="Изображений для проверки")
    failed_count = models.PositiveIntegerField(default=0, verbose_name="Пропущено проб")
    report_dir = models.CharField(max_length=500, blank=True, verbose_name="Каталог отчёта")
    duration_seconds = models.FloatField(null=True, blank=True, verbose_name="Длительность, с")
    error_message = models.TextField(blank=True, verbose_name="Текст ошибки")
    created_at = models.DateTimeField(auto_now_add=True, verbose_name="Дата создания")
    finished_at = models.DateTimeField(null=True, blank=True, verbose_name="Дата завершения")

    class Meta:
        verbose_name = "Прогон эксперимента"
        verbose_name_plural = "Прогоны экспериментов"
        ordering = ["-created_at"]

    def __str__(self):
        return f"Прогон #{self.id} ({self.corpus_root}) - {self.get_status_display()}"


class SweepResult(models.Model):
    """Точность распознавания для пары (k, метрика)"""

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name="results", verbose_name="Прогон")
    k = models.PositiveIntegerField(verbose_name="Число собственных лиц")
    metric = models.CharField(max_length=20, choices=DistanceMetric.choices, verbose_name="Метрика")
    correct = models.PositiveIntegerField(verbose_name="Распознано верно")
    total = models.PositiveIntegerField(verbose_name="Всего проб")
    unknown = models.PositiveIntegerField(default=0, verbose_name="Признано неизвестными")
    rate = models.FloatField(verbose_name="Точность")
    mean_mse = models.FloatField(null=True, blank=True, verbose_name="Средний MSE дорисовки")
    mean_cr = models.FloatField(null=True, blank=True, verbose_name="Средний CR дорисовки")

    class Meta:
        verbose_name = "Результат прогона"
        verbose_name_plural = "Результаты прогонов"
        ordering = ["run", "k", "metric"]
        constraints = [
            models.UniqueConstraint(fields=["run", "k", "metric"], name="unique_sweep_result"),
        ]

    def __str__(self):
        return f"k={self.k} {self.metric}: {self.correct}/{self.total}"

    def clean(self):
        """Валидация модели"""
        if self.correct > self.total:
            raise ValidationError("Число верных ответов не может превышать число проб")
        if self.total and self.rate != self.correct / self.total:
            raise ValidationError("Точность должна равняться correct / total")

    def save(self, *args, **kwargs):
        self.full_clean()
        super().save(*args, **kwargs)


class ProbeAttempt(models.Model):
    """Попытка подготовки одной пробы (закрытие, дорисовка, нормализация)"""

    STATUS_CHOICES = [
        ("success", "Успешно"),
        ("failed", "Не успешно"),
    ]

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name="attempts", verbose_name="Прогон")
    person_id = models.CharField(max_length=255, verbose_name="Человек")
    image_path = models.CharField(max_length=500, verbose_name="Файл изображения")
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, verbose_name="Статус")
    message = models.TextField(blank=True, verbose_name="Сообщение")
    mse = models.FloatField(null=True, blank=True, verbose_name="MSE дорисовки")
    cr = models.FloatField(null=True, blank=True, verbose_name="CR дорисовки")
    attempt_time = models.DateTimeField(auto_now_add=True, verbose_name="Дата и время попытки")

    class Meta:
        verbose_name = "Попытка подготовки пробы"
        verbose_name_plural = "Попытки подготовки проб"
        ordering = ["run", "id"]

    def __str__(self):
        return f"{self.person_id}: {self.image_path} ({self.status})"
