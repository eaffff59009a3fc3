from django.core.exceptions import ValidationError
from django.db.models.signals import pre_save
from django.dispatch import receiver

from .models import SweepResult


@receiver(pre_save, sender=SweepResult)
def validate_sweep_rate(sender, instance, **kwargs):
    """Валидация точности перед сохранением"""
    if instance.total == 0:
        raise ValidationError("Результат без проб не сохраняется")
    if instance.rate != instance.correct / instance.total:
        raise ValidationError("Точность должна равняться correct / total")
