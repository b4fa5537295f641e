# differentiation/models.py
from typing import Iterable, List

from django.core.exceptions import ValidationError
from django.core.validators import MaxValueValidator, MinValueValidator
from django.db import models
from django.utils import timezone


class ExperimentRunManager(models.Manager):
    def record_rows(self, rows: Iterable[dict], output_dir: str = '') -> List['ExperimentRun']:
        """Сохраняет строки отчёта эксперимента (report.csv) в базу"""
        runs = []
        for row in rows:
            runs.append(self.create(
                feature_set=row['feature_set'],
                model=row['model'],
                split=row.get('split', ExperimentRun.SPLIT_HOLDOUT),
                auc=row['auc'],
                n=row['n'],
                runtime=row.get('runtime', 0.0),
                fingerprint=row.get('fingerprint', ''),
                artifact_path=row.get('artifact', ''),
                output_dir=str(output_dir),
            ))
        return runs

    def best_per_pair(self) -> List['ExperimentRun']:
        """Лучший прогон для каждой пары (набор признаков, модель)"""
        best = {}
        for run in self.order_by('-auc', 'created_at'):
            best.setdefault((run.feature_set, run.model, run.split), run)
        return sorted(best.values(), key=lambda r: (r.feature_set, r.model, r.split))


class ExperimentRun(models.Model):
    """Строка отчёта: AUC одной пары признаки × модель на одной выборке"""
    SPLIT_HOLDOUT = 'holdout'
    SPLIT_PUBLIC = 'public'
    SPLIT_PRIVATE = 'private'
    SPLIT_MEAN = 'mean'

    SPLIT_CHOICES = [
        (SPLIT_HOLDOUT, 'Holdout (20% обучающей выборки)'),
        (SPLIT_PUBLIC, 'Public'),
        (SPLIT_PRIVATE, 'Private'),
        (SPLIT_MEAN, 'Среднее Public/Private'),
    ]

    feature_set = models.CharField(max_length=32, verbose_name="Набор признаков")
    model = models.CharField(max_length=16, verbose_name="Модель")
    split = models.CharField(max_length=16, choices=SPLIT_CHOICES, default=SPLIT_HOLDOUT, verbose_name="Выборка")
    auc = models.FloatField(
        validators=[MinValueValidator(0.0), MaxValueValidator(1.0)],
        verbose_name="AUC"
    )
    n = models.PositiveIntegerField(verbose_name="Субъектов")
    runtime = models.FloatField(default=0.0, verbose_name="Время, с")
    fingerprint = models.CharField(max_length=64, blank=True, verbose_name="Отпечаток конфигурации")
    artifact_path = models.CharField(max_length=500, blank=True, verbose_name="Файл модели")
    output_dir = models.CharField(max_length=500, blank=True, verbose_name="Каталог эксперимента")
    created_at = models.DateTimeField(default=timezone.now, verbose_name="Создан")

    objects = ExperimentRunManager()

    class Meta:
        verbose_name = "Прогон эксперимента"
        verbose_name_plural = "Прогоны экспериментов"
        indexes = [
            models.Index(fields=['feature_set', 'model'], name='differentia_feature_5c1a0e_idx'),
            models.Index(fields=['fingerprint'], name='differentia_fingerp_8d2f4b_idx'),
            models.Index(fields=['created_at'], name='differentia_created_3e7b91_idx'),
        ]
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.feature_set} × {self.model} [{self.split}]: AUC {self.auc:.4f}"

    def clean(self):
        if self.auc is not None and not 0.0 <= self.auc <= 1.0:
            raise ValidationError({'auc': 'AUC должен лежать в диапазоне от 0.0 до 1.0'})
        if self.runtime is not None and self.runtime < 0:
            raise ValidationError({'runtime': 'Время выполнения не может быть отрицательным'})

    def save(self, *args, **kwargs):
        self.full_clean()
        super().save(*args, **kwargs)

    def as_row(self) -> dict:
        return {
            'feature_set': self.feature_set,
            'model': self.model,
            'split': self.split,
            'auc': self.auc,
            'n': self.n,
            'runtime': self.runtime,
            'fingerprint': self.fingerprint,
            'artifact': self.artifact_path,
            'created_at': self.created_at.strftime('%Y-%m-%d %H:%M'),
        }
