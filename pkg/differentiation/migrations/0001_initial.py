# Generated by Django 4.2.7

import django.core.validators
from django.db import migrations, models
import django.utils.timezone


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('feature_set', models.CharField(max_length=32, verbose_name='Набор признаков')),
                ('model', models.CharField(max_length=16, verbose_name='Модель')),
                ('split', models.CharField(choices=[('holdout', 'Holdout (20% обучающей выборки)'), ('public', 'Public'), ('private', 'Private'), ('mean', 'Среднее Public/Private')], default='holdout', max_length=16, verbose_name='Выборка')),
                ('auc', models.FloatField(validators=[django.core.validators.MinValueValidator(0.0), django.core.validators.MaxValueValidator(1.0)], verbose_name='AUC')),
                ('n', models.PositiveIntegerField(verbose_name='Субъектов')),
                ('runtime', models.FloatField(default=0.0, verbose_name='Время, с')),
                ('fingerprint', models.CharField(blank=True, max_length=64, verbose_name='Отпечаток конфигурации')),
                ('artifact_path', models.CharField(blank=True, max_length=500, verbose_name='Файл модели')),
                ('output_dir', models.CharField(blank=True, max_length=500, verbose_name='Каталог эксперимента')),
                ('created_at', models.DateTimeField(default=django.utils.timezone.now, verbose_name='Создан')),
            ],
            options={
                'verbose_name': 'Прогон эксперимента',
                'verbose_name_plural': 'Прогоны экспериментов',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['feature_set', 'model'], name='differentia_feature_5c1a0e_idx'), models.Index(fields=['fingerprint'], name='differentia_fingerp_8d2f4b_idx'), models.Index(fields=['created_at'], name='differentia_created_3e7b91_idx')],
            },
        ),
    ]
