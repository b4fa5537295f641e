# differentiation/exceptions.py
"""Иерархия ошибок конвейера. exit_code совпадает с кодом возврата команд."""
from typing import Optional


class PipelineError(Exception):
    exit_code = 1

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def with_stage(self, stage: str) -> 'PipelineError':
        """Копия ошибки с меткой этапа (ingest, features, train, score)."""
        clone = type(self)(self.message, stage=stage)
        clone.__cause__ = self
        return clone

    def __str__(self):
        if self.stage:
            return f'[{self.stage}] {self.message}'
        return self.message


class ConfigError(PipelineError):
    """Некорректная конфигурация или нарушение предусловий API."""
    exit_code = 2


class DataError(PipelineError):
    """Ошибка входных данных: файлы, формат, размерности."""
    exit_code = 3


class FeatureMismatchError(DataError):
    """Признаковое пространство данных не совпадает с описанием модели."""


class ArtifactFormatError(DataError):
    """Файл модели повреждён: версия, контрольная сумма, структура."""


class NumericError(PipelineError):
    """Численный сбой: неустойчивый фильтр, вырожденные данные, NaN."""
    exit_code = 4
