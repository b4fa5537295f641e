# differentiation/records.py
"""Типы данных когорты: ICN-матрица, запись субъекта, набор данных."""
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigError, DataError

N_CHANNELS = 105
N_FNC_FEATURES = N_CHANNELS * (N_CHANNELS - 1) // 2


class Label(IntEnum):
    BP = 0
    SZ = 1

    @classmethod
    def parse(cls, text: str) -> Optional['Label']:
        """'SZ' / 'BP' / '' (без метки)."""
        text = (text or '').strip().upper()
        if not text:
            return None
        try:
            return cls[text]
        except KeyError:
            raise DataError(f'Неизвестная метка {text!r}, допустимы SZ, BP или пусто') from None


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class IcnMatrix:
    """Временные ряды ICN одного субъекта: каналы × отсчёты."""
    data: np.ndarray
    fs: float
    original_length: Optional[int] = None

    def __post_init__(self):
        data = _frozen_array(self.data)
        if data.ndim != 2:
            raise DataError(f'ICN-матрица должна быть двумерной, получено ndim={data.ndim}')
        if data.shape[1] < 2:
            raise DataError(f'Длина ICN должна быть не меньше 2, получено {data.shape[1]}')
        if not self.fs > 0:
            raise ConfigError(f'Частота дискретизации должна быть положительной: {self.fs}')
        if not np.all(np.isfinite(data)):
            raise DataError('ICN-матрица содержит NaN или Inf')
        original_length = data.shape[1] if self.original_length is None else int(self.original_length)
        if not 2 <= original_length <= data.shape[1]:
            raise DataError(
                f'original_length={original_length} вне диапазона [2, {data.shape[1]}]'
            )
        if np.any(data[:, original_length:] != 0.0):
            raise DataError('Столбцы после original_length должны быть нулевыми')
        object.__setattr__(self, 'data', data)
        object.__setattr__(self, 'fs', float(self.fs))
        object.__setattr__(self, 'original_length', original_length)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def length(self) -> int:
        return self.data.shape[1]

    @property
    def signal(self) -> np.ndarray:
        """Отсчёты без нулевого дополнения."""
        return self.data[:, :self.original_length]


@dataclass(frozen=True, eq=False)
class SubjectRecord:
    subject_id: str
    icn: IcnMatrix
    label: Optional[Label] = None
    fnc: Optional[np.ndarray] = None

    def __post_init__(self):
        if not str(self.subject_id).strip():
            raise DataError('Пустой subject_id')
        if self.label is not None:
            object.__setattr__(self, 'label', Label(int(self.label)))
        if self.fnc is not None:
            fnc = _frozen_array(self.fnc)
            if fnc.shape != (N_FNC_FEATURES,):
                raise DataError(
                    f'{self.subject_id}: FNC-вектор должен иметь длину {N_FNC_FEATURES}, получено {fnc.size}'
                )
            if not np.all(np.isfinite(fnc)) or np.any(np.abs(fnc) > 1.0):
                raise DataError(f'{self.subject_id}: значения FNC должны быть конечными и лежать в [-1, 1]')
            object.__setattr__(self, 'fnc', fnc)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Упорядоченная когорта субъектов с общей длиной после дополнения."""
    subjects: Tuple[SubjectRecord, ...]
    fs: float
    max_length: int
    _ids: Tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        subjects = tuple(self.subjects)
        if not subjects:
            raise DataError('Набор данных пуст')
        ids = tuple(s.subject_id for s in subjects)
        seen = set()
        for subject_id in ids:
            if subject_id in seen:
                raise DataError(f'Повторяющийся subject_id: {subject_id}')
            seen.add(subject_id)
        for subject in subjects:
            if subject.icn.length != self.max_length:
                raise DataError(
                    f'{subject.subject_id}: длина {subject.icn.length} != max_length {self.max_length}'
                )
        object.__setattr__(self, 'subjects', subjects)
        object.__setattr__(self, '_ids', ids)

    def __len__(self) -> int:
        return len(self.subjects)

    def __iter__(self) -> Iterator[SubjectRecord]:
        return iter(self.subjects)

    @property
    def subject_ids(self) -> List[str]:
        return list(self._ids)

    @property
    def is_labeled(self) -> bool:
        return all(s.label is not None for s in self.subjects)

    def labels(self) -> np.ndarray:
        """Вектор меток 0/1; неразмеченные субъекты дают DataError."""
        missing = [s.subject_id for s in self.subjects if s.label is None]
        if missing:
            raise DataError(f'Нет меток у субъектов: {", ".join(missing[:5])}')
        return np.array([int(s.label) for s in self.subjects], dtype=int)

    def labeled(self) -> 'Dataset':
        return self.subset([i for i, s in enumerate(self.subjects) if s.label is not None])

    def subset(self, indices: Sequence[int]) -> 'Dataset':
        return Dataset(tuple(self.subjects[i] for i in indices), self.fs, self.max_length)

    def icn_array(self) -> np.ndarray:
        """Массив n × каналы × длина."""
        return np.stack([s.icn.data for s in self.subjects])
