# differentiation/fnc.py
"""
FNC: корреляции Пирсона между ICN, нижний треугольник 105×105 -> 5460,
min-max нормализация, хи-квадрат и отбор top-k признаков.
"""
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.feature_selection import chi2

from .exceptions import ConfigError, DataError, NumericError
from .records import IcnMatrix, N_FNC_FEATURES

logger = logging.getLogger(__name__)


def lower_triangle_indices(n_channels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Пары (i, j), i > j, построчно: (1,0), (2,0), (2,1), (3,0), ..."""
    return np.tril_indices(n_channels, k=-1)


def fnc_pair_names(n_channels: int) -> List[str]:
    rows, cols = lower_triangle_indices(n_channels)
    return [f'icn{i}_icn{j}' for i, j in zip(rows, cols)]


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError(f'Векторы должны быть одномерными и одной длины: {x.shape} и {y.shape}')
    if x.size < 2:
        raise DataError('Для корреляции нужно минимум 2 отсчёта')
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = np.dot(xc, xc)
    syy = np.dot(yc, yc)
    if sxx == 0.0 or syy == 0.0:
        raise NumericError('Вырожденный вход: нулевая дисперсия, корреляция не определена')
    return float(np.clip(np.dot(xc, yc) / np.sqrt(sxx * syy), -1.0, 1.0))


def correlation_matrix(icn: IcnMatrix) -> np.ndarray:
    """Матрица Пирсона по отсчётам [0, original_length), без нулевого хвоста."""
    signal = np.asarray(icn.signal, dtype=float)
    centered = signal - signal.mean(axis=1, keepdims=True)
    sum_sq = np.einsum('ij,ij->i', centered, centered)
    constant = np.flatnonzero(sum_sq == 0.0)
    if constant.size:
        raise NumericError(f'Канал {int(constant[0])} постоянен, корреляция не определена')
    norms = np.sqrt(sum_sq)
    corr = (centered @ centered.T) / np.outer(norms, norms)
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)


def compute_fnc(icn: IcnMatrix) -> np.ndarray:
    corr = correlation_matrix(icn)
    rows, cols = lower_triangle_indices(icn.n_channels)
    return corr[rows, cols]


def fnc_to_matrix(vector: np.ndarray, n_channels: int = None) -> np.ndarray:
    """Обратная сборка симметричной матрицы с единичной диагональю."""
    vector = np.asarray(vector, dtype=float)
    if n_channels is None:
        n_channels = int(round((1 + np.sqrt(1 + 8 * vector.size)) / 2))
    rows, cols = lower_triangle_indices(n_channels)
    if rows.size != vector.size:
        raise DataError(f'Длина {vector.size} не соответствует {n_channels} каналам')
    matrix = np.eye(n_channels)
    matrix[rows, cols] = vector
    matrix[cols, rows] = vector
    return matrix


@dataclass(frozen=True, eq=False)
class FeatureTable:
    X: np.ndarray
    feature_ids: List[str]
    bounds: Optional[np.ndarray] = None  # 2 × d: строки min, max

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        if X.ndim != 2:
            raise DataError(f'Таблица признаков должна быть двумерной: ndim={X.ndim}')
        if X.shape[1] != len(self.feature_ids):
            raise DataError(f'{X.shape[1]} столбцов, но {len(self.feature_ids)} имён признаков')
        if not np.all(np.isfinite(X)):
            raise DataError('Таблица признаков содержит NaN или Inf')
        X.setflags(write=False)
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'feature_ids', list(self.feature_ids))

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def select(self, indices: Sequence[int]) -> 'FeatureTable':
        indices = list(indices)
        bounds = None if self.bounds is None else self.bounds[:, indices]
        return FeatureTable(self.X[:, indices], [self.feature_ids[i] for i in indices], bounds)

    def rows(self, indices: Sequence[int]) -> 'FeatureTable':
        return FeatureTable(self.X[list(indices)], self.feature_ids, self.bounds)


def minmax_normalize_fit(table: FeatureTable) -> FeatureTable:
    """Границы по обучающим строкам; постоянные признаки переходят в 0."""
    bounds = np.vstack([table.X.min(axis=0), table.X.max(axis=0)])
    return minmax_apply(bounds, table)


def minmax_apply(bounds: np.ndarray, table: FeatureTable) -> FeatureTable:
    bounds = np.asarray(bounds, dtype=float)
    if bounds.shape != (2, table.n_features):
        raise DataError(f'Границы нормализации {bounds.shape} не подходят к {table.n_features} признакам')
    lo, hi = bounds
    span = hi - lo
    safe_span = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (table.X - lo) / safe_span, 0.0)
    return FeatureTable(np.clip(scaled, 0.0, 1.0), table.feature_ids, bounds)


def chi2_scores(table: FeatureTable, y: Sequence[int]) -> np.ndarray:
    """
    Хи-квадрат по суммам признака в классах: O_cj = Σ_{y=c} X_ij,
    E_cj = (n_c/n)·Σ_i X_ij. Признаки с нулевой суммой получают 0.
    """
    y = np.asarray(y, dtype=int)
    if y.shape != (table.X.shape[0],):
        raise DataError(f'Меток {y.size}, строк {table.X.shape[0]}')
    if np.unique(y).size < 2:
        raise DataError('Для хи-квадрат нужны оба класса')
    if np.any(table.X < 0):
        raise DataError('Хи-квадрат требует неотрицательных (нормализованных) признаков')
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        scores, _ = chi2(table.X, y)
    return np.nan_to_num(scores, nan=0.0, posinf=0.0, neginf=0.0)


@dataclass(frozen=True, eq=False)
class SelectionResult:
    scores: np.ndarray
    selected: List[int] = field(default_factory=list)


def select_top_k(scores: Sequence[float], k: int) -> SelectionResult:
    """k наибольших; при равенстве меньший индекс; порядок: score убыв., индекс возр."""
    scores = np.asarray(scores, dtype=float)
    if not 1 <= k <= scores.size:
        raise ConfigError(f'k={k} вне диапазона [1, {scores.size}]')
    order = np.lexsort((np.arange(scores.size), -scores))
    return SelectionResult(scores=scores, selected=[int(i) for i in order[:k]])


def fnc_table(subject_ids: Sequence[str], vectors: Sequence[np.ndarray]) -> pd.DataFrame:
    values = np.vstack(vectors)
    n_channels = int(round((1 + np.sqrt(1 + 8 * values.shape[1])) / 2))
    frame = pd.DataFrame(values, columns=fnc_pair_names(n_channels))
    frame.insert(0, 'subject_id', list(subject_ids))
    return frame


def save_fnc_table(path, subject_ids: Sequence[str], vectors: Sequence[np.ndarray]) -> Path:
    """Кэш FNC: строка на субъекта, subject_id + 5460 столбцов."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fnc_table(subject_ids, vectors).to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    logger.info('FNC-таблица: %d субъектов -> %s', len(subject_ids), path)
    return path


def load_fnc_table(path) -> Tuple[List[str], np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f'Файл FNC не найден: {path}')
    frame = pd.read_csv(path, dtype={'subject_id': str}, float_precision='round_trip')
    if 'subject_id' not in frame.columns:
        raise DataError(f'{path}: нет столбца subject_id')
    try:
        values = frame.drop(columns='subject_id').to_numpy(dtype=float)
    except ValueError:
        raise DataError(f'{path}: нечисловые значения FNC') from None
    if values.shape[1] != N_FNC_FEATURES:
        raise DataError(f'{path}: ожидалось {N_FNC_FEATURES} столбцов FNC, найдено {values.shape[1]}')
    if not np.all(np.isfinite(values)):
        raise DataError(f'{path}: FNC содержит NaN или Inf')
    if np.any(np.abs(values) > 1.0):
        raise DataError(f'{path}: значения FNC должны лежать в [-1, 1]')
    if frame['subject_id'].duplicated().any():
        raise DataError(f'{path}: повторяющиеся subject_id')
    return frame['subject_id'].tolist(), values
