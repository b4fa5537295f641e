# differentiation/evaluation.py
"""AUC (статистика Манна-Уитни), стратифицированные разбиения и k-fold."""
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from .exceptions import ConfigError, DataError


@dataclass(frozen=True, eq=False)
class ScoredLabels:
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float).ravel()
        labels = np.asarray(self.labels, dtype=int).ravel()
        if scores.shape != labels.shape:
            raise DataError(f'Оценок {scores.size}, меток {labels.size}')
        if not np.all(np.isin(labels, (0, 1))):
            raise DataError('Метки должны быть 0 или 1')
        if not np.all(np.isfinite(scores)):
            raise DataError('Оценки содержат NaN или Inf')
        object.__setattr__(self, 'scores', scores)
        object.__setattr__(self, 'labels', labels)


def mann_whitney_u(sl: ScoredLabels) -> float:
    """U = #(s_pos > s_neg) + 0.5·#ничьих, через средние ранги."""
    n_pos = int(sl.labels.sum())
    n_neg = sl.labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError('Для AUC нужны оба класса')
    ranks = rankdata(sl.scores, method='average')
    return float(ranks[sl.labels == 1].sum() - n_pos * (n_pos + 1) / 2.0)


def auc(sl: ScoredLabels) -> float:
    n_pos = int(sl.labels.sum())
    n_neg = sl.labels.size - n_pos
    return mann_whitney_u(sl) / (n_pos * n_neg)


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    return auc(ScoredLabels(np.asarray(scores), np.asarray(labels)))


def _class_members(labels: np.ndarray, rng: np.random.Generator):
    """Перемешанные индексы каждого класса в порядке возрастания метки."""
    for value in np.unique(labels):
        members = np.flatnonzero(labels == value)
        yield value, rng.permutation(members)


def stratified_split(labels: Sequence[int], fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Доля fraction каждого класса (округление half-up) уходит в holdout."""
    labels = np.asarray(labels, dtype=int)
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f'Доля holdout вне (0, 1): {fraction}')
    if np.unique(labels).size < 2:
        raise DataError('Для стратифицированного разбиения нужны оба класса')
    rng = np.random.default_rng(seed)
    train, holdout = [], []
    for value, members in _class_members(labels, rng):
        n_holdout = int(np.floor(fraction * members.size + 0.5))
        if n_holdout < 1 or n_holdout >= members.size:
            raise DataError(
                f'Класс {value} ({members.size} субъектов) не делится на обе части при доле {fraction}'
            )
        holdout.extend(members[:n_holdout])
        train.extend(members[n_holdout:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(holdout, dtype=int))


@dataclass(frozen=True, eq=False)
class FoldPlan:
    assignments: np.ndarray
    k: int
    seed: int

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)

    def splits(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """(обучение, валидация) для каждого фолда по порядку."""
        for fold in range(self.k):
            yield np.flatnonzero(self.assignments != fold), np.flatnonzero(self.assignments == fold)


def stratified_kfold(labels: Sequence[int], k: int, seed: int) -> FoldPlan:
    """
    Перемешивание внутри класса, затем раздача по кругу; счётчик фолда
    продолжается между классами, поэтому размеры фолдов отличаются не более чем на 1.
    """
    labels = np.asarray(labels, dtype=int)
    if k < 2:
        raise ConfigError(f'Число фолдов должно быть >= 2: {k}')
    counts = {int(v): int((labels == v).sum()) for v in np.unique(labels)}
    if len(counts) < 2:
        raise DataError('Для стратифицированной кросс-валидации нужны оба класса')
    small = {v: c for v, c in counts.items() if c < k}
    if small:
        raise DataError(f'В классах {small} меньше {k} субъектов, фолды построить нельзя')
    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.size, dtype=int)
    offset = 0
    for _, members in _class_members(labels, rng):
        assignments[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return FoldPlan(assignments=assignments, k=k, seed=seed)
