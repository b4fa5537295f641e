# differentiation/classical.py
"""
Классические бинарные классификаторы (LR, SVM, LDA, GNB, KNN, DT, RF),
выдающие мягкие оценки для AUC, и перебор по сетке с 5-fold CV.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Type

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist
from scipy.special import expit, logsumexp

from .conf import get_setting
from .dataio import ModelArtifact
from .evaluation import roc_auc, stratified_kfold
from .exceptions import ConfigError, DataError

logger = logging.getLogger(__name__)


class BinaryClassifier:
    """Базовый класс: fit -> predict_scores, параметры хранятся словарём массивов."""
    algorithm = ''
    defaults: Dict[str, object] = {}

    def __init__(self, **hyperparameters):
        unknown = set(hyperparameters) - set(self.defaults)
        if unknown:
            raise ConfigError(f'{self.algorithm}: неизвестные гиперпараметры {sorted(unknown)}')
        self.hyperparameters = {**self.defaults, **hyperparameters}
        self.validate()

    def validate(self):
        pass

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> 'BinaryClassifier':
        raise NotImplementedError

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def get_parameters(self) -> Dict[str, np.ndarray]:
        raise NotImplementedError

    def set_parameters(self, params: Dict[str, np.ndarray]):
        raise NotImplementedError


def _positive(name: str, value, allow_zero: bool = False):
    if value is None or (value < 0 if allow_zero else value <= 0):
        raise ConfigError(f'Гиперпараметр {name} должен быть положительным: {value}')


class LogisticRegression(BinaryClassifier):
    """L2-регуляризованная логистическая регрессия, градиентный спуск с backtracking."""
    algorithm = 'LR'
    defaults = {'l2': 1.0, 'tol': 1e-6, 'max_iter': 5000}

    def validate(self):
        _positive('l2', self.hyperparameters['l2'], allow_zero=True)
        _positive('tol', self.hyperparameters['tol'])
        _positive('max_iter', self.hyperparameters['max_iter'])

    def _loss_grad(self, X, y, w, b):
        l2 = self.hyperparameters['l2']
        z = X @ w + b
        loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(w, w)
        residual = expit(z) - y
        grad_w = X.T @ residual / X.shape[0] + l2 * w
        grad_b = residual.mean()
        return loss, grad_w, grad_b

    def fit(self, X, y, seed=0):
        w = np.zeros(X.shape[1])
        b = 0.0
        step = 1.0
        loss, grad_w, grad_b = self._loss_grad(X, y, w, b)
        n_steps = 0
        for _ in range(int(self.hyperparameters['max_iter'])):
            grad_sq = np.dot(grad_w, grad_w) + grad_b ** 2
            if np.sqrt(grad_sq) < self.hyperparameters['tol']:
                break
            # Армихо: уменьшаем шаг, пока нет достаточного убывания
            while True:
                new_w, new_b = w - step * grad_w, b - step * grad_b
                new_loss, new_grad_w, new_grad_b = self._loss_grad(X, y, new_w, new_b)
                if new_loss <= loss - 0.5 * step * grad_sq or step < 1e-12:
                    break
                step *= 0.5
            w, b, loss, grad_w, grad_b = new_w, new_b, new_loss, new_grad_w, new_grad_b
            step = min(step * 2.0, 1e3)
            n_steps += 1
        logger.debug('LR: %d шагов, loss=%.6f', n_steps, loss)
        self.coef_, self.intercept_ = w, float(b)
        return self

    def predict_scores(self, X):
        return expit(X @ self.coef_ + self.intercept_)

    def get_parameters(self):
        return {'coef': self.coef_, 'intercept': np.array([self.intercept_])}

    def set_parameters(self, params):
        self.coef_ = np.asarray(params['coef'], dtype=float)
        self.intercept_ = float(np.asarray(params['intercept']).ravel()[0])


class LinearSVM(BinaryClassifier):
    """
    Линейный SVM: 0.5·||w||² + C·mean(hinge), субградиентный спуск (Pegasos).
    Свободный член идёт постоянным признаком, оценка равна сигмоиде от отступа.
    """
    algorithm = 'SVM'
    defaults = {'C': 1.0, 'max_iter': 1000}

    def validate(self):
        _positive('C', self.hyperparameters['C'])
        _positive('max_iter', self.hyperparameters['max_iter'])

    def _objective(self, Xa, signs, w):
        margins = 1.0 - signs * (Xa @ w)
        return 0.5 * np.dot(w, w) + self.hyperparameters['C'] * np.mean(np.maximum(margins, 0.0))

    def fit(self, X, y, seed=0):
        C = self.hyperparameters['C']
        lam = 1.0 / C
        Xa = np.hstack([X, np.ones((X.shape[0], 1))])
        signs = np.where(y == 1, 1.0, -1.0)
        w = np.zeros(Xa.shape[1])
        best_w, best_obj = w.copy(), self._objective(Xa, signs, w)
        radius = 1.0 / np.sqrt(lam)
        for t in range(1, int(self.hyperparameters['max_iter']) + 1):
            violators = signs * (Xa @ w) < 1.0
            subgrad = lam * w
            if violators.any():
                subgrad = subgrad - (signs[violators, None] * Xa[violators]).sum(axis=0) / Xa.shape[0]
            w = w - subgrad / (lam * t)
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            objective = self._objective(Xa, signs, w)
            if objective < best_obj:
                best_w, best_obj = w.copy(), objective
        self.coef_, self.intercept_ = best_w[:-1], float(best_w[-1])
        return self

    def decision_function(self, X):
        return X @ self.coef_ + self.intercept_

    def predict_scores(self, X):
        return expit(self.decision_function(X))

    def get_parameters(self):
        return {'coef': self.coef_, 'intercept': np.array([self.intercept_])}

    def set_parameters(self, params):
        self.coef_ = np.asarray(params['coef'], dtype=float)
        self.intercept_ = float(np.asarray(params['intercept']).ravel()[0])


class LinearDiscriminant(BinaryClassifier):
    """LDA с общей ковариацией и гребневой добавкой; при d > n решение через тождество Вудбери."""
    algorithm = 'LDA'
    defaults = {'ridge': 1e-3}

    def validate(self):
        _positive('ridge', self.hyperparameters['ridge'])

    def fit(self, X, y, seed=0):
        ridge = self.hyperparameters['ridge']
        X0, X1 = X[y == 0], X[y == 1]
        mu0, mu1 = X0.mean(axis=0), X1.mean(axis=0)
        centered = np.vstack([X0 - mu0, X1 - mu1]) / np.sqrt(max(X.shape[0] - 2, 1))
        diff = mu1 - mu0
        n, d = centered.shape
        if d <= n:
            cov = centered.T @ centered + ridge * np.eye(d)
            w = linalg.solve(cov, diff, assume_a='pos')
        else:
            gram = centered @ centered.T + ridge * np.eye(n)
            w = (diff - centered.T @ linalg.solve(gram, centered @ diff, assume_a='pos')) / ridge
        log_prior = np.log(X1.shape[0] / X0.shape[0])
        self.coef_ = w
        self.intercept_ = float(-0.5 * np.dot(mu0 + mu1, w) + log_prior)
        return self

    def predict_scores(self, X):
        return expit(X @ self.coef_ + self.intercept_)

    def get_parameters(self):
        return {'coef': self.coef_, 'intercept': np.array([self.intercept_])}

    def set_parameters(self, params):
        self.coef_ = np.asarray(params['coef'], dtype=float)
        self.intercept_ = float(np.asarray(params['intercept']).ravel()[0])


class GaussianNaiveBayes(BinaryClassifier):
    algorithm = 'GNB'
    defaults = {'var_floor': 1e-9}

    def validate(self):
        _positive('var_floor', self.hyperparameters['var_floor'])

    def fit(self, X, y, seed=0):
        floor = self.hyperparameters['var_floor']
        self.theta_ = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
        self.var_ = np.maximum(np.vstack([X[y == c].var(axis=0) for c in (0, 1)]), floor)
        self.log_prior_ = np.log(np.array([np.mean(y == 0), np.mean(y == 1)]))
        return self

    def _joint_log_likelihood(self, X):
        jll = []
        for c in (0, 1):
            log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.var_[c]))
            quad = -0.5 * np.sum((X - self.theta_[c]) ** 2 / self.var_[c], axis=1)
            jll.append(self.log_prior_[c] + log_norm + quad)
        return np.column_stack(jll)

    def predict_proba(self, X):
        jll = self._joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict_scores(self, X):
        return self.predict_proba(X)[:, 1]

    def get_parameters(self):
        return {'theta': self.theta_, 'var': self.var_, 'log_prior': self.log_prior_}

    def set_parameters(self, params):
        self.theta_ = np.asarray(params['theta'], dtype=float)
        self.var_ = np.asarray(params['var'], dtype=float)
        self.log_prior_ = np.asarray(params['log_prior'], dtype=float)


class KNearestNeighbors(BinaryClassifier):
    """Доля положительных среди k ближайших (евклидово расстояние, при равенстве берётся меньший индекс)."""
    algorithm = 'KNN'
    defaults = {'k': 5}

    def validate(self):
        k = self.hyperparameters['k']
        if not isinstance(k, (int, np.integer)) or k < 1:
            raise ConfigError(f'KNN: k должно быть целым >= 1: {k}')

    def fit(self, X, y, seed=0):
        self.X_ = np.array(X, dtype=float)
        self.y_ = np.array(y, dtype=float)
        return self

    def predict_scores(self, X):
        k = min(int(self.hyperparameters['k']), self.X_.shape[0])
        distances = cdist(X, self.X_, metric='sqeuclidean')
        nearest = np.argsort(distances, axis=1, kind='stable')[:, :k]
        return self.y_[nearest].mean(axis=1)

    def get_parameters(self):
        return {'X': self.X_, 'y': self.y_}

    def set_parameters(self, params):
        self.X_ = np.asarray(params['X'], dtype=float)
        self.y_ = np.asarray(params['y'], dtype=float)


@dataclass
class _TreeArrays:
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[float] = field(default_factory=list)

    def add(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.value) - 1


def _best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray,
                min_leaf: int) -> Optional[Tuple[int, float]]:
    """Минимум взвешенного Джини по всем порогам выбранных признаков."""
    n = X.shape[0]
    sub = X[:, features]
    order = np.argsort(sub, axis=0, kind='stable')
    xs = np.take_along_axis(sub, order, axis=0)
    ys = y[order]
    n_left = np.arange(1, n)[:, None].astype(float)
    n_right = n - n_left
    pos_left = np.cumsum(ys, axis=0)[:-1]
    pos_right = ys.sum(axis=0) - pos_left
    p_left = pos_left / n_left
    p_right = pos_right / n_right
    gini = (n_left * 2 * p_left * (1 - p_left) + n_right * 2 * p_right * (1 - p_right)) / n
    valid = xs[1:] > xs[:-1]
    if min_leaf > 1:
        valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    gini = np.where(valid, gini, np.inf)
    # порядок обхода: признак, затем порог; берётся первое вхождение минимума
    flat = int(np.argmin(gini.T))
    feature_pos, split = divmod(flat, n - 1)
    threshold = 0.5 * (xs[split, feature_pos] + xs[split + 1, feature_pos])
    return int(features[feature_pos]), float(threshold)


def _resolve_max_features(max_features, n_features: int) -> Optional[int]:
    if max_features is None:
        return None
    if max_features == 'sqrt':
        return max(1, int(math.sqrt(n_features)))
    return max(1, min(int(max_features), n_features))


def build_tree(X: np.ndarray, y: np.ndarray, max_depth: Optional[int], min_leaf: int,
               max_features: Optional[int], rng: np.random.Generator) -> _TreeArrays:
    tree = _TreeArrays()
    root = tree.add(float(y.mean()))
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y_node = y[idx]
        if y_node.min() == y_node.max() or idx.size < 2 * min_leaf:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if max_features is None:
            features = np.arange(X.shape[1])
        else:
            features = np.sort(rng.choice(X.shape[1], size=max_features, replace=False))
        split = _best_split(X[idx], y_node, features, min_leaf)
        if split is None:
            continue
        feature, threshold = split
        goes_left = X[idx, feature] <= threshold
        left_idx, right_idx = idx[goes_left], idx[~goes_left]
        left = tree.add(float(y[left_idx].mean()))
        right = tree.add(float(y[right_idx].mean()))
        tree.feature[node], tree.threshold[node] = feature, threshold
        tree.left[node], tree.right[node] = left, right
        stack.append((right, right_idx, depth + 1))
        stack.append((left, left_idx, depth + 1))
    return tree


def predict_tree(params: Dict[str, np.ndarray], X: np.ndarray) -> np.ndarray:
    node = np.zeros(X.shape[0], dtype=int)
    rows = np.arange(X.shape[0])
    while True:
        feature = params['feature'][node]
        internal = feature >= 0
        if not internal.any():
            return params['value'][node]
        go_left = X[rows, np.where(internal, feature, 0)] <= params['threshold'][node]
        nxt = np.where(go_left, params['left'][node], params['right'][node])
        node = np.where(internal, nxt, node)


def _tree_to_arrays(tree: _TreeArrays) -> Dict[str, np.ndarray]:
    return {
        'feature': np.array(tree.feature, dtype=np.int64),
        'threshold': np.array(tree.threshold, dtype=float),
        'left': np.array(tree.left, dtype=np.int64),
        'right': np.array(tree.right, dtype=np.int64),
        'value': np.array(tree.value, dtype=float),
    }


class DecisionTree(BinaryClassifier):
    """Жадное дерево по Джини; лист возвращает долю положительных."""
    algorithm = 'DT'
    defaults = {'max_depth': None, 'min_samples_leaf': 1, 'max_features': None}

    def validate(self):
        depth = self.hyperparameters['max_depth']
        if depth is not None and depth < 1:
            raise ConfigError(f'max_depth должно быть >= 1 или None: {depth}')
        if self.hyperparameters['min_samples_leaf'] < 1:
            raise ConfigError('min_samples_leaf должно быть >= 1')

    def fit(self, X, y, seed=0):
        hp = self.hyperparameters
        rng = np.random.default_rng([seed, 0])
        tree = build_tree(X, y.astype(float), hp['max_depth'], int(hp['min_samples_leaf']),
                          _resolve_max_features(hp['max_features'], X.shape[1]), rng)
        self.tree_ = _tree_to_arrays(tree)
        return self

    def predict_scores(self, X):
        return predict_tree(self.tree_, X)

    def get_parameters(self):
        return dict(self.tree_)

    def set_parameters(self, params):
        self.tree_ = {key: np.asarray(params[key]) for key in ('feature', 'threshold', 'left', 'right', 'value')}


class RandomForest(BinaryClassifier):
    """
    Бэггинг деревьев с подвыборкой √d признаков в узле. Дерево t получает
    генератор default_rng([seed, t]), поэтому результат не зависит от порядка обучения.
    """
    algorithm = 'RF'
    defaults = {'n_trees': 100, 'max_depth': 8, 'min_samples_leaf': 1,
                'max_features': 'sqrt', 'bootstrap': True}

    def validate(self):
        if self.hyperparameters['n_trees'] < 1:
            raise ConfigError('n_trees должно быть >= 1')

    def fit(self, X, y, seed=0):
        hp = self.hyperparameters
        max_features = _resolve_max_features(hp['max_features'], X.shape[1])
        y = y.astype(float)
        self.trees_ = []
        for t in range(int(hp['n_trees'])):
            rng = np.random.default_rng([seed, t])
            idx = rng.integers(0, X.shape[0], X.shape[0]) if hp['bootstrap'] else np.arange(X.shape[0])
            tree = build_tree(X[idx], y[idx], hp['max_depth'], int(hp['min_samples_leaf']), max_features, rng)
            self.trees_.append(_tree_to_arrays(tree))
        return self

    def predict_scores(self, X):
        return np.mean([predict_tree(tree, X) for tree in self.trees_], axis=0)

    def get_parameters(self):
        params = {key: np.concatenate([t[key] for t in self.trees_])
                  for key in ('feature', 'threshold', 'left', 'right', 'value')}
        params['tree_sizes'] = np.array([t['value'].size for t in self.trees_], dtype=np.int64)
        return params

    def set_parameters(self, params):
        bounds = np.concatenate([[0], np.cumsum(params['tree_sizes'])]).astype(int)
        self.trees_ = [
            {key: np.asarray(params[key])[start:stop] for key in ('feature', 'threshold', 'left', 'right', 'value')}
            for start, stop in zip(bounds[:-1], bounds[1:])
        ]


ESTIMATORS: Dict[str, Type[BinaryClassifier]] = {
    cls.algorithm: cls for cls in (
        LogisticRegression, LinearSVM, LinearDiscriminant, GaussianNaiveBayes,
        KNearestNeighbors, DecisionTree, RandomForest,
    )
}
ALGORITHMS = tuple(ESTIMATORS)


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str
    hyperparameters: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ESTIMATORS:
            raise ConfigError(f'Неизвестный алгоритм {self.algorithm!r}, доступны {", ".join(ALGORITHMS)}')
        ESTIMATORS[self.algorithm](**self.hyperparameters)

    def build(self) -> BinaryClassifier:
        return ESTIMATORS[self.algorithm](**self.hyperparameters)


@dataclass(eq=False)
class TrainedClassifier:
    spec: ClassifierSpec
    estimator: BinaryClassifier
    n_features: int


def _check_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DataError(f'Матрица признаков должна быть двумерной: ndim={X.ndim}')
    if not np.all(np.isfinite(X)):
        raise DataError('Матрица признаков содержит NaN или Inf')
    return X


def _check_labels(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y, dtype=int).ravel()
    if y.size != n_rows:
        raise DataError(f'Размерности не совпадают: {n_rows} строк и {y.size} меток')
    if not np.all(np.isin(y, (0, 1))):
        raise DataError('Метки должны быть 0 или 1')
    if np.unique(y).size < 2:
        raise DataError('В обучающей выборке только один класс')
    return y


def fit(spec: ClassifierSpec, X, y, seed: int = 0) -> TrainedClassifier:
    X = _check_matrix(X)
    y = _check_labels(y, X.shape[0])
    estimator = spec.build().fit(X, y, seed=seed)
    return TrainedClassifier(spec=spec, estimator=estimator, n_features=X.shape[1])


def predict_scores(model: TrainedClassifier, X) -> np.ndarray:
    X = _check_matrix(X)
    if X.shape[1] != model.n_features:
        raise DataError(f'Модель обучена на {model.n_features} признаках, получено {X.shape[1]}')
    return np.asarray(model.estimator.predict_scores(X), dtype=float)


def expand_grid(grid) -> List[Dict[str, object]]:
    """Словарь списков -> точки в порядке декартова произведения ключей; список словарей возвращается как есть."""
    if isinstance(grid, dict):
        keys = list(grid)
        return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]
    return [dict(point) for point in grid]


def default_grid(algorithm: str) -> List[Dict[str, object]]:
    return expand_grid(get_setting('GRIDS')[algorithm])


@dataclass(eq=False)
class GridSearchResult:
    best_params: Dict[str, object]
    points: List[Dict[str, object]]
    mean_auc: List[float]
    fold_rows: List[Dict[str, object]]
    model: TrainedClassifier


def grid_search_cv(algorithm: str, grid, X, y, folds: int = 5, seed: int = 0) -> GridSearchResult:
    """Средний AUC на валидационных фолдах для каждой точки; лучшая: первая с максимумом."""
    X = _check_matrix(X)
    y = _check_labels(y, X.shape[0])
    points = expand_grid(grid) if grid is not None else default_grid(algorithm)
    if not points:
        raise ConfigError('Пустая сетка гиперпараметров')
    plan = stratified_kfold(y, folds, seed)
    mean_auc, fold_rows = [], []
    for index, params in enumerate(points):
        spec = ClassifierSpec(algorithm, params)
        aucs = []
        for fold, (train_idx, val_idx) in enumerate(plan.splits()):
            model = fit(spec, X[train_idx], y[train_idx], seed=seed)
            fold_auc = roc_auc(predict_scores(model, X[val_idx]), y[val_idx])
            aucs.append(fold_auc)
            fold_rows.append({'point': index, 'params': params, 'fold': fold, 'auc': fold_auc})
        mean_auc.append(float(np.mean(aucs)))
        logger.debug('%s %s: CV AUC %.4f', algorithm, params, mean_auc[-1])
    best = int(np.argmax(mean_auc))
    logger.info('%s: лучшая точка %s, CV AUC %.4f', algorithm, points[best], mean_auc[best])
    model = fit(ClassifierSpec(algorithm, points[best]), X, y, seed=seed)
    return GridSearchResult(points[best], points, mean_auc, fold_rows, model)


def to_artifact(model: TrainedClassifier, feature_descriptor: dict, fingerprint: str = '') -> ModelArtifact:
    return ModelArtifact(
        algorithm=model.spec.algorithm,
        hyperparameters=dict(model.spec.hyperparameters),
        feature_descriptor={**feature_descriptor, 'n_features': model.n_features},
        parameters=model.estimator.get_parameters(),
        fingerprint=fingerprint,
    )


def from_artifact(artifact: ModelArtifact) -> TrainedClassifier:
    spec = ClassifierSpec(artifact.algorithm, dict(artifact.hyperparameters))
    estimator = spec.build()
    estimator.set_parameters(artifact.parameters)
    return TrainedClassifier(spec=spec, estimator=estimator,
                             n_features=int(artifact.feature_descriptor['n_features']))
