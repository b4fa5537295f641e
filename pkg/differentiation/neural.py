# differentiation/neural.py
"""
Свёрточные сети на numpy с ручным обратным распространением.

Одна реализация свёртки "same" (шаг 1) работает для 1D и 3D: вклад каждого
смещения ядра накапливается через tensordot. Раскладка входа: (B, C, *пространство).
1D CNN принимает ICN-матрицы (B, 105, L), 3D CNN принимает тензоры субъекта (B, 1, F, T, 105).
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit

from .conf import get_setting
from .dataio import ModelArtifact
from .evaluation import roc_auc, stratified_split
from .exceptions import ConfigError, DataError

logger = logging.getLogger(__name__)

PROB_EPS = 1e-12


# ---------------------------------------------------------------------------
# Слои
# ---------------------------------------------------------------------------

class Layer:
    def params(self) -> Dict[str, np.ndarray]:
        return {}

    def output_shape(self, shape: Tuple[int, ...]) -> Tuple[int, ...]:
        return shape

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv(Layer):
    """Свёртка (кросс-корреляция) с дополнением нулями до той же длины."""

    def __init__(self, ndim: int, in_channels: int, out_channels: int, kernel: int):
        self.ndim = ndim
        self.kernel = kernel
        self.pad = kernel // 2
        self.weight = np.zeros((out_channels, in_channels) + (kernel,) * ndim)
        self.bias = np.zeros(out_channels)
        self.grads: Dict[str, np.ndarray] = {}

    def params(self):
        return {'weight': self.weight, 'bias': self.bias}

    @property
    def fan_in(self) -> int:
        return int(np.prod(self.weight.shape[1:]))

    def output_shape(self, shape):
        return (self.weight.shape[0],) + tuple(shape[1:])

    def _windows(self, spatial):
        for offset in itertools.product(range(self.kernel), repeat=self.ndim):
            window = (slice(None), slice(None)) + tuple(slice(o, o + s) for o, s in zip(offset, spatial))
            yield offset, window

    def forward(self, x):
        spatial = x.shape[2:]
        xp = np.pad(x, [(0, 0), (0, 0)] + [(self.pad, self.pad)] * self.ndim)
        out = np.zeros((x.shape[0], self.weight.shape[0]) + spatial)
        for offset, window in self._windows(spatial):
            w = self.weight[(slice(None), slice(None)) + offset]
            out += np.moveaxis(np.tensordot(xp[window], w, axes=([1], [1])), -1, 1)
        out += self.bias.reshape((1, -1) + (1,) * self.ndim)
        self._cache = xp
        return out

    def backward(self, grad):
        xp = self._cache
        spatial = grad.shape[2:]
        reduce_axes = [0] + list(range(2, 2 + self.ndim))
        grad_w = np.zeros_like(self.weight)
        grad_xp = np.zeros_like(xp)
        for offset, window in self._windows(spatial):
            grad_w[(slice(None), slice(None)) + offset] = np.tensordot(grad, xp[window], axes=(reduce_axes, reduce_axes))
            w = self.weight[(slice(None), slice(None)) + offset]
            grad_xp[window] += np.moveaxis(np.tensordot(grad, w, axes=([1], [0])), -1, 1)
        self.grads = {'weight': grad_w, 'bias': grad.sum(axis=tuple(reduce_axes))}
        crop = (slice(None), slice(None)) + tuple(slice(self.pad, self.pad + s) for s in spatial)
        return grad_xp[crop]


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad):
        return np.where(self._mask, grad, 0.0)


class MaxPool(Layer):
    """Окно 2 по каждой пространственной оси, остаток отбрасывается (floor)."""

    def __init__(self, ndim: int):
        self.ndim = ndim

    def output_shape(self, shape):
        return (shape[0],) + tuple(s // 2 for s in shape[1:])

    def forward(self, x):
        spatial = x.shape[2:]
        if min(spatial) < 2:
            raise DataError(f'Слишком короткий вход для пулинга: {spatial}')
        pooled = tuple(s // 2 for s in spatial)
        cropped = x[(slice(None), slice(None)) + tuple(slice(0, 2 * p) for p in pooled)]
        # (B, C, p0, 2, p1, 2, ...) -> (B, C, p0, p1, ..., 2·2·...)
        blocks = cropped.reshape(x.shape[:2] + tuple(v for p in pooled for v in (p, 2)))
        order = [0, 1] + [2 + 2 * i for i in range(self.ndim)] + [3 + 2 * i for i in range(self.ndim)]
        windows = blocks.transpose(order).reshape(x.shape[:2] + pooled + (2 ** self.ndim,))
        self._argmax = windows.argmax(axis=-1)
        self._shapes = (x.shape, pooled, order)
        return np.take_along_axis(windows, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, grad):
        in_shape, pooled, order = self._shapes
        windows = np.zeros(grad.shape + (2 ** self.ndim,))
        np.put_along_axis(windows, self._argmax[..., None], grad[..., None], axis=-1)
        blocks = windows.reshape(grad.shape[:2] + pooled + (2,) * self.ndim)
        blocks = blocks.transpose(np.argsort(order))
        out = np.zeros(in_shape)
        out[(slice(None), slice(None)) + tuple(slice(0, 2 * p) for p in pooled)] = \
            blocks.reshape(grad.shape[:2] + tuple(2 * p for p in pooled))
        return out


class GlobalAveragePool(Layer):
    def output_shape(self, shape):
        return (shape[0],)

    def forward(self, x):
        self._shape = x.shape
        return x.mean(axis=tuple(range(2, x.ndim)))

    def backward(self, grad):
        spatial = self._shape[2:]
        scale = 1.0 / np.prod(spatial)
        return np.broadcast_to(grad.reshape(grad.shape + (1,) * len(spatial)) * scale, self._shape).copy()


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int):
        self.weight = np.zeros((out_features, in_features))
        self.bias = np.zeros(out_features)
        self.grads: Dict[str, np.ndarray] = {}

    def params(self):
        return {'weight': self.weight, 'bias': self.bias}

    @property
    def fan_in(self) -> int:
        return self.weight.shape[1]

    def output_shape(self, shape):
        return (self.weight.shape[0],)

    def forward(self, x):
        self._cache = x
        return x @ self.weight.T + self.bias

    def backward(self, grad):
        self.grads = {'weight': grad.T @ self._cache, 'bias': grad.sum(axis=0)}
        return grad @ self.weight


# ---------------------------------------------------------------------------
# Конфигурации сетей
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ConvNetConfig:
    in_channels: int
    conv_channels: Tuple[int, ...]
    kernel_sizes: Tuple[int, ...]
    pool_after: Tuple[bool, ...]

    ndim = 0
    algorithm = ''

    def __post_init__(self):
        for name in ('conv_channels', 'kernel_sizes', 'pool_after'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.conv_channels:
            raise ConfigError('Сеть должна содержать хотя бы одну свёртку')
        if not len(self.conv_channels) == len(self.kernel_sizes) == len(self.pool_after):
            raise ConfigError('conv_channels, kernel_sizes и pool_after должны быть одной длины')
        if self.in_channels < 1 or any(c < 1 for c in self.conv_channels):
            raise ConfigError('Число каналов должно быть положительным')
        if any(k < 1 or k % 2 == 0 for k in self.kernel_sizes):
            raise ConfigError(f'Ядра свёрток должны быть нечётными: {self.kernel_sizes}')

    def build_layers(self) -> List[Layer]:
        layers: List[Layer] = []
        channels = self.in_channels
        for out_channels, kernel, pool in zip(self.conv_channels, self.kernel_sizes, self.pool_after):
            layers.append(Conv(self.ndim, channels, out_channels, kernel))
            layers.append(ReLU())
            if pool:
                layers.append(MaxPool(self.ndim))
            channels = out_channels
        layers.append(GlobalAveragePool())
        layers.append(Dense(channels, 1))
        return layers

    def to_dict(self) -> dict:
        return {
            'in_channels': self.in_channels,
            'conv_channels': list(self.conv_channels),
            'kernel_sizes': list(self.kernel_sizes),
            'pool_after': list(self.pool_after),
        }

    @classmethod
    def from_dict(cls, data: dict):
        return cls(int(data['in_channels']), tuple(data['conv_channels']),
                   tuple(data['kernel_sizes']), tuple(bool(p) for p in data['pool_after']))


@dataclass(frozen=True)
class NetworkConfig1D(_ConvNetConfig):
    """Conv 105→32 k7 → pool → 32→64 k5 → pool → 64→64 k3 → GAP → Dense."""
    in_channels: int = 105
    conv_channels: Tuple[int, ...] = (32, 64, 64)
    kernel_sizes: Tuple[int, ...] = (7, 5, 3)
    pool_after: Tuple[bool, ...] = (True, True, False)

    ndim = 1
    algorithm = 'CNN1D'


@dataclass(frozen=True)
class NetworkConfig3D(_ConvNetConfig):
    """Conv3D 1→8 → pool → 8→16 → GAP → Dense; тензор субъекта подаётся одним входным каналом."""
    in_channels: int = 1
    conv_channels: Tuple[int, ...] = (8, 16)
    kernel_sizes: Tuple[int, ...] = (3, 3)
    pool_after: Tuple[bool, ...] = (True, False)

    ndim = 3
    algorithm = 'CNN3D'


NETWORK_CONFIGS = {NetworkConfig1D.algorithm: NetworkConfig1D, NetworkConfig3D.algorithm: NetworkConfig3D}


# ---------------------------------------------------------------------------
# Сеть
# ---------------------------------------------------------------------------

class Network:
    def __init__(self, config: _ConvNetConfig):
        self.config = config
        self.layers = config.build_layers()

    def named_layers(self):
        counters: Dict[str, int] = {}
        for layer in self.layers:
            if not layer.params():
                continue
            kind = type(layer).__name__.lower()
            index = counters.get(kind, 0)
            counters[kind] = index + 1
            yield f'{kind}{index}', layer

    def parameters(self) -> Dict[str, np.ndarray]:
        """Имя -> массив (ссылки на веса слоёв, не копии)."""
        return {f'{name}.{key}': value
                for name, layer in self.named_layers() for key, value in layer.params().items()}

    def gradients(self) -> Dict[str, np.ndarray]:
        return {f'{name}.{key}': layer.grads[key]
                for name, layer in self.named_layers() for key in layer.params()}

    def load_parameters(self, params: Dict[str, np.ndarray]):
        own = self.parameters()
        missing = set(own) - set(params)
        if missing:
            raise DataError(f'Нет весов: {sorted(missing)}')
        for name, target in own.items():
            source = np.asarray(params[name], dtype=float)
            if source.shape != target.shape:
                raise DataError(f'{name}: форма {source.shape}, ожидалась {target.shape}')
            target[...] = source

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.parameters().items()}

    def init_parameters(self, seed: int):
        """Kaiming-uniform: U(-√(6/fan_in), √(6/fan_in)), смещения нулевые."""
        rng = np.random.default_rng(seed)
        for _, layer in self.named_layers():
            bound = np.sqrt(6.0 / layer.fan_in)
            layer.weight[...] = rng.uniform(-bound, bound, size=layer.weight.shape)
            layer.bias[...] = 0.0

    def output_shapes(self, input_shape: Sequence[int]) -> List[Tuple[int, ...]]:
        """Формы (без оси батча) после каждого слоя."""
        shape = tuple(input_shape)
        shapes = []
        for layer in self.layers:
            shape = layer.output_shape(shape)
            shapes.append(shape)
        return shapes

    def check_input(self, batch: np.ndarray):
        expected_ndim = self.config.ndim + 2
        if batch.ndim != expected_ndim:
            raise DataError(f'Вход сети должен иметь {expected_ndim} осей, получено {batch.ndim}')
        if batch.shape[1] != self.config.in_channels:
            raise DataError(f'Сеть ожидает {self.config.in_channels} входных каналов, получено {batch.shape[1]}')

    def logits(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=float)
        self.check_input(batch)
        out = batch
        for layer in self.layers:
            out = layer.forward(out)
        return out[:, 0]

    def backward_from_logits(self, grad_logits: np.ndarray):
        grad = grad_logits[:, None]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)


def probabilities(logits: np.ndarray) -> np.ndarray:
    return np.clip(expit(logits), PROB_EPS, 1.0 - PROB_EPS)


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    p = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    y = np.asarray(labels, dtype=float)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def forward(network: Network, batch: np.ndarray) -> np.ndarray:
    """Вероятности класса SZ для каждого элемента батча."""
    return probabilities(network.logits(batch))


def backward(network: Network, batch: np.ndarray, labels: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Прямой проход и градиенты средней BCE по всем параметрам."""
    labels = np.asarray(labels, dtype=float)
    logits = network.logits(batch)
    if labels.shape != logits.shape:
        raise DataError(f'Меток {labels.size}, элементов батча {logits.size}')
    probs = expit(logits)
    network.backward_from_logits((probs - labels) / labels.size)
    return bce_loss(probs, labels), network.gradients()


def sample_memory_bytes(network: Network, input_shape: Sequence[int]) -> int:
    """Оценка памяти обучения на один пример: вход и выходы слоёв, их кэши и градиенты (float64)."""
    sizes = [int(np.prod(input_shape))] + [int(np.prod(shape)) for shape in network.output_shapes(input_shape)]
    return 3 * 8 * sum(sizes)


def chunk_size(network: Network, input_shape: Sequence[int], batch_size: int, budget_bytes: int) -> int:
    """Сколько примеров батча проходит вперёд-назад за раз, не выходя за бюджет памяти."""
    return int(max(1, min(batch_size, budget_bytes // sample_memory_bytes(network, input_shape))))


def accumulated_backward(network: Network, batch: np.ndarray, labels: np.ndarray,
                         chunk: int) -> Tuple[float, Dict[str, np.ndarray]]:
    """backward по частям батча; градиенты и потеря взвешиваются долей части, как у среднего по всему батчу."""
    total = batch.shape[0]
    if chunk >= total:
        return backward(network, batch, labels)
    loss = 0.0
    grads: Dict[str, np.ndarray] = {}
    for start in range(0, total, chunk):
        part_loss, part_grads = backward(network, batch[start:start + chunk], labels[start:start + chunk])
        weight = min(chunk, total - start) / total
        loss += part_loss * weight
        for name, grad in part_grads.items():
            grads[name] = grads[name] + grad * weight if name in grads else grad * weight
    return loss, grads


# ---------------------------------------------------------------------------
# Обучение
# ---------------------------------------------------------------------------

class Adam:
    def __init__(self, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        self.t += 1
        for name, param in params.items():
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(param))
            v = self.v.setdefault(name, np.zeros_like(param))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1 ** self.t)
            v_hat = v / (1.0 - self.beta2 ** self.t)
            param -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 100
    batch_size: int = 32
    patience: int = 20
    validation_fraction: float = 0.2
    seed: int = 0
    standardize: bool = True
    memory_budget_mb: int = 1024

    def __post_init__(self):
        if self.memory_budget_mb <= 0:
            raise ConfigError(f'memory_budget_mb должен быть положительным: {self.memory_budget_mb}')
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError(f'validation_fraction вне (0, 1): {self.validation_fraction}')
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError('epochs и batch_size должны быть положительными')
        if not 1 <= self.patience <= self.epochs:
            raise ConfigError(f'patience должно лежать в [1, epochs]: {self.patience}')
        if self.learning_rate <= 0:
            raise ConfigError(f'learning_rate должен быть положительным: {self.learning_rate}')

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data: Optional[dict] = None) -> 'TrainConfig':
        merged = {**get_setting('TRAIN'), **(data or {})}
        unknown = set(merged) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f'Неизвестные параметры обучения: {sorted(unknown)}')
        return cls(**merged)


class EarlyStopping:
    """Остановка, если валидационная потеря не улучшалась patience эпох подряд."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = 0
        self.wait = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        """True, если эпоха лучшая; счётчик ожидания сбрасывается."""
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.wait = 0
            return True
        self.wait += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.wait >= self.patience


@dataclass
class TrainHistory:
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    val_auc: List[float] = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: str = 'max_epochs'

    @property
    def n_epochs(self) -> int:
        return len(self.val_loss)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'epoch': np.arange(1, self.n_epochs + 1),
            'train_loss': self.train_loss,
            'val_loss': self.val_loss,
            'val_auc': self.val_auc,
        })


@dataclass(eq=False)
class TrainedNetwork:
    network: Network
    input_mean: float = 0.0
    input_std: float = 1.0

    @property
    def config(self) -> _ConvNetConfig:
        return self.network.config

    def scale(self, batch: np.ndarray) -> np.ndarray:
        return (np.asarray(batch, dtype=float) - self.input_mean) / self.input_std

    def predict_proba(self, X: np.ndarray, batch_size: Optional[int] = None) -> np.ndarray:
        X = self.scale(X)
        if X.shape[0] == 0:
            return np.empty(0)
        if batch_size is None:
            train_cfg = get_setting('TRAIN')
            batch_size = chunk_size(self.network, X.shape[1:], train_cfg['batch_size'],
                                    train_cfg['memory_budget_mb'] * 2 ** 20)
        return np.concatenate([forward(self.network, X[i:i + batch_size])
                               for i in range(0, X.shape[0], batch_size)])


def _evaluate(network: Network, X: np.ndarray, y: np.ndarray, batch_size: int) -> Tuple[float, np.ndarray]:
    probs = np.concatenate([forward(network, X[i:i + batch_size]) for i in range(0, X.shape[0], batch_size)])
    return bce_loss(probs, y), probs


def train(config: _ConvNetConfig, X: np.ndarray, y: np.ndarray,
          cfg: TrainConfig) -> Tuple[TrainedNetwork, TrainHistory]:
    """
    Стратифицированное разбиение train/validation, Adam по перемешанным мини-батчам,
    ранняя остановка по валидационной BCE и восстановление весов лучшей эпохи.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.shape[0] != y.size:
        raise DataError(f'Примеров {X.shape[0]}, меток {y.size}')
    counts = np.bincount(y, minlength=2)
    if counts.min() < 2:
        raise DataError(f'Для обучения нужно минимум 2 субъекта каждого класса, есть {counts.tolist()}')
    train_idx, val_idx = stratified_split(y, cfg.validation_fraction, cfg.seed)

    if cfg.standardize:
        mean = float(X[train_idx].mean())
        std = float(X[train_idx].std())
        std = std if std > 0 else 1.0
    else:
        mean, std = 0.0, 1.0
    Xs = (X - mean) / std

    network = Network(config)
    network.check_input(Xs[:1])
    network.init_parameters(cfg.seed)
    optimizer = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    stopper = EarlyStopping(cfg.patience)
    history = TrainHistory()
    shuffle_rng = np.random.default_rng([cfg.seed, 1])
    best_params = network.snapshot()
    chunk = chunk_size(network, Xs.shape[1:], cfg.batch_size, cfg.memory_budget_mb * 2 ** 20)
    if chunk < cfg.batch_size:
        logger.info('%s: батч %d считается частями по %d (бюджет памяти %d МБ)',
                    config.algorithm, cfg.batch_size, chunk, cfg.memory_budget_mb)

    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(train_idx)
        weighted_loss = 0.0
        for start in range(0, order.size, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            loss, grads = accumulated_backward(network, Xs[batch], y[batch], chunk)
            optimizer.step(network.parameters(), grads)
            weighted_loss += loss * batch.size
        val_loss, val_probs = _evaluate(network, Xs[val_idx], y[val_idx], chunk)
        history.train_loss.append(weighted_loss / order.size)
        history.val_loss.append(val_loss)
        history.val_auc.append(roc_auc(val_probs, y[val_idx]))
        if stopper.update(epoch, val_loss):
            best_params = network.snapshot()
        logger.debug('Эпоха %d: train %.5f, val %.5f, AUC %.4f',
                     epoch, history.train_loss[-1], val_loss, history.val_auc[-1])
        if stopper.should_stop:
            history.stop_reason = 'early_stop'
            break

    network.load_parameters(best_params)
    history.best_epoch = stopper.best_epoch
    logger.info('%s: %d эпох (%s), лучшая %d, val loss %.5f, val AUC %.4f',
                config.algorithm, history.n_epochs, history.stop_reason, history.best_epoch,
                stopper.best_loss, history.val_auc[history.best_epoch - 1])
    return TrainedNetwork(network, mean, std), history


def prepare_tensor_batch(tensors: Sequence[np.ndarray], time_pool: bool = False) -> np.ndarray:
    """Стек тензоров F × T × 105 в (B, 1, F, T, 105); при time_pool усреднение по парам отсчётов."""
    batch = np.stack([np.asarray(t, dtype=float) for t in tensors])
    if time_pool:
        pairs = batch.shape[2] // 2
        batch = batch[:, :, :2 * pairs].reshape(batch.shape[0], batch.shape[1], pairs, 2, batch.shape[3]).mean(axis=3)
    return batch[:, np.newaxis]


def to_artifact(model: TrainedNetwork, train_cfg: TrainConfig, feature_descriptor: dict,
                fingerprint: str = '') -> ModelArtifact:
    params = model.network.snapshot()
    params['input_scale'] = np.array([model.input_mean, model.input_std])
    return ModelArtifact(
        algorithm=model.config.algorithm,
        hyperparameters={'network': model.config.to_dict(), 'train': train_cfg.to_dict()},
        feature_descriptor=feature_descriptor,
        parameters=params,
        fingerprint=fingerprint,
    )


def from_artifact(artifact: ModelArtifact) -> TrainedNetwork:
    if artifact.algorithm not in NETWORK_CONFIGS:
        raise DataError(f'Артефакт {artifact.algorithm!r} не является свёрточной сетью')
    config = NETWORK_CONFIGS[artifact.algorithm].from_dict(artifact.hyperparameters['network'])
    network = Network(config)
    params = dict(artifact.parameters)
    mean, std = np.asarray(params.pop('input_scale'), dtype=float)
    network.load_parameters(params)
    return TrainedNetwork(network, float(mean), float(std))
