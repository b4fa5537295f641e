# differentiation/timefreq.py
"""
Частотно-временные представления ICN: спектрограммы (STFT с окном Тьюки)
и скалограммы (CWT с вейвлетом Морле), а также их 3D-стек по 105 каналам.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal as sps

from .conf import get_setting
from .exceptions import ConfigError, DataError
from .records import IcnMatrix

logger = logging.getLogger(__name__)

# Носитель вейвлета обрезается при |u| > 4
MORLET_SUPPORT = 4.0


class TensorKind(str, Enum):
    SPECTROGRAM = 'spectrogram'
    SCALOGRAM = 'scalogram'


@dataclass(frozen=True)
class StftConfig:
    window_len: int = 22
    tukey_alpha: float = 0.25
    hop: int = 21
    one_sided: bool = True

    def __post_init__(self):
        if self.window_len < 1:
            raise ConfigError(f'Длина окна должна быть >= 1: {self.window_len}')
        if not 1 <= self.hop <= self.window_len:
            raise ConfigError(f'Шаг окна должен лежать в [1, {self.window_len}]: {self.hop}')
        if not 0.0 <= self.tukey_alpha <= 1.0:
            raise ConfigError(f'Параметр alpha окна Тьюки вне [0, 1]: {self.tukey_alpha}')
        if not self.one_sided:
            raise ConfigError('Поддерживается только односторонний спектр')

    @property
    def n_bins(self) -> int:
        return self.window_len // 2 + 1

    def n_frames(self, length: int) -> int:
        return (length - self.window_len) // self.hop + 1

    def to_dict(self) -> dict:
        return {'window_len': self.window_len, 'tukey_alpha': self.tukey_alpha, 'hop': self.hop}

    @classmethod
    def from_dict(cls, data: Optional[dict] = None) -> 'StftConfig':
        merged = {**get_setting('STFT'), **(data or {})}
        return cls(int(merged['window_len']), float(merged['tukey_alpha']), int(merged['hop']))


@dataclass(frozen=True)
class CwtConfig:
    scales: Tuple[float, ...] = tuple(float(s) for s in range(1, 50))
    omega0: float = 5.0

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        if not scales:
            raise ConfigError('Список масштабов пуст')
        if scales[0] <= 0 or any(b <= a for a, b in zip(scales, scales[1:])):
            raise ConfigError('Масштабы должны быть положительными и строго возрастать')
        object.__setattr__(self, 'scales', scales)

    def to_dict(self) -> dict:
        return {'scales': list(self.scales), 'omega0': self.omega0}

    @classmethod
    def from_dict(cls, data: Optional[dict] = None) -> 'CwtConfig':
        merged = {**get_setting('CWT'), **(data or {})}
        return cls(tuple(merged['scales']), float(merged['omega0']))


@dataclass(frozen=True, eq=False)
class SubjectTensor:
    """Оси: (частоты или масштабы) × время × ICN."""
    data: np.ndarray
    kind: TensorKind
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim != 3:
            raise DataError(f'Тензор субъекта должен быть трёхмерным, получено ndim={data.ndim}')
        if not np.all(np.isfinite(data)) or np.any(data < 0):
            raise DataError('Тензор содержит отрицательные или нечисловые значения')
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)
        object.__setattr__(self, 'kind', TensorKind(self.kind))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.data.shape


def tukey_window(length: int, alpha: float) -> np.ndarray:
    """Симметричное окно Тьюки: alpha=0 даёт прямоугольное, alpha=1 окно Ханна."""
    if length < 1:
        raise ConfigError(f'Длина окна должна быть >= 1: {length}')
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f'Параметр alpha окна Тьюки вне [0, 1]: {alpha}')
    return sps.windows.tukey(length, alpha, sym=True)


def stft_frequencies(cfg: StftConfig, fs: float) -> np.ndarray:
    return np.fft.rfftfreq(cfg.window_len, d=1.0 / fs)


def stft_power_spectrogram(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """|DFT(окно ⊙ кадр)|², матрица F × N без расширения границ."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError('Ожидается одномерный сигнал')
    if x.size < cfg.window_len:
        raise DataError(f'Сигнал короче окна: {x.size} < {cfg.window_len}')
    frames = sliding_window_view(x, cfg.window_len)[::cfg.hop]
    window = tukey_window(cfg.window_len, cfg.tukey_alpha)
    spectrum = np.fft.rfft(frames * window, axis=-1)
    return (np.abs(spectrum) ** 2).T


def morlet_kernel(scale: float, omega0: float) -> np.ndarray:
    """conj(ψ(m/s)) / √s для целых m, |m/s| <= 4."""
    half = int(np.floor(MORLET_SUPPORT * scale))
    u = np.arange(-half, half + 1) / scale
    psi = np.pi ** -0.25 * np.exp(1j * omega0 * u) * np.exp(-0.5 * u ** 2)
    return np.conj(psi) / np.sqrt(scale)


def scale_to_frequency(scales: Sequence[float], omega0: float, fs: float) -> np.ndarray:
    """Центральная частота вейвлета на масштабе s (в отсчётах), Гц."""
    return omega0 * fs / (2.0 * np.pi * np.asarray(scales, dtype=float))


def _cwt_rows(rows: np.ndarray, cfg: CwtConfig) -> np.ndarray:
    """Скалограммы для каждой строки: результат rows × S × L."""
    out = np.empty((rows.shape[0], len(cfg.scales), rows.shape[1]))
    for i, scale in enumerate(cfg.scales):
        # корреляция с ядром = свёртка с развёрнутым ядром, края дополнены нулями
        kernel = morlet_kernel(scale, cfg.omega0)[::-1]
        coeffs = sps.fftconvolve(rows, kernel[np.newaxis, :], mode='same', axes=-1)
        out[:, i, :] = np.abs(coeffs)
    return out


def cwt_scalogram(x: np.ndarray, cfg: CwtConfig, fs: float) -> np.ndarray:
    """|Σ x[t]·ψ*((t−τ)/s)/√s|, матрица S × L."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DataError('Ожидается непустой одномерный сигнал')
    if not fs > 0:
        raise ConfigError(f'Частота дискретизации должна быть положительной: {fs}')
    return _cwt_rows(x[np.newaxis, :], cfg)[0]


def stack_subject_tensor(icn: IcnMatrix, kind, stft_cfg: StftConfig = None,
                         cwt_cfg: CwtConfig = None) -> SubjectTensor:
    """Преобразование каждого канала и стек по оси 2 в исходном порядке каналов."""
    kind = TensorKind(kind)
    if kind is TensorKind.SPECTROGRAM:
        cfg = stft_cfg or StftConfig.from_dict()
        slices = [stft_power_spectrogram(icn.data[c], cfg) for c in range(icn.n_channels)]
        data = np.stack(slices, axis=-1)
        provenance = {'kind': kind.value, 'fs': icn.fs, **cfg.to_dict()}
    else:
        cfg = cwt_cfg or CwtConfig.from_dict()
        data = np.moveaxis(_cwt_rows(np.asarray(icn.data, dtype=float), cfg), 0, -1)
        provenance = {'kind': kind.value, 'fs': icn.fs, **cfg.to_dict()}
    logger.debug('Тензор %s: %s', kind.value, data.shape)
    return SubjectTensor(data, kind, provenance)
