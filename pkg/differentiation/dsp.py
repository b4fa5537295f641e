# differentiation/dsp.py
"""
Банк полосовых фильтров Баттерворта.

Фильтр хранится каскадом секций второго порядка (SOS) и применяется
вперёд-назад, поэтому итоговая фазовая характеристика нулевая, а затухание
в полосе задерживания возводится в квадрат.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from scipy import signal as sps

from .conf import get_setting
from .exceptions import ConfigError, DataError, NumericError
from .records import IcnMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BandSpec:
    f_lo: float
    f_hi: float
    order: int = 6

    def __post_init__(self):
        if not 0 < self.f_lo < self.f_hi:
            raise ConfigError(f'Неверные границы полосы: 0 < {self.f_lo} < {self.f_hi} не выполняется')
        if self.order < 2 or self.order % 2:
            raise ConfigError(f'Порядок фильтра должен быть чётным и >= 2, получено {self.order}')

    def to_dict(self) -> dict:
        return {'f_lo': self.f_lo, 'f_hi': self.f_hi, 'order': self.order}

    @classmethod
    def from_dict(cls, data: dict) -> 'BandSpec':
        return cls(float(data['f_lo']), float(data['f_hi']), int(data.get('order', 6)))


def default_bands(order: int = None) -> List[BandSpec]:
    """Полосы low / mid / high из настроек."""
    order = order or get_setting('FILTER_ORDER')
    return [BandSpec(lo, hi, order) for lo, hi in get_setting('BANDS').values()]


@dataclass(frozen=True, eq=False)
class IirFilter:
    sos: np.ndarray
    spec: BandSpec
    fs: float
    poles: np.ndarray = field(repr=False, default=None)

    @property
    def n_sections(self) -> int:
        return self.sos.shape[0]

    def frequency_response(self, freqs_hz: Sequence[float]) -> np.ndarray:
        """Комплексная H(e^jw) одного прохода каскада на заданных частотах."""
        _, response = sps.sosfreqz(self.sos, worN=np.asarray(freqs_hz, dtype=float), fs=self.fs)
        return response

    def magnitude(self, freqs_hz: Sequence[float]) -> np.ndarray:
        return np.abs(self.frequency_response(freqs_hz))


def _check_band(spec: BandSpec, fs: float):
    nyquist = fs / 2.0
    if spec.f_hi >= nyquist:
        raise ConfigError(
            f'Верхняя граница {spec.f_hi} Гц не ниже частоты Найквиста {nyquist} Гц (fs={fs})'
        )
    margin = get_setting('NYQUIST_MARGIN')
    if nyquist - spec.f_hi < margin * nyquist:
        raise NumericError(
            f'Верхняя граница {spec.f_hi} Гц слишком близка к Найквисту: запас '
            f'{nyquist - spec.f_hi:.4g} Гц меньше {margin * nyquist:.4g} Гц'
        )


def design_butterworth_bandpass(spec: BandSpec, fs: float) -> IirFilter:
    """
    Аналоговый прототип Баттерворта -> полосовое преобразование ->
    билинейное преобразование с предыскажением обеих границ.
    Прототип порядка spec.order даёт spec.order секций второго порядка.
    """
    if not fs > 0:
        raise ConfigError(f'Частота дискретизации должна быть положительной: {fs}')
    _check_band(spec, fs)
    sos = sps.butter(spec.order, [spec.f_lo, spec.f_hi], btype='bandpass', fs=fs, output='sos')
    _, poles, _ = sps.sos2zpk(sos)
    if np.any(np.abs(poles) >= 1.0):
        raise NumericError(
            f'Неустойчивый фильтр {spec.f_lo}-{spec.f_hi} Гц: max|p| = {np.abs(poles).max():.6f}'
        )
    logger.debug('Фильтр %.3f-%.3f Гц, порядок %d: %d секций', spec.f_lo, spec.f_hi, spec.order, len(sos))
    return IirFilter(sos=sos, spec=spec, fs=float(fs), poles=poles)


def edge_padding(filt: IirFilter) -> int:
    """Длина нечётного отражения на каждом краю: 3 × порядок."""
    return 3 * filt.spec.order


def apply_zero_phase(filt: IirFilter, x: np.ndarray) -> np.ndarray:
    """Прямой проход, обращение времени, второй проход, обращение (по последней оси)."""
    x = np.asarray(x, dtype=float)
    padlen = edge_padding(filt)
    if x.shape[-1] <= padlen:
        raise DataError(
            f'Сигнал слишком короткий для фильтрации: {x.shape[-1]} отсчётов, нужно больше {padlen}'
        )
    return sps.sosfiltfilt(filt.sos, x, axis=-1, padtype='odd', padlen=padlen)


def filter_bank(icn: IcnMatrix, bands: Sequence[BandSpec]) -> List[IcnMatrix]:
    """По одной ICN-матрице на полосу; каждый канал фильтруется независимо."""
    filters = [design_butterworth_bandpass(band, icn.fs) for band in bands]
    outputs = []
    for filt in filters:
        filtered = np.empty_like(icn.data)
        for channel in range(icn.n_channels):
            filtered[channel] = apply_zero_phase(filt, icn.data[channel])
        # дополненный хвост остаётся нулевым, иначе нарушится инвариант IcnMatrix
        filtered[:, icn.original_length:] = 0.0
        outputs.append(IcnMatrix(filtered, icn.fs, icn.original_length))
    return outputs
