# differentiation/dataio.py
"""
Ввод-вывод конвейера: манифест когорты и CSV-файлы ICN, дополнение нулями,
генерация синтетической когорты, сохранение моделей и отчётов.
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .conf import get_setting
from .dsp import BandSpec, apply_zero_phase, design_butterworth_bandpass
from .exceptions import ArtifactFormatError, ConfigError, DataError
from .records import N_CHANNELS, N_FNC_FEATURES, Dataset, IcnMatrix, Label, SubjectRecord

logger = logging.getLogger(__name__)

__all__ = [
    'Dataset', 'IcnMatrix', 'Label', 'SubjectRecord', 'SynthConfig', 'ModelArtifact',
    'read_icn_csv', 'read_fnc_csv', 'load_dataset', 'pad_icn', 'generate_synthetic',
    'write_dataset', 'save_model', 'load_model', 'save_report',
]

MANIFEST_COLUMNS = ('subject_id', 'label', 'icn_path')


def _parse_cell(cell) -> float:
    try:
        return float(cell)
    except (TypeError, ValueError):
        return np.nan


def _read_numeric_csv(path: Path) -> np.ndarray:
    """CSV без заголовка -> матрица float; на нечисловой ячейке ошибка с номером строки и столбца."""
    if not path.is_file():
        raise DataError(f'Файл не найден: {path}')
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError(f'{path}: пустой файл') from None
    except pd.errors.ParserError as exc:
        raise DataError(f'{path}: неверная структура CSV ({exc})') from None
    # float() округляет корректно, поэтому значения, записанные с %.17g, читаются без потерь
    cells = frame.to_numpy(dtype=object)
    values = np.array([[_parse_cell(cell) for cell in row] for row in cells], dtype=float).reshape(cells.shape)
    bad_rows, bad_cols = np.nonzero(~np.isfinite(values))
    if bad_rows.size:
        row, col = int(bad_rows[0]), int(bad_cols[0])
        raw = frame.iat[row, col]
        raise DataError(f'{path}, строка {row + 1}, столбец {col + 1}: нечисловое или бесконечное значение {raw!r}')
    return values


def read_icn_csv(path, expected_channels: Optional[int] = N_CHANNELS) -> np.ndarray:
    """Файл ICN: строки соответствуют каналам, столбцы отсчётам."""
    path = Path(path)
    values = _read_numeric_csv(path)
    if expected_channels is not None and values.shape[0] != expected_channels:
        raise DataError(f'{path}: ожидалось {expected_channels} строк (ICN), найдено {values.shape[0]}')
    return values


def read_fnc_csv(path) -> np.ndarray:
    """Файл FNC: одна строка из 5460 значений в порядке нижнего треугольника."""
    path = Path(path)
    values = _read_numeric_csv(path).ravel()
    if values.size != N_FNC_FEATURES:
        raise DataError(f'{path}: ожидалось {N_FNC_FEATURES} значений FNC, найдено {values.size}')
    if np.any(np.abs(values) > 1.0):
        raise DataError(f'{path}: значения FNC должны лежать в [-1, 1]')
    return values


def pad_icn(icn: IcnMatrix, target_len: int) -> IcnMatrix:
    """Дополнение нулями в конце до target_len; original_length сохраняется."""
    if target_len < icn.length:
        raise ConfigError(f'Целевая длина {target_len} меньше текущей {icn.length}')
    if target_len == icn.length:
        return icn
    padded = np.pad(icn.data, ((0, 0), (0, target_len - icn.length)))
    return IcnMatrix(padded, icn.fs, icn.original_length)


def load_dataset(manifest_path, fs: Optional[float] = None,
                 expected_channels: Optional[int] = N_CHANNELS) -> Dataset:
    """
    Манифест: subject_id,label,icn_path[,fnc_path]. Пути относительно каталога манифеста.
    Все субъекты дополняются до максимальной длины когорты, порядок строк сохраняется.
    """
    manifest_path = Path(manifest_path)
    fs = float(get_setting('SAMPLING_RATE') if fs is None else fs)
    if not fs > 0:
        raise ConfigError(f'Частота дискретизации должна быть положительной: {fs}')
    if not manifest_path.is_file():
        raise DataError(f'Манифест не найден: {manifest_path}')
    try:
        manifest = pd.read_csv(manifest_path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError(f'{manifest_path}: пустой манифест') from None
    missing = [c for c in MANIFEST_COLUMNS if c not in manifest.columns]
    if missing:
        raise DataError(f'{manifest_path}: нет столбцов {", ".join(missing)}')
    if manifest.empty:
        raise DataError(f'{manifest_path}: в манифесте нет субъектов')

    base = manifest_path.parent
    seen = {}
    raw = []
    for index, row in enumerate(manifest.itertuples(index=False)):
        line = index + 2  # строка 1: заголовок
        context = f'{manifest_path}, строка {line}'
        subject_id = row.subject_id.strip()
        if not subject_id:
            raise DataError(f'{context}: пустой subject_id')
        if subject_id in seen:
            raise DataError(f'{context}: subject_id {subject_id!r} уже встречался в строке {seen[subject_id]}')
        seen[subject_id] = line
        try:
            label = Label.parse(row.label)
        except DataError as exc:
            raise DataError(f'{context}: {exc.message}') from None
        data = read_icn_csv(base / row.icn_path.strip(), expected_channels)
        fnc_path = getattr(row, 'fnc_path', '').strip()
        fnc = read_fnc_csv(base / fnc_path) if fnc_path else None
        raw.append((subject_id, label, data, fnc))

    max_length = max(data.shape[1] for _, _, data, _ in raw)
    subjects = []
    for subject_id, label, data, fnc in raw:
        icn = pad_icn(IcnMatrix(data, fs), max_length)
        subjects.append(SubjectRecord(subject_id, icn, label, fnc))
    n_padded = sum(1 for s in subjects if s.icn.original_length < max_length)
    logger.info('Загружено %d субъектов из %s, max_length=%d, дополнено %d',
                len(subjects), manifest_path, max_length, n_padded)
    return Dataset(tuple(subjects), fs, max_length)


@dataclass(frozen=True)
class SynthConfig:
    """Параметры синтетической когорты; значения по умолчанию берутся из SYNTH в настройках."""
    n_subjects: int = 160
    length: int = 234
    fs: float = 2.0
    class_balance: float = 0.5
    snr_db: float = 6.0
    seed: int = 0
    sz_tone_hz: float = 0.50
    bp_tone_hz: float = 0.15
    sz_coupled_channels: Tuple[int, ...] = tuple(range(0, 8))
    bp_coupled_channels: Tuple[int, ...] = tuple(range(8, 16))
    latent_gain: float = 1.0
    noise_band: Tuple[float, float] = (0.01, 0.95)
    n_channels: int = N_CHANNELS

    def __post_init__(self):
        object.__setattr__(self, 'sz_coupled_channels', tuple(int(c) for c in self.sz_coupled_channels))
        object.__setattr__(self, 'bp_coupled_channels', tuple(int(c) for c in self.bp_coupled_channels))
        object.__setattr__(self, 'noise_band', tuple(float(f) for f in self.noise_band))
        if self.n_subjects < 2:
            raise ConfigError(f'Нужно минимум 2 субъекта, задано {self.n_subjects}')
        if not 0.0 < self.class_balance < 1.0:
            raise ConfigError(f'class_balance вне (0, 1): {self.class_balance}')
        if self.length < 2:
            raise ConfigError(f'Длина ряда должна быть >= 2: {self.length}')
        if not self.fs > 0:
            raise ConfigError(f'Частота дискретизации должна быть положительной: {self.fs}')
        nyquist = self.fs / 2.0
        noise_limit = nyquist * (1.0 - get_setting('NYQUIST_MARGIN'))
        if len(self.noise_band) != 2 or not 0.0 < self.noise_band[0] < self.noise_band[1] <= noise_limit:
            raise ConfigError(
                f'noise_band={list(self.noise_band)} Гц должна удовлетворять 0 < f_lo < f_hi <= {noise_limit:.4g} '
                f'(fs={self.fs}); задайте noise_band явно'
            )
        for name in ('sz_tone_hz', 'bp_tone_hz'):
            tone = getattr(self, name)
            if not 0.0 < tone < nyquist:
                raise ConfigError(f'{name}={tone} Гц должна лежать в (0, {nyquist})')
        for name in ('sz_coupled_channels', 'bp_coupled_channels'):
            channels = getattr(self, name)
            if not channels:
                raise ConfigError(f'{name}: пустой набор каналов')
            if any(not 0 <= c < self.n_channels for c in channels):
                raise ConfigError(f'{name}: каналы должны лежать в [0, {self.n_channels})')

    @property
    def tone_amplitude(self) -> float:
        """Амплитуда синусоиды при единичной мощности шума: A²/2 = 10^(snr/10)."""
        return float(np.sqrt(2.0 * 10.0 ** (self.snr_db / 10.0)))

    def to_dict(self) -> dict:
        return {
            'n_subjects': self.n_subjects, 'length': self.length, 'fs': self.fs,
            'class_balance': self.class_balance, 'snr_db': self.snr_db, 'seed': self.seed,
            'sz_tone_hz': self.sz_tone_hz, 'bp_tone_hz': self.bp_tone_hz,
            'sz_coupled_channels': list(self.sz_coupled_channels),
            'bp_coupled_channels': list(self.bp_coupled_channels),
            'latent_gain': self.latent_gain, 'noise_band': list(self.noise_band),
            'n_channels': self.n_channels,
        }

    @classmethod
    def from_dict(cls, data: Optional[dict] = None) -> 'SynthConfig':
        merged = {**get_setting('SYNTH'), 'fs': get_setting('SAMPLING_RATE'), **(data or {})}
        known = set(cls.__dataclass_fields__)
        unknown = set(merged) - known
        if unknown:
            raise ConfigError(f'Неизвестные параметры синтетики: {sorted(unknown)}')
        return cls(**merged)


def _unit_band_noise(rng: np.random.Generator, n_rows: int, cfg: SynthConfig, noise_filter) -> np.ndarray:
    white = rng.standard_normal((n_rows, cfg.length))
    banded = apply_zero_phase(noise_filter, white)
    return banded / banded.std(axis=1, keepdims=True)


def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """
    Каждый субъект: полосовой гауссов шум в каждом канале, синусоида своего класса
    со случайной фазой на связанных каналах класса и общий латентный источник
    на тех же каналах. Все случайные величины берутся из одного default_rng(seed)
    в фиксированном порядке: метки, затем по субъектам шум, латент, фаза.
    """
    rng = np.random.default_rng(cfg.seed)
    noise_filter = design_butterworth_bandpass(BandSpec(*cfg.noise_band, order=get_setting('FILTER_ORDER')), cfg.fs)

    n_sz = int(np.floor(cfg.n_subjects * cfg.class_balance + 0.5))
    n_sz = min(max(n_sz, 1), cfg.n_subjects - 1)
    labels = np.array([Label.SZ] * n_sz + [Label.BP] * (cfg.n_subjects - n_sz))
    labels = labels[rng.permutation(cfg.n_subjects)]

    t = np.arange(cfg.length) / cfg.fs
    amplitude = cfg.tone_amplitude
    subjects = []
    for index, label in enumerate(labels):
        label = Label(int(label))
        data = _unit_band_noise(rng, cfg.n_channels, cfg, noise_filter)
        latent = _unit_band_noise(rng, 1, cfg, noise_filter)[0] * cfg.latent_gain
        phase = rng.uniform(0.0, 2.0 * np.pi)
        if label is Label.SZ:
            tone_hz, channels = cfg.sz_tone_hz, list(cfg.sz_coupled_channels)
        else:
            tone_hz, channels = cfg.bp_tone_hz, list(cfg.bp_coupled_channels)
        data[channels] += amplitude * np.sin(2.0 * np.pi * tone_hz * t + phase) + latent
        subjects.append(SubjectRecord(f'sub-{index:04d}', IcnMatrix(data, cfg.fs), label))

    logger.info('Синтетическая когорта: %d субъектов (SZ=%d, BP=%d), seed=%d',
                cfg.n_subjects, n_sz, cfg.n_subjects - n_sz, cfg.seed)
    return Dataset(tuple(subjects), cfg.fs, cfg.length)


def _write_matrix(path: Path, values: np.ndarray):
    pd.DataFrame(np.atleast_2d(values)).to_csv(
        path, header=False, index=False, float_format='%.17g', lineterminator='\n'
    )


def write_dataset(dataset: Dataset, directory, manifest_name: str = 'manifest.csv') -> Path:
    """Манифест и по CSV на субъекта (без нулевого хвоста) в формате load_dataset."""
    directory = Path(directory)
    (directory / 'icn').mkdir(parents=True, exist_ok=True)
    with_fnc = any(s.fnc is not None for s in dataset)
    if with_fnc:
        (directory / 'fnc').mkdir(parents=True, exist_ok=True)
    rows = []
    for subject in dataset:
        icn_rel = f'icn/{subject.subject_id}.csv'
        _write_matrix(directory / icn_rel, subject.icn.signal)
        row = {
            'subject_id': subject.subject_id,
            'label': subject.label.name if subject.label is not None else '',
            'icn_path': icn_rel,
        }
        if with_fnc:
            fnc_rel = f'fnc/{subject.subject_id}.csv' if subject.fnc is not None else ''
            if fnc_rel:
                _write_matrix(directory / fnc_rel, subject.fnc)
            row['fnc_path'] = fnc_rel
        rows.append(row)
    manifest_path = directory / manifest_name
    pd.DataFrame(rows).to_csv(manifest_path, index=False, lineterminator='\n')
    logger.info('Записано %d субъектов в %s', len(rows), directory)
    return manifest_path


# ---------------------------------------------------------------------------
# Артефакт модели
# ---------------------------------------------------------------------------

def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f'Тип {type(value).__name__} не сериализуется в JSON')


def _canonical(document: dict) -> str:
    return json.dumps(document, sort_keys=True, separators=(',', ':'), allow_nan=False, default=_json_default)


def _checksum(document: dict) -> str:
    return hashlib.sha256(_canonical(document).encode('utf-8')).hexdigest()


@dataclass(eq=False)
class ModelArtifact:
    algorithm: str
    hyperparameters: dict
    feature_descriptor: dict
    parameters: Dict[str, np.ndarray] = field(default_factory=dict)
    fingerprint: str = ''
    format_version: int = field(default_factory=lambda: get_setting('ARTIFACT_FORMAT_VERSION'))

    def to_document(self) -> dict:
        params = {}
        for name, array in self.parameters.items():
            array = np.asarray(array)
            dtype = 'int64' if np.issubdtype(array.dtype, np.integer) else 'float64'
            params[name] = {'shape': list(array.shape), 'dtype': dtype, 'data': array.ravel().tolist()}
        document = {
            'format_version': self.format_version,
            'algorithm': self.algorithm,
            'hyperparameters': self.hyperparameters,
            'feature_descriptor': self.feature_descriptor,
            'fingerprint': self.fingerprint,
            'parameters': params,
        }
        # приведение к JSON-типам, чтобы контрольная сумма считалась по тому же, что будет прочитано
        return json.loads(_canonical(document))


def save_model(model: ModelArtifact, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = model.to_document()
    document['checksum'] = _checksum(document)
    path.write_text(json.dumps(document, sort_keys=True, indent=1, allow_nan=False) + '\n', encoding='utf-8')
    logger.info('Модель %s сохранена: %s', model.algorithm, path)
    return path


def load_model(path) -> ModelArtifact:
    path = Path(path)
    if not path.is_file():
        raise DataError(f'Файл модели не найден: {path}')
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ArtifactFormatError(f'{path}: документ модели не разбирается ({exc})') from None
    if not isinstance(document, dict):
        raise ArtifactFormatError(f'{path}: ожидался JSON-объект')

    expected_version = get_setting('ARTIFACT_FORMAT_VERSION')
    version = document.get('format_version')
    if version != expected_version:
        raise ArtifactFormatError(
            f'{path}: версия формата {version!r} не поддерживается (ожидается {expected_version})'
        )
    required = {'algorithm', 'hyperparameters', 'feature_descriptor', 'fingerprint', 'parameters', 'checksum'}
    missing = required - set(document)
    if missing:
        raise ArtifactFormatError(f'{path}: нет полей {sorted(missing)}')
    stored = document.pop('checksum')
    if stored != _checksum(document):
        raise ArtifactFormatError(f'{path}: контрольная сумма не совпадает, файл повреждён')

    parameters = {}
    try:
        for name, spec in document['parameters'].items():
            dtype = np.int64 if spec['dtype'] == 'int64' else np.float64
            parameters[name] = np.asarray(spec['data'], dtype=dtype).reshape(spec['shape'])
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ArtifactFormatError(f'{path}: неверный массив параметров ({exc})') from None

    return ModelArtifact(
        algorithm=document['algorithm'],
        hyperparameters=document['hyperparameters'],
        feature_descriptor=document['feature_descriptor'],
        parameters=parameters,
        fingerprint=document['fingerprint'],
        format_version=version,
    )


def save_report(rows: Sequence[dict], directory, stem: str = 'report') -> List[Path]:
    """Строки отчёта в CSV и JSON-зеркало."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows))
    csv_path = directory / f'{stem}.csv'
    json_path = directory / f'{stem}.json'
    frame.to_csv(csv_path, index=False, float_format='%.17g', lineterminator='\n')
    json_path.write_text(json.dumps(list(rows), indent=2, ensure_ascii=False, default=_json_default) + '\n',
                         encoding='utf-8')
    return [csv_path, json_path]
