# differentiation/experiments.py
"""
Оркестрация экспериментов: набор признаков × модель -> обучение -> оценка на holdout.

Допустимые пары признаков и моделей: наборы ICN идут
в 1D CNN, спектрограммы и скалограммы в 3D CNN, наборы FNC в классические модели.
"""
import hashlib
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import classical, neural
from .conf import get_setting
from .dataio import (
    Dataset, ModelArtifact, SynthConfig, generate_synthetic, load_dataset, load_model,
    pad_icn, save_model, save_report,
)
from .dsp import BandSpec, filter_bank
from .evaluation import roc_auc, stratified_split
from .exceptions import ConfigError, DataError, FeatureMismatchError, PipelineError
from .fnc import (
    FeatureTable, chi2_scores, compute_fnc, fnc_pair_names, load_fnc_table, minmax_apply, minmax_normalize_fit,
    select_top_k,
)
from .records import SubjectRecord
from .timefreq import (
    CwtConfig, StftConfig, TensorKind, scale_to_frequency, stack_subject_tensor, stft_frequencies,
)

logger = logging.getLogger(__name__)

ICN_SETS = ('raw_icn', 'icn_low', 'icn_mid', 'icn_high')
TENSOR_SETS = ('spectrogram', 'scalogram')
FNC_SETS = ('fnc_all', 'fnc_top20')
FEATURE_SETS = ICN_SETS + TENSOR_SETS + FNC_SETS

CNN_MODELS = ('CNN1D', 'CNN3D')
MODELS = CNN_MODELS + classical.ALGORITHMS


def compatible_models(feature_set: str) -> Tuple[str, ...]:
    if feature_set in ICN_SETS:
        return ('CNN1D',)
    if feature_set in TENSOR_SETS:
        return ('CNN3D',)
    if feature_set in FNC_SETS:
        return classical.ALGORITHMS
    raise ConfigError(f'Неизвестный набор признаков {feature_set!r}, доступны {", ".join(FEATURE_SETS)}')


def experiment_grid() -> List[Tuple[str, str]]:
    """Все допустимые пары (набор признаков, модель): сначала ICN, затем тензоры, затем FNC."""
    return [(fs, model) for fs in FEATURE_SETS for model in compatible_models(fs)]


def _default_bands() -> Dict[str, List[float]]:
    return {name: list(edges) for name, edges in get_setting('BANDS').items()}


@dataclass(frozen=True)
class ExperimentConfig:
    feature_set: str
    model: str
    seed: int = 0
    output_dir: str = 'runs'
    manifest: Optional[str] = None
    synth: Optional[dict] = None
    fs: Optional[float] = None
    fnc_table: Optional[str] = None
    bands: Dict[str, List[float]] = field(default_factory=_default_bands)
    filter_order: int = field(default_factory=lambda: get_setting('FILTER_ORDER'))
    stft: dict = field(default_factory=lambda: get_setting('STFT'))
    cwt: dict = field(default_factory=lambda: get_setting('CWT'))
    scalogram_time_pool: bool = True
    top_k: int = field(default_factory=lambda: get_setting('TOP_K'))
    holdout_fraction: float = field(default_factory=lambda: get_setting('HOLDOUT_FRACTION'))
    cv_folds: int = field(default_factory=lambda: get_setting('CV_FOLDS'))
    grids: dict = field(default_factory=lambda: get_setting('GRIDS'))
    train: dict = field(default_factory=lambda: get_setting('TRAIN'))
    network: Optional[dict] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f'Неизвестная модель {self.model!r}, доступны {", ".join(MODELS)}')
        if self.model not in compatible_models(self.feature_set):
            raise ConfigError(
                f'Набор {self.feature_set} несовместим с моделью {self.model}; '
                f'допустимо: {", ".join(compatible_models(self.feature_set))}'
            )
        if self.manifest is None and self.synth is None:
            raise ConfigError('Нужен источник данных: manifest или synth')
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ConfigError(f'holdout_fraction вне (0, 1): {self.holdout_fraction}')

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    @classmethod
    def from_dict(cls, data: dict) -> 'ExperimentConfig':
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f'Неизвестные поля конфигурации эксперимента: {sorted(unknown)}')
        if 'feature_set' not in data or 'model' not in data:
            raise ConfigError('В конфигурации эксперимента нужны feature_set и model')
        return cls(**data)

    def fingerprint(self) -> str:
        """sha256 канонической сериализации без output_dir."""
        snapshot = self.to_dict()
        snapshot.pop('output_dir')
        canonical = json.dumps(snapshot, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def feature_config(self) -> dict:
        """Всё, что нужно, чтобы заново построить признаки при предсказании."""
        config = {'feature_set': self.feature_set}
        if self.feature_set in ICN_SETS[1:]:
            band = self.feature_set.split('_', 1)[1]
            config['band'] = BandSpec(*self.bands[band], order=self.filter_order).to_dict()
        elif self.feature_set == 'spectrogram':
            config['stft'] = StftConfig.from_dict(self.stft).to_dict()
        elif self.feature_set == 'scalogram':
            config['cwt'] = CwtConfig.from_dict(self.cwt).to_dict()
            config['time_pool'] = self.scalogram_time_pool
        return config


@dataclass
class Report:
    rows: List[dict] = field(default_factory=list)
    output_dir: Optional[Path] = None


@contextmanager
def experiment_log(directory: Path):
    """Дублирует логи пакета в experiment.log каталога эксперимента."""
    handler = logging.FileHandler(directory / 'experiment.log', mode='w', encoding='utf-8')
    handler.setFormatter(logging.Formatter('{asctime} {levelname} {name}: {message}', style='{'))
    package_logger = logging.getLogger('differentiation')
    package_logger.addHandler(handler)
    try:
        yield
    finally:
        package_logger.removeHandler(handler)
        handler.close()


@contextmanager
def stage(name: str):
    """Перевыбрасывает ошибки конвейера с меткой этапа."""
    try:
        yield
    except PipelineError as exc:
        if exc.stage:
            raise
        raise exc.with_stage(name) from exc


# ---------------------------------------------------------------------------
# Данные и признаки
# ---------------------------------------------------------------------------

def resolve_dataset(manifest=None, synth: Optional[dict] = None, fs: Optional[float] = None,
                    fnc_table=None) -> Dataset:
    if manifest is not None:
        dataset = load_dataset(manifest, fs=fs)
    elif synth is not None:
        dataset = generate_synthetic(SynthConfig.from_dict(synth))
    else:
        raise ConfigError('Нужен источник данных: manifest или synth')
    return attach_fnc_table(dataset, fnc_table) if fnc_table else dataset


def attach_fnc_table(dataset: Dataset, path) -> Dataset:
    """FNC-векторы субъектов из кэша команды features; каждый субъект должен быть в таблице."""
    ids, values = load_fnc_table(path)
    rows = dict(zip(ids, values))
    missing = [s.subject_id for s in dataset if s.subject_id not in rows]
    if missing:
        raise DataError(f'{path}: нет FNC для {len(missing)} субъектов, первый {missing[0]!r}')
    subjects = tuple(SubjectRecord(s.subject_id, s.icn, s.label, rows[s.subject_id]) for s in dataset)
    logger.info('FNC %d субъектов взяты из %s', len(subjects), path)
    return Dataset(subjects, dataset.fs, dataset.max_length)


def subject_fnc(subject: SubjectRecord) -> np.ndarray:
    """Готовый FNC-вектор из манифеста, иначе расчёт по ICN."""
    return subject.fnc if subject.fnc is not None else compute_fnc(subject.icn)


def build_features(dataset: Dataset, feature_config: dict) -> np.ndarray:
    """Массив признаков: (n, 105, L) для ICN, (n, 1, F, T, 105) для тензоров, (n, 5460) для FNC."""
    feature_set = feature_config['feature_set']
    if feature_set == 'raw_icn':
        return dataset.icn_array()
    if feature_set in ICN_SETS:
        band = BandSpec.from_dict(feature_config['band'])
        return np.stack([filter_bank(s.icn, [band])[0].data for s in dataset])
    if feature_set == 'spectrogram':
        cfg = StftConfig.from_dict(feature_config['stft'])
        return neural.prepare_tensor_batch(
            [stack_subject_tensor(s.icn, TensorKind.SPECTROGRAM, stft_cfg=cfg).data for s in dataset]
        )
    if feature_set == 'scalogram':
        cfg = CwtConfig.from_dict(feature_config['cwt'])
        return neural.prepare_tensor_batch(
            [stack_subject_tensor(s.icn, TensorKind.SCALOGRAM, cwt_cfg=cfg).data for s in dataset],
            time_pool=feature_config.get('time_pool', False),
        )
    if feature_set in FNC_SETS:
        return np.vstack([subject_fnc(s) for s in dataset])
    raise ConfigError(f'Неизвестный набор признаков {feature_set!r}')


def _base_descriptor(dataset: Dataset, feature_config: dict) -> dict:
    return {
        **feature_config,
        'n_channels': dataset.subjects[0].icn.n_channels,
        'length': dataset.max_length,
        'fs': dataset.fs,
    }


# ---------------------------------------------------------------------------
# Обучение
# ---------------------------------------------------------------------------

def _train_classical(cfg: ExperimentConfig, X: np.ndarray, y: np.ndarray, descriptor: dict,
                     out_dir: Path) -> Tuple[ModelArtifact, Callable]:
    n_channels = descriptor['n_channels']
    table = minmax_normalize_fit(FeatureTable(X, fnc_pair_names(n_channels)))
    bounds = table.bounds
    selected = list(range(table.n_features))
    if cfg.feature_set == 'fnc_top20':
        selection = select_top_k(chi2_scores(table, y), cfg.top_k)
        selected = selection.selected
        table = table.select(selected)
        logger.info('Отобрано %d признаков FNC по хи-квадрат: %s', len(selected), table.feature_ids[:5])
    result = classical.grid_search_cv(cfg.model, cfg.grids.get(cfg.model), table.X, y, folds=cfg.cv_folds, seed=cfg.seed)
    pd.DataFrame([
        {'point': r['point'], 'params': json.dumps(r['params'], sort_keys=True), 'fold': r['fold'], 'auc': r['auc']}
        for r in result.fold_rows
    ]).to_csv(out_dir / 'grid.csv', index=False, float_format='%.17g', lineterminator='\n')

    descriptor = {**descriptor, 'selected': selected, 'feature_ids': table.feature_ids}
    artifact = classical.to_artifact(result.model, descriptor, cfg.fingerprint())
    artifact.parameters['minmax_bounds'] = bounds
    model = result.model

    def score(X_eval):
        normalized = minmax_apply(bounds, FeatureTable(X_eval, fnc_pair_names(n_channels)))
        return classical.predict_scores(model, normalized.select(selected).X)

    return artifact, score


def _train_network(cfg: ExperimentConfig, X: np.ndarray, y: np.ndarray, descriptor: dict,
                   out_dir: Path) -> Tuple[ModelArtifact, Callable]:
    config_cls = neural.NETWORK_CONFIGS[cfg.model]
    overrides = dict(cfg.network or {})
    overrides.setdefault('in_channels', X.shape[1])
    net_cfg = config_cls(**overrides)
    train_cfg = neural.TrainConfig.from_dict({**cfg.train, 'seed': cfg.seed})
    model, history = neural.train(net_cfg, X, y, train_cfg)
    history.to_frame().to_csv(out_dir / 'history.csv', index=False, float_format='%.17g', lineterminator='\n')
    descriptor = {**descriptor, 'input_shape': list(X.shape[1:]), 'best_epoch': history.best_epoch,
                  'stop_reason': history.stop_reason}
    artifact = neural.to_artifact(model, train_cfg, descriptor, cfg.fingerprint())
    return artifact, model.predict_proba


def run_experiment(cfg: ExperimentConfig, dataset: Optional[Dataset] = None) -> Report:
    """
    ingest -> holdout-разбиение -> признаки -> обучение (CV или ранняя остановка)
    -> оценка на holdout -> report.csv/json, model.json, config.json.
    """
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    with experiment_log(out_dir):
        logger.info('Эксперимент %s × %s, seed=%d -> %s', cfg.feature_set, cfg.model, cfg.seed, out_dir)
        with stage('ingest'):
            if dataset is None:
                dataset = resolve_dataset(cfg.manifest, cfg.synth, cfg.fs, cfg.fnc_table)
            dataset = dataset.labeled()
            y = dataset.labels()
            train_idx, hold_idx = stratified_split(y, cfg.holdout_fraction, cfg.seed)
        with stage('features'):
            feature_config = cfg.feature_config()
            X = build_features(dataset, feature_config)
            descriptor = _base_descriptor(dataset, feature_config)
            logger.info('Признаки %s: %s', cfg.feature_set, X.shape)
        with stage('train'):
            trainer = _train_network if cfg.model in CNN_MODELS else _train_classical
            artifact, score = trainer(cfg, X[train_idx], y[train_idx], descriptor, out_dir)
        with stage('score'):
            holdout_auc = roc_auc(score(X[hold_idx]), y[hold_idx])

        model_path = save_model(artifact, out_dir / 'model.json')
        (out_dir / 'config.json').write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + '\n',
                                             encoding='utf-8')
        row = {
            'feature_set': cfg.feature_set,
            'model': cfg.model,
            'split': 'holdout',
            'auc': holdout_auc,
            'n': int(hold_idx.size),
            'runtime': round(time.perf_counter() - started, 3),
            'fingerprint': cfg.fingerprint(),
            'artifact': str(model_path),
        }
        save_report([row], out_dir)
        logger.info('%s × %s: holdout AUC %.4f (n=%d)', cfg.feature_set, cfg.model, holdout_auc, hold_idx.size)
    return Report(rows=[row], output_dir=out_dir)


def run_grid(base: dict, pairs: Optional[Sequence[Tuple[str, str]]] = None,
             dataset: Optional[Dataset] = None) -> Report:
    """Все пары сетки на одном наборе данных; каждая пара пишется в свой подкаталог."""
    root = Path(base.get('output_dir', 'runs'))
    pairs = list(pairs or experiment_grid())
    if dataset is None:
        with stage('ingest'):
            dataset = resolve_dataset(base.get('manifest'), base.get('synth'), base.get('fs'), base.get('fnc_table'))
    report = Report(output_dir=root)
    for feature_set, model in pairs:
        cfg = ExperimentConfig.from_dict({
            **base, 'feature_set': feature_set, 'model': model,
            'output_dir': str(root / f'{feature_set}__{model}'),
        })
        report.rows.extend(run_experiment(cfg, dataset).rows)
    save_report(report.rows, root)
    logger.info('Сетка экспериментов: %d прогонов -> %s', len(report.rows), root)
    return report


# ---------------------------------------------------------------------------
# Предсказание по сохранённой модели
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Scorer:
    artifact: ModelArtifact

    @property
    def descriptor(self) -> dict:
        return self.artifact.feature_descriptor

    def conform(self, dataset: Dataset) -> Dataset:
        """Проверка пространства признаков; более короткие ряды дополняются до длины обучения."""
        descriptor = self.descriptor
        expected = descriptor['n_channels']
        for subject in dataset:
            if subject.icn.n_channels != expected:
                raise FeatureMismatchError(
                    f'{subject.subject_id}: {subject.icn.n_channels} каналов, модель обучена на {expected}'
                )
        if descriptor['feature_set'] in FNC_SETS:
            return dataset
        if not np.isclose(dataset.fs, descriptor['fs']):
            raise FeatureMismatchError(f'Частота данных {dataset.fs} Гц, модель обучена на {descriptor["fs"]} Гц')
        length = descriptor['length']
        if dataset.max_length > length:
            raise FeatureMismatchError(f'Длина рядов {dataset.max_length} больше длины обучения {length}')
        if dataset.max_length == length:
            return dataset
        subjects = tuple(
            SubjectRecord(s.subject_id, pad_icn(s.icn, length), s.label, s.fnc) for s in dataset
        )
        return Dataset(subjects, dataset.fs, length)

    def score(self, dataset: Dataset) -> np.ndarray:
        dataset = self.conform(dataset)
        X = build_features(dataset, self.descriptor)
        algorithm = self.artifact.algorithm
        if algorithm in CNN_MODELS:
            return neural.from_artifact(self.artifact).predict_proba(X)
        bounds = self.artifact.parameters['minmax_bounds']
        normalized = minmax_apply(bounds, FeatureTable(X, fnc_pair_names(self.descriptor['n_channels'])))
        model = classical.from_artifact(self.artifact)
        return classical.predict_scores(model, normalized.select(self.descriptor['selected']).X)


def load_scorer(model_path) -> Scorer:
    return Scorer(load_model(model_path))


def predict(model_path, manifest_path, out_path, fs: Optional[float] = None, fnc_table=None) -> pd.DataFrame:
    """CSV subject_id,score в порядке манифеста; метки не требуются."""
    scorer = load_scorer(model_path)
    fs = scorer.descriptor.get('fs') if fs is None else fs
    with stage('ingest'):
        dataset = load_dataset(manifest_path, fs=fs, expected_channels=None)
        if fnc_table:
            dataset = attach_fnc_table(dataset, fnc_table)
    with stage('score'):
        scores = scorer.score(dataset)
    frame = pd.DataFrame({'subject_id': dataset.subject_ids, 'score': scores})
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_path, index=False, float_format='%.17g', lineterminator='\n')
    logger.info('Оценки %d субъектов -> %s', len(frame), out_path)
    return frame


def evaluate(model_path, public=None, private=None, fs: Optional[float] = None) -> List[dict]:
    """AUC на одном или двух размеченных наборах; при двух ещё и среднее."""
    sets = [(name, path) for name, path in (('public', public), ('private', private)) if path is not None]
    if not sets:
        raise ConfigError('Нужен хотя бы один набор: --public или --private')
    scorer = load_scorer(model_path)
    fs = scorer.descriptor.get('fs') if fs is None else fs
    rows = []
    for name, path in sets:
        with stage('ingest'):
            dataset = load_dataset(path, fs=fs, expected_channels=None).labeled()
            labels = dataset.labels()
        with stage('score'):
            value = roc_auc(scorer.score(dataset), labels)
        rows.append({'split': name, 'auc': value, 'n': len(dataset)})
    if len(rows) == 2:
        rows.append({'split': 'mean', 'auc': (rows[0]['auc'] + rows[1]['auc']) / 2.0,
                     'n': rows[0]['n'] + rows[1]['n']})
    return rows


def export_tensor_slice(icn, kind, axis: int, index: int, path,
                        stft_cfg: Optional[StftConfig] = None, cwt_cfg: Optional[CwtConfig] = None) -> pd.DataFrame:
    """Срез тензора субъекта по выбранной оси в CSV с подписями осей."""
    tensor = stack_subject_tensor(icn, kind, stft_cfg=stft_cfg, cwt_cfg=cwt_cfg)
    if axis not in (0, 1, 2):
        raise ConfigError(f'Ось среза должна быть 0, 1 или 2: {axis}')
    if not 0 <= index < tensor.shape[axis]:
        raise ConfigError(f'Индекс {index} вне оси {axis} размером {tensor.shape[axis]}')
    if tensor.kind is TensorKind.SPECTROGRAM:
        cfg = stft_cfg or StftConfig.from_dict()
        first = [f'{f:.4f}Hz' for f in stft_frequencies(cfg, icn.fs)]
    else:
        cfg = cwt_cfg or CwtConfig.from_dict()
        first = [f's{s:g}_{f:.4f}Hz' for s, f in zip(cfg.scales, scale_to_frequency(cfg.scales, cfg.omega0, icn.fs))]
    labels = [first, [f't{i}' for i in range(tensor.shape[1])], [f'icn{c}' for c in range(tensor.shape[2])]]
    matrix = np.take(tensor.data, index, axis=axis)
    rest = [labels[a] for a in range(3) if a != axis]
    frame = pd.DataFrame(matrix, index=rest[0], columns=rest[1])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, float_format='%.17g', lineterminator='\n')
    return frame
