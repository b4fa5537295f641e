# differentiation/tests/test_dataio.py

import json
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase
from scipy.signal import periodogram

from differentiation import classical
from differentiation.classical import ClassifierSpec
from differentiation.dataio import (
    ModelArtifact, SynthConfig, generate_synthetic, load_dataset, load_model, pad_icn, read_icn_csv,
    save_model, save_report, write_dataset,
)
from differentiation.exceptions import ArtifactFormatError, ConfigError, DataError
from differentiation.fnc import compute_fnc, pearson
from differentiation.records import N_FNC_FEATURES, IcnMatrix, Label


def write_matrix(path, values):
    pd.DataFrame(np.atleast_2d(values)).to_csv(path, header=False, index=False, float_format='%.17g')


class TempDirMixin:
    def make_tmp(self) -> Path:
        tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, tmp, ignore_errors=True)
        return tmp


class PadIcnTestCase(SimpleTestCase):
    def test_pads_with_trailing_zeros(self):
        icn = pad_icn(IcnMatrix([[1.0, 2.0, 3.0]], 2.0), 5)
        np.testing.assert_array_equal(icn.data, [[1.0, 2.0, 3.0, 0.0, 0.0]])
        self.assertEqual(icn.original_length, 3)

    def test_shorter_target_is_rejected(self):
        with self.assertRaises(ConfigError):
            pad_icn(IcnMatrix(np.ones((2, 6)), 2.0), 4)

    def test_prefix_is_preserved(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            length = int(rng.integers(2, 50))
            data = rng.standard_normal((3, length))
            padded = pad_icn(IcnMatrix(data, 2.0), length + int(rng.integers(0, 20)))
            np.testing.assert_array_equal(padded.signal, data)
            self.assertTrue(np.all(padded.data[:, length:] == 0.0))


class LoadDatasetTestCase(TempDirMixin, SimpleTestCase):
    def setUp(self):
        self.tmp = self.make_tmp()
        (self.tmp / 'icn').mkdir()
        self.rng = np.random.default_rng(1)

    def add_subject(self, name, length=234, channels=105):
        data = self.rng.standard_normal((channels, length))
        write_matrix(self.tmp / 'icn' / f'{name}.csv', data)
        return data

    def write_manifest(self, rows, columns=('subject_id', 'label', 'icn_path')):
        path = self.tmp / 'manifest.csv'
        pd.DataFrame(rows, columns=list(columns)).to_csv(path, index=False)
        return path

    def test_cohort_is_padded_to_longest_subject(self):
        lengths = {'a': 230, 'b': 234, 'c': 200}
        data = {name: self.add_subject(name, length) for name, length in lengths.items()}
        manifest = self.write_manifest([[name, 'SZ' if name != 'b' else 'BP', f'icn/{name}.csv'] for name in lengths])
        dataset = load_dataset(manifest)
        self.assertEqual(dataset.subject_ids, ['a', 'b', 'c'])
        self.assertEqual(dataset.max_length, 234)
        self.assertEqual(dataset.fs, 2.0)
        for subject in dataset:
            self.assertEqual(subject.icn.length, 234)
            self.assertEqual(subject.icn.original_length, lengths[subject.subject_id])
            np.testing.assert_array_equal(subject.icn.signal, data[subject.subject_id])
            self.assertTrue(np.all(subject.icn.data[:, lengths[subject.subject_id]:] == 0.0))
        np.testing.assert_array_equal(dataset.labels(), [1, 0, 1])

    def test_single_subject_is_unchanged(self):
        data = self.add_subject('only', 120)
        dataset = load_dataset(self.write_manifest([['only', 'BP', 'icn/only.csv']]), fs=1.0 / 0.72)
        np.testing.assert_array_equal(dataset.subjects[0].icn.data, data)
        self.assertAlmostEqual(dataset.fs, 1.0 / 0.72)

    def test_values_survive_text_round_trip(self):
        values = self.rng.standard_normal((20, 100))
        write_matrix(self.tmp / 'icn' / 'exact.csv', values)
        np.testing.assert_array_equal(read_icn_csv(self.tmp / 'icn' / 'exact.csv', expected_channels=None), values)

    def test_non_positive_rate_is_rejected(self):
        self.add_subject('a')
        manifest = self.write_manifest([['a', 'SZ', 'icn/a.csv']])
        for fs in (0.0, -1.0):
            with self.assertRaises(ConfigError):
                load_dataset(manifest, fs=fs)

    def test_wrong_channel_count_names_file(self):
        self.add_subject('a')
        self.add_subject('b', channels=104)
        manifest = self.write_manifest([['a', 'SZ', 'icn/a.csv'], ['b', 'BP', 'icn/b.csv']])
        with self.assertRaises(DataError) as ctx:
            load_dataset(manifest)
        self.assertIn('b.csv', str(ctx.exception))
        self.assertIn('105', str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaisesMessage(DataError, 'Файл не найден'):
            load_dataset(self.write_manifest([['a', 'SZ', 'icn/missing.csv']]))

    def test_non_numeric_cell_reports_position(self):
        data = self.add_subject('a').astype(object)
        data[2, 4] = 'abc'
        pd.DataFrame(data).to_csv(self.tmp / 'icn' / 'a.csv', header=False, index=False)
        with self.assertRaisesMessage(DataError, 'строка 3, столбец 5'):
            load_dataset(self.write_manifest([['a', 'SZ', 'icn/a.csv']]))

    def test_nan_cell_is_rejected(self):
        data = self.add_subject('a').astype(object)
        data[0, 0] = 'nan'
        pd.DataFrame(data).to_csv(self.tmp / 'icn' / 'a.csv', header=False, index=False)
        with self.assertRaises(DataError):
            load_dataset(self.write_manifest([['a', 'SZ', 'icn/a.csv']]))

    def test_duplicate_subject_id(self):
        self.add_subject('a')
        manifest = self.write_manifest([['a', 'SZ', 'icn/a.csv'], ['a', 'BP', 'icn/a.csv']])
        with self.assertRaisesMessage(DataError, 'строка 3'):
            load_dataset(manifest)

    def test_unknown_label(self):
        self.add_subject('a')
        with self.assertRaisesMessage(DataError, 'строка 2'):
            load_dataset(self.write_manifest([['a', 'MDD', 'icn/a.csv']]))

    def test_missing_column(self):
        path = self.tmp / 'manifest.csv'
        pd.DataFrame([['a', 'SZ']], columns=['subject_id', 'label']).to_csv(path, index=False)
        with self.assertRaisesMessage(DataError, 'icn_path'):
            load_dataset(path)

    def test_unlabeled_subjects(self):
        self.add_subject('a')
        self.add_subject('b')
        dataset = load_dataset(self.write_manifest([['a', '', 'icn/a.csv'], ['b', 'SZ', 'icn/b.csv']]))
        self.assertIsNone(dataset.subjects[0].label)
        self.assertEqual(dataset.subjects[1].label, Label.SZ)
        self.assertFalse(dataset.is_labeled)
        self.assertEqual(dataset.labeled().subject_ids, ['b'])
        with self.assertRaises(DataError):
            dataset.labels()

    def test_precomputed_fnc_is_attached(self):
        data = self.add_subject('a')
        (self.tmp / 'fnc').mkdir()
        fnc = compute_fnc(IcnMatrix(data, 2.0))
        write_matrix(self.tmp / 'fnc' / 'a.csv', fnc)
        manifest = self.write_manifest([['a', 'SZ', 'icn/a.csv', 'fnc/a.csv']],
                                       columns=('subject_id', 'label', 'icn_path', 'fnc_path'))
        dataset = load_dataset(manifest)
        np.testing.assert_array_equal(dataset.subjects[0].fnc, fnc)

    def test_short_fnc_file_is_rejected(self):
        self.add_subject('a')
        (self.tmp / 'fnc').mkdir()
        write_matrix(self.tmp / 'fnc' / 'a.csv', np.zeros(N_FNC_FEATURES - 1))
        manifest = self.write_manifest([['a', 'SZ', 'icn/a.csv', 'fnc/a.csv']],
                                       columns=('subject_id', 'label', 'icn_path', 'fnc_path'))
        with self.assertRaisesMessage(DataError, str(N_FNC_FEATURES)):
            load_dataset(manifest)


class SyntheticCohortTestCase(TempDirMixin, SimpleTestCase):
    def test_same_seed_same_cohort(self):
        cfg = SynthConfig.from_dict({'n_subjects': 40, 'seed': 7})
        first, second = generate_synthetic(cfg), generate_synthetic(cfg)
        np.testing.assert_array_equal(first.icn_array(), second.icn_array())
        np.testing.assert_array_equal(first.labels(), second.labels())

    def test_different_seed_different_cohort(self):
        first = generate_synthetic(SynthConfig.from_dict({'n_subjects': 10, 'seed': 1}))
        second = generate_synthetic(SynthConfig.from_dict({'n_subjects': 10, 'seed': 2}))
        self.assertFalse(np.array_equal(first.icn_array(), second.icn_array()))

    def test_layout(self):
        dataset = generate_synthetic(SynthConfig.from_dict({'n_subjects': 40, 'seed': 0}))
        self.assertEqual(dataset.icn_array().shape, (40, 105, 234))
        self.assertEqual(int(dataset.labels().sum()), 20)
        self.assertEqual(dataset.subject_ids[:2], ['sub-0000', 'sub-0001'])

    def test_class_signatures(self):
        cfg = SynthConfig.from_dict({'n_subjects': 200, 'snr_db': 6.0, 'seed': 1})
        dataset = generate_synthetic(cfg)
        y = dataset.labels()
        channels = list(cfg.sz_coupled_channels)
        pairs = [(i, j) for i in channels for j in channels if i > j]
        coupling = np.array([np.mean([pearson(s.icn.data[i], s.icn.data[j]) for i, j in pairs]) for s in dataset])
        self.assertGreater(coupling[y == 1].mean(), coupling[y == 0].mean())

        freqs, power = periodogram(dataset.icn_array()[:, channels, :], fs=cfg.fs, axis=-1)
        tone_bin = int(np.argmin(np.abs(freqs - cfg.sz_tone_hz)))
        tone_power = power[:, :, tone_bin].mean(axis=1)
        self.assertGreater(tone_power[y == 1].mean(), tone_power[y == 0].mean())

    def test_invalid_configs(self):
        with self.assertRaises(ConfigError):
            SynthConfig(n_subjects=1)
        with self.assertRaises(ConfigError):
            SynthConfig(class_balance=1.0)
        with self.assertRaises(ConfigError):
            SynthConfig(sz_coupled_channels=())
        with self.assertRaises(ConfigError):
            SynthConfig(sz_tone_hz=1.0)
        with self.assertRaises(ConfigError):
            SynthConfig.from_dict({'n_subject': 10})

    def test_noise_band_is_checked_against_rate(self):
        with self.assertRaisesMessage(ConfigError, 'noise_band'):
            SynthConfig(fs=1.5)
        with self.assertRaisesMessage(ConfigError, 'noise_band'):
            SynthConfig(noise_band=(0.5, 0.2))
        cfg = SynthConfig(fs=1.5, noise_band=(0.01, 0.7))
        self.assertEqual(cfg.noise_band, (0.01, 0.7))

    def test_written_cohort_loads_back(self):
        tmp = self.make_tmp()
        dataset = generate_synthetic(SynthConfig.from_dict({'n_subjects': 6, 'seed': 4}))
        manifest = write_dataset(dataset, tmp)
        loaded = load_dataset(manifest)
        self.assertEqual(loaded.subject_ids, dataset.subject_ids)
        np.testing.assert_array_equal(loaded.labels(), dataset.labels())
        np.testing.assert_array_equal(loaded.icn_array(), dataset.icn_array())


class ModelArtifactTestCase(TempDirMixin, SimpleTestCase):
    def setUp(self):
        self.tmp = self.make_tmp()
        rng = np.random.default_rng(5)
        self.y = rng.permutation(np.repeat([0, 1], 25))
        self.X = rng.standard_normal((50, 6)) + 0.8 * self.y[:, None]
        self.model = classical.fit(ClassifierSpec('LDA', {'ridge': 1e-3}), self.X, self.y)
        self.path = save_model(
            classical.to_artifact(self.model, {'feature_set': 'fnc_all'}, 'abc123'), self.tmp / 'model.json'
        )

    def test_round_trip_gives_identical_scores(self):
        artifact = load_model(self.path)
        self.assertEqual(artifact.algorithm, 'LDA')
        self.assertEqual(artifact.fingerprint, 'abc123')
        self.assertEqual(artifact.feature_descriptor['n_features'], 6)
        restored = classical.from_artifact(artifact)
        np.testing.assert_array_equal(classical.predict_scores(restored, self.X),
                                      classical.predict_scores(self.model, self.X))

    def test_forest_round_trip(self):
        model = classical.fit(ClassifierSpec('RF', {'n_trees': 7, 'max_depth': 3}), self.X, self.y, seed=2)
        path = save_model(classical.to_artifact(model, {'feature_set': 'fnc_top20'}), self.tmp / 'rf.json')
        restored = classical.from_artifact(load_model(path))
        np.testing.assert_array_equal(classical.predict_scores(restored, self.X),
                                      classical.predict_scores(model, self.X))

    def test_unknown_version_is_rejected(self):
        document = json.loads(self.path.read_text(encoding='utf-8'))
        document['format_version'] = 99
        self.path.write_text(json.dumps(document), encoding='utf-8')
        with self.assertRaisesMessage(ArtifactFormatError, '99'):
            load_model(self.path)

    def test_tampered_parameters_fail_checksum(self):
        document = json.loads(self.path.read_text(encoding='utf-8'))
        document['parameters']['coef']['data'][0] += 1.0
        self.path.write_text(json.dumps(document), encoding='utf-8')
        with self.assertRaises(ArtifactFormatError):
            load_model(self.path)

    def test_malformed_document(self):
        self.path.write_text('{"format_version": 1, ', encoding='utf-8')
        with self.assertRaises(ArtifactFormatError):
            load_model(self.path)

    def test_missing_file(self):
        with self.assertRaises(DataError):
            load_model(self.tmp / 'absent.json')

    def test_integer_parameters_keep_dtype(self):
        artifact = ModelArtifact('DT', {}, {'n_features': 1}, {'feature': np.array([0, -1, -1])})
        path = save_model(artifact, self.tmp / 'dt.json')
        self.assertEqual(load_model(path).parameters['feature'].dtype, np.int64)


class ReportTestCase(TempDirMixin, SimpleTestCase):
    def test_report_files(self):
        tmp = self.make_tmp()
        rows = [{'feature_set': 'fnc_all', 'model': 'LDA', 'split': 'holdout', 'auc': 0.75, 'n': 20}]
        csv_path, json_path = save_report(rows, tmp)
        self.assertEqual(pd.read_csv(csv_path, float_precision='round_trip').to_dict('records'), rows)
        self.assertEqual(json.loads(json_path.read_text(encoding='utf-8')), rows)
