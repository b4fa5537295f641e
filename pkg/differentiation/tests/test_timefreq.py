# differentiation/tests/test_timefreq.py

import numpy as np
from django.test import SimpleTestCase
from scipy.signal import windows

from differentiation.exceptions import ConfigError
from differentiation.records import IcnMatrix
from differentiation.timefreq import (
    CwtConfig, StftConfig, TensorKind, cwt_scalogram, morlet_kernel, scale_to_frequency,
    stack_subject_tensor, stft_frequencies, stft_power_spectrogram, tukey_window,
)

FS = 2.0


def sine(freq, length=234, fs=FS, phase=0.0):
    return np.sin(2 * np.pi * freq * np.arange(length) / fs + phase)


class TukeyWindowTestCase(SimpleTestCase):
    def test_zero_alpha_is_rectangular(self):
        np.testing.assert_array_equal(tukey_window(22, 0.0), np.ones(22))

    def test_unit_alpha_is_hann(self):
        np.testing.assert_allclose(tukey_window(22, 1.0), windows.hann(22, sym=True), atol=1e-15)

    def test_default_window_shape(self):
        w = tukey_window(22, 0.25)
        self.assertEqual(w[0], 0.0)
        self.assertEqual(w[10], 1.0)
        self.assertEqual(w[11], 1.0)
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)

    def test_alpha_out_of_range_is_rejected(self):
        with self.assertRaises(ConfigError):
            tukey_window(22, 1.5)
        with self.assertRaises(ConfigError):
            StftConfig(tukey_alpha=-0.1)

    def test_hop_longer_than_window_is_rejected(self):
        with self.assertRaises(ConfigError):
            StftConfig(window_len=22, hop=23)


class SpectrogramTestCase(SimpleTestCase):
    def setUp(self):
        self.cfg = StftConfig()
        self.rng = np.random.default_rng(2)

    def test_default_shape(self):
        S = stft_power_spectrogram(self.rng.standard_normal(234), self.cfg)
        self.assertEqual(S.shape, (12, 11))
        self.assertEqual(self.cfg.n_frames(234), 11)

    def test_bin_frequencies(self):
        freqs = stft_frequencies(self.cfg, FS)
        self.assertEqual(freqs.size, 12)
        self.assertAlmostEqual(freqs[1], FS / 22)
        self.assertAlmostEqual(freqs[-1], 1.0)

    def test_zero_signal(self):
        np.testing.assert_array_equal(stft_power_spectrogram(np.zeros(234), self.cfg), np.zeros((12, 11)))

    def test_shape_law(self):
        for _ in range(30):
            window = int(self.rng.integers(2, 40))
            hop = int(self.rng.integers(1, window + 1))
            length = int(self.rng.integers(window, 300))
            cfg = StftConfig(window_len=window, tukey_alpha=0.25, hop=hop)
            S = stft_power_spectrogram(self.rng.standard_normal(length), cfg)
            self.assertEqual(S.shape, (window // 2 + 1, (length - window) // hop + 1))

    def test_half_bin_sine_peaks_at_neighbouring_bins(self):
        cfg = StftConfig(tukey_alpha=0.0)
        S = stft_power_spectrogram(sine(0.5), cfg)
        self.assertTrue(set(np.argmax(S, axis=0)) <= {5, 6})

    def test_on_bin_sine_peaks_at_its_bin(self):
        cfg = StftConfig(tukey_alpha=0.0)
        S = stft_power_spectrogram(sine(6 * FS / 22, phase=0.4), cfg)
        np.testing.assert_array_equal(np.argmax(S, axis=0), np.full(11, 6))

    def test_rectangular_non_overlapping_frames_preserve_energy(self):
        cfg = StftConfig(window_len=22, tukey_alpha=0.0, hop=22)
        weights = np.full(12, 2.0)
        weights[0] = weights[-1] = 1.0
        for _ in range(20):
            x = self.rng.standard_normal(234)
            S = stft_power_spectrogram(x, cfg)
            covered = cfg.n_frames(x.size) * 22
            self.assertAlmostEqual((weights @ S).sum() / 22, np.sum(x[:covered] ** 2), delta=1e-6 * np.sum(x ** 2))


class ScalogramTestCase(SimpleTestCase):
    def setUp(self):
        self.cfg = CwtConfig()

    def test_default_shape(self):
        W = cwt_scalogram(np.random.default_rng(0).standard_normal(234), self.cfg, FS)
        self.assertEqual(W.shape, (49, 234))
        self.assertTrue(np.all(W >= 0))

    def test_zero_signal(self):
        np.testing.assert_array_equal(cwt_scalogram(np.zeros(234), self.cfg, FS), np.zeros((49, 234)))

    def test_kernel_support(self):
        self.assertEqual(morlet_kernel(1.0, 5.0).size, 9)
        self.assertEqual(morlet_kernel(6.0, 5.0).size, 49)

    def test_scale_to_frequency(self):
        self.assertAlmostEqual(scale_to_frequency([6.0], 5.0, FS)[0], 10.0 / (12 * np.pi))

    def test_quarter_hertz_sine_peaks_near_scale_six(self):
        W = cwt_scalogram(sine(0.25), self.cfg, FS)
        profile = W[:, 234 // 4: 3 * 234 // 4].mean(axis=1)
        self.assertLessEqual(abs(self.cfg.scales[int(np.argmax(profile))] - 6), 1)

    def test_peak_scale_tracks_frequency(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            target = rng.uniform(4.0, 20.0)
            freq = 5.0 * FS / (2 * np.pi * target)
            W = cwt_scalogram(sine(freq, length=1024), self.cfg, FS)
            profile = W[:, 256:768].mean(axis=1)
            expected = round(5.0 * FS / (2 * np.pi * freq))
            self.assertLessEqual(abs(self.cfg.scales[int(np.argmax(profile))] - expected), 1)

    def test_time_shift_moves_columns(self):
        cfg = CwtConfig(scales=tuple(range(1, 11)))
        x = np.random.default_rng(4).standard_normal(256)
        shift = 17
        shifted = cwt_scalogram(np.roll(x, shift), cfg, FS)
        original = cwt_scalogram(x, cfg, FS)
        columns = np.arange(40 + shift, 256 - 40)
        np.testing.assert_allclose(shifted[:, columns], original[:, columns - shift], atol=1e-6)

    def test_scales_must_increase(self):
        with self.assertRaises(ConfigError):
            CwtConfig(scales=(2.0, 1.0))


class SubjectTensorTestCase(SimpleTestCase):
    def setUp(self):
        self.icn = IcnMatrix(np.random.default_rng(1).standard_normal((105, 234)), FS)

    def test_spectrogram_tensor(self):
        tensor = stack_subject_tensor(self.icn, TensorKind.SPECTROGRAM)
        self.assertEqual(tensor.shape, (12, 11, 105))
        for channel in (0, 50, 104):
            np.testing.assert_array_equal(tensor.data[:, :, channel],
                                          stft_power_spectrogram(self.icn.data[channel], StftConfig()))

    def test_scalogram_tensor(self):
        tensor = stack_subject_tensor(self.icn, 'scalogram')
        self.assertEqual(tensor.shape, (49, 234, 105))
        self.assertTrue(np.all(tensor.data >= 0))
        for channel in (0, 104):
            np.testing.assert_allclose(tensor.data[:, :, channel],
                                       cwt_scalogram(self.icn.data[channel], CwtConfig(), FS), rtol=1e-12, atol=1e-12)

    def test_provenance_records_parameters(self):
        tensor = stack_subject_tensor(self.icn, TensorKind.SPECTROGRAM)
        self.assertEqual(tensor.provenance['window_len'], 22)
        self.assertEqual(tensor.provenance['hop'], 21)
        self.assertEqual(tensor.kind, TensorKind.SPECTROGRAM)
