# differentiation/tests/test_dsp.py

import numpy as np
from django.test import SimpleTestCase

from differentiation.dsp import (
    BandSpec, apply_zero_phase, default_bands, design_butterworth_bandpass, edge_padding,
    filter_bank,
)
from differentiation.exceptions import ConfigError, NumericError
from differentiation.records import IcnMatrix

FS = 2.0
LOW = BandSpec(0.01, 0.3)
MID = BandSpec(0.3, 0.7)
HIGH = BandSpec(0.7, 0.99)


def sine(freq, length=234, fs=FS, phase=0.0):
    t = np.arange(length) / fs
    return np.sin(2 * np.pi * freq * t + phase)


def warped_lowpass_frequency(spec, fs, freqs_hz):
    """Частота эквивалентного ФНЧ-прототипа после предыскажения границ полосы."""
    def warp(f):
        return 2.0 * fs * np.tan(np.pi * np.asarray(f, dtype=float) / fs)

    w_lo, w_hi = warp(spec.f_lo), warp(spec.f_hi)
    w = warp(freqs_hz)
    return (w ** 2 - w_lo * w_hi) / (w * (w_hi - w_lo))


def central(x):
    n = x.shape[-1]
    return x[..., n // 4: 3 * n // 4]


class ButterworthDesignTestCase(SimpleTestCase):
    def test_passband_center_has_unit_gain(self):
        filt = design_butterworth_bandpass(MID, FS)
        gain = filt.magnitude([np.sqrt(0.3 * 0.7)])[0]
        self.assertTrue(0.95 <= gain <= 1.05, gain)

    def test_band_edges_are_half_power(self):
        filt = design_butterworth_bandpass(MID, FS)
        for edge in (0.3, 0.7):
            self.assertAlmostEqual(filt.magnitude([edge])[0], 1 / np.sqrt(2), delta=0.02 / np.sqrt(2))

    def test_stopband_attenuation(self):
        low = design_butterworth_bandpass(LOW, FS)
        self.assertLess(low.magnitude([0.9])[0], 0.01)
        mid = design_butterworth_bandpass(MID, FS)
        self.assertLess(mid.magnitude([0.05])[0], 0.01)
        self.assertLess(mid.magnitude([0.9])[0], 0.01)

    def test_order_gives_matching_number_of_sections(self):
        filt = design_butterworth_bandpass(MID, FS)
        self.assertEqual(filt.n_sections, 6)
        self.assertEqual(edge_padding(filt), 18)

    def test_default_bands_follow_settings(self):
        bands = default_bands()
        self.assertEqual([(b.f_lo, b.f_hi) for b in bands], [(0.01, 0.3), (0.3, 0.7), (0.7, 0.99)])

    def test_inverted_band_is_rejected(self):
        with self.assertRaises(ConfigError):
            BandSpec(0.7, 0.3)

    def test_band_above_nyquist_is_rejected(self):
        with self.assertRaises(ConfigError):
            design_butterworth_bandpass(BandSpec(0.7, 1.2), FS)

    def test_band_too_close_to_nyquist_is_numeric_error(self):
        with self.assertRaises(NumericError):
            design_butterworth_bandpass(BandSpec(0.7, 0.999), FS)

    def test_non_positive_rate_is_rejected(self):
        for fs in (0.0, -2.0):
            with self.assertRaises(ConfigError):
                design_butterworth_bandpass(MID, fs)

    def test_odd_order_is_rejected(self):
        with self.assertRaises(ConfigError):
            BandSpec(0.3, 0.7, order=5)

    def test_random_bands_are_stable(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            f_lo = rng.uniform(0.01, 0.5)
            f_hi = rng.uniform(f_lo + 0.05, 0.98)
            filt = design_butterworth_bandpass(BandSpec(f_lo, f_hi), FS)
            self.assertTrue(np.all(np.abs(filt.poles) < 1.0))

    def test_magnitude_matches_butterworth_law(self):
        freqs = np.linspace(0.2, 0.85, 10)
        for fs in (2.0, 1.0 / 0.72):
            spec = BandSpec(0.3 * fs / 2, 0.7 * fs / 2)
            filt = design_butterworth_bandpass(spec, fs)
            omega = warped_lowpass_frequency(spec, fs, freqs * fs / 2)
            expected = 1.0 / (1.0 + omega ** (2 * spec.order))
            np.testing.assert_allclose(filt.magnitude(freqs * fs / 2) ** 2, expected, rtol=1e-6)


class ZeroPhaseFilteringTestCase(SimpleTestCase):
    def setUp(self):
        self.mid = design_butterworth_bandpass(MID, FS)
        self.high = design_butterworth_bandpass(HIGH, FS)

    def test_inband_sine_keeps_amplitude_and_phase(self):
        x = sine(0.5)
        y = apply_zero_phase(self.mid, x)
        t = central(np.arange(x.size) / FS)
        design = np.column_stack([np.sin(2 * np.pi * 0.5 * t), np.cos(2 * np.pi * 0.5 * t)])
        (a, b), *_ = np.linalg.lstsq(design, central(y), rcond=None)
        self.assertGreaterEqual(np.hypot(a, b), 0.9)
        self.assertLess(abs(np.arctan2(b, a)), 0.05)

    def test_cross_correlation_peaks_at_zero_lag(self):
        x = sine(0.5, phase=0.3)
        x_c, y_c = central(x), central(apply_zero_phase(self.mid, x))
        xcorr = np.correlate(y_c, x_c, mode='full')
        self.assertEqual(int(np.argmax(xcorr)) - (x_c.size - 1), 0)

    def test_narrow_band_filter_from_design(self):
        filt = design_butterworth_bandpass(BandSpec(0.06, 0.12, 6), FS)
        x = sine(0.09, length=400)
        y = apply_zero_phase(filt, x)
        self.assertEqual(y.shape, x.shape)
        self.assertTrue(np.all(np.isfinite(y)))
        self.assertTrue(filt.sos.flags.writeable)
        # вход не изменяется
        np.testing.assert_array_equal(x, sine(0.09, length=400))

    def test_zero_input_gives_zero_output(self):
        np.testing.assert_array_equal(apply_zero_phase(self.mid, np.zeros(234)), np.zeros(234))

    def test_out_of_band_sine_is_suppressed(self):
        x = sine(0.05)
        y = apply_zero_phase(self.high, x)
        rms = lambda v: np.sqrt(np.mean(v ** 2))
        self.assertLess(rms(central(y)), 0.02 * rms(central(x)))

    def test_filtering_is_linear(self):
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal((2, 234))
        a, b = 1.7, -0.4
        combined = apply_zero_phase(self.mid, a * x + b * y)
        separate = a * apply_zero_phase(self.mid, x) + b * apply_zero_phase(self.mid, y)
        np.testing.assert_allclose(combined, separate, rtol=1e-9, atol=1e-9 * np.abs(separate).max())


class FilterBankTestCase(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(5)
        self.length = 240
        data = rng.standard_normal((105, self.length))
        data[3] = sine(0.15, length=self.length)
        self.icn = IcnMatrix(data, FS)

    def test_one_output_per_band(self):
        outputs = filter_bank(self.icn, [LOW, MID, HIGH])
        self.assertEqual(len(outputs), 3)
        for out in outputs:
            self.assertEqual(out.data.shape, (105, self.length))

    def test_channels_are_filtered_independently(self):
        (out,) = filter_bank(self.icn, [MID])
        filt = design_butterworth_bandpass(MID, FS)
        for channel in (0, 3, 104):
            np.testing.assert_array_equal(out.data[channel], apply_zero_phase(filt, self.icn.data[channel]))

    def test_tone_retained_only_in_its_band(self):
        bin_index = 18  # 0.15 Hz при L=240, fs=2
        power = lambda x: np.abs(np.fft.rfft(x)[bin_index]) ** 2
        before = power(self.icn.data[3])
        low, mid, high = filter_bank(self.icn, [LOW, MID, HIGH])
        self.assertGreaterEqual(power(low.data[3]), 0.8 * before)
        self.assertLessEqual(power(mid.data[3]), 0.05 * before)
        self.assertLessEqual(power(high.data[3]), 0.05 * before)

    def test_padded_tail_stays_zero(self):
        data = np.zeros((105, 260))
        data[:, :self.length] = self.icn.data
        padded = IcnMatrix(data, FS, original_length=self.length)
        (out,) = filter_bank(padded, [LOW])
        self.assertTrue(np.all(out.data[:, self.length:] == 0.0))
        self.assertEqual(out.original_length, self.length)
