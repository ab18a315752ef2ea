"""Signal generation, WAV I/O, band power, decimation, window leakage."""

import wave

import numpy as np
import pytest

from kwsflow.errors import (
    DegenerateWindow,
    EmptySignal,
    InvalidFactor,
    InvalidParams,
    UnsupportedFormat,
)
from kwsflow.frontend import window_coefficients
from kwsflow.signal import (
    SignalBuffer,
    band_power_fraction,
    decimate,
    gen_signal,
    read_wav,
    spectral_leakage,
    write_wav,
)


def _sine(freq, sr=8000, n=8000, amp=0.5):
    return gen_signal("sine", {"freq": freq, "amp": amp}, sample_rate=sr, n=n)


def test_gen_signal_deterministic():
    a = gen_signal("noise", {"amp": 0.3}, seed=7, n=1024)
    b = gen_signal("noise", {"amp": 0.3}, seed=7, n=1024)
    assert np.array_equal(a.samples, b.samples)
    c = gen_signal("noise", {"amp": 0.3}, seed=8, n=1024)
    assert not np.array_equal(a.samples, c.samples)


def test_gen_signal_sine_shape_and_peak():
    s = _sine(1000, amp=0.5)
    assert s.samples.shape == (8000,)
    assert s.sample_rate == 8000
    assert abs(np.max(np.abs(s.samples)) - 0.5) < 1e-3


def test_gen_signal_rejects_unknown_kind_and_bad_params():
    with pytest.raises(InvalidParams):
        gen_signal("chirp")
    with pytest.raises(InvalidParams):
        gen_signal("sine", {"freq": 1000.0, "amp": 1.5})
    with pytest.raises(InvalidParams):
        gen_signal("multitone", {"freqs": [100, 200], "amps": [0.1]})


def test_gen_signal_speechlike_mostly_below_4khz():
    s = gen_signal("speechlike", sample_rate=16000, n=16000, seed=3)
    assert band_power_fraction(s, 4000.0) >= 0.90


def test_wav_round_trip_bit_exact(tmp_path):
    s = gen_signal("multitone", {"freqs": [500, 1250], "amps": [0.4, 0.2]}, n=4000)
    p = tmp_path / "x.wav"
    write_wav(p, s)
    back = read_wav(p)
    assert back.sample_rate == s.sample_rate
    # write quantizes to int16; a second round trip is exact
    write_wav(tmp_path / "y.wav", back)
    again = read_wav(tmp_path / "y.wav")
    assert np.array_equal(back.samples, again.samples)
    assert np.max(np.abs(back.samples - s.samples)) <= 1.0 / 32768 + 1e-12


def test_read_wav_rejects_stereo(tmp_path):
    p = tmp_path / "st.wav"
    with wave.open(str(p), "wb") as w:
        w.setnchannels(2)
        w.setsampwidth(2)
        w.setframerate(8000)
        w.writeframes(b"\x00\x00" * 2 * 100)
    with pytest.raises(UnsupportedFormat):
        read_wav(p)


def test_read_wav_rejects_8bit(tmp_path):
    p = tmp_path / "b8.wav"
    with wave.open(str(p), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(1)
        w.setframerate(8000)
        w.writeframes(b"\x80" * 100)
    with pytest.raises(UnsupportedFormat):
        read_wav(p)


def test_band_power_fraction_examples():
    assert band_power_fraction(_sine(1000), 2000.0) > 0.99
    hi = _sine(5000, sr=16000, n=16000)
    assert band_power_fraction(hi, 4000.0) < 0.01
    two = gen_signal(
        "multitone", {"freqs": [1000, 3000], "amps": [0.3, 0.3]}, n=8000
    )
    assert abs(band_power_fraction(two, 2000.0) - 0.5) < 0.01


def test_band_power_fraction_monotone_and_bounded():
    s = gen_signal("speechlike", sample_rate=16000, n=8000, seed=5)
    cuts = [500.0, 1000.0, 2000.0, 4000.0, 8000.0]
    fracs = [band_power_fraction(s, c) for c in cuts]
    assert all(0.0 <= f <= 1.0 + 1e-12 for f in fracs)
    assert all(b >= a - 1e-12 for a, b in zip(fracs, fracs[1:]))
    assert fracs[-1] > 0.999


def test_band_power_fraction_empty():
    with pytest.raises(EmptySignal):
        band_power_fraction(SignalBuffer(np.array([]), 8000), 1000.0)


def test_decimate_factor_one_is_identity():
    s = _sine(1000)
    out = decimate(s, 1)
    assert out.sample_rate == 8000
    assert np.array_equal(out.samples, s.samples)


def test_decimate_passband_amplitude_preserved():
    s = _sine(1000, sr=16000, n=16000, amp=0.5)
    out = decimate(s, 2)
    assert out.sample_rate == 8000
    core = out.samples[500:-500]
    assert abs(np.max(np.abs(core)) - 0.5) / 0.5 < 0.05


def test_decimate_stopband_attenuated():
    s = _sine(7000, sr=16000, n=16000, amp=0.5)
    out = decimate(s, 2)
    core = out.samples[500:-500]
    residual = np.sqrt(np.mean(core**2)) / (0.5 / np.sqrt(2))
    assert 20 * np.log10(residual + 1e-30) <= -40.0


def test_decimate_rejects_bad_factor():
    s = _sine(1000)
    with pytest.raises(InvalidFactor):
        decimate(s, 0)
    with pytest.raises(InvalidFactor):
        decimate(s, -2)


def test_spectral_leakage_examples():
    rect = np.ones(32)
    hann = window_coefficients(32, "exact").values
    assert spectral_leakage(rect) > 0.10
    assert spectral_leakage(hann) <= 0.10


def test_spectral_leakage_scale_invariant():
    hann = window_coefficients(32, "exact").values
    assert abs(spectral_leakage(hann) - spectral_leakage(3.7 * hann)) < 1e-12


def test_spectral_leakage_degenerate():
    with pytest.raises(DegenerateWindow):
        spectral_leakage(np.zeros(32))
