"""Front-end stages against independent oracles (reference DFT, numpy, scipy)."""

import numpy as np
import pytest

from kwsflow.errors import (
    DimensionMismatch,
    NegativeInput,
    SignalTooShort,
    TooManyFilters,
    ZeroReference,
)
from kwsflow.frontend import (
    ALLOWED_FFT_SIZES,
    PipelineConfig,
    PreemphasisConfig,
    build_mel_filterbank,
    dct_ii,
    dft_reference,
    fft_r22sdf,
    frame_and_window,
    log_compress,
    mel_energies,
    mel_map,
    mfcc_pipeline,
    power_spectrum,
    preemphasis,
    spectrogram_distance,
    window_coefficients,
)
from kwsflow.signal import SignalBuffer, gen_signal


# ---------------------------------------------------------------- mel scale


def test_mel_map_anchor_points():
    assert mel_map(0.0) == 0.0
    assert abs(mel_map(700.0) - 781.17) < 0.5
    assert abs(mel_map(1000.0) - 999.99) < 0.5 or abs(mel_map(1000.0) - 1000.0) < 0.5


def test_mel_map_inverse_round_trip():
    for hz in (0.0, 125.0, 700.0, 1337.0, 4000.0):
        m = mel_map(hz, "to_mel")
        assert abs(mel_map(m, "to_hz") - hz) < 1e-6


def test_mel_map_monotone():
    hz = np.linspace(0, 8000, 257)
    mels = [mel_map(float(h)) for h in hz]
    assert all(b > a for a, b in zip(mels, mels[1:]))


def test_mel_map_rejects_negative():
    with pytest.raises(NegativeInput):
        mel_map(-1.0)


# ------------------------------------------------------------- preemphasis


def test_preemphasis_impulse_response():
    k = 5
    x = np.zeros(16)
    x[4] = 1.0
    y = preemphasis(x, PreemphasisConfig(k))
    alpha = 1.0 - 2.0 ** -k
    expect = np.zeros(16)
    expect[4] = 1.0
    expect[5] = -alpha
    assert np.allclose(y, expect, atol=1e-12)


def test_preemphasis_constant_input():
    k = 4
    x = np.full(64, 0.25)
    y = preemphasis(x, PreemphasisConfig(k))
    assert np.allclose(y[1:], 0.25 * 2.0 ** -k, atol=1e-12)


def test_preemphasis_fixed_tracks_float():
    from kwsflow.fixedpoint import QFormat, quantize_array, to_real_array

    rng = np.random.default_rng(11)
    fmt = QFormat(8, 6)
    raw = quantize_array(rng.uniform(-0.9, 0.9, 512), fmt)
    yq = to_real_array(preemphasis(raw, PreemphasisConfig(5), fmt=fmt), fmt)
    yf = preemphasis(to_real_array(raw, fmt), PreemphasisConfig(5))
    assert np.max(np.abs(yf - yq)) <= 2.0 ** -5


# ----------------------------------------------------------------- windows


def test_window_endpoints_and_symmetry():
    for policy in ("exact", "single_shift", "csd2"):
        w = window_coefficients(32, policy).values
        assert w[0] == 0.0
        assert np.allclose(w, w[::-1], atol=1e-12)


def test_window_single_shift_values_are_dyadic():
    w = window_coefficients(32, "single_shift").values
    for v in w:
        if v != 0.0:
            assert abs(v - 2.0 ** round(np.log2(v))) < 1e-12


def test_window_rectangular_is_ones():
    w = window_coefficients(32, "rectangular").values
    assert np.array_equal(w, np.ones(32))


def test_window_csd2_close_to_exact():
    exact = window_coefficients(32, "exact").values
    csd2 = window_coefficients(32, "csd2").values
    single = window_coefficients(32, "single_shift").values
    assert np.max(np.abs(exact - csd2)) <= 2.0 ** -4
    # two CSD terms approximate at least as well as one power of two
    assert np.max(np.abs(exact - csd2)) <= np.max(np.abs(exact - single)) + 1e-12


# ----------------------------------------------------------------- framing


def test_frame_count_example():
    cfg = PipelineConfig(fft_size=32, frame_hop=16)
    frames = frame_and_window(np.ones(64), cfg)
    assert frames.shape == (3, 32)


def test_framing_applies_window_to_ones():
    cfg = PipelineConfig(fft_size=32, frame_hop=16)
    frames = frame_and_window(np.ones(64), cfg)
    w = window_coefficients(32, "exact").values
    for row in frames:
        assert np.allclose(row, w, atol=1e-12)


def test_framing_short_input():
    cfg = PipelineConfig(fft_size=32)
    with pytest.raises(SignalTooShort):
        frame_and_window(np.ones(31), cfg)


# --------------------------------------------------------------------- FFT


def test_dft_reference_constant_input():
    x = np.full(32, 0.5)
    spec = dft_reference(x)
    assert abs(spec[0] - 16.0) < 1e-12
    assert np.max(np.abs(spec[1:])) < 1e-12


def test_dft_reference_parseval():
    rng = np.random.default_rng(2)
    x = rng.uniform(-1, 1, 64)
    spec = dft_reference(x)
    assert abs(np.sum(x**2) - np.sum(np.abs(spec) ** 2) / 64) < 1e-9


def test_dft_reference_linearity():
    rng = np.random.default_rng(3)
    a, b = rng.uniform(-1, 1, (2, 32))
    lhs = dft_reference(2.0 * a + 0.5 * b)
    rhs = 2.0 * dft_reference(a) + 0.5 * dft_reference(b)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_fft_float_matches_reference_all_sizes():
    rng = np.random.default_rng(4)
    for n in ALLOWED_FFT_SIZES:
        cfg = PipelineConfig(fft_size=n, mode="float")
        frames = rng.uniform(-1, 1, (100, n))
        re, im = fft_r22sdf(frames, np.zeros_like(frames), cfg)
        for i in range(100):
            ref = dft_reference(frames[i])
            err = np.max(np.abs((re[i] + 1j * im[i]) - ref))
            assert err < 1e-9


def test_fft_fixed_on_bin_tone_lands_in_right_bins():
    n = 32
    cfg = PipelineConfig(fft_size=n, mode="float", window_policy="rectangular")
    t = np.arange(n)
    x = 0.5 * np.cos(2 * np.pi * 4 * t / n)
    re, im = fft_r22sdf(x[None, :], np.zeros((1, n)), cfg)
    p = re[0] ** 2 + im[0] ** 2
    hot = {int(i) for i in np.nonzero(p > p.max() / 100)[0]}
    assert hot == {4, 28}


# ----------------------------------------------------------- power and mel


def test_power_spectrum_zero_input():
    cfg = PipelineConfig()
    p = power_spectrum(np.zeros((2, 32)), np.zeros((2, 32)), cfg)
    assert p.shape == (2, 17)
    assert np.all(p == 0.0)


def test_rectangular_filterbank_partitions_bins():
    cfg = PipelineConfig(mel_shape="rectangular")
    fb = build_mel_filterbank(cfg)
    cols = fb.weights.sum(axis=0)
    assert np.array_equal(cols[1:], np.ones(16))


def test_triangular_filterbank_interior_sums():
    cfg = PipelineConfig(sample_rate=8000, fft_size=64, n_mel=8, mel_shape="triangular")
    fb = build_mel_filterbank(cfg)
    cols = fb.weights.sum(axis=0)
    freqs = np.arange(33) * 8000 / 64
    # between the first and last band centers the triangles partition unity
    interior = (freqs > fb.edges_hz[1] + 1e-9) & (freqs < fb.edges_hz[-2] - 1e-9)
    assert interior.sum() >= 10
    assert np.all(np.abs(cols[interior] - 1.0) <= 1e-9)


def test_filterbank_edges_monotone():
    for shape in ("rectangular", "triangular"):
        fb = build_mel_filterbank(PipelineConfig(mel_shape=shape))
        e = np.asarray(fb.edges_hz)
        assert np.all(np.diff(e) > 0)


def test_too_many_filters():
    with pytest.raises(TooManyFilters):
        build_mel_filterbank(PipelineConfig(fft_size=16, n_mel=9))


def test_mel_energies_shape_and_dimension_check():
    cfg = PipelineConfig()
    fb = build_mel_filterbank(cfg)
    e = mel_energies(np.ones((3, 17)), fb, cfg)
    assert e.shape == (3, 8)
    with pytest.raises(DimensionMismatch):
        mel_energies(np.ones((3, 16)), fb, cfg)


# ---------------------------------------------------------------- log, DCT


def test_log_compress_float_matches_numpy():
    cfg = PipelineConfig(mode="float")
    x = np.array([[1.0, 2.0, 1024.0, 0.5, 0.0]])
    out = log_compress(x, cfg)
    assert np.allclose(out, np.log2(np.maximum(x, cfg.log_floor)), atol=1e-12)


def test_log_compress_fixed_error_bound():
    from kwsflow.fixedpoint import to_real_array
    from kwsflow.frontend import LOG_FORMAT

    cfg_fx = PipelineConfig(mode="fixed")
    efmt = cfg_fx.energy_format
    xs = np.concatenate([2.0 ** np.arange(0, 7), np.geomspace(1.0, 60.0, 400)])
    raw = np.round(xs * (1 << efmt.frac_bits)).astype(np.int64)
    got = to_real_array(log_compress(raw[None, :], cfg_fx), LOG_FORMAT)[0]
    want = np.log2(raw * 2.0 ** -efmt.frac_bits)
    assert np.max(np.abs(got - want)) <= 2.0 ** -4


def test_dct_constant_input_hits_only_c0():
    cfg = PipelineConfig(mode="float")
    x = np.full((1, 8), 3.0)
    c = dct_ii(x, cfg)
    assert abs(c[0, 0]) > 1.0
    assert np.max(np.abs(c[0, 1:])) < 1e-9


def test_dct_matches_scipy_and_inverts():
    import scipy.fft

    cfg = PipelineConfig(mode="float")
    rng = np.random.default_rng(6)
    x = rng.uniform(-4, 4, (5, 8))
    c = dct_ii(x, cfg)
    # unnormalized DCT-II: scipy's is 2x ours
    ref = scipy.fft.dct(x, type=2, axis=1) / 2.0
    assert np.max(np.abs(c - ref)) < 1e-9
    back = scipy.fft.idct(2.0 * c, type=2, axis=1)
    assert np.max(np.abs(back - x)) < 1e-9


def test_dct_fixed_coefficient_error_bound():
    from kwsflow.fixedpoint import to_real_array
    from kwsflow.frontend import LOG_FORMAT

    cfg_fx = PipelineConfig(mode="fixed")
    cfg_fl = PipelineConfig(mode="float")
    rng = np.random.default_rng(7)
    x = rng.uniform(-8, 8, (20, 8))
    xq = np.round(x * (1 << LOG_FORMAT.frac_bits))
    got = to_real_array(dct_ii(xq.astype(np.int64), cfg_fx), LOG_FORMAT)
    want = dct_ii(xq / (1 << LOG_FORMAT.frac_bits), cfg_fl)
    # per band: one LSB floor per CSD term plus coefficient rounding
    bound = 8 * (2.0 * 2.0 ** -4 + 2.0 ** -6 * np.max(np.abs(x)))
    assert np.max(np.abs(got - want)) <= bound


# ----------------------------------------------------------- full pipeline


def test_pipeline_silence_gives_constant_frames():
    cfg = PipelineConfig(mode="fixed")
    s = SignalBuffer(np.zeros(4000), 8000)
    r = mfcc_pipeline(s, cfg)
    assert r.mfcc.shape[1] == 8
    assert np.all(r.mfcc == r.mfcc[0])


def test_pipeline_deterministic():
    s = gen_signal("speechlike", seed=9, n=4000)
    cfg = PipelineConfig(mode="fixed")
    a = mfcc_pipeline(s, cfg)
    b = mfcc_pipeline(s, cfg)
    assert np.array_equal(a.mfcc, b.mfcc)
    assert np.array_equal(a.power, b.power)


def test_pipeline_rejects_rate_mismatch():
    s = SignalBuffer(np.zeros(4000), 16000)
    with pytest.raises(DimensionMismatch):
        mfcc_pipeline(s, PipelineConfig(sample_rate=8000))


# ---------------------------------------------------------------- distance


def test_distance_identity_and_scaling():
    rng = np.random.default_rng(8)
    a = rng.uniform(0, 5, (10, 17))
    assert spectrogram_distance(a, a) == 0.0
    assert abs(spectrogram_distance(1.25 * a, a) - 0.25) < 1e-12


def test_distance_errors():
    a = np.ones((3, 4))
    with pytest.raises(DimensionMismatch):
        spectrogram_distance(a, np.ones((3, 5)))
    with pytest.raises(ZeroReference):
        spectrogram_distance(a, np.zeros((3, 4)))
