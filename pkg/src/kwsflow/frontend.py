"""Keyword-spotting MFCC front end, bit-accurate and floating-point.

The pipeline is pre-emphasis -> framing/windowing -> FFT -> power
spectrum -> mel filterbank -> log -> DCT.  In "fixed" mode every stage
runs on raw integers against the configured Q-format, using shift-add
constant multiplies and saturating accumulation the way a synthesized
datapath would.  In "float" mode the same stages run in double
precision and serve as the oracle.

The FFT follows a radix-2^2 decimation-in-frequency dataflow: pairs of
butterfly stages with trivial -j rotations between them and twiddle
multiplies after each pair, plus a trailing plain radix-2 stage when
log2(N) is odd.  Fixed mode halves every stage output, for a known
total gain of 1/N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidSize,
    NegativeInput,
    SignalTooShort,
    TooManyFilters,
    ZeroReference,
)
from .fixedpoint import (
    QFormat,
    ShiftAddApprox,
    approx_csd,
    mul_raw_array,
    quantize_array,
    rshift_round_even_array,
    saturate_array,
    to_real_array,
)
from .signal import SignalBuffer

ALLOWED_FFT_SIZES = (16, 32, 64, 128, 256)
WindowPolicy = Literal["exact", "csd2", "single_shift", "rectangular"]
MelShape = Literal["rectangular", "triangular"]
Mode = Literal["fixed", "float"]

MEL_SCALE = 2595.0
MEL_BREAK_HZ = 700.0

# Q-format of fixed-mode log outputs: 4 fraction bits per the
# MSB-plus-interpolated-fraction scheme, enough integer range for any
# energy format used here.
LOG_FORMAT = QFormat(12, 4)
_LOG_LUT = [math.log2(1 + i / 16) for i in range(17)]


@dataclass(frozen=True)
class PreemphasisConfig:
    """High-pass coefficient alpha = 1 - 2^-k."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"shift count k must be >= 1, got {self.k}")

    @property
    def alpha(self) -> float:
        return 1.0 - 2.0 ** -self.k


@dataclass(frozen=True)
class PipelineConfig:
    sample_rate: int = 8000
    bit_width: int = 7
    preemphasis_k: int = 5
    fft_size: int = 32
    frame_hop: int = 0  # 0 means fft_size // 2
    window_policy: WindowPolicy = "exact"
    mel_shape: MelShape = "rectangular"
    n_mel: int = 8
    n_mfcc: int = 8
    mode: Mode = "float"

    def __post_init__(self) -> None:
        if self.fft_size not in ALLOWED_FFT_SIZES:
            raise InvalidSize(f"fft_size must be one of {ALLOWED_FFT_SIZES}")
        if self.frame_hop == 0:
            object.__setattr__(self, "frame_hop", self.fft_size // 2)
        if self.frame_hop < 1:
            raise ValueError("frame_hop must be >= 1")
        if self.n_mel > self.fft_size // 2:
            raise TooManyFilters(f"n_mel {self.n_mel} > N/2 = {self.fft_size // 2}")
        if self.n_mfcc > self.n_mel:
            raise ValueError("n_mfcc must be <= n_mel")

    @property
    def sample_format(self) -> QFormat:
        return QFormat(self.bit_width, self.bit_width - 1)

    @property
    def energy_format(self) -> QFormat:
        # squaring doubles the word; a little headroom absorbs the
        # filterbank accumulation before saturation kicks in
        frac = 2 * (self.bit_width - 1)
        return QFormat(min(32, frac + 2 + 5), frac)

    @property
    def log_floor(self) -> float:
        """Energy floor for the log stage.

        A fixed constant rather than one LSB of the current energy
        format: the floor belongs to the comparison metric, so it must
        not move when candidate bit widths change.  2^-12 is one LSB of
        the 7-bit reference energy format.
        """
        return 2.0 ** -12


@dataclass(frozen=True)
class MelFilterbank:
    weights: np.ndarray  # (n_mel, N/2 + 1)
    edges_hz: np.ndarray  # n_mel + 2 boundary frequencies
    shape: MelShape


@dataclass(frozen=True)
class MfccFrame:
    coefficients: np.ndarray
    index: int


@dataclass(frozen=True)
class PipelineResult:
    """Per-frame MFCCs plus the intermediate matrices oracles compare on."""

    frames: tuple[MfccFrame, ...]
    mfcc: np.ndarray  # (n_frames, n_mfcc), real values
    log_mel: np.ndarray  # (n_frames, n_mel), real values
    power: np.ndarray  # (n_frames, N/2 + 1), real values
    config: PipelineConfig


def preemphasis(samples: np.ndarray, cfg: PreemphasisConfig, fmt: QFormat | None = None) -> np.ndarray:
    """First-order high-pass y[n] = x[n] - alpha * x[n-1], x[-1] = 0.

    With a format given, runs bit-accurately: alpha * x is realized as
    x - (x >> k) on raw integers and the subtraction saturates.
    """
    if fmt is None:
        x = np.asarray(samples, dtype=np.float64)
        prev = np.concatenate(([0.0], x[:-1]))
        return x - cfg.alpha * prev
    raw = np.asarray(samples, dtype=np.int64)
    prev = np.concatenate(([0], raw[:-1]))
    alpha_prev = saturate_array(prev - (prev >> cfg.k), fmt)
    return saturate_array(raw - alpha_prev, fmt)


@dataclass(frozen=True)
class WindowSpec:
    """Window coefficients plus their shift-add realizations (if any)."""

    policy: WindowPolicy
    values: np.ndarray  # effective real coefficient of each tap
    approxs: tuple[ShiftAddApprox | None, ...]  # None only for "exact"


def window_coefficients(n: int, policy: WindowPolicy, bit_width: int = 7) -> WindowSpec:
    """Hanning taps under the requested quantization policy.

    exact        w[i] = 0.5 * (1 - cos(2 pi i / (n-1)))
    single_shift each nonzero tap snapped to the nearest power of two
                 in the log domain (zero endpoints stay zero)
    csd2         two-term CSD approximation per tap
    rectangular  all ones
    """
    if n < 8:
        raise ValueError(f"window length must be >= 8, got {n}")
    if policy == "rectangular":
        one = ShiftAddApprox(((1, 0),), 1.0)
        return WindowSpec(policy, np.ones(n), (one,) * n)
    w = 0.5 * (1.0 - np.cos(2 * np.pi * np.arange(n) / (n - 1)))
    if policy == "exact":
        return WindowSpec(policy, w, (None,) * n)
    approxs: list[ShiftAddApprox | None] = []
    values = np.zeros(n)
    for i, wi in enumerate(w):
        if wi <= 0.0:
            approxs.append(ShiftAddApprox((), 0.0))
            continue
        if policy == "single_shift":
            k = max(0, round(-math.log2(wi)))
            approxs.append(ShiftAddApprox(((1, k),), wi))
        elif policy == "csd2":
            approxs.append(approx_csd(wi, 2, bit_width - 1))
        else:
            raise ValueError(f"unknown window policy: {policy!r}")
        values[i] = approxs[-1].value
    return WindowSpec(policy, values, tuple(approxs))


def frame_and_window(samples: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """Slice into full frames at the configured hop and apply the window.

    Returns (n_frames, N).  Float mode multiplies by the effective
    coefficients; fixed mode applies each tap's shift-add network to the
    raw column (exact taps fall back to a quantized multiply).
    """
    n = cfg.fft_size
    hop = cfg.frame_hop
    if len(samples) < n:
        raise SignalTooShort(f"need at least {n} samples, got {len(samples)}")
    starts = range(0, len(samples) - n + 1, hop)
    frames = np.stack([samples[s : s + n] for s in starts])
    spec = window_coefficients(n, cfg.window_policy, cfg.bit_width)
    if cfg.mode == "float":
        return frames * spec.values
    fmt = cfg.sample_format
    if cfg.window_policy == "exact":
        wq = quantize_array(spec.values, fmt)
        return mul_raw_array(frames, wq[np.newaxis, :], fmt)
    out = np.zeros_like(frames)
    for i, approx in enumerate(spec.approxs):
        col = frames[:, i]
        acc = np.zeros_like(col)
        for sign, shift in approx.terms:
            acc = acc + sign * (col >> shift)
        out[:, i] = saturate_array(acc, fmt)
    return out


def _twiddle(n: int, exps: np.ndarray) -> np.ndarray:
    return np.exp(-2j * np.pi * exps / n)


def _fft_float(re: np.ndarray, im: np.ndarray, n_total: int) -> tuple[np.ndarray, np.ndarray]:
    """Radix-2^2 DIF recursion on (frames, N) arrays, double precision."""
    x = re + 1j * im
    out = _fft_r22_complex(x)
    return out.real, out.imag


def _fft_r22_complex(x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    if n == 1:
        return x
    if n == 2:
        return np.stack([x[:, 0] + x[:, 1], x[:, 0] - x[:, 1]], axis=1)
    q = n // 4
    idx = np.arange(q)
    a, b, c, d = x[:, idx], x[:, idx + q], x[:, idx + 2 * q], x[:, idx + 3 * q]
    # first butterfly stage (span N/2)
    t0, t1 = a + c, b + d
    t2, t3 = a - c, b - d
    # second stage with trivial -j rotation on the cross branch
    u0 = t0 + t1
    u1 = t0 - t1
    u2 = t2 - 1j * t3
    u3 = t2 + 1j * t3
    w = _twiddle(n, idx)
    sub0 = _fft_r22_complex(u0)
    sub1 = _fft_r22_complex(u2 * w)
    sub2 = _fft_r22_complex(u1 * _twiddle(n, 2 * idx))
    sub3 = _fft_r22_complex(u3 * _twiddle(n, 3 * idx))
    out = np.empty_like(x)
    out[:, 0::4] = sub0
    out[:, 1::4] = sub1
    out[:, 2::4] = sub2
    out[:, 3::4] = sub3
    return out


def _cmul_fixed(
    re: np.ndarray, im: np.ndarray, w_re: np.ndarray, w_im: np.ndarray, fmt: QFormat
) -> tuple[np.ndarray, np.ndarray]:
    rr = re * w_re - im * w_im
    ii = re * w_im + im * w_re
    return (
        saturate_array(rshift_round_even_array(rr, fmt.frac_bits), fmt),
        saturate_array(rshift_round_even_array(ii, fmt.frac_bits), fmt),
    )


def _half(v: np.ndarray) -> np.ndarray:
    return rshift_round_even_array(v, 1)


def _fft_r22_fixed(re: np.ndarray, im: np.ndarray, fmt: QFormat) -> tuple[np.ndarray, np.ndarray]:
    """Bit-accurate radix-2^2 recursion; every stage output halved."""
    n = re.shape[1]
    if n == 1:
        return re, im
    if n == 2:
        s_re = np.stack([_half(re[:, 0] + re[:, 1]), _half(re[:, 0] - re[:, 1])], axis=1)
        s_im = np.stack([_half(im[:, 0] + im[:, 1]), _half(im[:, 0] - im[:, 1])], axis=1)
        return saturate_array(s_re, fmt), saturate_array(s_im, fmt)
    q = n // 4
    idx = np.arange(q)

    def part(v: np.ndarray) -> tuple[np.ndarray, ...]:
        return v[:, idx], v[:, idx + q], v[:, idx + 2 * q], v[:, idx + 3 * q]

    ar, br, cr, dr = part(re)
    ai, bi, ci, di = part(im)
    # stage 1 (span N/2), halved
    t0r, t0i = _half(ar + cr), _half(ai + ci)
    t1r, t1i = _half(br + dr), _half(bi + di)
    t2r, t2i = _half(ar - cr), _half(ai - ci)
    t3r, t3i = _half(br - dr), _half(bi - di)
    # stage 2 (span N/4) with -j on the cross branch, halved
    u0r, u0i = _half(t0r + t1r), _half(t0i + t1i)
    u1r, u1i = _half(t0r - t1r), _half(t0i - t1i)
    u2r, u2i = _half(t2r + t3i), _half(t2i - t3r)  # (t2) - j*(t3)
    u3r, u3i = _half(t2r - t3i), _half(t2i + t3r)  # (t2) + j*(t3)
    branches = []
    for (vr, vi), mult in (((u0r, u0i), 0), ((u2r, u2i), 1), ((u1r, u1i), 2), ((u3r, u3i), 3)):
        vr, vi = saturate_array(vr, fmt), saturate_array(vi, fmt)
        if mult:
            w = _twiddle(n, mult * idx)
            # trivial rotations (1, -1, +-j) bypass the multiplier, as in
            # the hardware; only true twiddles go through the rounded
            # complex multiply with ROM coefficients
            wr_i = np.rint(w.real).astype(np.int64)
            wi_i = np.rint(w.imag).astype(np.int64)
            trivial = (np.abs(w.real - wr_i) < 1e-12) & (np.abs(w.imag - wi_i) < 1e-12)
            w_re = quantize_array(w.real, fmt)[np.newaxis, :]
            w_im = quantize_array(w.imag, fmt)[np.newaxis, :]
            mr, mi = _cmul_fixed(vr, vi, w_re, w_im, fmt)
            tr = vr * wr_i[np.newaxis, :] - vi * wi_i[np.newaxis, :]
            ti = vr * wi_i[np.newaxis, :] + vi * wr_i[np.newaxis, :]
            vr = np.where(trivial[np.newaxis, :], tr, mr)
            vi = np.where(trivial[np.newaxis, :], ti, mi)
        branches.append(_fft_r22_fixed(vr, vi, fmt))
    out_re = np.empty_like(re)
    out_im = np.empty_like(im)
    for r, (sr_, si_) in enumerate(branches):
        out_re[:, r::4] = sr_
        out_im[:, r::4] = si_
    return out_re, out_im


def fft_r22sdf(frames_re: np.ndarray, frames_im: np.ndarray, cfg: PipelineConfig) -> tuple[np.ndarray, np.ndarray]:
    """Radix-2^2 delay-feedback FFT over a batch of frames.

    Inputs are (n_frames, N): real samples in float mode, raw integers
    in fixed mode.  Output is in natural bin order.  Fixed mode has a
    total gain of 1/N from the per-stage halving.
    """
    n = frames_re.shape[1]
    if n not in ALLOWED_FFT_SIZES:
        raise InvalidSize(f"fft size must be one of {ALLOWED_FFT_SIZES}, got {n}")
    if cfg.mode == "float":
        return _fft_float(frames_re, frames_im, n)
    return _fft_r22_fixed(
        np.asarray(frames_re, dtype=np.int64),
        np.asarray(frames_im, dtype=np.int64),
        cfg.sample_format,
    )


def dft_reference(frame: np.ndarray) -> np.ndarray:
    """Direct O(N^2) DFT in double precision; the exactness oracle."""
    x = np.asarray(frame, dtype=np.complex128)
    n = len(x)
    k = np.arange(n)
    m = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return m @ x


def power_spectrum(spec_re: np.ndarray, spec_im: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """|X[k]|^2 for k = 0..N/2 over a batch of frames.

    Fixed mode squares raw values exactly into the widened energy
    format (fraction bits doubled), saturating the sum.
    """
    n = spec_re.shape[1]
    half = n // 2 + 1
    if cfg.mode == "float":
        return spec_re[:, :half] ** 2 + spec_im[:, :half] ** 2
    efmt = cfg.energy_format
    re = spec_re[:, :half].astype(np.int64)
    im = spec_im[:, :half].astype(np.int64)
    return saturate_array(re * re + im * im, efmt)


def mel_map(value: float, direction: str = "to_mel") -> float:
    """Mel scale map m = 2595 log10(1 + f/700) and its closed-form inverse."""
    if value < 0:
        raise NegativeInput(f"input must be >= 0, got {value}")
    if direction == "to_mel":
        return MEL_SCALE * math.log10(1.0 + value / MEL_BREAK_HZ)
    if direction == "to_hz":
        return MEL_BREAK_HZ * (10.0 ** (value / MEL_SCALE) - 1.0)
    raise ValueError(f"direction must be to_mel or to_hz, got {direction!r}")


def build_mel_filterbank(cfg: PipelineConfig) -> MelFilterbank:
    """Filterbank with edges equally spaced on the mel scale.

    Rectangular filters partition bins 1..N/2: each bin belongs to
    exactly one filter.  Triangular filters use the standard
    rising/falling weights peaking at the filter center.
    """
    n = cfg.fft_size
    half = n // 2
    if cfg.n_mel > half:
        raise TooManyFilters(f"n_mel {cfg.n_mel} > N/2 = {half}")
    mel_max = mel_map(cfg.sample_rate / 2.0)
    edges_mel = np.linspace(0.0, mel_max, cfg.n_mel + 2)
    edges_hz = np.array([mel_map(m, "to_hz") for m in edges_mel])
    bin_hz = np.arange(half + 1) * cfg.sample_rate / n
    weights = np.zeros((cfg.n_mel, half + 1))
    if cfg.mel_shape == "rectangular":
        # band boundaries sit midway (in mel) between adjacent triangular
        # centers, so both shapes share band centers; boundaries are
        # snapped outward just enough that every band keeps one bin
        bin_mel = np.array([mel_map(f) for f in bin_hz])
        step = mel_max / (cfg.n_mel + 1)
        targets = np.concatenate(
            ([0.0], (np.arange(1, cfg.n_mel) + 0.5) * step, [mel_max])
        )
        cuts = [1]
        for i in range(1, cfg.n_mel):
            ideal = int(np.searchsorted(bin_mel, targets[i]))
            lo = cuts[-1] + 1
            hi = half + 1 - (cfg.n_mel - i)  # leave room for the rest
            cuts.append(min(max(ideal, lo), hi))
        cuts.append(half + 1)
        for m in range(cfg.n_mel):
            weights[m, cuts[m] : cuts[m + 1]] = 1.0
    elif cfg.mel_shape == "triangular":
        for m in range(cfg.n_mel):
            lo, ctr, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
            rising = (bin_hz >= lo) & (bin_hz < ctr)
            falling = (bin_hz >= ctr) & (bin_hz <= hi)
            weights[m, rising] = (bin_hz[rising] - lo) / (ctr - lo)
            weights[m, falling] = (hi - bin_hz[falling]) / (hi - ctr)
    else:
        raise ValueError(f"unknown mel shape: {cfg.mel_shape!r}")
    if not all(w.any() for w in weights):
        raise TooManyFilters("some filters have empty support; reduce n_mel")
    return MelFilterbank(weights, edges_hz, cfg.mel_shape)


def mel_energies(power_bins: np.ndarray, fb: MelFilterbank, cfg: PipelineConfig) -> np.ndarray:
    """Per-filter weighted energy sums over a batch of frames."""
    if power_bins.shape[1] != fb.weights.shape[1]:
        raise DimensionMismatch(
            f"{power_bins.shape[1]} power bins vs {fb.weights.shape[1]} filter taps"
        )
    if cfg.mode == "float":
        return power_bins @ fb.weights.T
    efmt = cfg.energy_format
    if fb.shape == "rectangular":
        acc = power_bins @ fb.weights.T.astype(np.int64)
    else:
        # triangular weights quantized to the energy format's grid
        wq = quantize_array(fb.weights, QFormat(18, 16))
        prod = power_bins[:, np.newaxis, :] * wq[np.newaxis, :, :]
        acc = rshift_round_even_array(prod.sum(axis=2), 16)
    return saturate_array(acc, efmt)


def log_compress(energies: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """Base-2 log with a fixed floor (cfg.log_floor).

    Float mode is log2(max(e, eps)).  Fixed mode finds the MSB position
    and interpolates the fraction linearly from a 16-entry log table,
    rounding the result to 4 fraction bits.
    """
    eps = cfg.log_floor
    if cfg.mode == "float":
        return np.log2(np.maximum(energies, eps))
    efmt = cfg.energy_format
    floor_raw = max(1, int(round(eps * (1 << efmt.frac_bits))))
    flat = np.maximum(energies.reshape(-1), floor_raw)
    out = np.empty(flat.shape, dtype=np.float64)
    for i, e in enumerate(flat):
        msb = int(e).bit_length() - 1
        t = (int(e) - (1 << msb)) / (1 << msb)
        seg = min(int(t * 16), 15)
        fracpos = t * 16 - seg
        val = msb + _LOG_LUT[seg] + (_LOG_LUT[seg + 1] - _LOG_LUT[seg]) * fracpos
        out[i] = val
    out = out.reshape(energies.shape) - efmt.frac_bits
    return quantize_array(out, LOG_FORMAT)


def _dct_matrix(n_in: int, n_out: int) -> np.ndarray:
    k = np.arange(n_out)[:, np.newaxis]
    n = np.arange(n_in)[np.newaxis, :]
    return np.cos(np.pi * k * (2 * n + 1) / (2 * n_in))


def dct_ii(log_energies: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """DCT-II: c[k] = sum_n x[n] cos(pi k (2n+1) / 2M), k < n_mfcc.

    Fixed mode replaces each cosine with its two-term CSD form and
    applies it by shifts and adds on the raw log values.
    """
    if log_energies.shape[1] != cfg.n_mel:
        raise DimensionMismatch(
            f"expected {cfg.n_mel} log energies, got {log_energies.shape[1]}"
        )
    mat = _dct_matrix(cfg.n_mel, cfg.n_mfcc)
    if cfg.mode == "float":
        return log_energies @ mat.T
    acc_fmt = QFormat(min(32, LOG_FORMAT.total_bits + 4), LOG_FORMAT.frac_bits)
    out = np.zeros((log_energies.shape[0], cfg.n_mfcc), dtype=np.int64)
    for k in range(cfg.n_mfcc):
        acc = np.zeros(log_energies.shape[0], dtype=np.int64)
        for n in range(cfg.n_mel):
            approx = approx_csd(mat[k, n], 2, cfg.bit_width - 1)
            col = log_energies[:, n]
            for sign, shift in approx.terms:
                acc = acc + sign * (col >> shift)
            acc = saturate_array(acc, acc_fmt)
        out[:, k] = acc
    return out


def mfcc_pipeline(s: SignalBuffer, cfg: PipelineConfig) -> PipelineResult:
    """Run the full front end on one buffer; deterministic per config."""
    if s.sample_rate != cfg.sample_rate:
        raise DimensionMismatch(
            f"signal rate {s.sample_rate} != config rate {cfg.sample_rate}; decimate first"
        )
    pre_cfg = PreemphasisConfig(cfg.preemphasis_k)
    if cfg.mode == "float":
        x = preemphasis(s.samples, pre_cfg)
        frames = frame_and_window(x, cfg)
        sre, sim = fft_r22sdf(frames, np.zeros_like(frames), cfg)
        # normalize by 1/N so both modes share one spectral scale (the
        # fixed datapath's per-stage halving has the same total gain)
        sre, sim = sre / cfg.fft_size, sim / cfg.fft_size
        power = power_spectrum(sre, sim, cfg)
        fb = build_mel_filterbank(cfg)
        energies = mel_energies(power, fb, cfg)
        log_mel = log_compress(energies, cfg)
        mfcc = dct_ii(log_mel, cfg)
        power_real = power
    else:
        fmt = cfg.sample_format
        raw = quantize_array(s.samples, fmt)
        x = preemphasis(raw, pre_cfg, fmt)
        frames = frame_and_window(x, cfg)
        sre, sim = fft_r22sdf(frames, np.zeros_like(frames), cfg)
        power_raw = power_spectrum(sre, sim, cfg)
        fb = build_mel_filterbank(cfg)
        energies = mel_energies(power_raw, fb, cfg)
        log_raw = log_compress(energies, cfg)
        mfcc_raw = dct_ii(log_raw, cfg)
        power_real = to_real_array(power_raw, cfg.energy_format)
        log_mel = to_real_array(log_raw, LOG_FORMAT)
        mfcc = to_real_array(mfcc_raw, LOG_FORMAT)
    frames_out = tuple(MfccFrame(mfcc[i].copy(), i) for i in range(mfcc.shape[0]))
    return PipelineResult(frames_out, mfcc, log_mel, power_real, cfg)


def spectrogram_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Relative Frobenius distance ||A - B|| / ||B|| (B is the reference)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    ref = np.linalg.norm(b)
    if ref == 0:
        raise ZeroReference("reference spectrogram has zero norm")
    return float(np.linalg.norm(a - b) / ref)
