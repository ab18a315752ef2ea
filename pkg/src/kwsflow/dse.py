"""Deterministic design-space exploration for the MFCC front end.

Each select_* routine walks its candidate list from cheapest to most
expensive and returns the first candidate meeting the stated criterion,
so the result is the minimal feasible choice by construction.  run_dse
chains the six decisions in a fixed order, threading each choice into
the working design point, and emits a self-contained JSON-able report.
Interactions between stages are resolved greedily, not jointly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus import CORPUS_VERSION, corpus_digest, corpus_signals
from .errors import (
    DegenerateInput,
    InvalidFactor,
    InvalidSize,
    NoFeasiblePoint,
)
from .frontend import (
    ALLOWED_FFT_SIZES,
    MelShape,
    PipelineConfig,
    WindowPolicy,
    mfcc_pipeline,
    spectrogram_distance,
    window_coefficients,
)
from .signal import SignalBuffer, band_power_fraction, decimate, read_wav, spectral_leakage

RATE_CANDIDATES = (4000, 8000, 16000, 44100)
BIT_CANDIDATES = tuple(range(4, 17))
ALPHA_CANDIDATES = (3, 4, 5, 6)
# cheapest first, by adder-term count of the quantized window network
WINDOW_CANDIDATES: tuple[WindowPolicy, ...] = (
    "rectangular",
    "single_shift",
    "csd2",
    "exact",
)
FFT_CANDIDATES = (16, 32, 64, 128, 256)

REFERENCE_FFT = 256
# one LSB of the reference energy word; frames below this are silence
ENERGY_FLOOR = 2.0 ** -12


@dataclass(frozen=True)
class DesignPoint:
    """One configuration of the front end under exploration."""

    sample_rate: int = 8000
    bit_width: int = 7
    preemphasis_k: int = 5
    fft_size: int = 32
    window_policy: WindowPolicy = "exact"
    mel_shape: MelShape = "rectangular"
    n_mel: int = 8
    n_mfcc: int = 8

    def __post_init__(self) -> None:
        if self.sample_rate not in RATE_CANDIDATES:
            raise InvalidSize(f"sample_rate must be one of {RATE_CANDIDATES}")
        if not 4 <= self.bit_width <= 16:
            raise InvalidSize("bit_width must be in 4..16")
        if self.fft_size not in ALLOWED_FFT_SIZES:
            raise InvalidSize(f"fft_size must be one of {ALLOWED_FFT_SIZES}")

    def pipeline_config(self, **overrides) -> PipelineConfig:
        base = dict(
            sample_rate=self.sample_rate,
            bit_width=self.bit_width,
            preemphasis_k=self.preemphasis_k,
            fft_size=self.fft_size,
            window_policy=self.window_policy,
            mel_shape=self.mel_shape,
            n_mel=self.n_mel,
            n_mfcc=self.n_mfcc,
            mode="fixed",
        )
        base.update(overrides)
        return PipelineConfig(**base)

    def as_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "bit_width": self.bit_width,
            "preemphasis_k": self.preemphasis_k,
            "fft_size": self.fft_size,
            "window_policy": self.window_policy,
            "mel_shape": self.mel_shape,
            "n_mel": self.n_mel,
            "n_mfcc": self.n_mfcc,
        }


@dataclass(frozen=True)
class DesignMetrics:
    power_proxy: float
    area_proxy: float
    power_retention: float
    dc_bin_fraction: float
    leakage: float
    spectro_error: float
    mel_shape_delta: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "power_proxy", "area_proxy", "power_retention",
            "dc_bin_fraction", "leakage", "spectro_error",
            "mel_shape_delta")}


@dataclass
class DseReport:
    corpus_digest: str
    decisions: list[dict] = field(default_factory=list)
    chosen_point: DesignPoint | None = None
    cost: dict | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "corpus_digest": self.corpus_digest,
            "decisions": self.decisions,
            "chosen_point": self.chosen_point.as_dict() if self.chosen_point else None,
            "cost": self.cost,
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def cost_model(p: DesignPoint) -> tuple[float, float]:
    """Power and area proxies, 1.0 each at the reference point."""
    butterfly = p.fft_size * math.log2(p.fft_size) / (32 * 5)
    width = p.bit_width / 7
    power = (p.sample_rate / 8000) * width * butterfly
    area = width * butterfly
    return power, area


def _mean_distance(corpus, cfg_a: PipelineConfig, cfg_b: PipelineConfig) -> float:
    """Corpus-average log-mel distance between two pipeline configs.

    Frame counts can differ when the FFT sizes differ; compare on the
    common leading frames (both configs must use the same hop).
    """
    vals = []
    for s in corpus:
        la = mfcc_pipeline(s, cfg_a).log_mel
        lb = mfcc_pipeline(s, cfg_b).log_mel
        n = min(la.shape[0], lb.shape[0])
        vals.append(spectrogram_distance(la[:n], lb[:n]))
    return float(np.mean(vals))


def top_peak_bins(power_row: np.ndarray, max_peaks: int = 3) -> list[int]:
    """Dominant peak bins of one power-spectrum frame.

    A bin qualifies if it is a local maximum over bins 1..N/2 (DC is
    excluded; the last bin needs only its left neighbor) and its power
    is at least a quarter of the strongest peak's, i.e. its magnitude is
    within half of the maximum.  The top max_peaks by power are
    returned, largest first.
    """
    half = len(power_row) - 1
    cand = []
    for k in range(1, half + 1):
        if power_row[k] <= power_row[k - 1]:
            continue
        if k < half and power_row[k] <= power_row[k + 1]:
            continue
        cand.append(k)
    if not cand:
        return []
    pmax = max(power_row[k] for k in cand)
    cand = [k for k in cand if power_row[k] >= pmax / 4.0]
    cand.sort(key=lambda k: -power_row[k])
    return cand[:max_peaks]


# ---------------------------------------------------------------------------
# decision stages;  each _decide_* returns (choice, log entry)
# ---------------------------------------------------------------------------

def _decide_bandwidth(corpus, retention_min: float) -> tuple[int, dict]:
    values = {}
    choice = None
    for rate in RATE_CANDIDATES:
        fr = [band_power_fraction(s, rate / 2) for s in corpus]
        values[rate] = float(np.mean(fr))
        if choice is None and values[rate] >= retention_min:
            choice = rate
    if choice is None:
        raise NoFeasiblePoint("no candidate rate retains enough band power")
    entry = {
        "criterion": "bandwidth",
        "parameter": "sample_rate",
        "threshold": retention_min,
        "candidates": [
            {"value": r, "retention": values[r], "feasible": values[r] >= retention_min}
            for r in RATE_CANDIDATES
        ],
        "selection": choice,
    }
    return choice, entry


def select_bandwidth(corpus, retention_min: float = 0.90) -> int:
    return _decide_bandwidth(corpus, retention_min)[0]


def _bitwidth_worst(corpus, p: DesignPoint, b: int) -> tuple[bool, float]:
    """Peak-set stability and worst peak-magnitude error at width b."""
    sets_match = True
    worst = 0.0
    for s in corpus:
        pf = mfcc_pipeline(s, p.pipeline_config(bit_width=b, mode="float")).power
        px = mfcc_pipeline(s, p.pipeline_config(bit_width=b, mode="fixed")).power
        for i in range(pf.shape[0]):
            ref = top_peak_bins(pf[i])
            if set(ref) != set(top_peak_bins(px[i])):
                sets_match = False
                continue
            for k in ref:
                mf = math.sqrt(pf[i][k])
                mx = math.sqrt(px[i][k])
                worst = max(worst, abs(mx - mf) / mf)
    return sets_match, worst


def _decide_bitwidth(corpus, p: DesignPoint, err_max: float = 0.10) -> tuple[int, dict]:
    cands = []
    choice = None
    for b in BIT_CANDIDATES:
        ok_sets, worst = _bitwidth_worst(corpus, p, b)
        feasible = ok_sets and worst <= err_max
        cands.append({
            "value": b,
            "peak_sets_match": ok_sets,
            "worst_peak_error": worst,
            "feasible": feasible,
        })
        if feasible:
            choice = b
            break
    if choice is None:
        raise NoFeasiblePoint("no bit width preserves the spectral peaks")
    entry = {
        "criterion": "bitwidth",
        "parameter": "bit_width",
        "threshold": err_max,
        "candidates": cands,
        "selection": choice,
    }
    return choice, entry


def select_bitwidth(corpus, p: DesignPoint) -> int:
    return _decide_bitwidth(corpus, p)[0]


def _decide_alpha(corpus, p: DesignPoint, frac_max: float = 0.01) -> tuple[int, dict]:
    cands = []
    choice = None
    for k in ALPHA_CANDIDATES:
        fracs = []
        total = 0.0
        for s in corpus:
            pw = mfcc_pipeline(
                s, p.pipeline_config(preemphasis_k=k, mode="float")).power
            den = pw.sum(axis=1)
            total += float(den.sum())
            keep = den > 0
            fracs.extend((pw[keep, :2].sum(axis=1) / den[keep]).tolist())
        if not fracs or total < ENERGY_FLOOR:
            raise DegenerateInput(
                f"post-filter corpus energy below floor at k={k}")
        frac = float(np.mean(fracs))
        feasible = frac <= frac_max
        cands.append({"value": k, "dc_bin_fraction": frac, "feasible": feasible})
        if feasible:
            choice = k
            break
    if choice is None:
        raise NoFeasiblePoint("no filter strength suppresses the DC bins")
    omega = 2 * math.pi * 1000 / p.sample_rate
    alpha = 1 - 2.0 ** -choice
    gain = abs(1 - alpha * complex(math.cos(omega), -math.sin(omega)))
    entry = {
        "criterion": "dc_suppression",
        "parameter": "preemphasis_k",
        "threshold": frac_max,
        "candidates": cands,
        "selection": choice,
        "passband_gain_1khz_db": 20 * math.log10(gain),
    }
    return choice, entry


def select_alpha(corpus, p: DesignPoint) -> int:
    return _decide_alpha(corpus, p)[0]


def _adder_terms(policy: WindowPolicy, n: int, bit_width: int) -> int:
    spec = window_coefficients(n, policy, bit_width)
    if policy == "exact":
        # full multiplier per tap; strictly costlier than any shift-add
        return n * bit_width
    return sum(len(a.terms) for a in spec.approxs if a is not None)


def _decide_window(
    p: DesignPoint,
    policies: tuple[WindowPolicy, ...] = WINDOW_CANDIDATES,
    leak_max: float = 0.10,
) -> tuple[WindowPolicy, dict]:
    order = sorted(policies, key=lambda pol: _adder_terms(pol, p.fft_size, p.bit_width))
    cands = []
    choice = None
    for pol in order:
        spec = window_coefficients(p.fft_size, pol, p.bit_width)
        leak = spectral_leakage(spec.values)
        feasible = leak <= leak_max
        cands.append({"value": pol, "leakage": leak, "feasible": feasible})
        if choice is None and feasible:
            choice = pol
    if choice is None:
        raise NoFeasiblePoint("no window policy meets the leakage bound")
    entry = {
        "criterion": "window_leakage",
        "parameter": "window_policy",
        "threshold": leak_max,
        "candidates": cands,
        "selection": choice,
    }
    return choice, entry


def select_window_policy(
    p: DesignPoint,
    policies: tuple[WindowPolicy, ...] = WINDOW_CANDIDATES,
) -> WindowPolicy:
    return _decide_window(p, policies)[0]


def _decide_fft_size(corpus, p: DesignPoint, loss_max: float = 0.25) -> tuple[int, dict]:
    hop = REFERENCE_FFT // 2
    ref = p.pipeline_config(fft_size=REFERENCE_FFT, frame_hop=hop, mode="float")
    cands = []
    choice = None
    for n in FFT_CANDIDATES:
        cfg = p.pipeline_config(fft_size=n, frame_hop=hop, mode="fixed")
        loss = _mean_distance(corpus, cfg, ref)
        feasible = loss <= loss_max
        cands.append({"value": n, "loss": loss, "feasible": feasible})
        if feasible:
            choice = n
            break
    if choice is None:
        raise NoFeasiblePoint("even the reference size exceeds the loss bound")
    entry = {
        "criterion": "fft_loss",
        "parameter": "fft_size",
        "threshold": loss_max,
        "candidates": cands,
        "selection": choice,
    }
    return choice, entry


def select_fft_size(corpus, p: DesignPoint, loss_max: float = 0.25) -> int:
    return _decide_fft_size(corpus, p, loss_max)[0]


def _decide_mel_shape(corpus, p: DesignPoint, delta_max: float = 0.05) -> tuple[MelShape, dict]:
    rect = p.pipeline_config(mel_shape="rectangular", mode="fixed")
    tri = p.pipeline_config(mel_shape="triangular", mode="fixed")
    delta = _mean_distance(corpus, rect, tri)
    choice: MelShape = "rectangular" if delta <= delta_max else "triangular"
    entry = {
        "criterion": "mel_shape_delta",
        "parameter": "mel_shape",
        "threshold": delta_max,
        "candidates": [
            {"value": "rectangular", "delta": delta, "feasible": delta <= delta_max},
            {"value": "triangular", "delta": 0.0, "feasible": True},
        ],
        "selection": choice,
    }
    return choice, entry


def select_mel_shape(corpus, p: DesignPoint, delta_max: float = 0.05) -> MelShape:
    return _decide_mel_shape(corpus, p, delta_max)[0]


def evaluate_point(p: DesignPoint, corpus) -> DesignMetrics:
    """All metric fields of one design point against the bundled criteria."""
    if not corpus:
        raise DegenerateInput("corpus is empty")
    power, area = cost_model(p)
    retention = float(np.mean(
        [band_power_fraction(s, p.sample_rate / 2) for s in corpus]))
    fracs = []
    for s in corpus:
        pw = mfcc_pipeline(s, p.pipeline_config(mode="float")).power
        den = pw.sum(axis=1)
        keep = den > 0
        fracs.extend((pw[keep, :2].sum(axis=1) / den[keep]).tolist())
    dc_frac = float(np.mean(fracs)) if fracs else 0.0
    leak = spectral_leakage(
        window_coefficients(p.fft_size, p.window_policy, p.bit_width).values)
    hop = REFERENCE_FFT // 2
    err = _mean_distance(
        corpus,
        p.pipeline_config(frame_hop=hop, mode="fixed"),
        p.pipeline_config(fft_size=REFERENCE_FFT, frame_hop=hop, mode="float"),
    )
    delta = _mean_distance(
        corpus,
        p.pipeline_config(mel_shape="rectangular", mode="fixed"),
        p.pipeline_config(mel_shape="triangular", mode="fixed"),
    )
    return DesignMetrics(
        power_proxy=power,
        area_proxy=area,
        power_retention=retention,
        dc_bin_fraction=dc_frac,
        leakage=leak,
        spectro_error=err,
        mel_shape_delta=delta,
    )


def pareto_front(points: list[tuple[DesignPoint, DesignMetrics]]) -> list[tuple[DesignPoint, DesignMetrics]]:
    """Non-dominated subset under (power_proxy, area_proxy, spectro_error)."""
    def key(m: DesignMetrics) -> tuple[float, float, float]:
        return (m.power_proxy, m.area_proxy, m.spectro_error)

    def dominates(a, b) -> bool:
        ka, kb = key(a), key(b)
        return all(x <= y for x, y in zip(ka, kb)) and ka != kb

    return [
        (p, m) for p, m in points
        if not any(dominates(m2, m) for _, m2 in points)
    ]


# ---------------------------------------------------------------------------
# corpus sources and the full exploration run
# ---------------------------------------------------------------------------

class _BundledCorpus:
    digest = None  # set lazily

    def __init__(self) -> None:
        self.digest = corpus_digest()

    def native(self) -> list[SignalBuffer]:
        return corpus_signals(44100)

    def at_rate(self, rate: int) -> list[SignalBuffer]:
        return corpus_signals(rate)


class _DirectoryCorpus:
    def __init__(self, path: Path) -> None:
        self.paths = sorted(path.glob("*.wav"))
        if not self.paths:
            raise FileNotFoundError(f"no .wav files under {path}")
        self.buffers = [read_wav(f) for f in self.paths]
        h = hashlib.sha256()
        for f in self.paths:
            h.update(f.name.encode())
            h.update(f.read_bytes())
        self.digest = h.hexdigest()

    def native(self) -> list[SignalBuffer]:
        return self.buffers

    def at_rate(self, rate: int) -> list[SignalBuffer]:
        out = []
        for b in self.buffers:
            if b.sample_rate == rate:
                out.append(b)
            elif b.sample_rate % rate == 0:
                out.append(decimate(b, b.sample_rate // rate))
            else:
                raise InvalidFactor(
                    f"cannot resample {b.sample_rate} Hz to {rate} Hz "
                    "by an integer factor")
        return out


class DseStageError(Exception):
    """A selection stage failed; .report carries the partial decision log."""

    def __init__(self, cause: Exception, report: DseReport) -> None:
        super().__init__(str(cause))
        self.cause = cause
        self.report = report


def run_dse(corpus_dir: str | Path | None = None, config: dict | None = None) -> DseReport:
    """Run all six selection stages in order and report the chosen point.

    corpus_dir of None uses the bundled corpus; otherwise the directory
    must hold mono 16-bit WAV files.  config may override the criterion
    thresholds: retention_min, err_max, frac_max, leak_max, loss_max,
    delta_max.
    """
    cfg = {
        "retention_min": 0.90,
        "err_max": 0.10,
        "frac_max": 0.01,
        "leak_max": 0.10,
        "loss_max": 0.25,
        "delta_max": 0.05,
    }
    cfg.update(config or {})
    if corpus_dir is None:
        source = _BundledCorpus()
    else:
        path = Path(corpus_dir)
        if not path.is_dir():
            raise FileNotFoundError(f"corpus directory not found: {corpus_dir}")
        source = _DirectoryCorpus(path)

    report = DseReport(corpus_digest=source.digest)
    p = DesignPoint()
    try:
        rate, entry = _decide_bandwidth(source.native(), cfg["retention_min"])
        report.decisions.append(entry)
        p = replace(p, sample_rate=rate)
        working = source.at_rate(rate)

        b, entry = _decide_bitwidth(working, p, cfg["err_max"])
        report.decisions.append(entry)
        p = replace(p, bit_width=b)

        k, entry = _decide_alpha(working, p, cfg["frac_max"])
        report.decisions.append(entry)
        p = replace(p, preemphasis_k=k)

        pol, entry = _decide_window(p, WINDOW_CANDIDATES, cfg["leak_max"])
        report.decisions.append(entry)
        p = replace(p, window_policy=pol)

        n, entry = _decide_fft_size(working, p, cfg["loss_max"])
        report.decisions.append(entry)
        p = replace(p, fft_size=n)

        shape, entry = _decide_mel_shape(working, p, cfg["delta_max"])
        report.decisions.append(entry)
        p = replace(p, mel_shape=shape)
    except Exception as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        raise DseStageError(exc, report) from exc

    power, area = cost_model(p)
    report.chosen_point = p
    report.cost = {"power_proxy": power, "area_proxy": area}
    return report
