"""Synthetic cardiorespiratory recordings with known beat times.

Breathing is a half-sine inspiration followed by a half-sine expiration
with equal area, so every breath has zero net volume. Heart rate is
piecewise constant: one rate while the detrended lung volume is positive,
another while it is negative, with ``rsa_ratio`` between them. Beats come
from integrating that rate and firing on every whole cycle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .beat_detection import Phase
from .errors import InvalidArgument
from .signal_core import LungVolume, Recording, Waveform, detrend_lv, integrate_flow

__all__ = [
    "SynthConfig",
    "GroundTruth",
    "phase_rates",
    "flow_at",
    "gen_flow",
    "gen_lung_volume",
    "gen_beat_times",
    "scg_template",
    "ecg_template",
    "gen_scg",
    "gen_ecg",
    "gen_recording",
]

SCG_FREQ_HZ = 20.0
SCG_SIGMA_S = 0.02
SCG_HALF_WIDTH_S = 0.05
ECG_HALF_WIDTH_S = 0.01
HF_BURST_BAND_HZ = (120.0, 160.0)


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``snr_db`` is relative to the RMS of a single beat template over its
    support, so it does not depend on how many beats a record holds.
    ``math.inf`` (or ``None``) gives a noiseless record.
    """

    duration_s: float = 60.0
    sample_rate: float = 320.0
    resp_rate_bpm: float = 12.0
    ie_ratio: Tuple[float, float] = (1.0, 3.0)
    base_hr_bpm: float = 70.0
    rsa_ratio: float = 1.09
    snr_db: Optional[float] = 20.0
    seed: int = 0
    flow_amplitude: float = 1.0
    hf_burst_amplitude: float = 0.0

    def __post_init__(self):
        if not self.duration_s > 0:
            raise InvalidArgument("duration_s must be positive")
        if not self.sample_rate > 0:
            raise InvalidArgument("sample_rate must be positive")
        if not self.resp_rate_bpm > 0:
            raise InvalidArgument("resp_rate_bpm must be positive")
        if not self.base_hr_bpm > 0:
            raise InvalidArgument("base_hr_bpm must be positive")
        if not self.rsa_ratio > 0:
            raise InvalidArgument("rsa_ratio must be positive")
        ie = tuple(float(v) for v in self.ie_ratio)
        if len(ie) != 2 or not (ie[0] > 0 and ie[1] > 0):
            raise InvalidArgument("ie_ratio needs two positive parts")
        object.__setattr__(self, "ie_ratio", ie)
        if not self.flow_amplitude > 0:
            raise InvalidArgument("flow_amplitude must be positive")
        if self.hf_burst_amplitude < 0:
            raise InvalidArgument("hf_burst_amplitude must be non-negative")
        if self.hf_burst_amplitude > 0 and self.sample_rate <= 2 * HF_BURST_BAND_HZ[1]:
            raise InvalidArgument(
                f"high-frequency bursts need sample_rate > {2 * HF_BURST_BAND_HZ[1]:g} Hz"
            )
        snr = math.inf if self.snr_db is None else float(self.snr_db)
        if math.isnan(snr):
            raise InvalidArgument("snr_db must not be NaN")
        object.__setattr__(self, "snr_db", snr)

    @property
    def breath_period_s(self) -> float:
        return 60.0 / self.resp_rate_bpm

    @property
    def inspiration_s(self) -> float:
        i, e = self.ie_ratio
        return self.breath_period_s * i / (i + e)

    @property
    def n_samples(self) -> int:
        return max(1, int(round(self.duration_s * self.sample_rate)))

    @property
    def noiseless(self) -> bool:
        return math.isinf(self.snr_db)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Generated beats and the reference rates recomputed from them.

    The per-phase truths average ``60 / dt`` over consecutive beats that
    share a phase label; ``true_combined_bpm`` averages all of those pairs.
    ``rate_llv_bpm`` and ``rate_hlv_bpm`` are the generating rates.
    """

    beat_times: np.ndarray
    beat_phases: Tuple[Phase, ...]
    true_hr_llv_bpm: Optional[float]
    true_hr_hlv_bpm: Optional[float]
    true_combined_bpm: Optional[float]
    rate_llv_bpm: float
    rate_hlv_bpm: float
    hlv_duty: float

    @property
    def true_ratio(self) -> Optional[float]:
        if self.true_hr_llv_bpm is None or self.true_hr_hlv_bpm is None:
            return None
        return self.true_hr_hlv_bpm / self.true_hr_llv_bpm

    @classmethod
    def from_beats(cls, beat_times, beat_phases, rate_llv, rate_hlv, duty):
        t = np.asarray(beat_times, dtype=float)
        phases = tuple(Phase(p) for p in beat_phases)
        if np.any(np.diff(t) <= 0):
            raise InvalidArgument("beat times must be strictly increasing")
        per = {Phase.LLV: [], Phase.HLV: []}
        for k in range(t.size - 1):
            if phases[k] == phases[k + 1] and phases[k] in per:
                per[phases[k]].append(60.0 / (t[k + 1] - t[k]))
        both = per[Phase.LLV] + per[Phase.HLV]

        def mean(v):
            return math.fsum(v) / len(v) if v else None

        return cls(t, phases, mean(per[Phase.LLV]), mean(per[Phase.HLV]), mean(both),
                   float(rate_llv), float(rate_hlv), float(duty))


def phase_rates(base_hr_bpm: float, rsa_ratio: float, hlv_duty: float) -> Tuple[float, float]:
    """``(r_llv, r_hlv)`` with ``r_hlv / r_llv = rsa_ratio`` and duty-weighted mean ``base``."""
    r_llv = base_hr_bpm / (hlv_duty * rsa_ratio + (1.0 - hlv_duty))
    return r_llv, r_llv * rsa_ratio


def flow_at(t, cfg: SynthConfig) -> np.ndarray:
    """Analytic flow: positive half-sine while inhaling, negative while exhaling.

    Expiratory amplitude is scaled by ``Ti / Te`` so both lobes have area
    ``2 * A * Ti / pi``.
    """
    t = np.asarray(t, dtype=float)
    period = cfg.breath_period_s
    ti = cfg.inspiration_s
    te = period - ti
    a = cfg.flow_amplitude
    tau = np.mod(t, period)
    insp = tau < ti
    out = np.empty_like(tau)
    out[insp] = a * np.sin(np.pi * tau[insp] / ti)
    out[~insp] = -a * (ti / te) * np.sin(np.pi * (tau[~insp] - ti) / te)
    return out


def gen_flow(cfg: SynthConfig) -> Waveform:
    t = np.arange(cfg.n_samples) / cfg.sample_rate
    return Waveform(flow_at(t, cfg), cfg.sample_rate)


def gen_lung_volume(cfg: SynthConfig) -> LungVolume:
    return detrend_lv(integrate_flow(gen_flow(cfg)))


def gen_beat_times(cfg: SynthConfig, lv: Optional[LungVolume] = None) -> GroundTruth:
    """Integrate-and-fire beats over the phase-switched rate.

    The rate is held constant over each sample interval, so beat instants
    inside an interval are solved exactly rather than snapped to samples.
    """
    if lv is None:
        lv = gen_lung_volume(cfg)
    v = lv.samples
    hlv_mask = v > 0
    duty = float(hlv_mask.mean())
    r_llv, r_hlv = phase_rates(cfg.base_hr_bpm, cfg.rsa_ratio, duty)

    dt = 1.0 / lv.rate
    rate_hz = np.where(hlv_mask, r_hlv, r_llv) / 60.0
    cycles = np.concatenate(([0.0], np.cumsum(rate_hz * dt)))
    n_beats = int(np.floor(cycles[-1]))
    targets = np.arange(1, n_beats + 1, dtype=float)
    # interval k spans cycles[k]..cycles[k+1]
    k = np.searchsorted(cycles, targets, side="left") - 1
    k = np.clip(k, 0, rate_hz.size - 1)
    times = lv.start_time + k * dt + (targets - cycles[k]) / rate_hz[k]
    times = times[times < lv.start_time + lv.duration]

    labels = np.where(lv.value_at(times) > 0, Phase.HLV.value, Phase.LLV.value) if times.size else []
    return GroundTruth.from_beats(times, labels, r_llv, r_hlv, duty)


def scg_template(t) -> np.ndarray:
    """Gaussian-damped 20 Hz oscillation, ~0.1 s long, centred on ``t = 0``."""
    t = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * (t / SCG_SIGMA_S) ** 2) * np.cos(2 * np.pi * SCG_FREQ_HZ * t)
    out[np.abs(t) > SCG_HALF_WIDTH_S] = 0.0
    return out


def ecg_template(t) -> np.ndarray:
    """Unit triangular R spike, 20 ms base, apex at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    return np.clip(1.0 - np.abs(t) / ECG_HALF_WIDTH_S, 0.0, None)


def _template_rms(template, half_width: float) -> float:
    t = np.linspace(-half_width, half_width, 20001)
    return float(np.sqrt(np.mean(template(t) ** 2)))


def _place(template, half_width: float, beat_times, n: int, rate: float) -> np.ndarray:
    out = np.zeros(n)
    span = int(math.ceil(half_width * rate)) + 1
    for tb in beat_times:
        centre = int(round(tb * rate))
        lo, hi = max(0, centre - span), min(n, centre + span + 1)
        if lo >= hi:
            continue
        idx = np.arange(lo, hi)
        out[lo:hi] += template(idx / rate - tb)
    return out


def _noise(cfg: SynthConfig, stream: int, rms: float) -> np.ndarray:
    if cfg.noiseless:
        return np.zeros(cfg.n_samples)
    rng = np.random.default_rng([cfg.seed, stream])
    sigma = rms / 10.0 ** (cfg.snr_db / 20.0)
    return rng.normal(0.0, sigma, cfg.n_samples)


def _hf_bursts(cfg: SynthConfig) -> np.ndarray:
    """Sine bursts in the 120-160 Hz band during each inspiration."""
    n = cfg.n_samples
    out = np.zeros(n)
    if cfg.hf_burst_amplitude <= 0:
        return out
    rng = np.random.default_rng([cfg.seed, 3])
    t = np.arange(n) / cfg.sample_rate
    period, ti = cfg.breath_period_s, cfg.inspiration_s
    for start in np.arange(0.0, cfg.duration_s, period):
        f = rng.uniform(*HF_BURST_BAND_HZ)
        m = (t >= start) & (t < start + ti)
        win = np.sin(np.pi * (t[m] - start) / ti)
        out[m] += cfg.hf_burst_amplitude * win * np.sin(2 * np.pi * f * (t[m] - start))
    return out


def gen_scg(truth: GroundTruth, cfg: SynthConfig) -> Waveform:
    """One SCG wavelet per beat plus white noise (and optional HF bursts)."""
    x = _place(scg_template, SCG_HALF_WIDTH_S, truth.beat_times, cfg.n_samples, cfg.sample_rate)
    x += _noise(cfg, 1, _template_rms(scg_template, SCG_HALF_WIDTH_S))
    x += _hf_bursts(cfg)
    return Waveform(x, cfg.sample_rate)


def gen_ecg(truth: GroundTruth, cfg: SynthConfig) -> Waveform:
    """One triangular R spike per beat plus white noise."""
    x = _place(ecg_template, ECG_HALF_WIDTH_S, truth.beat_times, cfg.n_samples, cfg.sample_rate)
    x += _noise(cfg, 2, _template_rms(ecg_template, ECG_HALF_WIDTH_S))
    return Waveform(x, cfg.sample_rate)


def gen_recording(cfg: SynthConfig, label: Optional[str] = None) -> Tuple[Recording, GroundTruth]:
    """Flow, SCG (z axis) and ECG channels plus the beat ground truth."""
    flow = gen_flow(cfg)
    truth = gen_beat_times(cfg, detrend_lv(integrate_flow(flow)))
    channels = {
        "scg_z": gen_scg(truth, cfg),
        "ecg": gen_ecg(truth, cfg),
        "flow": flow,
    }
    return Recording(channels, label or f"synth-seed{cfg.seed}"), truth


def with_seed(cfg: SynthConfig, seed: int) -> SynthConfig:
    return replace(cfg, seed=int(seed))
