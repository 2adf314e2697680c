"""Sampled waveforms and the conditioning steps applied before beat detection.

The chain used by the pipeline is::

    resample -> lowpass (SCG) ; flow -> integrate_flow -> detrend_lv
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import integrate
from scipy import signal as sps

from .errors import InvalidArgument

__all__ = [
    "CHANNELS",
    "Waveform",
    "Recording",
    "LungVolume",
    "resample",
    "lowpass",
    "integrate_flow",
    "detrend_lv",
    "FILTER_ORDER",
    "ANTIALIAS_FRACTION",
]

CHANNELS = ("scg_x", "scg_y", "scg_z", "ecg", "flow")

FILTER_ORDER = 4
# anti-alias cutoff as a fraction of the *target* Nyquist frequency
ANTIALIAS_FRACTION = 0.45


def _rates_equal(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(abs(a), abs(b))


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled scalar signal.

    Parameters
    ----------
    samples : array_like
        Signal values (uncalibrated units, usually volts). Must be finite.
    rate : float
        Sampling rate in Hz.
    start_time : float
        Time of the first sample in seconds.
    """

    samples: np.ndarray
    rate: float
    start_time: float = 0.0

    def __post_init__(self):
        x = np.array(self.samples, dtype=float).ravel()
        rate = float(self.rate)
        if not np.isfinite(rate) or rate <= 0:
            raise InvalidArgument(f"sampling rate must be positive, got {self.rate!r}")
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise InvalidArgument(f"non-finite sample at index {bad}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "rate", rate)
        object.__setattr__(self, "start_time", float(self.start_time))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.rate

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.rate

    def with_samples(self, samples) -> "Waveform":
        """Same time base, new values."""
        return Waveform(samples, self.rate, self.start_time)


@dataclass(frozen=True, eq=False)
class LungVolume(Waveform):
    """Relative lung volume (volt-seconds) obtained by integrating flow."""

    detrended: bool = False

    @classmethod
    def from_waveform(cls, w: Waveform, detrended: bool = False) -> "LungVolume":
        return cls(w.samples, w.rate, w.start_time, detrended)

    def value_at(self, t) -> np.ndarray:
        """Nearest-sample lookup; raises if any ``t`` lies outside the record."""
        t = np.asarray(t, dtype=float)
        pos = (t - self.start_time) * self.rate
        idx = np.rint(pos).astype(int)
        outside = (pos < -0.5) | (pos > self.samples.size)
        if np.any(outside):
            bad = float(np.atleast_1d(t)[np.atleast_1d(outside)][0])
            raise InvalidArgument(
                f"time {bad:.6f} s outside lung-volume span "
                f"[{self.start_time:.6f}, {self.start_time + self.duration:.6f}] s"
            )
        return self.samples[np.clip(idx, 0, self.samples.size - 1)]


@dataclass(frozen=True, eq=False)
class Recording:
    """Set of simultaneously acquired channels sharing one time base."""

    channels: Mapping[str, Waveform]
    subject_meta: str = ""

    def __post_init__(self):
        chans = dict(self.channels)
        unknown = set(chans) - set(CHANNELS)
        if unknown:
            raise InvalidArgument(f"unknown channel ids: {sorted(unknown)}")
        if not chans:
            raise InvalidArgument("recording has no channels")
        ref = next(iter(chans.values()))
        for name, w in chans.items():
            if not _rates_equal(w.rate, ref.rate) or w.start_time != ref.start_time:
                raise InvalidArgument(f"channel {name!r} does not share the common time base")
            if len(w) != len(ref):
                raise InvalidArgument(f"channel {name!r} has {len(w)} samples, expected {len(ref)}")
        # keep a stable channel order
        ordered = {name: chans[name] for name in CHANNELS if name in chans}
        object.__setattr__(self, "channels", ordered)

    def __getitem__(self, name: str) -> Waveform:
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    @property
    def rate(self) -> float:
        return next(iter(self.channels.values())).rate


def _butter_sos(cutoff: float, rate: float) -> np.ndarray:
    return sps.butter(FILTER_ORDER, cutoff, btype="low", fs=rate, output="sos")


def _filtfilt(sos: np.ndarray, x: np.ndarray, cutoff: float, rate: float) -> np.ndarray:
    # pad by ~3 time constants of the filter, capped by the signal length
    padlen = max(3 * (2 * len(sos) + 1), int(round(3 * rate / cutoff)))
    return sps.sosfiltfilt(sos, x, padlen=min(padlen, x.size - 1))


def resample(w: Waveform, target_rate: float) -> Waveform:
    """Down-sample ``w`` to ``target_rate``.

    A zero-phase Butterworth low-pass at ``ANTIALIAS_FRACTION`` of the target
    Nyquist frequency is applied at the source rate, then the filtered signal
    is linearly interpolated at the output sample times. Works for
    non-integer ratios such as 10 kHz -> 320 Hz.

    Parameters
    ----------
    w : Waveform
    target_rate : float
        Output rate in Hz, ``0 < target_rate <= w.rate``.

    Returns
    -------
    Waveform
        Output with ``round(len(w) * target_rate / w.rate)`` samples and the
        same start time.
    """
    if len(w) == 0:
        raise InvalidArgument("cannot resample an empty waveform")
    target_rate = float(target_rate)
    if not np.isfinite(target_rate) or target_rate <= 0:
        raise InvalidArgument(f"target rate must be positive, got {target_rate!r}")
    if _rates_equal(target_rate, w.rate):
        return w
    if target_rate > w.rate:
        raise InvalidArgument(
            f"upsampling not supported ({w.rate:g} Hz -> {target_rate:g} Hz)"
        )

    cutoff = ANTIALIAS_FRACTION * target_rate / 2.0
    x = w.samples
    if x.size > 1:
        x = _filtfilt(_butter_sos(cutoff, w.rate), x, cutoff, w.rate)
    n_out = max(1, int(round(len(w) * target_rate / w.rate)))
    t_in = np.arange(len(w)) / w.rate
    t_out = np.arange(n_out) / target_rate
    return Waveform(np.interp(t_out, t_in, x), target_rate, w.start_time)


def lowpass(w: Waveform, cutoff: float) -> Waveform:
    """Zero-phase 4th-order Butterworth low-pass (forward-backward).

    The forward-backward pass squares the magnitude response and cancels the
    phase, so fiducial times are not shifted. DC gain is 1.
    """
    if len(w) == 0:
        raise InvalidArgument("cannot filter an empty waveform")
    nyq = w.rate / 2.0
    if not (0 < cutoff < nyq):
        raise InvalidArgument(f"cutoff must lie in (0, {nyq:g}) Hz, got {cutoff!r}")
    if len(w) < 2:
        return w
    sos = _butter_sos(cutoff, w.rate)
    return w.with_samples(_filtfilt(sos, w.samples, cutoff, w.rate))


def integrate_flow(flow: Waveform) -> LungVolume:
    """Cumulative trapezoidal integral of respiratory flow; ``LV[0] == 0``.

    Inspiration is positive flow, so lung volume rises while inhaling.
    """
    if len(flow) == 0:
        raise InvalidArgument("flow waveform is empty")
    lv = integrate.cumulative_trapezoid(flow.samples, dx=1.0 / flow.rate, initial=0.0)
    return LungVolume(lv, flow.rate, flow.start_time, False)


def detrend_lv(lv: Waveform) -> LungVolume:
    """Remove the least-squares linear trend, then the mean.

    Integrating real flow accumulates sensor offset as a ramp; removing it
    puts the volume zero-crossings where the high/low phase split expects them.
    """
    if len(lv) < 2:
        raise InvalidArgument("detrending needs at least 2 samples")
    y = sps.detrend(lv.samples, type="linear")
    y = y - y.mean()
    return LungVolume(y, lv.rate, lv.start_time, True)
