"""ECG reference heart rate and Bland-Altman agreement."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .beat_detection import BeatEvent
from .errors import NoDataError
from .phase_hr import GateConfig, analyze_events
from .signal_core import LungVolume

__all__ = [
    "LOA_MULTIPLIER",
    "AgreementReport",
    "ecg_combined_hr",
    "ungated_hr",
    "bland_altman",
]

LOA_MULTIPLIER = 1.96


@dataclass(frozen=True)
class AgreementReport:
    """Bland-Altman summary of ``a - b``.

    Attributes
    ----------
    pairs : tuple of (label, hr_a_bpm, hr_b_bpm)
    bias_bpm : float
        Mean difference.
    sd_bpm : float
        Sample SD (ddof=1) of the differences.
    loa_low_bpm, loa_high_bpm : float
        ``bias -/+ multiplier * sd``.
    """

    pairs: Tuple[Tuple[str, float, float], ...]
    bias_bpm: float
    sd_bpm: float
    loa_low_bpm: float
    loa_high_bpm: float
    multiplier: float = LOA_MULTIPLIER

    @property
    def differences(self) -> np.ndarray:
        return np.array([a - b for _, a, b in self.pairs], dtype=float)

    @property
    def means(self) -> np.ndarray:
        return np.array([(a + b) / 2 for _, a, b in self.pairs], dtype=float)


def ecg_combined_hr(ecg_events: Sequence[BeatEvent], lv: LungVolume,
                    gate: GateConfig = GateConfig()) -> float:
    """Combined HR from ECG beats, run through the same phase gating as SCG.

    Using the identical pipeline keeps the comparison about the sensor,
    not about a different averaging rule.
    """
    comb = analyze_events(ecg_events, lv, gate).summary.combined_bpm
    if comb is None:
        raise NoDataError("no retained ECG HR samples")
    return comb


def ungated_hr(events: Sequence[BeatEvent]) -> float:
    """Mean of ``60 / dt`` over every consecutive pair, ignoring phase and gate."""
    t = np.array([e.time for e in events], dtype=float)
    if t.size < 2:
        raise NoDataError("need at least two events")
    return math.fsum(60.0 / np.diff(t)) / (t.size - 1)


def bland_altman(hr_a: Sequence[float], hr_b: Sequence[float],
                 labels: Optional[Sequence[str]] = None,
                 multiplier: float = LOA_MULTIPLIER) -> AgreementReport:
    """Bias and limits of agreement between two paired HR series.

    Differences are ``a - b``. Needs at least two pairs.

    Examples
    --------
    >>> r = bland_altman([70, 72, 68], [70, 70, 70])
    >>> round(r.bias_bpm, 6), round(r.sd_bpm, 6)
    (0.0, 2.0)
    """
    a = np.asarray(hr_a, dtype=float)
    b = np.asarray(hr_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("hr_a and hr_b must be 1-D sequences of equal length")
    if a.size < 2:
        raise NoDataError("Bland-Altman analysis needs at least two pairs")
    if labels is None:
        labels = [str(i) for i in range(a.size)]
    elif len(labels) != a.size:
        raise ValueError("labels length does not match the number of pairs")

    d = a - b
    bias = math.fsum(d) / d.size
    sd = math.sqrt(math.fsum((d - bias) ** 2) / (d.size - 1))
    half = multiplier * sd
    pairs = tuple((str(lab), float(x), float(y)) for lab, x, y in zip(labels, a, b))
    return AgreementReport(pairs, bias, sd, bias - half, bias + half, multiplier)
