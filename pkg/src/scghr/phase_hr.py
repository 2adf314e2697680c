"""Lung-volume phase gating of beat events and per-phase heart rate.

Events are split by the sign of the (detrended) lung volume at their time:
positive volume is the high lung-volume (HLV) group, negative the low
(LLV) group. Inside each group, every pair of consecutive events yields an
instantaneous rate ``60 / dt`` in bpm. Consecutive events that belong to
two different breath cycles sit a whole opposite phase apart, so their
rate comes out implausibly low; a floor (50 bpm by default) discards them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .beat_detection import BeatEvent, Phase
from .errors import InvalidArgument, NoDataError
from .signal_core import LungVolume

__all__ = [
    "GateConfig",
    "HrSample",
    "DiscardedSample",
    "PhaseHrSeries",
    "PhaseGroups",
    "PhaseStats",
    "PhaseSummary",
    "PhaseAnalysis",
    "BELOW_GATE",
    "classify_events",
    "pairwise_hr",
    "combined_hr",
    "phase_stats",
    "summarize",
    "hlv_llv_ratio",
    "analyze_events",
]

BELOW_GATE = "below-gate"


@dataclass(frozen=True)
class GateConfig:
    hr_min_bpm: float = 50.0
    lv_zero_epsilon: float = 0.0

    def __post_init__(self):
        if not self.hr_min_bpm > 0:
            raise InvalidArgument("hr_min_bpm must be positive")
        if not self.lv_zero_epsilon >= 0:
            raise InvalidArgument("lv_zero_epsilon must be non-negative")


class HrSample(NamedTuple):
    pair_time: float  # midpoint of the two events
    hr_bpm: float


class DiscardedSample(NamedTuple):
    pair_time: float
    hr_bpm: float
    reason: str


@dataclass(frozen=True)
class PhaseHrSeries:
    phase: Phase
    samples: Tuple[HrSample, ...] = ()
    discarded: Tuple[DiscardedSample, ...] = ()

    @property
    def hr(self) -> np.ndarray:
        return np.array([s.hr_bpm for s in self.samples], dtype=float)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class PhaseGroups:
    llv: List[BeatEvent]
    hlv: List[BeatEvent]
    dropped: List[BeatEvent] = field(default_factory=list)


@dataclass(frozen=True)
class PhaseStats:
    """Mean and sample SD (ddof=1) of one phase's retained HR samples.

    ``mean_bpm`` is ``None`` for an empty series. With a single sample the SD
    is reported as 0 and ``sd_flagged`` is set.
    """

    mean_bpm: Optional[float]
    sd_bpm: Optional[float]
    count: int
    sd_flagged: bool = False


@dataclass(frozen=True)
class PhaseSummary:
    llv: PhaseStats
    hlv: PhaseStats
    combined_bpm: Optional[float]
    ratio_hlv_llv: Optional[float]

    @property
    def counts(self) -> Tuple[int, int]:
        """``(m, n)``: retained LLV and HLV sample counts."""
        return self.llv.count, self.hlv.count


def classify_events(events: Sequence[BeatEvent], lv: LungVolume,
                    gate: GateConfig = GateConfig()) -> PhaseGroups:
    """Assign each event to the HLV or LLV group by lung-volume sign.

    The volume is read at the nearest sample to each event time. Values
    strictly above ``+lv_zero_epsilon`` go to HLV, strictly below
    ``-lv_zero_epsilon`` to LLV; anything in between is dropped. Order is
    preserved within each group.
    """
    if not events:
        return PhaseGroups([], [], [])
    values = lv.value_at([e.time for e in events])
    eps = gate.lv_zero_epsilon
    llv, hlv, dropped = [], [], []
    for ev, v in zip(events, values):
        if v > eps:
            hlv.append(replace(ev, phase=Phase.HLV))
        elif v < -eps:
            llv.append(replace(ev, phase=Phase.LLV))
        else:
            dropped.append(replace(ev, phase=Phase.UNASSIGNED))
    return PhaseGroups(llv, hlv, dropped)


def pairwise_hr(group: Sequence[BeatEvent], gate: GateConfig = GateConfig(),
                phase: Optional[Phase] = None) -> PhaseHrSeries:
    """Instantaneous HR from each pair of consecutive events in one group.

    ``hr = 60 / (t[j+1] - t[j])``. Pairs below ``gate.hr_min_bpm`` are moved
    to ``discarded`` with reason ``"below-gate"``.
    """
    if phase is None:
        phase = group[0].phase if group else Phase.UNASSIGNED
    t = np.array([e.time for e in group], dtype=float)
    if t.size < 2:
        return PhaseHrSeries(phase)
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise InvalidArgument("event times must be strictly increasing")
    hr = 60.0 / dt
    mid = 0.5 * (t[:-1] + t[1:])
    kept, dropped = [], []
    for m, h in zip(mid, hr):
        if h < gate.hr_min_bpm:
            dropped.append(DiscardedSample(float(m), float(h), BELOW_GATE))
        else:
            kept.append(HrSample(float(m), float(h)))
    return PhaseHrSeries(phase, tuple(kept), tuple(dropped))


def combined_hr(llv: PhaseHrSeries, hlv: PhaseHrSeries) -> float:
    """Mean of all retained samples from both phases, ``(sum + sum) / (m + n)``."""
    values = [s.hr_bpm for s in llv.samples] + [s.hr_bpm for s in hlv.samples]
    if not values:
        raise NoDataError("no retained HR samples in either phase")
    return math.fsum(values) / len(values)


def phase_stats(series: PhaseHrSeries) -> PhaseStats:
    hr = series.hr
    if hr.size == 0:
        return PhaseStats(None, None, 0)
    mean = math.fsum(hr) / hr.size
    if hr.size < 2:
        return PhaseStats(mean, 0.0, 1, sd_flagged=True)
    sd = math.sqrt(math.fsum((hr - mean) ** 2) / (hr.size - 1))
    return PhaseStats(mean, sd, int(hr.size))


def hlv_llv_ratio(summary) -> float:
    """``HLV mean / LLV mean``. Accepts a PhaseSummary or ``(hlv_mean, llv_mean)``."""
    if isinstance(summary, PhaseSummary):
        hlv_mean, llv_mean = summary.hlv.mean_bpm, summary.llv.mean_bpm
    else:
        hlv_mean, llv_mean = summary
    if hlv_mean is None or llv_mean is None:
        raise NoDataError("ratio needs a mean for both phases")
    if not llv_mean > 0:
        raise NoDataError("LLV mean must be positive")
    return hlv_mean / llv_mean


def summarize(llv: PhaseHrSeries, hlv: PhaseHrSeries) -> PhaseSummary:
    ls, hs = phase_stats(llv), phase_stats(hlv)
    try:
        comb = combined_hr(llv, hlv)
    except NoDataError:
        comb = None
    try:
        ratio = hlv_llv_ratio((hs.mean_bpm, ls.mean_bpm))
    except NoDataError:
        ratio = None
    return PhaseSummary(ls, hs, comb, ratio)


@dataclass(frozen=True)
class PhaseAnalysis:
    groups: PhaseGroups
    llv: PhaseHrSeries
    hlv: PhaseHrSeries
    summary: PhaseSummary

    @property
    def n_events(self) -> int:
        g = self.groups
        return len(g.llv) + len(g.hlv) + len(g.dropped)

    @property
    def n_gated(self) -> int:
        return len(self.llv.discarded) + len(self.hlv.discarded)


def analyze_events(events: Sequence[BeatEvent], lv: LungVolume,
                   gate: GateConfig = GateConfig()) -> PhaseAnalysis:
    """classify -> pairwise HR per phase -> summary."""
    groups = classify_events(events, lv, gate)
    llv = pairwise_hr(groups.llv, gate, Phase.LLV)
    hlv = pairwise_hr(groups.hlv, gate, Phase.HLV)
    return PhaseAnalysis(groups, llv, hlv, summarize(llv, hlv))
