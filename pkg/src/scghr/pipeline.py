"""Batch orchestration and report emission.

Per recording: resample -> low-pass SCG -> integrate + detrend flow ->
detect SCG and ECG beats -> phase split -> gated HR -> summaries. Across
recordings: Bland-Altman of ECG against SCG combined HR.
"""
from __future__ import annotations

import csv
import io as _io
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import __version__
from .agreement import AgreementReport, bland_altman, ungated_hr
from .beat_detection import DetectorConfig, detect_ecg_rpeaks, detect_scg_events
from .errors import InvalidArgument, NoDataError
from .io import ingest
from .phase_hr import GateConfig, PhaseAnalysis, PhaseStats, analyze_events
from .signal_core import Recording, detrend_lv, integrate_flow, lowpass, resample
from .synth import GroundTruth, SynthConfig, gen_recording

logger = logging.getLogger(__name__)

__all__ = [
    "RunConfig",
    "RecordingResult",
    "RunReport",
    "process_recording",
    "run_pipeline",
    "write_report",
    "render_text",
    "render_json",
    "samples_csv",
    "agreement_csv",
]

DEFAULT_TARGET_RATE = 320.0
DEFAULT_CUTOFF = 100.0

Source = Union[str, os.PathLike, SynthConfig]


@dataclass(frozen=True)
class RunConfig:
    inputs: Tuple[Source, ...] = ()
    mapping: Mapping[str, str] = field(default_factory=dict)
    time_col: str = "time"
    target_rate: float = DEFAULT_TARGET_RATE
    lowpass_cutoff: float = DEFAULT_CUTOFF
    gate: GateConfig = GateConfig()
    detector: DetectorConfig = DetectorConfig()
    out_dir: Optional[str] = None
    formats: Tuple[str, ...] = ("text", "json")
    jobs: int = 1

    def echo(self) -> dict:
        """Processing parameters as plain data (inputs and output path excluded)."""
        return {
            "target_rate_hz": self.target_rate,
            "lowpass_cutoff_hz": self.lowpass_cutoff,
            "time_col": self.time_col,
            "mapping": dict(sorted(self.mapping.items())),
            "gate": asdict(self.gate),
            "detector": asdict(self.detector),
        }

    def overrides(self) -> List[str]:
        """Dotted names of every parameter that differs from its default."""
        default = RunConfig().echo()
        mine = self.echo()
        out = []
        for key, val in mine.items():
            if isinstance(val, dict) and key != "mapping":
                out += [f"{key}.{k}" for k, v in val.items() if v != default[key][k]]
            elif val != default[key]:
                out.append(key)
        return out


@dataclass(frozen=True)
class RecordingResult:
    label: str
    status: str = "ok"
    error: Optional[str] = None
    scg: Optional[PhaseAnalysis] = None
    ecg: Optional[PhaseAnalysis] = None
    ecg_ungated_bpm: Optional[float] = None
    truth: Optional[GroundTruth] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def scg_combined_bpm(self) -> Optional[float]:
        return self.scg.summary.combined_bpm if self.scg else None

    @property
    def ecg_combined_bpm(self) -> Optional[float]:
        return self.ecg.summary.combined_bpm if self.ecg else None


@dataclass(frozen=True)
class RunReport:
    config: RunConfig
    results: Tuple[RecordingResult, ...]
    agreement: Optional[AgreementReport]
    version: str = __version__

    @property
    def failed(self) -> List[RecordingResult]:
        return [r for r in self.results if not r.ok]


def _label_for(src: Source) -> str:
    if isinstance(src, SynthConfig):
        return f"synth-seed{src.seed}"
    return os.path.splitext(os.path.basename(os.fspath(src)))[0]


def process_recording(rec: Recording, cfg: RunConfig,
                      truth: Optional[GroundTruth] = None) -> RecordingResult:
    """Run one recording through the full chain. Raises on bad data."""
    for ch in ("scg_z", "flow"):
        if ch not in rec:
            raise InvalidArgument(f"recording {rec.subject_meta!r} lacks channel {ch!r}")

    scg = lowpass(resample(rec["scg_z"], cfg.target_rate), cfg.lowpass_cutoff)
    lv = detrend_lv(integrate_flow(resample(rec["flow"], cfg.target_rate)))
    scg_analysis = analyze_events(detect_scg_events(scg, cfg.detector), lv, cfg.gate)

    ecg_analysis = None
    ecg_ungated = None
    if "ecg" in rec:
        ecg = resample(rec["ecg"], cfg.target_rate)
        rpeaks = detect_ecg_rpeaks(ecg, cfg.detector)
        ecg_analysis = analyze_events(rpeaks, lv, cfg.gate)
        try:
            ecg_ungated = ungated_hr(rpeaks)
        except NoDataError:
            pass
    return RecordingResult(rec.subject_meta, "ok", None, scg_analysis, ecg_analysis,
                           ecg_ungated, truth)


def _run_one(src: Source, cfg: RunConfig) -> RecordingResult:
    label = _label_for(src)
    try:
        if isinstance(src, SynthConfig):
            rec, truth = gen_recording(src, label)
        else:
            rec, truth = ingest(src, cfg.mapping, cfg.time_col, label=label), None
        return process_recording(rec, cfg, truth)
    except (ValueError, OSError) as exc:
        logger.warning("recording %s failed: %s", label, exc)
        return RecordingResult(label, "failed", f"{type(exc).__name__}: {exc}")


def _agreement(results: Sequence[RecordingResult]) -> Optional[AgreementReport]:
    rows = [(r.label, r.ecg_combined_bpm, r.scg_combined_bpm) for r in results
            if r.ok and r.ecg_combined_bpm is not None and r.scg_combined_bpm is not None]
    if len(rows) < 2:
        return None
    labels, hr_ecg, hr_scg = zip(*rows)
    return bland_altman(hr_ecg, hr_scg, labels)


def run_pipeline(cfg: RunConfig) -> RunReport:
    """Process every input; failures are recorded per recording, not raised.

    Results keep input order regardless of ``cfg.jobs``.
    """
    if not cfg.inputs:
        raise InvalidArgument("no input recordings")
    if cfg.jobs > 1 and len(cfg.inputs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_one, cfg.inputs, [cfg] * len(cfg.inputs)))
    else:
        results = [_run_one(src, cfg) for src in cfg.inputs]
    return RunReport(cfg, tuple(results), _agreement(results))


# ---------------------------------------------------------------- rendering

def _fmt(x: Optional[float], spec: str = ".1f") -> str:
    return "n/a" if x is None else format(x, spec)


def _mean_sd(s: PhaseStats) -> str:
    if s.mean_bpm is None:
        return "n/a"
    flag = "*" if s.sd_flagged else ""
    return f"{s.mean_bpm:.1f} ± {s.sd_bpm:.1f}{flag}"


def _stats_dict(s: PhaseStats) -> dict:
    return {"mean_bpm": s.mean_bpm, "sd_bpm": s.sd_bpm, "count": s.count,
            "sd_flagged": s.sd_flagged}


def _analysis_dict(a: PhaseAnalysis) -> dict:
    sm = a.summary
    return {
        "llv": _stats_dict(sm.llv),
        "hlv": _stats_dict(sm.hlv),
        "combined_bpm": sm.combined_bpm,
        "ratio_hlv_llv": sm.ratio_hlv_llv,
        "audit": {
            "events_detected": a.n_events,
            "events_llv": len(a.groups.llv),
            "events_hlv": len(a.groups.hlv),
            "dropped_at_zero": len(a.groups.dropped),
            "pairs_gated": a.n_gated,
        },
    }


def render_json(report: RunReport) -> str:
    recs = []
    for r in report.results:
        d = {"label": r.label, "status": r.status}
        if r.error:
            d["error"] = r.error
        if r.scg:
            d["scg"] = _analysis_dict(r.scg)
        if r.ecg:
            d["ecg"] = _analysis_dict(r.ecg)
            d["ecg_ungated_bpm"] = r.ecg_ungated_bpm
        if r.truth is not None:
            t = r.truth
            d["truth"] = {
                "beats": int(t.beat_times.size),
                "hr_llv_bpm": t.true_hr_llv_bpm,
                "hr_hlv_bpm": t.true_hr_hlv_bpm,
                "combined_bpm": t.true_combined_bpm,
                "ratio_hlv_llv": t.true_ratio,
            }
        recs.append(d)
    ag = report.agreement
    doc = {
        "tool": "scghr",
        "version": report.version,
        "config": report.config.echo(),
        "overrides": report.config.overrides(),
        "sd_convention": "sample (n-1)",
        "recordings": recs,
        "agreement": None if ag is None else {
            "difference": "ecg - scg",
            "n": len(ag.pairs),
            "bias_bpm": ag.bias_bpm,
            "sd_bpm": ag.sd_bpm,
            "loa_low_bpm": ag.loa_low_bpm,
            "loa_high_bpm": ag.loa_high_bpm,
            "multiplier": ag.multiplier,
        },
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> List[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    return [line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]


def render_text(report: RunReport) -> str:
    cfg = report.config
    ok = [r for r in report.results if r.ok]
    out = [f"scghr {report.version}",
           f"target rate {cfg.target_rate:g} Hz, low-pass {cfg.lowpass_cutoff:g} Hz, "
           f"HR floor {cfg.gate.hr_min_bpm:g} bpm, LV epsilon {cfg.gate.lv_zero_epsilon:g}",
           "overrides: " + (", ".join(cfg.overrides()) or "none"),
           ""]

    out.append("Heart rate by lung-volume phase, SCG (bpm, mean ± SD; * = single sample)")
    out += _table(["recording", "LLV", "HLV", "m", "n"],
                  [[r.label, _mean_sd(r.scg.summary.llv), _mean_sd(r.scg.summary.hlv),
                    str(r.scg.summary.llv.count), str(r.scg.summary.hlv.count)] for r in ok])
    out.append("")
    out.append("Combined heart rate (bpm)")
    out += _table(["recording", "SCG", "ECG", "ECG ungated"],
                  [[r.label, _fmt(r.scg_combined_bpm), _fmt(r.ecg_combined_bpm),
                    _fmt(r.ecg_ungated_bpm)] for r in ok])
    out.append("")
    out.append("HLV/LLV heart-rate ratio")
    out += _table(["recording", "ratio"],
                  [[r.label, _fmt(r.scg.summary.ratio_hlv_llv, ".6f")] for r in ok])
    out.append("")

    ag = report.agreement
    out.append("Agreement, ECG - SCG combined HR (Bland-Altman)")
    if ag is None:
        out.append("not enough recordings with both ECG and SCG estimates")
    else:
        out.append(f"pairs {len(ag.pairs)}  bias {ag.bias_bpm:.2f} bpm  SD {ag.sd_bpm:.2f} bpm  "
                   f"limits [{ag.loa_low_bpm:.2f}, {ag.loa_high_bpm:.2f}] bpm "
                   f"(bias ± {ag.multiplier:g} SD)")
    out.append("")

    out.append("Audit")
    rows = []
    for r in report.results:
        if r.ok:
            a = r.scg
            rows.append([r.label, "ok", str(a.n_events), str(a.n_gated),
                         str(len(a.groups.dropped)), ""])
        else:
            rows.append([r.label, "FAILED", "", "", "", r.error or ""])
    out += _table(["recording", "status", "events", "gated", "dropped@0", "error"], rows)
    return "\n".join(out) + "\n"


def samples_csv(result: RecordingResult) -> str:
    """Every retained and discarded pair, for both sources."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "phase", "pair_time_s", "hr_bpm", "status", "reason"])
    for source, analysis in (("scg", result.scg), ("ecg", result.ecg)):
        if analysis is None:
            continue
        for series in (analysis.llv, analysis.hlv):
            for s in series.samples:
                w.writerow([source, series.phase.value, repr(s.pair_time), repr(s.hr_bpm),
                            "retained", ""])
            for s in series.discarded:
                w.writerow([source, series.phase.value, repr(s.pair_time), repr(s.hr_bpm),
                            "discarded", s.reason])
    return buf.getvalue()


def agreement_csv(ag: AgreementReport) -> Tuple[str, str]:
    """``(points, limits)`` CSV bodies for a Bland-Altman plot."""
    pts = _io.StringIO()
    w = csv.writer(pts, lineterminator="\n")
    w.writerow(["label", "hr_ecg_bpm", "hr_scg_bpm", "mean_bpm", "diff_bpm"])
    for label, a, b in ag.pairs:
        w.writerow([label, repr(a), repr(b), repr((a + b) / 2), repr(a - b)])
    lim = _io.StringIO()
    w = csv.writer(lim, lineterminator="\n")
    w.writerow(["bias_bpm", "sd_bpm", "loa_low_bpm", "loa_high_bpm", "multiplier", "n"])
    w.writerow([repr(ag.bias_bpm), repr(ag.sd_bpm), repr(ag.loa_low_bpm),
                repr(ag.loa_high_bpm), repr(ag.multiplier), len(ag.pairs)])
    return pts.getvalue(), lim.getvalue()


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label) or "recording"


def write_report(report: RunReport, out_dir) -> Dict[str, str]:
    """Write report files into ``out_dir``; returns ``{kind: path}``."""
    os.makedirs(out_dir, exist_ok=True)
    written = {}

    def put(name, body):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(body)
        written[name] = path

    if "text" in report.config.formats:
        put("report.txt", render_text(report))
    if "json" in report.config.formats:
        put("report.json", render_json(report))
    seen = set()
    for r in report.results:
        if not r.ok:
            continue
        name = _safe(r.label)
        while name in seen:
            name += "_"
        seen.add(name)
        put(f"{name}_hr_samples.csv", samples_csv(r))
    if report.agreement is not None:
        pts, lim = agreement_csv(report.agreement)
        put("agreement.csv", pts)
        put("agreement_limits.csv", lim)
    return written
