"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error (one or
more recordings failed; the report is still written), 3 internal error.

Examples
--------
Analyse two CSV files whose flow column is called ``resp``::

    scghr --input a.csv b.csv --map flow=resp --out results/

Generate and analyse ten synthetic recordings::

    scghr --synth '{"duration_s": 120, "snr_db": 20}' --synth-count 10 --seed 1 --out results/
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import fields, replace
from typing import List, Optional

from . import __version__
from .beat_detection import DetectorConfig
from .errors import InvalidArgument
from .io import write_recording
from .phase_hr import GateConfig
from .pipeline import RunConfig, render_text, run_pipeline, write_report
from .signal_core import CHANNELS
from .synth import SynthConfig, gen_recording

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("scghr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scghr", description="Lung-volume-gated heart rate from SCG recordings.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    src = p.add_argument_group("input")
    src.add_argument("--input", nargs="+", action="extend", default=[], metavar="PATH",
                     help="CSV recordings (header row, time column in seconds)")
    src.add_argument("--map", nargs="+", action="extend", default=[], metavar="CHANNEL=COLUMN",
                     help=f"column for a channel; channels: {', '.join(CHANNELS)}")
    src.add_argument("--time-col", default="time")
    src.add_argument("--synth", metavar="CONFIG",
                     help="generate recordings instead of reading files; JSON object/list "
                          "or path to a JSON file with SynthConfig fields")
    src.add_argument("--synth-count", type=int, default=1,
                     help="recordings per synth config, seeds increasing from --seed")
    src.add_argument("--seed", type=int, default=None, help="base seed for --synth")
    src.add_argument("--write-synth", metavar="DIR",
                     help="also write generated recordings as CSV into DIR")

    proc = p.add_argument_group("processing")
    proc.add_argument("--target-rate", type=float, default=320.0, help="Hz (default 320)")
    proc.add_argument("--cutoff", type=float, default=100.0, help="SCG low-pass, Hz (default 100)")
    proc.add_argument("--hr-min", type=float, default=50.0, help="HR floor, bpm (default 50)")
    proc.add_argument("--lv-epsilon", type=float, default=0.0,
                      help="half-width of the lung-volume dead band around zero")
    proc.add_argument("--refractory", type=float, default=DetectorConfig.refractory_s)
    proc.add_argument("--threshold-factor", type=float, default=DetectorConfig.threshold_factor)
    proc.add_argument("--edge-exclude", type=float, default=DetectorConfig.edge_exclude_s)
    proc.add_argument("--jobs", type=int, default=1, help="recordings processed in parallel")

    out = p.add_argument_group("output")
    out.add_argument("--out", default="scghr-out", metavar="DIR")
    out.add_argument("--format", nargs="+", choices=("text", "json"), default=["text", "json"])
    out.add_argument("-q", "--quiet", action="store_true", help="do not print the text report")
    return p


def parse_mapping(items: List[str]) -> dict:
    mapping = {}
    for item in items:
        ch, sep, col = item.partition("=")
        if not sep or not col:
            raise UsageError(f"bad --map entry {item!r}, expected CHANNEL=COLUMN")
        if ch not in CHANNELS:
            raise UsageError(f"unknown channel {ch!r} in --map")
        mapping[ch] = col
    return mapping


def _synth_from_dict(d: dict) -> SynthConfig:
    known = {f.name for f in fields(SynthConfig)}
    extra = set(d) - known
    if extra:
        raise UsageError(f"unknown synth config keys: {sorted(extra)}")
    d = dict(d)
    ie = d.get("ie_ratio")
    if isinstance(ie, str):
        d["ie_ratio"] = tuple(float(v) for v in ie.split(":"))
    if isinstance(d.get("snr_db"), str):
        d["snr_db"] = float(d["snr_db"])
    return SynthConfig(**d)


def load_synth(spec: str, count: int, seed: Optional[int]) -> List[SynthConfig]:
    """Parse ``--synth``: inline JSON or a path to a JSON file."""
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = spec
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--synth is neither a file nor valid JSON: {exc}") from exc
    items = doc if isinstance(doc, list) else [doc]
    if not all(isinstance(d, dict) for d in items):
        raise UsageError("--synth must hold a JSON object or a list of objects")
    if count < 1:
        raise UsageError("--synth-count must be at least 1")
    out = []
    for i, d in enumerate(items):
        base = _synth_from_dict(d)
        first = seed + i * count if seed is not None else base.seed
        out += [replace(base, seed=first + k) for k in range(count)]
    return out


def config_from_args(args) -> RunConfig:
    inputs: list = list(args.input)
    if args.synth:
        inputs += load_synth(args.synth, args.synth_count, args.seed)
    if not inputs:
        raise UsageError("no input: give --input files or --synth")
    if not (math.isfinite(args.target_rate) and args.target_rate > 0):
        raise UsageError("--target-rate must be positive")
    if not 0 < args.cutoff < args.target_rate / 2:
        raise UsageError("--cutoff must lie between 0 and half the target rate")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    gate = GateConfig(hr_min_bpm=args.hr_min, lv_zero_epsilon=args.lv_epsilon)
    det = DetectorConfig(refractory_s=args.refractory, threshold_factor=args.threshold_factor,
                         edge_exclude_s=args.edge_exclude)
    return RunConfig(
        inputs=tuple(inputs),
        mapping=parse_mapping(args.map),
        time_col=args.time_col,
        target_rate=args.target_rate,
        lowpass_cutoff=args.cutoff,
        gate=gate,
        detector=det,
        out_dir=args.out,
        formats=tuple(dict.fromkeys(args.format)),
        jobs=args.jobs,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (UsageError, InvalidArgument, TypeError) as exc:
        print(f"scghr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.write_synth:
            os.makedirs(args.write_synth, exist_ok=True)
            for src in cfg.inputs:
                if isinstance(src, SynthConfig):
                    rec, _ = gen_recording(src)
                    write_recording(rec, os.path.join(args.write_synth, f"{rec.subject_meta}.csv"))
        report = run_pipeline(cfg)
        write_report(report, cfg.out_dir)
    except Exception:  # noqa: BLE001 - last-resort guard for the exit-code contract
        log.exception("internal error")
        return EXIT_INTERNAL

    if not args.quiet and "text" in cfg.formats:
        sys.stdout.write(render_text(report))
    for r in report.failed:
        print(f"scghr: {r.label}: {r.error}", file=sys.stderr)
    return EXIT_DATA if report.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
