"""Comma-separated recording files.

Layout: one header row, then one row per sample. A time column (seconds)
plus one column per channel; extra columns are ignored. Row numbers in
error messages count data rows from 1 (the header is row 0).
"""
from __future__ import annotations

import os
from typing import Mapping, Optional

import numpy as np
import pandas as pd

from .errors import IngestionError
from .signal_core import CHANNELS, Recording, Waveform

__all__ = ["DEFAULT_MAPPING", "REQUIRED_CHANNELS", "ingest", "write_recording"]

REQUIRED_CHANNELS = ("scg_z", "flow")
DEFAULT_MAPPING = {name: name for name in CHANNELS}

# tolerated relative deviation of each sampling interval from the median interval
JITTER_TOL = 1e-6


def _infer_rate(time: np.ndarray, time_col: str) -> float:
    if time.size < 2:
        raise IngestionError("need at least two rows to infer the sampling rate")
    dt = np.diff(time)
    mean_dt = (time[-1] - time[0]) / (time.size - 1)
    if not mean_dt > 0:
        raise IngestionError(f"column {time_col!r} is not increasing")
    # the median locates a single bad interval; the mean would smear it
    ref_dt = float(np.median(dt))
    bad = np.flatnonzero(np.abs(dt - ref_dt) > JITTER_TOL * ref_dt)
    if bad.size:
        row = int(bad[0]) + 2
        raise IngestionError(
            f"non-uniform time base: {time_col}, row {row} "
            f"(interval {dt[bad[0]]:.9g} s vs typical {ref_dt:.9g} s)"
        )
    rate = 1.0 / mean_dt
    # a rate within 1 ppm of an integer is taken as that integer
    if abs(rate - round(rate)) <= JITTER_TOL * rate:
        rate = float(round(rate))
    return rate


def ingest(path, mapping: Optional[Mapping[str, str]] = None, time_col: str = "time",
           required=REQUIRED_CHANNELS, label: Optional[str] = None) -> Recording:
    """Read a recording from a CSV file.

    Parameters
    ----------
    path : str or path-like
    mapping : dict, optional
        Channel id -> column name. Channels not mentioned fall back to a
        column with the channel's own name, when present.
    time_col : str
    required : sequence of str
        Channel ids that must be present.
    label : str, optional
        Subject/recording label; defaults to the file stem.

    Raises
    ------
    IngestionError
        Missing columns, non-finite or non-numeric cells, or a non-uniform
        time base. The message names the column and data row.
    """
    mapping = dict(mapping or {})
    unknown = set(mapping) - set(CHANNELS)
    if unknown:
        raise IngestionError(f"unknown channel ids in mapping: {sorted(unknown)}")
    try:
        df = pd.read_csv(path, skipinitialspace=True, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    df.columns = [c.strip() for c in df.columns]

    columns = {}
    for ch in CHANNELS:
        col = mapping.get(ch, DEFAULT_MAPPING[ch])
        if col in df.columns:
            columns[ch] = col
        elif ch in mapping:
            raise IngestionError(f"column {mapping[ch]!r} mapped to {ch} not found in {path}")
    for ch in required:
        if ch not in columns:
            raise IngestionError(f"required channel {ch!r} missing (no column {mapping.get(ch, ch)!r})")
    if time_col not in df.columns:
        raise IngestionError(f"time column {time_col!r} missing")

    def numeric(name, col):
        values = pd.to_numeric(df[col], errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            where = name if name == col else f"{name} (column {col!r})"
            raise IngestionError(
                f"non-finite value {df[col].iloc[bad[0]]!r} at {where}, row {int(bad[0]) + 1}"
            )
        return values

    time = numeric(time_col, time_col)
    rate = _infer_rate(time, time_col)
    chans = {ch: Waveform(numeric(ch, col), rate, time[0]) for ch, col in columns.items()}
    if label is None:
        label = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return Recording(chans, label)


def write_recording(rec: Recording, path, time_col: str = "time") -> None:
    """Write ``rec`` in the layout :func:`ingest` reads, at full float precision."""
    n = len(next(iter(rec.channels.values())))
    w0 = next(iter(rec.channels.values()))
    data = {time_col: w0.start_time + np.arange(n) / w0.rate}
    for name, w in rec.channels.items():
        data[name] = w.samples
    pd.DataFrame(data).to_csv(path, index=False, float_format="%.17g")
