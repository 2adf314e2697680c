import numpy as np
import pandas as pd
import pytest

from scghr.errors import IngestionError
from scghr.io import ingest, write_recording
from scghr.synth import SynthConfig, gen_recording


def five_column_frame(n=3000, rate=10_000.0):
    rng = np.random.default_rng(0)
    return pd.DataFrame({
        "time": np.arange(n) / rate,
        "scg_z": rng.normal(size=n),
        "ecg": rng.normal(size=n),
        "flow": np.sin(np.arange(n) / 500.0),
        "label": ["subj01"] * n,
    })


def write(df, tmp_path, name="rec.csv"):
    path = tmp_path / name
    df.to_csv(path, index=False, float_format="%.17g")
    return path


def test_five_columns_at_10khz(tmp_path):
    df = five_column_frame()
    rec = ingest(write(df, tmp_path))
    assert rec.rate == 10_000.0
    assert list(rec.channels) == ["scg_z", "ecg", "flow"]
    assert len(rec["flow"]) == 3000
    np.testing.assert_array_equal(rec["ecg"].samples, df["ecg"].to_numpy())
    assert rec.subject_meta == "rec"


def test_nan_in_flow_row_1234(tmp_path):
    df = five_column_frame()
    df["flow"] = df["flow"].astype(object)
    df.loc[1233, "flow"] = "NaN"  # data row 1234, counting from 1 below the header
    with pytest.raises(IngestionError, match="flow, row 1234"):
        ingest(write(df, tmp_path))


def test_non_numeric_cell(tmp_path):
    df = five_column_frame()
    df["scg_z"] = df["scg_z"].astype(object)
    df.loc[9, "scg_z"] = "oops"
    with pytest.raises(IngestionError, match="scg_z, row 10"):
        ingest(write(df, tmp_path))


def test_round_trip(tmp_path):
    rec, _ = gen_recording(SynthConfig(duration_s=10.0, seed=3))
    path = tmp_path / "synth.csv"
    write_recording(rec, path)
    back = ingest(path, label=rec.subject_meta)
    assert back.rate == rec.rate
    assert back.subject_meta == rec.subject_meta
    assert list(back.channels) == list(rec.channels)
    for ch in rec.channels:
        np.testing.assert_array_equal(back[ch].samples, rec[ch].samples)
        assert back[ch].start_time == rec[ch].start_time


def test_round_trip_at_10khz(tmp_path):
    rec, _ = gen_recording(SynthConfig(duration_s=2.0, sample_rate=10_000.0, seed=8))
    path = tmp_path / "hi.csv"
    write_recording(rec, path)
    back = ingest(path)
    assert back.rate == 10_000.0
    for ch in rec.channels:
        np.testing.assert_array_equal(back[ch].samples, rec[ch].samples)


def test_mapping(tmp_path):
    df = five_column_frame().rename(columns={"flow": "resp", "scg_z": "acc_z"})
    rec = ingest(write(df, tmp_path), mapping={"flow": "resp", "scg_z": "acc_z"})
    assert "flow" in rec and "scg_z" in rec


def test_missing_required_column(tmp_path):
    df = five_column_frame().drop(columns=["flow"])
    with pytest.raises(IngestionError, match="flow"):
        ingest(write(df, tmp_path))


def test_mapped_column_absent(tmp_path):
    with pytest.raises(IngestionError, match="resp"):
        ingest(write(five_column_frame(), tmp_path), mapping={"flow": "resp"})


def test_missing_time_column(tmp_path):
    df = five_column_frame()
    with pytest.raises(IngestionError, match="time"):
        ingest(write(df, tmp_path), time_col="t")


def test_non_uniform_time(tmp_path):
    df = five_column_frame()
    df.loc[500:, "time"] += 0.5 / 10_000.0
    with pytest.raises(IngestionError, match="non-uniform.*row 501"):
        ingest(write(df, tmp_path))


def test_small_jitter_tolerated(tmp_path):
    df = five_column_frame()
    df["time"] += np.random.default_rng(1).uniform(-1e-11, 1e-11, size=len(df))
    assert ingest(write(df, tmp_path)).rate == 10_000.0


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        ingest(tmp_path / "nope.csv")
