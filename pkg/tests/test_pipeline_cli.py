import json
import shutil
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest

from scghr.agreement import bland_altman
from scghr.beat_detection import DetectorConfig, Phase
from scghr.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from scghr.errors import InvalidArgument
from scghr.io import write_recording
from scghr.phase_hr import GateConfig, HrSample, PhaseHrSeries, combined_hr, phase_stats
from scghr.pipeline import RunConfig, render_json, render_text, run_pipeline, write_report
from scghr.synth import SynthConfig, gen_recording


def synth_batch(n, **kw):
    return tuple(SynthConfig(seed=s, **kw) for s in range(n))


@pytest.fixture(scope="module")
def batch_report():
    return run_pipeline(RunConfig(inputs=synth_batch(10, duration_s=60.0)))


class TestRunPipeline:
    def test_single_noiseless_ratio(self):
        rep = run_pipeline(RunConfig(inputs=(SynthConfig(duration_s=120.0, snr_db=None),)))
        (r,) = rep.results
        assert r.ok
        assert abs(r.scg.summary.ratio_hlv_llv - 1.09) <= 0.02
        assert rep.agreement is None

    def test_batch_bias(self, batch_report):
        ag = batch_report.agreement
        assert len(ag.pairs) == 10
        assert abs(ag.bias_bpm) <= 0.5

    def test_empty_inputs(self):
        with pytest.raises(InvalidArgument):
            run_pipeline(RunConfig())

    def test_bad_recording_does_not_abort(self, tmp_path):
        bad = tmp_path / "broken.csv"
        bad.write_text("time,scg_z\n0,1\n0.1,2\n")
        rep = run_pipeline(RunConfig(inputs=(SynthConfig(seed=1), str(bad), SynthConfig(seed=2))))
        assert [r.status for r in rep.results] == ["ok", "failed", "ok"]
        assert "flow" in rep.results[1].error
        assert rep.agreement is not None and len(rep.agreement.pairs) == 2

    def test_jobs_keep_order_and_bytes(self):
        inputs = synth_batch(4, duration_s=30.0)
        serial = run_pipeline(RunConfig(inputs=inputs))
        parallel = run_pipeline(RunConfig(inputs=inputs, jobs=3))
        assert [r.label for r in parallel.results] == [r.label for r in serial.results]
        # jobs is an execution detail, not part of the echoed config
        assert render_json(parallel) == render_json(serial)
        assert render_text(parallel) == render_text(serial)

    def test_determinism(self, tmp_path, batch_report):
        again = run_pipeline(RunConfig(inputs=synth_batch(10, duration_s=60.0)))
        a = write_report(batch_report, tmp_path / "a")
        b = write_report(again, tmp_path / "b")
        assert sorted(a) == sorted(b)
        for name in a:
            with open(a[name], "rb") as fa, open(b[name], "rb") as fb:
                assert fa.read() == fb.read(), name

    def test_overrides_echoed(self):
        cfg = RunConfig(inputs=(SynthConfig(duration_s=20.0),), target_rate=400.0,
                        gate=GateConfig(hr_min_bpm=45.0),
                        detector=DetectorConfig(refractory_s=0.25))
        assert cfg.overrides() == ["target_rate_hz", "gate.hr_min_bpm", "detector.refractory_s"]
        doc = json.loads(render_json(run_pipeline(cfg)))
        assert doc["overrides"] == cfg.overrides()
        assert doc["config"]["target_rate_hz"] == 400.0
        assert RunConfig().overrides() == []

    def test_defaults(self):
        cfg = RunConfig()
        assert (cfg.target_rate, cfg.lowpass_cutoff) == (320.0, 100.0)
        assert cfg.gate.hr_min_bpm == 50.0


def test_recomputable_from_csv(tmp_path, batch_report):
    paths = write_report(batch_report, tmp_path)
    doc = json.loads(open(paths["report.json"]).read())
    for rec in doc["recordings"]:
        df = pd.read_csv(tmp_path / f"{rec['label']}_hr_samples.csv",
                         float_precision="round_trip")
        assert set(df.loc[df.status == "discarded", "reason"]) <= {"below-gate"}
        for source in ("scg", "ecg"):
            kept = df[(df.source == source) & (df.status == "retained")]
            series = {}
            for ph in (Phase.LLV, Phase.HLV):
                rows = kept[kept.phase == ph.value]
                series[ph] = PhaseHrSeries(ph, tuple(
                    HrSample(t, h) for t, h in zip(rows.pair_time_s, rows.hr_bpm)))
            for ph in (Phase.LLV, Phase.HLV):
                st = phase_stats(series[ph])
                want = rec[source][ph.value]
                assert (st.mean_bpm, st.sd_bpm, st.count) == (
                    want["mean_bpm"], want["sd_bpm"], want["count"])
            assert combined_hr(series[Phase.LLV], series[Phase.HLV]) == rec[source]["combined_bpm"]
            ratio = rec[source]["llv"]["mean_bpm"], rec[source]["hlv"]["mean_bpm"]
            assert rec[source]["ratio_hlv_llv"] == ratio[1] / ratio[0]

    pts = pd.read_csv(paths["agreement.csv"], float_precision="round_trip")
    ag = bland_altman(pts.hr_ecg_bpm, pts.hr_scg_bpm)
    assert ag.bias_bpm == doc["agreement"]["bias_bpm"]
    assert ag.sd_bpm == doc["agreement"]["sd_bpm"]
    assert list(pts.hr_scg_bpm) == [r["scg"]["combined_bpm"] for r in doc["recordings"]]


def test_report_text_layout(batch_report):
    text = render_text(batch_report)
    for heading in ("Heart rate by lung-volume phase", "Combined heart rate",
                    "HLV/LLV heart-rate ratio", "Bland-Altman", "Audit"):
        assert heading in text
    assert "synth-seed9" in text


# ---------------------------------------------------------------- CLI

class TestCli:
    def test_no_input_is_usage_error(self, tmp_path, capsys):
        assert main(["--out", str(tmp_path)]) == EXIT_USAGE
        assert "no input" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--bogus"])
        assert exc.value.code == EXIT_USAGE

    @pytest.mark.parametrize("argv", [
        ["--synth", "{not json"],
        ["--synth", '{"colour": 1}'],
        ["--synth", '{"rsa_ratio": -1}'],
        ["--synth", "{}", "--cutoff", "200"],
        ["--synth", "{}", "--map", "flow"],
        ["--synth", "{}", "--map", "pressure=p"],
        ["--synth", "{}", "--refractory", "0"],
        ["--synth", "{}", "--jobs", "0"],
    ])
    def test_bad_configs(self, argv, tmp_path):
        assert main(argv + ["--out", str(tmp_path), "-q"]) == EXIT_USAGE

    def test_synth_run(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["--synth", '{"duration_s": 30}', "--synth-count", "3", "--seed", "7",
                     "--out", str(out)])
        assert code == EXIT_OK
        text = capsys.readouterr().out
        assert "synth-seed7" in text and "synth-seed9" in text
        doc = json.loads((out / "report.json").read_text())
        assert [r["label"] for r in doc["recordings"]] == ["synth-seed7", "synth-seed8",
                                                           "synth-seed9"]
        assert (out / "agreement.csv").exists() and (out / "agreement_limits.csv").exists()

    def test_synth_config_file(self, tmp_path):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps([{"duration_s": 20, "ie_ratio": "1:2"},
                                   {"duration_s": 20, "rsa_ratio": 1.0}]))
        assert main(["--synth", str(cfg), "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
        doc = json.loads((tmp_path / "o" / "report.json").read_text())
        assert len(doc["recordings"]) == 2

    def test_csv_inputs_match_synth(self, tmp_path):
        rec, _ = gen_recording(SynthConfig(duration_s=30.0, seed=4))
        csv_path = tmp_path / "synth-seed4.csv"
        write_recording(rec, csv_path)
        assert main(["--input", str(csv_path), "--out", str(tmp_path / "a"), "-q"]) == EXIT_OK
        assert main(["--synth", '{"duration_s": 30}', "--seed", "4",
                     "--out", str(tmp_path / "b"), "-q"]) == EXIT_OK
        a = json.loads((tmp_path / "a" / "report.json").read_text())
        b = json.loads((tmp_path / "b" / "report.json").read_text())
        b["recordings"][0].pop("truth")
        assert a == b

    def test_mapped_columns(self, tmp_path):
        rec, _ = gen_recording(SynthConfig(duration_s=20.0))
        path = tmp_path / "r.csv"
        write_recording(rec, path)
        df = pd.read_csv(path, float_precision="round_trip")
        df.rename(columns={"flow": "resp", "scg_z": "acc", "time": "t"}).to_csv(
            path, index=False, float_format="%.17g")
        argv = ["--input", str(path), "--map", "flow=resp", "scg_z=acc", "--time-col", "t",
                "--out", str(tmp_path / "o"), "-q"]
        assert main(argv) == EXIT_OK

    def test_failed_recording_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("time,scg_z,flow\n0,1,nan\n0.1,1,1\n")
        out = tmp_path / "o"
        code = main(["--input", str(bad), "--synth", "{}", "--out", str(out), "-q"])
        assert code == EXIT_DATA
        assert "bad" in capsys.readouterr().err
        doc = json.loads((out / "report.json").read_text())
        assert doc["recordings"][0]["status"] == "failed"
        assert "flow, row 1" in doc["recordings"][0]["error"]

    def test_write_synth(self, tmp_path):
        d = tmp_path / "gen"
        assert main(["--synth", '{"duration_s": 10}', "--write-synth", str(d),
                     "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
        assert (d / "synth-seed0.csv").exists()

    def test_format_selection(self, tmp_path):
        out = tmp_path / "o"
        assert main(["--synth", '{"duration_s": 10}', "--format", "json",
                     "--out", str(out), "-q"]) == EXIT_OK
        assert (out / "report.json").exists() and not (out / "report.txt").exists()


@pytest.mark.skipif(shutil.which("scghr") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["scghr", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
    proc = subprocess.run([sys.executable, "-m", "scghr.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "scghr" in proc.stdout
