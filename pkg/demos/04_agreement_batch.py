"""Batch run with ECG agreement, as the command line tool does it.

Run: python demos/04_agreement_batch.py [out_dir]
"""
# %%
import sys

from scghr.pipeline import RunConfig, render_text, run_pipeline, write_report
from scghr.synth import SynthConfig

inputs = tuple(SynthConfig(duration_s=60.0, snr_db=20.0, seed=s) for s in range(10))
report = run_pipeline(RunConfig(inputs=inputs, jobs=2))

# %% Tables, agreement and audit counts
print(render_text(report))

# %% Bland-Altman points and limits as plain data
ag = report.agreement
for label, hr_ecg, hr_scg in ag.pairs[:3]:
    print(f"{label}: mean {(hr_ecg + hr_scg) / 2:.2f}  diff {hr_ecg - hr_scg:+.3f}")

if len(sys.argv) > 1:
    for path in sorted(write_report(report, sys.argv[1]).values()):
        print("wrote", path)
