"""Signal conditioning: resample, low-pass, lung volume.

Run: python demos/01_conditioning.py
"""
# %% A recording at acquisition rate
import numpy as np

from scghr.signal_core import detrend_lv, integrate_flow, lowpass, resample
from scghr.synth import SynthConfig, gen_recording

cfg = SynthConfig(duration_s=30.0, sample_rate=10_000.0, hf_burst_amplitude=2.0, seed=1)
rec, truth = gen_recording(cfg)
print(f"{rec.subject_meta}: {len(rec['scg_z'])} samples at {rec.rate:g} Hz, "
      f"{truth.beat_times.size} beats")

# %% Down to 320 Hz. The anti-alias stage runs before interpolation.
scg = resample(rec["scg_z"], 320.0)
flow = resample(rec["flow"], 320.0)
print(f"resampled: {len(scg)} samples, {scg.duration:.3f} s")

# %% The 120-160 Hz bursts added during inspiration do not survive the 100 Hz low-pass
scg_f = lowpass(scg, 100.0)
spec_before = np.abs(np.fft.rfft(scg.samples))
spec_after = np.abs(np.fft.rfft(scg_f.samples))
freqs = np.fft.rfftfreq(len(scg), 1 / 320.0)
band = (freqs >= 120) & (freqs <= 160)
print(f"120-160 Hz energy kept after low-pass: "
      f"{np.sum(spec_after[band] ** 2) / np.sum(spec_before[band] ** 2):.2e}")

# %% Flow integrates to lung volume; the linear trend is removed
lv = detrend_lv(integrate_flow(flow))
crossings = np.count_nonzero(np.diff(np.sign(lv.samples)) != 0)
print(f"lung volume: mean {lv.samples.mean():+.1e}, {crossings} zero crossings "
      f"(expect about {2 * cfg.resp_rate_bpm * cfg.duration_s / 60:.0f})")
