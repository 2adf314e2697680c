"""Heart rate from seismocardiography, split by lung-volume phase."""

__version__ = "0.1.0"

from .errors import IngestionError, InvalidArgument, NoDataError
from .signal_core import (
    LungVolume,
    Recording,
    Waveform,
    detrend_lv,
    integrate_flow,
    lowpass,
    resample,
)
from .beat_detection import (
    BeatEvent,
    DetectorConfig,
    Phase,
    Source,
    detect_ecg_rpeaks,
    detect_scg_events,
)
from .phase_hr import (
    GateConfig,
    PhaseHrSeries,
    PhaseSummary,
    analyze_events,
    classify_events,
    combined_hr,
    hlv_llv_ratio,
    pairwise_hr,
    phase_stats,
)
from .agreement import AgreementReport, bland_altman, ecg_combined_hr, ungated_hr
from .synth import GroundTruth, SynthConfig, gen_recording
from .pipeline import RecordingResult, RunConfig, RunReport, run_pipeline, write_report
