"""Coded-probe polarization-diverse DAS: simulation and processing chain.

Probing uses mutually orthogonal complementary code pairs on two
polarizations; the receiver correlates one frame against both transmitted
streams to recover a per-position Jones matrix map, from which differential
phase, event detection, and spectral analyses follow.
"""

from .analysis import (
    AnalysisError,
    DetectedEvent,
    SensitivityCurve,
    SensitivityPoint,
    SpectrumReport,
    StdDevProfile,
    detect_events,
    psd,
    sensitivity_sweep,
    stddev_profile,
    theory_phase,
    welch_psd,
)
from .capture_io import (
    CaptureFormatError,
    CaptureHeader,
    CaptureReader,
    CaptureWriter,
    read_capture,
    write_capture,
)
from .channel import (
    ChannelError,
    Connector,
    FiberRealization,
    FiberSpec,
    IQCapture,
    NoiseSpec,
    PerturbationEvent,
    SineWaveform,
    Span,
    backscatter,
    ground_truth_response,
    iter_backscatter_frames,
    laser_phase_walk,
    phase_per_meter,
    synthesize_fiber,
)
from .codes import (
    CodeSetError,
    CodeSetReport,
    GolayPair,
    OrthogonalCodeSet,
    ProbeFrame,
    TimingReport,
    aperiodic_cross_correlation,
    build_probe_frame,
    complementary_sum,
    cross_sum,
    generate_golay_pair,
    make_code_set,
    mate_pair,
    validate_timing,
    verify_code_set,
)
from .config import (
    AnalysisConfig,
    ConfigError,
    OutputConfig,
    ProbeConfig,
    ProcessingConfig,
    RunConfig,
    SweepConfig,
    config_to_dict,
    load_config,
    parse_config,
    validate_run_config,
)
from .dsp import (
    DiffPhaseMap,
    DspError,
    FrameEstimator,
    JonesMap,
    PhaseMap,
    differential_phase,
    estimate_jones_map,
    estimate_jones_map_direct,
    extract_phase_map,
    gauge_boundary_indices,
    intensity_trace,
    tap_positions,
)
from .pipeline import (
    PipelineResult,
    load_diff_phase,
    process_capture,
    run_analysis,
    run_pipeline,
    simulate_to_file,
    write_process_outputs,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
