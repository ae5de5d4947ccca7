"""Run configuration: strict JSON parsing and cross-field validation.

One JSON document fully determines a run.  Parsing is strict: unknown keys
are rejected with path-qualified messages, so typos never fall back to
silent defaults.  Defaults mirror the standard setup: n=1.45,
wavelength 1536.6 nm, photo-elastic coefficient 0.78, span loss 0.2 dB/km,
gauge 100 m.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .channel import (
    Connector,
    FiberSpec,
    NoiseSpec,
    PerturbationEvent,
    SineWaveform,
    Span,
)
from .codes import build_probe_frame, make_code_set, validate_timing


class ConfigError(ValueError):
    """Configuration document failed parsing or validation."""


@dataclass
class ProbeConfig:
    recursions: int
    symbol_rate_baud: float
    wavelength_m: float = 1536.6e-9


@dataclass
class ProcessingConfig:
    gauge_m: float = 100.0
    window_s: Optional[float] = None
    num_taps: Optional[int] = None


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: Tuple[str, ...] = ("csv",)


@dataclass
class SweepConfig:
    amplitudes_m: List[float]
    position_m: float


@dataclass
class AnalysisConfig:
    psd_positions_m: Optional[List[float]] = None
    sweep: Optional[SweepConfig] = None


@dataclass
class RunConfig:
    duration_s: float
    probe: ProbeConfig
    fiber: FiberSpec
    events: List[PerturbationEvent] = field(default_factory=list)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    processing: ProcessingConfig = field(default_factory=ProcessingConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def code_set(self):
        return make_code_set(self.probe.recursions)

    def probe_frame(self):
        return build_probe_frame(
            self.code_set(), self.probe.symbol_rate_baud, n=self.fiber.n
        )


_MISSING = object()


def _sub(path, key):
    return f"{path}.{key}" if path else str(key)


def _obj(node, path):
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected an object")
    return dict(node)


def _arr(node, path):
    if not isinstance(node, list):
        raise ConfigError(f"{path}: expected an array")
    return node


def _take(obj, path, key, default=_MISSING):
    if key in obj:
        return obj.pop(key)
    if default is _MISSING:
        raise ConfigError(f"{_sub(path, key)}: missing required key")
    return default


def _finish(obj, path):
    for key in obj:
        raise ConfigError(f"{_sub(path, key)}: unknown key")


def _num(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number")
    return float(v)


def _int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer")
    return v


def _str(v, path):
    if not isinstance(v, str):
        raise ConfigError(f"{path}: expected a string")
    return v


def _positive(v, path):
    x = _num(v, path)
    if x <= 0:
        raise ConfigError(f"{path}: must be > 0")
    return x


def _nonneg(v, path):
    x = _num(v, path)
    if x < 0:
        raise ConfigError(f"{path}: must be >= 0")
    return x


def _parse_probe(node, path):
    obj = _obj(node, path)
    probe = ProbeConfig(
        recursions=_int(_take(obj, path, "recursions"), _sub(path, "recursions")),
        symbol_rate_baud=_positive(
            _take(obj, path, "symbol_rate_baud"), _sub(path, "symbol_rate_baud")
        ),
        wavelength_m=_positive(
            _take(obj, path, "wavelength_m", 1536.6e-9), _sub(path, "wavelength_m")
        ),
    )
    if probe.recursions < 0:
        raise ConfigError(f"{_sub(path, 'recursions')}: must be >= 0")
    _finish(obj, path)
    return probe


def _parse_spans(node, path):
    arr = _arr(node, path)
    if not arr:
        raise ConfigError(f"{path}: at least one span required")
    spans = []
    for i, item in enumerate(arr):
        p = f"{path}[{i}]"
        obj = _obj(item, p)
        spans.append(
            Span(
                length_m=_positive(_take(obj, p, "length_m"), _sub(p, "length_m")),
                loss_db_per_km=_nonneg(
                    _take(obj, p, "loss_db_per_km", 0.2), _sub(p, "loss_db_per_km")
                ),
            )
        )
        _finish(obj, p)
    return spans


def _parse_connectors(node, path):
    connectors = []
    for i, item in enumerate(_arr(node, path)):
        p = f"{path}[{i}]"
        obj = _obj(item, p)
        connectors.append(
            Connector(
                position_m=_positive(
                    _take(obj, p, "position_m"), _sub(p, "position_m")
                ),
                loss_db=_nonneg(_take(obj, p, "loss_db"), _sub(p, "loss_db")),
            )
        )
        _finish(obj, p)
    return connectors


def _parse_fiber(node, path, wavelength_m):
    obj = _obj(node, path)
    spans = _parse_spans(_take(obj, path, "spans"), _sub(path, "spans"))
    connectors = _parse_connectors(
        _take(obj, path, "connectors", []), _sub(path, "connectors")
    )
    kwargs = dict(
        n=_num(_take(obj, path, "n", 1.45), _sub(path, "n")),
        rayleigh_level_db=_num(
            _take(obj, path, "rayleigh_level_db", -70.0),
            _sub(path, "rayleigh_level_db"),
        ),
        birefringence_rad=_nonneg(
            _take(obj, path, "birefringence_rad", 0.02),
            _sub(path, "birefringence_rad"),
        ),
        photoelastic_coeff=_positive(
            _take(obj, path, "photoelastic_coeff", 0.78),
            _sub(path, "photoelastic_coeff"),
        ),
        seed=_int(_take(obj, path, "seed", 12345), _sub(path, "seed")),
    )
    _finish(obj, path)
    try:
        return FiberSpec(
            spans=spans, connectors=connectors, wavelength_m=wavelength_m, **kwargs
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_events(node, path):
    events = []
    for i, item in enumerate(_arr(node, path)):
        p = f"{path}[{i}]"
        obj = _obj(item, p)
        position = _positive(_take(obj, p, "position_m"), _sub(p, "position_m"))
        stretched = _nonneg(
            _take(obj, p, "stretched_length_m", 0.0), _sub(p, "stretched_length_m")
        )
        wpath = _sub(p, "waveform")
        wobj = _obj(_take(obj, p, "waveform"), wpath)
        kind = _str(_take(wobj, wpath, "kind", "sine"), _sub(wpath, "kind"))
        if kind != "sine":
            raise ConfigError(f"{_sub(wpath, 'kind')}: only 'sine' is supported")
        waveform = SineWaveform(
            dl_pp_m=_nonneg(_take(wobj, wpath, "dl_pp_m"), _sub(wpath, "dl_pp_m")),
            frequency_hz=_nonneg(
                _take(wobj, wpath, "frequency_hz"), _sub(wpath, "frequency_hz")
            ),
            phase_rad=_num(
                _take(wobj, wpath, "phase_rad", 0.0), _sub(wpath, "phase_rad")
            ),
        )
        _finish(wobj, wpath)
        _finish(obj, p)
        events.append(
            PerturbationEvent(
                position_m=position, waveform=waveform, stretched_length_m=stretched
            )
        )
    return events


def _parse_noise(node, path):
    obj = _obj(node, path)
    snr = _take(obj, path, "awgn_snr_db", math.inf)
    if snr is None or (isinstance(snr, str) and snr.lower() == "inf"):
        snr = math.inf
    else:
        snr = _num(snr, _sub(path, "awgn_snr_db"))
    bits = _take(obj, path, "adc_bits", None)
    if bits is not None:
        bits = _int(bits, _sub(path, "adc_bits"))
    kwargs = dict(
        laser_linewidth_hz=_nonneg(
            _take(obj, path, "laser_linewidth_hz", 0.0),
            _sub(path, "laser_linewidth_hz"),
        ),
        awgn_snr_db=float(snr),
        adc_bits=bits,
        seed=_int(_take(obj, path, "seed", 54321), _sub(path, "seed")),
    )
    _finish(obj, path)
    try:
        return NoiseSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_processing(node, path):
    obj = _obj(node, path)
    window = _take(obj, path, "window_s", None)
    if window is not None:
        window = _positive(window, _sub(path, "window_s"))
    num_taps = _take(obj, path, "num_taps", None)
    if num_taps is not None:
        num_taps = _int(num_taps, _sub(path, "num_taps"))
        if num_taps < 1:
            raise ConfigError(f"{_sub(path, 'num_taps')}: must be >= 1")
    out = ProcessingConfig(
        gauge_m=_positive(_take(obj, path, "gauge_m", 100.0), _sub(path, "gauge_m")),
        window_s=window,
        num_taps=num_taps,
    )
    _finish(obj, path)
    return out


def _parse_outputs(node, path):
    obj = _obj(node, path)
    formats = _take(obj, path, "formats", ["csv"])
    formats = tuple(
        _str(f, f"{_sub(path, 'formats')}[{i}]")
        for i, f in enumerate(_arr(formats, _sub(path, "formats")))
    )
    for i, f in enumerate(formats):
        if f != "csv":
            raise ConfigError(f"{_sub(path, 'formats')}[{i}]: unsupported format {f!r}")
    out = OutputConfig(
        directory=_str(_take(obj, path, "directory", "out"), _sub(path, "directory")),
        formats=formats,
    )
    _finish(obj, path)
    return out


def _parse_analysis(node, path):
    obj = _obj(node, path)
    positions = _take(obj, path, "psd_positions_m", None)
    if positions is not None:
        positions = [
            _nonneg(v, f"{_sub(path, 'psd_positions_m')}[{i}]")
            for i, v in enumerate(_arr(positions, _sub(path, "psd_positions_m")))
        ]
    sweep_node = _take(obj, path, "sweep", None)
    sweep = None
    if sweep_node is not None:
        sp = _sub(path, "sweep")
        sobj = _obj(sweep_node, sp)
        amplitudes = [
            _nonneg(v, f"{_sub(sp, 'amplitudes_m')}[{i}]")
            for i, v in enumerate(
                _arr(_take(sobj, sp, "amplitudes_m"), _sub(sp, "amplitudes_m"))
            )
        ]
        if not amplitudes:
            raise ConfigError(f"{_sub(sp, 'amplitudes_m')}: must not be empty")
        if any(b < a for a, b in zip(amplitudes, amplitudes[1:])):
            raise ConfigError(f"{_sub(sp, 'amplitudes_m')}: must be sorted ascending")
        sweep = SweepConfig(
            amplitudes_m=amplitudes,
            position_m=_positive(
                _take(sobj, sp, "position_m"), _sub(sp, "position_m")
            ),
        )
        _finish(sobj, sp)
    out = AnalysisConfig(psd_positions_m=positions, sweep=sweep)
    _finish(obj, path)
    return out


def validate_run_config(cfg):
    """Cross-field checks that need the probe frame: timing bounds, event
    frequencies and positions, gauge geometry.  Returns the probe frame."""
    try:
        frame = cfg.probe_frame()
    except ValueError as exc:
        raise ConfigError(f"probe: {exc}") from exc
    total = cfg.fiber.total_length_m
    report = validate_timing(total, frame, cfg.noise.laser_linewidth_hz)
    if not report.lower_bound_ok:
        raise ConfigError(
            f"fiber: code period {frame.t_code:.4e} s must exceed 4x the "
            f"response spread {report.t_ir:.4e} s (shorten the fiber or "
            f"raise probe.recursions)"
        )
    if not report.coherence_ok:
        warnings.warn(
            f"code period {frame.t_code:.3e} s exceeds the source coherence "
            f"time {report.t_coh:.3e} s",
            stacklevel=2,
        )
    if cfg.duration_s < 2.0 * frame.t_code:
        raise ConfigError(
            f"duration_s: must cover at least two code periods "
            f"({2.0 * frame.t_code:.4e} s)"
        )
    for i, e in enumerate(cfg.events):
        if not 0.0 < e.position_m < total:
            raise ConfigError(
                f"events[{i}].position_m: outside the fiber (0, {total})"
            )
        if e.waveform.frequency_hz >= frame.bw:
            raise ConfigError(
                f"events[{i}].waveform.frequency_hz: at or above the "
                f"mechanical bandwidth {frame.bw:.1f} Hz"
            )
    if cfg.processing.gauge_m < frame.s_r:
        raise ConfigError(
            f"processing.gauge_m: shorter than the native resolution "
            f"{frame.s_r:.3f} m"
        )
    num_taps = int(total / frame.s_r)
    if num_taps < 1:
        raise ConfigError("fiber: shorter than one resolution cell")
    if int(num_taps * frame.s_r / cfg.processing.gauge_m + 1e-9) < 1:
        raise ConfigError("processing.gauge_m: longer than the mapped fiber")
    if cfg.processing.num_taps is not None and cfg.processing.num_taps > 2 * (
        4 << cfg.probe.recursions
    ) - 1:
        raise ConfigError("processing.num_taps: exceeds the frame length")
    if cfg.analysis.sweep is not None:
        pos = cfg.analysis.sweep.position_m
        if not 0.0 < pos < total:
            raise ConfigError(
                f"analysis.sweep.position_m: outside the fiber (0, {total})"
            )
        if not cfg.events:
            raise ConfigError("analysis.sweep: config carries no event to sweep")
    return frame


def parse_config(text):
    """Parse and validate a JSON configuration document."""
    try:
        root = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    obj = _obj(root, "")
    duration = _positive(_take(obj, "", "duration_s"), "duration_s")
    probe = _parse_probe(_take(obj, "", "probe"), "probe")
    fiber = _parse_fiber(_take(obj, "", "fiber"), "fiber", probe.wavelength_m)
    events = _parse_events(_take(obj, "", "events", []), "events")
    noise = _parse_noise(_take(obj, "", "noise", {}), "noise")
    processing = _parse_processing(_take(obj, "", "processing", {}), "processing")
    outputs = _parse_outputs(_take(obj, "", "outputs", {}), "outputs")
    analysis = _parse_analysis(_take(obj, "", "analysis", {}), "analysis")
    _finish(obj, "")
    cfg = RunConfig(
        duration_s=duration,
        probe=probe,
        fiber=fiber,
        events=events,
        noise=noise,
        processing=processing,
        outputs=outputs,
        analysis=analysis,
    )
    validate_run_config(cfg)
    return cfg


def load_config(path):
    with open(path, "r") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg):
    """Canonical plain-dict echo of a RunConfig (for reproducibility metadata)."""
    return {
        "duration_s": cfg.duration_s,
        "probe": {
            "recursions": cfg.probe.recursions,
            "symbol_rate_baud": cfg.probe.symbol_rate_baud,
            "wavelength_m": cfg.probe.wavelength_m,
        },
        "fiber": {
            "spans": [
                {"length_m": s.length_m, "loss_db_per_km": s.loss_db_per_km}
                for s in cfg.fiber.spans
            ],
            "connectors": [
                {"position_m": c.position_m, "loss_db": c.loss_db}
                for c in cfg.fiber.connectors
            ],
            "n": cfg.fiber.n,
            "rayleigh_level_db": cfg.fiber.rayleigh_level_db,
            "birefringence_rad": cfg.fiber.birefringence_rad,
            "photoelastic_coeff": cfg.fiber.photoelastic_coeff,
            "seed": cfg.fiber.seed,
        },
        "events": [
            {
                "position_m": e.position_m,
                "stretched_length_m": e.stretched_length_m,
                "waveform": {
                    "kind": "sine",
                    "dl_pp_m": e.waveform.dl_pp_m,
                    "frequency_hz": e.waveform.frequency_hz,
                    "phase_rad": e.waveform.phase_rad,
                },
            }
            for e in cfg.events
        ],
        "noise": {
            "laser_linewidth_hz": cfg.noise.laser_linewidth_hz,
            "awgn_snr_db": "inf"
            if math.isinf(cfg.noise.awgn_snr_db)
            else cfg.noise.awgn_snr_db,
            "adc_bits": cfg.noise.adc_bits,
            "seed": cfg.noise.seed,
        },
        "processing": {
            "gauge_m": cfg.processing.gauge_m,
            "window_s": cfg.processing.window_s,
            "num_taps": cfg.processing.num_taps,
        },
        "outputs": {
            "directory": cfg.outputs.directory,
            "formats": list(cfg.outputs.formats),
        },
        "analysis": {
            "psd_positions_m": cfg.analysis.psd_positions_m,
            "sweep": None
            if cfg.analysis.sweep is None
            else {
                "amplitudes_m": cfg.analysis.sweep.amplitudes_m,
                "position_m": cfg.analysis.sweep.position_m,
            },
        },
    }
