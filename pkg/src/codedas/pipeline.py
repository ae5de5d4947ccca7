"""End-to-end orchestration: synthesis, estimation, maps, analyses, files.

The simulate->estimate chain runs frame by frame, so captures never have to
fit in memory.  Estimation always upcasts frames to complex128; the pipeline
narrows each synthesized frame to complex64 first, exactly matching what a
float32 capture-file round trip produces, so in-memory and file-backed
processing yield identical CSVs.
"""

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analysis as ana
from .capture_io import CaptureHeader, CaptureReader, CaptureWriter
from .channel import iter_backscatter_frames, synthesize_fiber
from .config import config_to_dict
from .dsp import (
    DiffPhaseMap,
    DspError,
    FrameEstimator,
    JonesMap,
    differential_phase,
    extract_phase_map,
    gauge_boundary_indices,
    tap_positions,
)
from .tables import write_csv

_FLOOR_DB = -300.0


@dataclass(eq=False)
class PipelineResult:
    frame: object
    fiber: object
    num_frames: int           # frames kept (capture frames minus transient)
    intensity_db: np.ndarray  # (num_taps,)
    z_m: np.ndarray           # (num_taps,) tap positions
    jones_gauge: JonesMap     # boundary taps only
    phase_gauge: object
    diff_phase: DiffPhaseMap
    jones_full: Optional[JonesMap] = None


def _estimate_stream(frames, est, num_taps, boundaries, frame_period_s,
                     tap_pitch_m, *, narrow=False, full_maps=False):
    acc = np.zeros(num_taps)
    gauge_rows = []
    full_rows = []
    for f, rx in enumerate(frames):
        if f == 0:
            continue  # transient frame
        if narrow:
            rx = np.asarray(rx).astype(np.complex64)
        h = est.estimate(rx, num_taps)
        acc += (np.abs(h) ** 2).sum(axis=(1, 2))
        gauge_rows.append(h[boundaries])
        if full_maps:
            full_rows.append(h)
    if not gauge_rows:
        raise DspError("need at least two frames (the first one is discarded)")
    kept = len(gauge_rows)
    z = tap_positions(num_taps, tap_pitch_m)
    intensity = 10.0 * np.log10(
        np.maximum(acc / (2.0 * kept), 10.0 ** (_FLOOR_DB / 10.0))
    )
    jones_gauge = JonesMap(
        values=np.stack(gauge_rows),
        frame_period_s=frame_period_s,
        tap_pitch_m=tap_pitch_m,
        z_m=z[boundaries],
        first_frame=1,
    )
    jones_full = None
    if full_maps:
        jones_full = JonesMap(
            values=np.stack(full_rows),
            frame_period_s=frame_period_s,
            tap_pitch_m=tap_pitch_m,
            z_m=z,
            first_frame=1,
        )
    return intensity, z, jones_gauge, jones_full, kept


def _finish_maps(cfg, frame, fiber, intensity, z, jones_gauge, jones_full, kept):
    phase_gauge = extract_phase_map(jones_gauge)
    dpm = differential_phase(phase_gauge, cfg.processing.gauge_m, preselected=True)
    return PipelineResult(
        frame=frame,
        fiber=fiber,
        num_frames=kept,
        intensity_db=intensity,
        z_m=z,
        jones_gauge=jones_gauge,
        phase_gauge=phase_gauge,
        diff_phase=dpm,
        jones_full=jones_full,
    )


def _geometry(cfg, frame):
    num_taps = int(cfg.fiber.total_length_m / frame.s_r)
    if cfg.processing.num_taps is not None:
        num_taps = cfg.processing.num_taps
    boundaries = gauge_boundary_indices(num_taps, frame.s_r, cfg.processing.gauge_m)
    return num_taps, boundaries


def run_pipeline(cfg, capture_path=None, *, full_maps=False):
    """Simulate and process in one streaming pass.

    With capture_path given, every synthesized frame is also persisted
    (float32); processing uses the identically narrowed samples either way.
    """
    code_set = cfg.code_set()
    frame = cfg.probe_frame()
    fiber = synthesize_fiber(cfg.fiber, frame.s_r)
    num_taps, boundaries = _geometry(cfg, frame)
    est = FrameEstimator(code_set)

    source = iter_backscatter_frames(
        frame, fiber, cfg.events, cfg.noise, cfg.duration_s
    )
    writer = None
    if capture_path is not None:
        nf = int(cfg.duration_s / frame.t_code + 1e-9)
        writer = CaptureWriter(
            capture_path,
            CaptureHeader(
                sample_rate_hz=frame.f_symb,
                symbol_rate_baud=frame.f_symb,
                frame_len=frame.frame_len,
                num_frames=nf,
                code_recursions=cfg.probe.recursions,
            ),
        )

        def tee(frames):
            for rx in frames:
                writer.write_frame(rx)
                yield rx

        source = tee(source)
    try:
        parts = _estimate_stream(
            source, est, num_taps, boundaries, frame.t_code, frame.s_r,
            narrow=True, full_maps=full_maps,
        )
    finally:
        if writer is not None:
            writer.close()
    return _finish_maps(cfg, frame, fiber, *parts)


def simulate_to_file(cfg, capture_path):
    """Synthesize and persist the capture without processing it."""
    frame = cfg.probe_frame()
    fiber = synthesize_fiber(cfg.fiber, frame.s_r)
    nf = int(cfg.duration_s / frame.t_code + 1e-9)
    header = CaptureHeader(
        sample_rate_hz=frame.f_symb,
        symbol_rate_baud=frame.f_symb,
        frame_len=frame.frame_len,
        num_frames=nf,
        code_recursions=cfg.probe.recursions,
    )
    with CaptureWriter(capture_path, header) as w:
        for rx in iter_backscatter_frames(
            frame, fiber, cfg.events, cfg.noise, cfg.duration_s
        ):
            w.write_frame(rx)
    return header


def process_capture(capture_path, cfg, *, full_maps=False):
    """Process a persisted capture with the geometry from cfg (streaming)."""
    code_set = cfg.code_set()
    frame = cfg.probe_frame()
    fiber = synthesize_fiber(cfg.fiber, frame.s_r)
    num_taps, boundaries = _geometry(cfg, frame)
    with CaptureReader(capture_path) as reader:
        h = reader.header
        if h.code_recursions != cfg.probe.recursions:
            raise DspError(
                f"capture recursion depth {h.code_recursions} != config "
                f"depth {cfg.probe.recursions}"
            )
        if abs(h.symbol_rate_baud - cfg.probe.symbol_rate_baud) > 1e-6 * abs(
            cfg.probe.symbol_rate_baud
        ):
            raise DspError("capture symbol rate does not match the config")
        sps = h.sample_rate_hz / h.symbol_rate_baud
        if abs(sps - round(sps)) > 1e-9 or round(sps) < 1:
            raise DspError("sample rate is not an integer multiple of symbol rate")
        est = FrameEstimator(code_set, int(round(sps)))
        frame_period = h.frame_len / h.sample_rate_hz
        parts = _estimate_stream(
            reader.frames(), est, num_taps, boundaries, frame_period, frame.s_r,
            full_maps=full_maps,
        )
    return _finish_maps(cfg, frame, fiber, *parts)


def _times(map_like):
    return (map_like.first_frame + np.arange(map_like.values.shape[0])) \
        * map_like.frame_period_s


def write_process_outputs(result, cfg, outdir):
    """Emit intensity, gauge Jones/phase, differential phase, and metadata."""
    os.makedirs(outdir, exist_ok=True)
    paths = {}

    paths["intensity"] = os.path.join(outdir, "intensity.csv")
    write_csv(
        paths["intensity"],
        {
            "tap": np.arange(1, result.z_m.shape[0] + 1),
            "z_m": result.z_m,
            "intensity_db": result.intensity_db,
        },
    )

    jg = result.jones_gauge
    t = _times(jg)
    nb = jg.num_taps
    frames = np.repeat(jg.first_frame + np.arange(jg.num_frames), nb)
    cols = {
        "frame": frames,
        "t_s": np.repeat(t, nb),
        "boundary": np.tile(np.arange(nb), jg.num_frames),
        "z_m": np.tile(jg.z_m, jg.num_frames),
    }
    flat = jg.values.reshape(-1, 2, 2)
    for p, q, name in ((0, 0, "hxx"), (0, 1, "hxy"), (1, 0, "hyx"), (1, 1, "hyy")):
        cols[f"{name}_re"] = flat[:, p, q].real
        cols[f"{name}_im"] = flat[:, p, q].imag
    paths["jones_gauge"] = os.path.join(outdir, "jones_gauge.csv")
    write_csv(paths["jones_gauge"], cols)

    pg = result.phase_gauge
    paths["phase_gauge"] = os.path.join(outdir, "phase_gauge.csv")
    write_csv(
        paths["phase_gauge"],
        {
            "frame": frames,
            "t_s": np.repeat(t, nb),
            "boundary": np.tile(np.arange(nb), pg.num_frames),
            "z_m": np.tile(pg.z_m, pg.num_frames),
            "phi_rad": pg.values.reshape(-1),
            "valid": pg.valid.reshape(-1).astype(np.int64),
        },
    )

    dpm = result.diff_phase
    ns = dpm.num_segments
    paths["diffphase"] = os.path.join(outdir, "diffphase.csv")
    write_csv(
        paths["diffphase"],
        {
            "frame": np.repeat(dpm.first_frame + np.arange(dpm.num_frames), ns),
            "t_s": np.repeat(dpm.times(), ns),
            "segment": np.tile(np.arange(1, ns + 1), dpm.num_frames),
            "z_m": np.tile(dpm.segment_z_m, dpm.num_frames),
            "dphi_rad": dpm.values.reshape(-1),
            "bridged": dpm.bridged.reshape(-1).astype(np.int64),
        },
    )

    if result.jones_full is not None:
        jf = result.jones_full
        nt = jf.num_taps
        flat = jf.values.reshape(-1, 2, 2)
        cols = {
            "frame": np.repeat(jf.first_frame + np.arange(jf.num_frames), nt),
            "tap": np.tile(np.arange(1, nt + 1), jf.num_frames),
            "z_m": np.tile(jf.z_m, jf.num_frames),
        }
        for p, q, name in ((0, 0, "hxx"), (0, 1, "hxy"), (1, 0, "hyx"), (1, 1, "hyy")):
            cols[f"{name}_re"] = flat[:, p, q].real
            cols[f"{name}_im"] = flat[:, p, q].imag
        paths["jones_full"] = os.path.join(outdir, "jones_full.csv")
        write_csv(paths["jones_full"], cols)

    meta = {
        "config": config_to_dict(cfg),
        "derived": {
            "t_code_s": result.frame.t_code,
            "bw_hz": result.frame.bw,
            "s_r_m": result.frame.s_r,
            "frame_period_s": result.jones_gauge.frame_period_s,
            "num_taps": int(result.z_m.shape[0]),
            "num_frames_kept": result.num_frames,
            "first_frame": result.jones_gauge.first_frame,
            "gauge_m": result.diff_phase.gauge_m,
            "segments": result.diff_phase.num_segments,
            "boundary_z_m": [float(v) for v in result.diff_phase.boundary_z_m],
            "segment_z_m": [float(v) for v in result.diff_phase.segment_z_m],
            "reference_tap": result.diff_phase.reference_tap,
        },
    }
    paths["meta"] = os.path.join(outdir, "meta.json")
    with open(paths["meta"], "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def load_diff_phase(outdir):
    """Rebuild the DiffPhaseMap from a process output directory."""
    from .tables import read_csv

    meta_path = os.path.join(outdir, "meta.json")
    with open(meta_path, "r") as fh:
        meta = json.load(fh)["derived"]
    table = read_csv(os.path.join(outdir, "diffphase.csv"))
    segments = int(meta["segments"])
    frames = table["frame"].shape[0] // segments
    values = table["dphi_rad"].reshape(frames, segments)
    bridged = table["bridged"].reshape(frames, segments).astype(bool)
    return DiffPhaseMap(
        values=values,
        bridged=bridged,
        gauge_m=float(meta["gauge_m"]),
        frame_period_s=float(meta["frame_period_s"]),
        segment_z_m=np.asarray(meta["segment_z_m"], dtype=np.float64),
        boundary_z_m=np.asarray(meta["boundary_z_m"], dtype=np.float64),
        reference_tap=int(meta["reference_tap"]),
        first_frame=int(meta["first_frame"]),
    )


def _default_psd_positions(cfg):
    if cfg.analysis.psd_positions_m is not None:
        return list(cfg.analysis.psd_positions_m)
    total = cfg.fiber.total_length_m
    positions = [e.position_m for e in cfg.events]
    if len(positions) >= 2:
        positions.append(0.5 * (positions[0] + positions[1]))
    elif positions:
        positions.append(min(2.0 * positions[0], 0.5 * (positions[0] + total)))
    else:
        positions.append(0.5 * total)
    return positions


def run_analysis(cfg, dpm, outdir):
    """Profile, detection, per-position PSDs/time series, optional sweep."""
    os.makedirs(outdir, exist_ok=True)
    window = cfg.processing.window_s
    if window is None:
        window = dpm.num_frames * dpm.frame_period_s
    profile = ana.stddev_profile(dpm, window)
    events = ana.detect_events(profile, dpm)

    paths = {}
    paths["profile"] = os.path.join(outdir, "profile.csv")
    write_csv(
        paths["profile"],
        {
            "segment": np.arange(1, profile.segment_z_m.shape[0] + 1),
            "z_m": profile.segment_z_m,
            "stddev_rad": profile.stddev_rad,
        },
    )

    paths["events"] = os.path.join(outdir, "events.csv")
    write_csv(
        paths["events"],
        {
            "position_m": np.array([e.position_m for e in events]),
            "frequency_hz": np.array([e.frequency_hz for e in events]),
            "magnitude_rad_pp": np.array([e.magnitude_rad_pp for e in events]),
            "stddev_rad": np.array([e.stddev_rad for e in events]),
        },
    )

    positions = _default_psd_positions(cfg)
    reports = []
    n_window = profile.n_frames
    for i, pos in enumerate(positions):
        report = ana.psd(dpm, pos, window)
        reports.append(report)
        psd_path = os.path.join(outdir, f"psd_{i}.csv")
        paths[f"psd_{i}"] = psd_path
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(report.psd)
        write_csv(
            psd_path,
            {"freq_hz": report.freq_hz, "psd_rad2_per_hz": report.psd, "psd_db": db},
        )
        seg = int(np.argmin(np.abs(dpm.segment_z_m - pos)))
        ts_path = os.path.join(outdir, f"timeseries_{i}.csv")
        paths[f"timeseries_{i}"] = ts_path
        write_csv(
            ts_path,
            {
                "frame": dpm.first_frame + np.arange(n_window),
                "t_s": dpm.times()[:n_window],
                "dphi_rad": dpm.values[:n_window, seg],
            },
        )

    curve = None
    if cfg.analysis.sweep is not None:
        curve = ana.sensitivity_sweep(
            cfg, cfg.analysis.sweep.amplitudes_m, cfg.analysis.sweep.position_m
        )
        paths["sensitivity"] = os.path.join(outdir, "sensitivity.csv")
        write_csv(
            paths["sensitivity"],
            {
                "dl_pp_m": np.array([p.dl_pp_m for p in curve.points]),
                "measured_rad_pp": np.array([p.measured_rad_pp for p in curve.points]),
                "theory_rad_pp": np.array([p.theory_rad_pp for p in curve.points]),
                "below_detection": np.array(
                    [int(p.below_detection) for p in curve.points]
                ),
            },
        )

    meta = {
        "window_s": window,
        "window_frames": profile.n_frames,
        "taper": "hann",
        "overlap": 0.5,
        "detection": {"k_mad": 6.0, "floor_rad": 1e-9},
        "psd_positions_queried_m": positions,
        "psd_positions_actual_m": [r.position_m for r in reports],
        "nperseg": reports[0].nperseg if reports else None,
        "seeds": {"fiber": cfg.fiber.seed, "noise": cfg.noise.seed},
        "detected_events": [
            {
                "position_m": e.position_m,
                "frequency_hz": e.frequency_hz,
                "magnitude_rad_pp": e.magnitude_rad_pp,
                "stddev_rad": e.stddev_rad,
            }
            for e in events
        ],
        "noise_floor_stddev_rad": None
        if curve is None
        else curve.noise_floor_stddev_rad,
    }
    paths["analyze_meta"] = os.path.join(outdir, "analyze_meta.json")
    with open(paths["analyze_meta"], "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths, profile, events, reports, curve
