"""Executable acceptance checks for the whole chain.

Each check is self-contained, deterministic, and returns a CriterionResult;
run_all prints one [PASS]/[FAIL] line per check.  tests/test_acceptance.py
runs the same functions under pytest.  All scales are chosen so the full set
finishes in well under a minute on one core (after the first numba compile).
"""

import hashlib
import math
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from . import analysis as ana
from ._kernels import tap_sum_frames
from .channel import (
    Connector,
    FiberSpec,
    NoiseSpec,
    PerturbationEvent,
    SineWaveform,
    Span,
    _walk_chunks,
    backscatter,
    ground_truth_response,
    synthesize_fiber,
)
from .codes import build_probe_frame, complementary_sum, cross_sum, \
    make_code_set, validate_timing
from .config import ProbeConfig, ProcessingConfig, RunConfig
from .dsp import estimate_jones_map, estimate_jones_map_direct
from .pipeline import (
    process_capture,
    run_analysis,
    run_pipeline,
    simulate_to_file,
    write_process_outputs,
)

_SYMBOL_RATE = 125e6
_PITCH = 299792458.0 / (1.45 * 2.0 * _SYMBOL_RATE)


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str


def _desk_config(duration_s, events, noise, window_s=None, gauge_m=50.0):
    """2 km bench instance: same symbol rate as the long-haul scale, shorter
    code (depth 11) so the frame rate supports audio-band events."""
    return RunConfig(
        duration_s=duration_s,
        probe=ProbeConfig(recursions=11, symbol_rate_baud=_SYMBOL_RATE),
        fiber=FiberSpec(spans=[Span(2000.0, 0.2)]),
        events=list(events),
        noise=noise,
        processing=ProcessingConfig(gauge_m=gauge_m, window_s=window_s),
    )


def _straddle_column(dpm, position_m):
    """Index of the differential-phase column whose span contains position."""
    s = int(np.searchsorted(dpm.boundary_z_m, position_m))
    if not 1 <= s <= dpm.num_segments:
        raise ValueError(f"position {position_m} m outside the mapped span")
    return s - 1


def check_code_identities():
    """Depths 0..14: complementary autocorrelation sums equal 2N at lag zero
    and vanish elsewhere; cross-pair correlation sums vanish at every lag.
    All integer-exact."""
    for k in range(15):
        s = make_code_set(k)
        n = s.length
        expected = np.zeros(2 * n - 1, dtype=np.int64)
        expected[n - 1] = 2 * n
        for pair, tag in ((s.pair_x, "x"), (s.pair_y, "y")):
            got = complementary_sum(pair)
            if not np.array_equal(got, expected):
                return CriterionResult(
                    "code-identities", False,
                    f"depth {k}: complementary sum of pair {tag} is not 2N*delta",
                )
        cross = cross_sum(s.pair_x, s.pair_y)
        if np.any(cross != 0):
            return CriterionResult(
                "code-identities", False,
                f"depth {k}: cross-correlation sum has a nonzero lag",
            )
    return CriterionResult(
        "code-identities", True,
        "depths 0..14 (N up to 65536): 2N*delta and all-zero cross sums, "
        "integer-exact",
    )


def check_probe_timing():
    """Long-haul scale: depth 14 at 125 MBaud gives a 1.048576 ms code period
    and a 476.84 Hz mechanical bandwidth (within 0.5% of 475 Hz); 26 km keeps
    4x the response spread under one period, 30 km does not."""
    frame = build_probe_frame(make_code_set(14), _SYMBOL_RATE)
    checks = []
    checks.append(math.isclose(frame.t_code, 1.048576e-3, rel_tol=1e-12))
    checks.append(math.isclose(frame.bw, 476.837158203125, rel_tol=1e-12))
    checks.append(abs(frame.bw / 475.0 - 1.0) <= 0.005)
    checks.append(math.isclose(frame.s_r, 0.8270136772413793, rel_tol=1e-12))
    ok26 = validate_timing(26000.0, frame, 0.0)
    ok30 = validate_timing(30000.0, frame, 0.0)
    checks.append(ok26.lower_bound_ok and 4.0 * ok26.t_ir < frame.t_code)
    checks.append(not ok30.lower_bound_ok)
    passed = all(checks)
    return CriterionResult(
        "probe-timing", passed,
        f"t_code={frame.t_code*1e3:.6f} ms, bw={frame.bw:.2f} Hz "
        f"({(frame.bw/475.0-1.0)*100:+.2f}% vs 475), "
        f"4*t_ir(26 km)={4.0*ok26.t_ir*1e3:.4f} ms, 30 km rejected={not ok30.lower_bound_ok}",
    )


def _reconstruction_error(length_m, enforce):
    s = make_code_set(11)
    frame = build_probe_frame(s, _SYMBOL_RATE)
    fiber = synthesize_fiber(
        FiberSpec(spans=[Span(length_m, 0.2)], seed=12345), frame.s_r
    )
    cap = backscatter(frame, fiber, [], NoiseSpec(), 4e-4, enforce_timing=enforce)
    jm = estimate_jones_map(cap, s)
    m = min(fiber.num_taps, jm.num_taps)
    est = jm.values[:, :m]
    truth = fiber.static_response[:m]
    per_tap_scale = np.abs(truth).max(axis=(1, 2))
    per_tap_err = np.abs(est - truth[None]).max(axis=(0, 2, 3))
    rel = float((per_tap_err / per_tap_scale).max())
    tail = 0.0
    if jm.num_taps > fiber.num_taps:
        tail = float(
            np.abs(jm.values[:, fiber.num_taps:]).max() / np.abs(truth).max()
        )
    return rel, tail


def check_static_reconstruction():
    """Noiseless static 2 km bench fiber: every tap of the Jones map matches
    the drawn response to better than 1e-9 (per-tap relative).  Stretching
    the fiber past the code's unambiguous range degrades it past 1e-3."""
    rel, tail = _reconstruction_error(2000.0, enforce=True)
    rel_bad, _ = _reconstruction_error(3600.0, enforce=False)
    passed = rel < 1e-9 and tail < 1e-9 and rel_bad > 1e-3
    return CriterionResult(
        "static-reconstruction", passed,
        f"per-tap relative error {rel:.2e} (empty tail {tail:.2e}); "
        f"range-violating fiber degrades to {rel_bad:.2e}",
    )


def check_photoelastic_scale():
    """A 100 Hz stretch of 50/100/200 nm pk-pk lands within 5% of the
    photo-elastic prediction (0.4624/0.9249/1.8498 rad pk-pk)."""
    amplitudes = (50e-9, 100e-9, 200e-9)
    expect = (0.4624, 0.9249, 1.8498)
    details = []
    passed = True
    for dl, ref in zip(amplitudes, expect):
        theory = ana.theory_phase(dl)
        if abs(theory - ref) > 2e-4:
            return CriterionResult(
                "photoelastic-scale", False,
                f"theory {theory:.4f} rad does not reproduce {ref:.4f} rad",
            )
        cfg = _desk_config(
            duration_s=0.035,
            events=[PerturbationEvent(625.0, SineWaveform(dl, 100.0))],
            noise=NoiseSpec(),
            window_s=0.02,
        )
        dpm = run_pipeline(cfg).diff_phase
        series = dpm.values[:, _straddle_column(dpm, 625.0)]
        measured = float(np.percentile(series, 99) - np.percentile(series, 1))
        err = abs(measured / theory - 1.0)
        passed &= err <= 0.05
        details.append(f"{dl*1e9:.0f} nm -> {measured:.4f} rad ({err*100:.2f}% off)")
    return CriterionResult("photoelastic-scale", passed, "; ".join(details))


def check_two_tone_detection():
    """Two simultaneous tones (300 Hz at 600 m, 180 Hz at 1500 m) are both
    detected, localized within one gauge length, and their frequencies land
    within one spectral bin; a quiet segment between them shows no tone."""
    cfg = _desk_config(
        duration_s=0.132,
        events=[
            PerturbationEvent(600.0, SineWaveform(100e-9, 300.0)),
            PerturbationEvent(1500.0, SineWaveform(100e-9, 180.0)),
        ],
        noise=NoiseSpec(awgn_snr_db=40.0),
        window_s=0.13,
    )
    result = run_pipeline(cfg)
    dpm = result.diff_phase
    profile = ana.stddev_profile(dpm, 0.13)
    events = ana.detect_events(profile, dpm)
    if len(events) != 2:
        return CriterionResult(
            "two-tone-detection", False, f"expected 2 events, got {len(events)}"
        )
    events = sorted(events, key=lambda e: e.position_m)
    spectrum = ana.psd(dpm, 1050.0, 0.13)
    df = float(spectrum.freq_hz[1] - spectrum.freq_hz[0])
    gauge = cfg.processing.gauge_m
    pos_ok = (
        abs(events[0].position_m - 600.0) <= gauge
        and abs(events[1].position_m - 1500.0) <= gauge
    )
    freq_ok = (
        abs(events[0].frequency_hz - 300.0) <= df * (1 + 1e-9)
        and abs(events[1].frequency_hz - 180.0) <= df * (1 + 1e-9)
    )
    floor = np.median(spectrum.psd[1:])
    quiet_ok = True
    for tone in (300.0, 180.0):
        k = int(np.argmin(np.abs(spectrum.freq_hz - tone)))
        quiet_ok &= spectrum.psd[k] < 10.0 * floor
    passed = pos_ok and freq_ok and quiet_ok
    return CriterionResult(
        "two-tone-detection", passed,
        f"events at {events[0].position_m:.1f} m/{events[0].frequency_hz:.1f} Hz "
        f"and {events[1].position_m:.1f} m/{events[1].frequency_hz:.1f} Hz "
        f"(bin {df:.1f} Hz); quiet segment clean={quiet_ok}",
    )


def check_amplitude_ratio():
    """Two equal-frequency stretches of 55 and 133 nm pk-pk: the ratio of the
    phase std-dev readings matches 55/133 within 10%."""
    cfg = _desk_config(
        duration_s=0.035,
        events=[
            PerturbationEvent(600.0, SineWaveform(55e-9, 100.0)),
            PerturbationEvent(1500.0, SineWaveform(133e-9, 100.0)),
        ],
        noise=NoiseSpec(),
    )
    dpm = run_pipeline(cfg).diff_phase
    profile = ana.stddev_profile(dpm, dpm.num_frames * dpm.frame_period_s)
    s_a = profile.stddev_rad[_straddle_column(dpm, 600.0)]
    s_b = profile.stddev_rad[_straddle_column(dpm, 1500.0)]
    ratio = float(s_a / s_b)
    expected = 55.0 / 133.0
    err = abs(ratio / expected - 1.0)
    return CriterionResult(
        "amplitude-ratio", err <= 0.10,
        f"std-dev ratio {ratio:.4f} vs {expected:.4f} ({err*100:.2f}% off)",
    )


def check_loss_signature():
    """Backscatter intensity carries the fiber's loss map: the estimation
    chain reproduces per-tap |g|^2 exactly, and over an ensemble the profile
    slopes at -0.4 dB/km for 0.2 dB/km spans with a 2 dB step at a 1 dB
    connector."""
    # chain pin: full pipeline intensity == synthesized |g|^2 in dB
    pin_err = 0.0
    for seed in (12345, 20000, 20007):
        cfg = RunConfig(
            duration_s=1e-4,
            probe=ProbeConfig(recursions=9, symbol_rate_baud=_SYMBOL_RATE),
            fiber=FiberSpec(
                spans=[Span(300.0, 0.2)],
                connectors=[Connector(150.0, 1.0)],
                seed=seed,
            ),
            noise=NoiseSpec(),
            processing=ProcessingConfig(gauge_m=50.0),
        )
        result = run_pipeline(cfg)
        fiber = synthesize_fiber(cfg.fiber, _PITCH)
        expect = 10.0 * np.log10(np.abs(fiber.reflectivity) ** 2)
        pin_err = max(pin_err, float(np.abs(result.intensity_db - expect).max()))
    if pin_err > 1e-3:
        return CriterionResult(
            "loss-signature", False,
            f"chain intensity deviates {pin_err:.2e} dB from |g|^2",
        )

    # ensemble statistics on the pinned quantity (cheap synthesis only)
    spec = FiberSpec(
        spans=[Span(10000.0, 0.2)], connectors=[Connector(5000.0, 1.0)]
    )
    runs = 32
    acc = None
    for i in range(runs):
        fiber = synthesize_fiber(replace(spec, seed=20000 + i), _PITCH)
        db = 10.0 * np.log10(np.abs(fiber.reflectivity) ** 2)
        acc = db if acc is None else acc + db
    mean_db = acc / runs
    z = fiber.z_m
    pre = z < 5000.0
    slope = float(np.polyfit(z[pre] / 1000.0, mean_db[pre], 1)[0])
    w1 = (z >= 4500.0) & (z < 5000.0)
    w2 = (z >= 5000.0) & (z < 5500.0)
    step = float(mean_db[w2].mean() - mean_db[w1].mean() - slope * 0.5)
    passed = abs(slope + 0.4) <= 0.05 and abs(step + 2.0) <= 0.2
    return CriterionResult(
        "loss-signature", passed,
        f"chain pin {pin_err:.1e} dB; ensemble slope {slope:+.4f} dB/km "
        f"(target -0.4), connector step {step:+.3f} dB (target -2.0)",
    )


def check_oracle_equivalence():
    """Two dual routes agree: the FFT correlator matches the direct-sum
    correlator to 1e-12, and the frequency-domain synthesis matches the
    direct tap-sum oracle to 1e-9 (with laser walk and a live event)."""
    s = make_code_set(6)
    frame = build_probe_frame(s, _SYMBOL_RATE)
    fiber = synthesize_fiber(FiberSpec(spans=[Span(53.0, 0.2)], seed=4242), frame.s_r)
    events = [PerturbationEvent(20.0, SineWaveform(50e-9, 2000.0))]

    noise = NoiseSpec(laser_linewidth_hz=50.0, awgn_snr_db=30.0, seed=777)
    cap = backscatter(frame, fiber, events, noise, 10 * frame.t_code)
    d_est = float(
        np.abs(estimate_jones_map(cap, s).values
               - estimate_jones_map_direct(cap, s).values).max()
    )

    noise2 = NoiseSpec(laser_linewidth_hz=50.0, seed=777)
    nf = 6
    cap2 = backscatter(frame, fiber, events, noise2, nf * frame.t_code)
    sigma = math.sqrt(2.0 * math.pi * noise2.laser_linewidth_hz / _SYMBOL_RATE)
    margin = int(fiber.delay_samples[-1])
    chunks = list(_walk_chunks(noise2.seed, sigma, nf, frame.frame_len, margin))
    phase = np.concatenate([chunks[0]] + [c[margin:] for c in chunks[1:]])
    taps = np.stack(
        [ground_truth_response(fiber, events, f * frame.t_code) for f in range(nf)]
    )
    oracle = tap_sum_frames(
        frame.x_stream, frame.y_stream, taps, fiber.delay_samples, phase
    )
    d_synth = float(np.abs(cap2.samples - oracle).max() / np.abs(oracle).max())

    passed = d_est <= 1e-12 and d_synth <= 1e-9
    return CriterionResult(
        "oracle-equivalence", passed,
        f"estimator FFT vs direct {d_est:.2e} (<=1e-12); "
        f"synthesis vs tap-sum {d_synth:.2e} (<=1e-9)",
    )


def _sha(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _dir_hashes(outdir):
    return {name: _sha(os.path.join(outdir, name))
            for name in sorted(os.listdir(outdir))}


def check_determinism():
    """Byte-identical artifacts: repeated runs, worker counts, and the
    file-backed vs in-memory processing routes all produce the same captures
    and CSVs."""
    cfg = RunConfig(
        duration_s=1e-3,
        probe=ProbeConfig(recursions=9, symbol_rate_baud=_SYMBOL_RATE),
        fiber=FiberSpec(spans=[Span(300.0, 0.2)], seed=12345),
        events=[PerturbationEvent(150.0, SineWaveform(30e-9, 800.0))],
        noise=NoiseSpec(laser_linewidth_hz=50.0, awgn_snr_db=25.0, adc_bits=12),
        processing=ProcessingConfig(gauge_m=50.0),
    )
    frame = cfg.probe_frame()
    fiber = synthesize_fiber(cfg.fiber, frame.s_r)
    serial = backscatter(frame, fiber, cfg.events, cfg.noise, cfg.duration_s)
    threaded = backscatter(
        frame, fiber, cfg.events, cfg.noise, cfg.duration_s, workers=2
    )
    workers_ok = bool(np.array_equal(serial.samples, threaded.samples))

    with tempfile.TemporaryDirectory() as tmp:
        caps, dirs = [], []
        for run in ("a", "b"):
            cap = os.path.join(tmp, f"cap_{run}.das")
            out = os.path.join(tmp, f"out_{run}")
            result = run_pipeline(cfg, capture_path=cap)
            write_process_outputs(result, cfg, out)
            run_analysis(cfg, result.diff_phase, out)
            caps.append(_sha(cap))
            dirs.append(_dir_hashes(out))
        rerun_ok = caps[0] == caps[1] and dirs[0] == dirs[1]

        cap_c = os.path.join(tmp, "cap_c.das")
        out_c = os.path.join(tmp, "out_c")
        simulate_to_file(cfg, cap_c)
        result = process_capture(cap_c, cfg)
        write_process_outputs(result, cfg, out_c)
        run_analysis(cfg, result.diff_phase, out_c)
        file_ok = _sha(cap_c) == caps[0] and _dir_hashes(out_c) == dirs[0]

    passed = workers_ok and rerun_ok and file_ok
    return CriterionResult(
        "determinism", passed,
        f"workers 1 vs 2 bitwise={workers_ok}, rerun identical={rerun_ok}, "
        f"file route identical={file_ok}",
    )


ALL_CRITERIA = (
    ("code-identities", check_code_identities),
    ("probe-timing", check_probe_timing),
    ("static-reconstruction", check_static_reconstruction),
    ("photoelastic-scale", check_photoelastic_scale),
    ("two-tone-detection", check_two_tone_detection),
    ("amplitude-ratio", check_amplitude_ratio),
    ("loss-signature", check_loss_signature),
    ("oracle-equivalence", check_oracle_equivalence),
    ("determinism", check_determinism),
)

_SELFTEST = ("code-identities", "probe-timing", "oracle-equivalence", "determinism")


def run_all(names=None, stream=None):
    """Run the named checks (default: all) and print one line each."""
    if stream is None:
        stream = sys.stdout  # resolved per call so redirection works
    ok = True
    for name, fn in ALL_CRITERIA:
        if names is not None and name not in names:
            continue
        try:
            r = fn()
        except Exception as exc:  # honest red: report, never mask
            r = CriterionResult(name, False, f"raised {type(exc).__name__}: {exc}")
        ok = ok and r.passed
        stream.write(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}\n")
        stream.flush()
    return ok


def selftest(stream=None):
    """Fast subset used by the CLI selftest command."""
    return run_all(names=_SELFTEST, stream=stream)
