"""Figure-level analyses over differential phase maps.

Everything here consumes the immutable maps produced by the receiver: the
per-segment standard-deviation profile over a time window, averaged
overlapped periodograms (Hann taper, 50% overlap, one-sided density), joint
detection/localization of mechanical events, and the sensitivity sweep
against the photo-elastic reference line theory = 4*pi*n*xi*dL/lambda.
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np
import scipy.fft as sfft


class AnalysisError(ValueError):
    """Invalid analysis request."""


@dataclass(eq=False)
class StdDevProfile:
    segment_z_m: np.ndarray
    stddev_rad: np.ndarray
    window_s: float
    n_frames: int


@dataclass(eq=False)
class SpectrumReport:
    position_m: float          # center of the analyzed segment
    freq_hz: np.ndarray
    psd: np.ndarray            # rad^2/Hz, one-sided density
    window_s: float
    nperseg: int
    tone_hz: Optional[float] = None
    tone_snr_db: Optional[float] = None


@dataclass(frozen=True)
class DetectedEvent:
    position_m: float
    frequency_hz: float
    magnitude_rad_pp: float
    stddev_rad: float


@dataclass(frozen=True)
class SensitivityPoint:
    dl_pp_m: float
    measured_rad_pp: float
    theory_rad_pp: float
    below_detection: bool


@dataclass(eq=False)
class SensitivityCurve:
    points: List[SensitivityPoint]
    noise_floor_stddev_rad: float
    position_m: float


def _window_frames(dpm, window_s):
    n = int(round(window_s / dpm.frame_period_s))
    if n < 10:
        raise AnalysisError("window must cover at least 10 frame periods")
    if n > dpm.num_frames:
        raise AnalysisError(
            f"window of {n} frames exceeds the {dpm.num_frames} available"
        )
    return n


def stddev_profile(dpm, window_s):
    """Per-segment sample standard deviation over the window (mean removed)."""
    n = _window_frames(dpm, window_s)
    std = np.std(dpm.values[:n], axis=0, ddof=1)
    return StdDevProfile(
        segment_z_m=dpm.segment_z_m.copy(),
        stddev_rad=std,
        window_s=float(window_s),
        n_frames=n,
    )


def _hann(n):
    return 0.5 - 0.5 * np.cos(2.0 * math.pi * np.arange(n) / n)


def welch_psd(x, fs, nperseg, overlap=0.5):
    """Averaged overlapped periodograms: Hann taper, per-segment mean removal,
    one-sided density scaling (units^2/Hz).  Returns (freqs, psd)."""
    x = np.asarray(x, dtype=np.float64)
    nperseg = int(nperseg)
    if nperseg < 2 or nperseg > x.shape[0]:
        raise AnalysisError("nperseg out of range")
    step = max(1, int(round(nperseg * (1.0 - overlap))))
    starts = range(0, x.shape[0] - nperseg + 1, step)
    if len(starts) < 2:
        raise AnalysisError("fewer than 2 periodogram segments")
    win = _hann(nperseg)
    scale = 1.0 / (fs * np.sum(win**2))
    acc = np.zeros(nperseg // 2 + 1)
    for s0 in starts:
        seg = x[s0:s0 + nperseg]
        spec = sfft.rfft(win * (seg - seg.mean()))
        acc += scale * np.abs(spec) ** 2
    psd = acc / len(starts)
    if nperseg % 2 == 0:
        psd[1:-1] *= 2.0
    else:
        psd[1:] *= 2.0
    return sfft.rfftfreq(nperseg, 1.0 / fs), psd


def _segment_at(dpm, position_m):
    if not 0.0 <= position_m <= dpm.boundary_z_m[-1]:
        raise AnalysisError(
            f"position {position_m} m outside the mapped span "
            f"(0, {dpm.boundary_z_m[-1]:.1f})"
        )
    return int(np.argmin(np.abs(dpm.segment_z_m - position_m)))


def psd(dpm, position_m, window_s, tone_hz=None):
    """PSD of one segment's differential phase over the window.

    Splits the window into half-length periodogram segments (50% overlap,
    three averages).  With tone_hz given, reports the peak bin near that
    frequency relative to the median of the remaining bins.
    """
    seg = _segment_at(dpm, position_m)
    n = _window_frames(dpm, window_s)
    series = dpm.values[:n, seg]
    fs = 1.0 / dpm.frame_period_s
    nperseg = n // 2
    freqs, density = welch_psd(series, fs, nperseg)
    tone_snr_db = None
    if tone_hz is not None:
        near = int(np.argmin(np.abs(freqs - tone_hz)))
        lo, hi = max(near - 1, 1), min(near + 1, freqs.size - 1)
        peak = lo + int(np.argmax(density[lo:hi + 1]))
        keep = np.ones(freqs.size, dtype=bool)
        keep[0] = False
        keep[max(peak - 2, 0):peak + 3] = False
        noise = float(np.median(density[keep])) if keep.any() else 0.0
        p = float(density[peak])
        if noise > 0.0:
            tone_snr_db = 10.0 * math.log10(p / noise) if p > 0 else -math.inf
        else:
            tone_snr_db = math.inf if p > 0 else 0.0
    return SpectrumReport(
        position_m=float(dpm.segment_z_m[seg]),
        freq_hz=freqs,
        psd=density,
        window_s=float(window_s),
        nperseg=nperseg,
        tone_hz=tone_hz,
        tone_snr_db=tone_snr_db,
    )


def detect_events(profile, dpm, k_mad=6.0, floor_rad=1e-9, psd_window_s=None):
    """Threshold the StDv profile at median + k_mad*MAD (clipped below by
    floor_rad), cluster adjacent segments, and report each cluster's peak
    position, dominant frequency, and peak-to-peak magnitude.

    The magnitude estimator is the 99th minus 1st percentile of the segment's
    series over the profile window, which resists single-sample outliers.
    """
    if profile.stddev_rad.shape[0] != dpm.num_segments or not np.allclose(
        profile.segment_z_m, dpm.segment_z_m
    ):
        raise AnalysisError("profile and map cover different segments")
    std = profile.stddev_rad
    med = float(np.median(std))
    mad = float(np.median(np.abs(std - med)))
    threshold = max(med + k_mad * mad, floor_rad)
    mask = std > threshold
    events = []
    window = psd_window_s if psd_window_s is not None else profile.window_s
    s = 0
    while s < mask.size:
        if not mask[s]:
            s += 1
            continue
        e = s
        while e + 1 < mask.size and mask[e + 1]:
            e += 1
        cluster = slice(s, e + 1)
        peak = s + int(np.argmax(std[cluster]))
        series = dpm.values[:profile.n_frames, peak]
        report = psd(dpm, float(dpm.segment_z_m[peak]), window)
        dominant = float(report.freq_hz[1 + int(np.argmax(report.psd[1:]))])
        magnitude = float(
            np.percentile(series, 99) - np.percentile(series, 1)
        )
        events.append(
            DetectedEvent(
                position_m=float(dpm.segment_z_m[peak]),
                frequency_hz=dominant,
                magnitude_rad_pp=magnitude,
                stddev_rad=float(std[peak]),
            )
        )
        s = e + 1
    return events


def theory_phase(dl_pp_m, n=1.45, xi=0.78, wavelength_m=1536.6e-9):
    """Round-trip photo-elastic phase for a peak-to-peak extension (radians)."""
    if dl_pp_m < 0:
        raise AnalysisError("extension must be >= 0")
    return 4.0 * math.pi * n * xi * dl_pp_m / wavelength_m


def _derived_seed(base, index):
    return int(np.random.SeedSequence([int(base), 1000 + index]).generate_state(1)[0])


def sensitivity_sweep(cfg, amplitudes_m, position_m, window_s=None):
    """Run the full simulate->process->measure chain per amplitude.

    The event of cfg nearest position_m is the swept actuator; every run
    (including the unperturbed floor run) uses an independently derived noise
    seed.  Points whose theory value falls below three times the measured
    noise-floor StDv are flagged below detection.
    """
    from .pipeline import run_pipeline

    amplitudes = [float(a) for a in amplitudes_m]
    if any(b < a for a, b in zip(amplitudes, amplitudes[1:])):
        raise AnalysisError("amplitudes must be sorted ascending")
    if not cfg.events:
        raise AnalysisError("config carries no event to sweep")
    base_event = min(cfg.events, key=lambda e: abs(e.position_m - position_m))
    spec = cfg.fiber

    def run_with(events, seed_index):
        noise = replace(cfg.noise, seed=_derived_seed(cfg.noise.seed, seed_index))
        run_cfg = replace(cfg, events=events, noise=noise)
        return run_pipeline(run_cfg).diff_phase

    floor_dpm = run_with([], 0)
    window = window_s if window_s is not None else cfg.processing.window_s
    if window is None:
        window = (floor_dpm.num_frames) * floor_dpm.frame_period_s
    seg = _segment_at(floor_dpm, base_event.position_m)
    n = _window_frames(floor_dpm, window)
    floor_std = float(np.std(floor_dpm.values[:n, seg], ddof=1))

    points = []
    for i, amp in enumerate(amplitudes):
        event = replace(
            base_event, waveform=replace(base_event.waveform, dl_pp_m=amp)
        )
        dpm = run_with([event], i + 1)
        series = dpm.values[:n, _segment_at(dpm, base_event.position_m)]
        measured = float(np.percentile(series, 99) - np.percentile(series, 1))
        theory = theory_phase(
            amp, spec.n, spec.photoelastic_coeff, spec.wavelength_m
        )
        points.append(
            SensitivityPoint(
                dl_pp_m=amp,
                measured_rad_pp=measured,
                theory_rad_pp=theory,
                below_detection=theory < 3.0 * floor_std,
            )
        )
    return SensitivityCurve(
        points=points,
        noise_floor_stddev_rad=floor_std,
        position_m=float(base_event.position_m),
    )
