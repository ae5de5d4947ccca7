"""Receiver-side processing: Jones-matrix recovery, phase and intensity maps.

Per frame, the four correlations between the two received polarizations and
the two transmitted code streams recover the per-tap 2x2 responses: the
slot-wise circular correlations against slot 1 (pair.a) and slot 2 (pair.b)
telescope into one full-frame circular correlation, which the complementary
and mutual-orthogonality identities turn into a clean estimate
H_hat[p,q](tau) for every delay within half a code length.

The optical phase per tap is phi = 0.5*arg(det H_hat), defined on a
half-circle (-pi/2, pi/2]; differential phase between gauge boundaries is
unwrapped along time with pi-multiple corrections accordingly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import _kernels

_DIRECT_ESTIMATOR_LIMIT = 4096


class DspError(ValueError):
    """Invalid capture/code-set combination or processing request."""


@dataclass(eq=False)
class JonesMap:
    values: np.ndarray        # (frames, taps, 2, 2) complex
    frame_period_s: float
    tap_pitch_m: float
    z_m: np.ndarray           # (taps,) tap positions
    first_frame: int = 1      # index of the first kept frame in the capture

    @property
    def num_frames(self):
        return int(self.values.shape[0])

    @property
    def num_taps(self):
        return int(self.values.shape[1])


@dataclass(eq=False)
class PhaseMap:
    values: np.ndarray        # (frames, taps) radians, NaN where invalid
    valid: np.ndarray         # (frames, taps) bool
    frame_period_s: float
    tap_pitch_m: float
    z_m: np.ndarray
    first_frame: int = 1

    @property
    def num_frames(self):
        return int(self.values.shape[0])

    @property
    def num_taps(self):
        return int(self.values.shape[1])


@dataclass(eq=False)
class DiffPhaseMap:
    values: np.ndarray        # (frames, segments) radians, time-unwrapped
    bridged: np.ndarray       # (frames, segments) bool: an endpoint was faded
    gauge_m: float
    frame_period_s: float
    segment_z_m: np.ndarray   # (segments,) segment centers
    boundary_z_m: np.ndarray  # (segments+1,) boundary tap positions
    reference_tap: int = 0    # tap-axis index anchoring segment 1
    first_frame: int = 1

    @property
    def num_frames(self):
        return int(self.values.shape[0])

    @property
    def num_segments(self):
        return int(self.values.shape[1])

    def times(self):
        return (self.first_frame + np.arange(self.num_frames)) * self.frame_period_s


class FrameEstimator:
    """Reusable per-frame correlator (reference spectra computed once)."""

    def __init__(self, code_set, samples_per_symbol=1):
        sps = int(samples_per_symbol)
        if sps < 1 or samples_per_symbol != sps:
            raise DspError("samples per symbol must be a positive integer")
        self.code_set = code_set
        self.sps = sps
        self.frame_len = 2 * code_set.length
        sx = np.concatenate([code_set.pair_x.a, code_set.pair_x.b]).astype(np.complex128)
        sy = np.concatenate([code_set.pair_y.a, code_set.pair_y.b]).astype(np.complex128)
        self._sx_conj = np.conj(sfft.fft(sx))
        self._sy_conj = np.conj(sfft.fft(sy))
        self._norm = 1.0 / self.frame_len

    @property
    def max_taps(self):
        return self.frame_len - 1

    def estimate(self, rx, num_taps):
        """Estimate H_hat for delays 1..num_taps from one received frame.

        rx: (frame_len*sps, 2) complex samples.  Any dtype is upcast to
        complex128 so the file-backed (float32) and in-memory paths produce
        identical results.
        """
        rx = np.asarray(rx)
        if rx.shape != (self.frame_len * self.sps, 2):
            raise DspError(
                f"frame shape {rx.shape} != ({self.frame_len * self.sps}, 2)"
            )
        if not 1 <= num_taps <= self.max_taps:
            raise DspError(f"num_taps must be in 1..{self.max_taps}")
        rx = rx[:: self.sps].astype(np.complex128, copy=False)
        out = np.empty((num_taps, 2, 2), dtype=np.complex128)
        sel = slice(1, num_taps + 1)
        for p in range(2):
            spec = sfft.fft(rx[:, p])
            out[:, p, 0] = sfft.ifft(spec * self._sx_conj)[sel]
            out[:, p, 1] = sfft.ifft(spec * self._sy_conj)[sel]
        out *= self._norm
        return out


def _capture_checks(capture, code_set):
    if capture.code_recursions != code_set.recursions:
        raise DspError(
            f"capture recursion depth {capture.code_recursions} != code set "
            f"depth {code_set.recursions}"
        )
    if capture.num_frames < 2:
        raise DspError("need at least two frames (the first one is discarded)")


def tap_positions(num_taps, tap_pitch_m):
    return np.arange(1, num_taps + 1) * tap_pitch_m


def estimate_jones_map(capture, code_set, num_taps=None, n=1.45):
    """Correlate every frame of a capture into a JonesMap.

    Delays are estimated at symbol pitch for taps 1..num_taps (default: half
    the code length, the sidelobe-free zone).  The first frame is dropped as
    the transient.  n converts symbol delay to distance (tap_pitch).
    """
    _capture_checks(capture, code_set)
    est = FrameEstimator(code_set, capture.samples_per_symbol)
    if num_taps is None:
        num_taps = code_set.length // 2
    frames = capture.num_frames - 1
    values = np.empty((frames, num_taps, 2, 2), dtype=np.complex128)
    for t in range(frames):
        values[t] = est.estimate(capture.samples[t + 1], num_taps)
    pitch = (299_792_458.0 / n) / (2.0 * capture.symbol_rate_baud)
    return JonesMap(
        values=values,
        frame_period_s=capture.frame_len / capture.sample_rate_hz,
        tap_pitch_m=pitch,
        z_m=tap_positions(num_taps, pitch),
        first_frame=1,
    )


def estimate_jones_map_direct(capture, code_set, num_taps=None, n=1.45):
    """Slot-wise direct-summation estimator (test oracle; N <= 4096 only).

    Correlates each received polarization against the reference placed in
    slot 1 (pair.a || zeros) and in slot 2 (zeros || pair.b) separately, sums
    the two circular correlations, and normalizes by 2N.  Mathematically
    identical to the full-stream correlation in estimate_jones_map; computed
    by an independent route.
    """
    _capture_checks(capture, code_set)
    if code_set.length > _DIRECT_ESTIMATOR_LIMIT:
        raise DspError("direct estimator is restricted to N <= 4096")
    if capture.samples_per_symbol != 1:
        raise DspError("direct estimator expects one sample per symbol")
    if num_taps is None:
        num_taps = code_set.length // 2
    n_code = code_set.length
    zeros = np.zeros(n_code)
    refs = {
        0: (np.concatenate([code_set.pair_x.a, zeros]),
            np.concatenate([zeros, code_set.pair_x.b])),
        1: (np.concatenate([code_set.pair_y.a, zeros]),
            np.concatenate([zeros, code_set.pair_y.b])),
    }
    frames = capture.num_frames - 1
    values = np.empty((frames, num_taps, 2, 2), dtype=np.complex128)
    for t in range(frames):
        frame = np.asarray(capture.samples[t + 1], dtype=np.complex128)
        for p in range(2):
            for q in range(2):
                slot1, slot2 = refs[q]
                c = _kernels.circ_xcorr_direct(frame[:, p], slot1, num_taps + 1)
                c = c + _kernels.circ_xcorr_direct(frame[:, p], slot2, num_taps + 1)
                values[t, :, p, q] = c[1:] / (2.0 * n_code)
    pitch = (299_792_458.0 / n) / (2.0 * capture.symbol_rate_baud)
    return JonesMap(
        values=values,
        frame_period_s=capture.frame_len / capture.sample_rate_hz,
        tap_pitch_m=pitch,
        z_m=tap_positions(num_taps, pitch),
        first_frame=1,
    )


def extract_phase_map(jm, fade_rel_tol=1e-6):
    """phi = 0.5*arg(det H_hat) per (frame, tap), in (-pi/2, pi/2].

    Taps whose |det| falls below fade_rel_tol times the frame's median are
    polarization-independent fades: flagged invalid and carried as NaN, never
    as zero phase.
    """
    h = jm.values
    det = h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] * h[..., 1, 0]
    absdet = np.abs(det)
    median = np.median(absdet, axis=1, keepdims=True)
    valid = absdet > fade_rel_tol * median
    values = 0.5 * np.angle(det)
    values[~valid] = np.nan
    return PhaseMap(
        values=values,
        valid=valid,
        frame_period_s=jm.frame_period_s,
        tap_pitch_m=jm.tap_pitch_m,
        z_m=jm.z_m.copy(),
        first_frame=jm.first_frame,
    )


def gauge_boundary_indices(num_taps, tap_pitch_m, gauge_m):
    """Tap-axis indices of the gauge boundaries: reference tap 0, then one
    boundary per gauge length (uniform decimation at the gauge pitch)."""
    if gauge_m < tap_pitch_m:
        raise DspError("gauge must not be shorter than the tap pitch")
    segments = int(num_taps * tap_pitch_m / gauge_m + 1e-9)
    if segments < 1:
        raise DspError("gauge longer than the mapped fiber")
    idx = np.empty(segments + 1, dtype=np.int64)
    idx[0] = 0
    for s in range(1, segments + 1):
        raw = int(round(s * gauge_m / tap_pitch_m)) - 1
        idx[s] = max(raw, idx[s - 1] + 1)
    if idx[-1] > num_taps - 1:
        raise DspError("gauge grid exceeds the mapped taps")
    return idx


def _bridge_invalid(values, valid):
    """Fill NaN taps from the nearest valid tap in the same frame (ties go to
    the smaller index).  Returns a filled copy; raises if a frame has no
    valid tap at all."""
    filled = values.copy()
    bad_frames = np.flatnonzero(~valid.all(axis=1))
    for t in bad_frames:
        good = np.flatnonzero(valid[t])
        if good.size == 0:
            raise DspError(f"frame {t}: no valid taps to bridge from")
        bad = np.flatnonzero(~valid[t])
        right = np.searchsorted(good, bad)
        left = np.clip(right - 1, 0, good.size - 1)
        right = np.clip(right, 0, good.size - 1)
        dl = np.abs(bad - good[left])
        dr = np.abs(good[right] - bad)
        pick = np.where(dl <= dr, good[left], good[right])
        filled[t, bad] = filled[t, pick]
    return filled


def _unwrap_time(values):
    # Jumps above pi/2 between consecutive frames are branch crossings of the
    # half-circle phase; correct by the nearest multiple of pi.
    if values.shape[0] <= 1:
        return values.copy()
    steps = np.diff(values, axis=0)
    steps -= np.pi * np.round(steps / np.pi)
    return np.concatenate([values[:1], values[:1] + np.cumsum(steps, axis=0)])


def differential_phase(pm, gauge_m, *, preselected=False):
    """Differential phase between consecutive gauge boundaries, unwrapped in
    time.

    Segment s spans (boundary s-1, boundary s]; segment 1 is referenced to
    the first tap.  Faded taps are bridged from their nearest valid neighbor
    and the affected (frame, segment) cells flagged.  With preselected=True
    the phase map's tap axis is taken as the boundary list itself (taps were
    already decimated to the gauge grid).
    """
    if preselected:
        if pm.num_taps < 2:
            raise DspError("need at least two boundary taps")
        idx = np.arange(pm.num_taps, dtype=np.int64)
    else:
        idx = gauge_boundary_indices(pm.num_taps, pm.tap_pitch_m, gauge_m)
    filled = _bridge_invalid(pm.values, pm.valid)
    # advanced indexing yields F order; keep C so reduction order (and with it
    # every downstream byte) matches a map reloaded from CSV
    sel = np.ascontiguousarray(filled[:, idx])
    sel_bridged = ~pm.valid[:, idx]
    diffs = sel[:, 1:] - sel[:, :-1]
    unwrapped = _unwrap_time(diffs)
    boundary_z = pm.z_m[idx]
    return DiffPhaseMap(
        values=unwrapped,
        bridged=sel_bridged[:, 1:] | sel_bridged[:, :-1],
        gauge_m=float(gauge_m),
        frame_period_s=pm.frame_period_s,
        segment_z_m=0.5 * (boundary_z[:-1] + boundary_z[1:]),
        boundary_z_m=boundary_z,
        reference_tap=int(idx[0]),
        first_frame=pm.first_frame,
    )


def intensity_trace(jm, floor_db=-300.0):
    """Time-averaged per-tap backscatter intensity in dB.

    Uses the squared Frobenius norm of H_hat averaged over frames and halved
    (two polarization rows), so a unit tap reads 0 dB; values are clipped at
    floor_db so empty taps stay finite.
    """
    power = np.mean(np.abs(jm.values) ** 2, axis=0).sum(axis=(1, 2)) / 2.0
    return 10.0 * np.log10(np.maximum(power, 10.0 ** (floor_db / 10.0)))
