"""Dual-polarization Rayleigh backscatter synthesis.

The fiber is modeled as one aggregate complex-Gaussian reflector per spatial
resolution cell (finer structure is unresolvable by the receiver).  Tap i at
z_i = i*pitch carries a round-trip response g_i * F_i^T F_i, with F_i the
cumulative product of per-segment random retarders (transpose reciprocity for
the return pass) and |g_i|^2 following the round-trip span/connector losses.

A mechanical event at z_e stretches the fiber locally; every tap beyond z_e
accrues the full round-trip photo-elastic phase 4*pi*n*xi*dL(t)/lambda.

Frame synthesis is frequency-domain overlap-save over the periodically
probed stream (block = frame + longest delay), with the source phase walk
folded in exactly through q[k] = s[k mod frame_len] * exp(-j*phi[k]) so that
each received sample carries exp(j*(phi[n] - phi[n - d])) per tap.  The
direct tap-sum oracle in _kernels verifies this path on small instances.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.fft as sfft

from . import _kernels
from .codes import validate_timing

# rng stream tags: fiber synthesis uses the bare seed; frame noise uses
# [seed, tag, block] substreams so parallel schedules stay reproducible.
_PHASE_TAG = 2
_AWGN_TAG = 3


class ChannelError(ValueError):
    """Invalid channel configuration or simulation request."""


@dataclass
class Span:
    length_m: float
    loss_db_per_km: float


@dataclass
class Connector:
    position_m: float
    loss_db: float


@dataclass
class FiberSpec:
    spans: List[Span]
    connectors: List[Connector] = field(default_factory=list)
    n: float = 1.45
    wavelength_m: float = 1536.6e-9
    rayleigh_level_db: float = -70.0
    birefringence_rad: float = 0.02
    photoelastic_coeff: float = 0.78
    seed: int = 12345

    def __post_init__(self):
        if not self.spans:
            raise ChannelError("fiber needs at least one span")
        for s in self.spans:
            if s.length_m <= 0:
                raise ChannelError("span lengths must be positive")
            if s.loss_db_per_km < 0:
                raise ChannelError("span losses must be >= 0")
        if not 1.0 < self.n < 2.0:
            raise ChannelError("refractive index out of range (1, 2)")
        if self.wavelength_m <= 0:
            raise ChannelError("wavelength must be positive")
        if self.birefringence_rad < 0:
            raise ChannelError("birefringence strength must be >= 0")
        total = self.total_length_m
        for c in self.connectors:
            if c.loss_db < 0:
                raise ChannelError("connector losses must be >= 0")
            if not 0.0 < c.position_m < total:
                raise ChannelError(
                    f"connector at {c.position_m} m outside the fiber (0, {total})"
                )

    @property
    def total_length_m(self):
        return float(sum(s.length_m for s in self.spans))

    def one_way_loss_db(self, z):
        """Cumulative one-way loss (dB) at distance z (scalar or array)."""
        z = np.asarray(z, dtype=np.float64)
        loss = np.zeros_like(z)
        start = 0.0
        for s in self.spans:
            inside = np.clip(z - start, 0.0, s.length_m)
            loss = loss + inside * (s.loss_db_per_km / 1000.0)
            start += s.length_m
        for c in self.connectors:
            loss = loss + c.loss_db * (z >= c.position_m)
        return loss


@dataclass
class SineWaveform:
    dl_pp_m: float
    frequency_hz: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.dl_pp_m < 0:
            raise ChannelError("peak-to-peak extension must be >= 0")
        if self.frequency_hz < 0:
            raise ChannelError("frequency must be >= 0")

    def displacement(self, t):
        """Instantaneous extension dL(t) in meters (zero-mean sine)."""
        return 0.5 * self.dl_pp_m * np.sin(
            2.0 * math.pi * self.frequency_hz * np.asarray(t) + self.phase_rad
        )


@dataclass
class PerturbationEvent:
    position_m: float
    waveform: SineWaveform
    stretched_length_m: float = 0.0


@dataclass
class NoiseSpec:
    laser_linewidth_hz: float = 0.0
    awgn_snr_db: float = math.inf
    adc_bits: Optional[int] = None
    seed: int = 54321

    def __post_init__(self):
        if self.laser_linewidth_hz < 0:
            raise ChannelError("linewidth must be >= 0")
        if self.adc_bits is not None and not 8 <= int(self.adc_bits) <= 16:
            raise ChannelError("adc_bits must be in 8..16 (or omitted)")


@dataclass(eq=False)
class FiberRealization:
    spec: FiberSpec
    tap_pitch_m: float
    z_m: np.ndarray            # (M,) tap positions, i*pitch
    delay_samples: np.ndarray  # (M,) round-trip delay in symbol periods (= i)
    delay_s: np.ndarray        # (M,) round-trip delay in seconds
    reflectivity: np.ndarray   # (M,) complex g_i
    forward_jones: np.ndarray  # (M, 2, 2) cumulative unitary F_i
    static_response: np.ndarray  # (M, 2, 2) g_i * F_i^T F_i

    @property
    def num_taps(self):
        return int(self.z_m.shape[0])


@dataclass(eq=False)
class IQCapture:
    sample_rate_hz: float
    symbol_rate_baud: float
    code_recursions: int
    samples: np.ndarray  # (num_frames, frame_len, 2), polarizations x, y

    def __post_init__(self):
        if self.samples.ndim != 3 or self.samples.shape[2] != 2:
            raise ChannelError("samples must have shape (frames, frame_len, 2)")
        sps = self.sample_rate_hz / self.symbol_rate_baud
        if abs(sps - round(sps)) > 1e-9 or round(sps) < 1:
            raise ChannelError("sample rate must be an integer multiple of symbol rate")
        expected = 2 * (4 << self.code_recursions) * int(round(sps))
        if self.samples.shape[1] != expected:
            raise ChannelError(
                f"frame_len {self.samples.shape[1]} != {expected} for "
                f"recursion depth {self.code_recursions}"
            )

    @property
    def num_frames(self):
        return int(self.samples.shape[0])

    @property
    def frame_len(self):
        return int(self.samples.shape[1])

    @property
    def samples_per_symbol(self):
        return int(round(self.sample_rate_hz / self.symbol_rate_baud))


def phase_per_meter(spec):
    """Round-trip photo-elastic phase per meter of extension: 4*pi*n*xi/lambda."""
    return 4.0 * math.pi * spec.n * spec.photoelastic_coeff / spec.wavelength_m


def synthesize_fiber(spec, tap_pitch_m):
    """Draw a random fiber realization with one tap per resolution cell.

    Deterministic given spec.seed; the draw order (reflectivities, retarder
    angles, retarder axes) is fixed and part of the reproducibility contract.
    """
    if tap_pitch_m <= 0:
        raise ChannelError("tap pitch must be positive")
    total = spec.total_length_m
    m = int(total / tap_pitch_m)
    if m < 1:
        raise ChannelError("fiber shorter than one resolution cell")
    idx = np.arange(1, m + 1, dtype=np.int64)
    z = idx * tap_pitch_m
    # mean tap power: rayleigh level minus the round-trip (2x) path loss
    power = 10.0 ** ((spec.rayleigh_level_db - 2.0 * spec.one_way_loss_db(z)) / 10.0)

    rng = np.random.default_rng(spec.seed)
    g_re = rng.standard_normal(m)
    g_im = rng.standard_normal(m)
    thetas = rng.normal(0.0, spec.birefringence_rad, m) if spec.birefringence_rad > 0 else np.zeros(m)
    axes = rng.standard_normal((m, 3))

    g = np.sqrt(power / 2.0) * (g_re + 1j * g_im)

    norm = np.linalg.norm(axes, axis=1)
    degenerate = norm < 1e-12
    axes[degenerate] = (0.0, 0.0, 1.0)
    norm[degenerate] = 1.0
    nx, ny, nz = (axes / norm[:, None]).T
    c = np.cos(thetas / 2.0)
    s = np.sin(thetas / 2.0)
    # SU(2) retarder: cos(theta/2) I - j sin(theta/2) (axis . pauli)
    retarders = np.empty((m, 2, 2), dtype=np.complex128)
    retarders[:, 0, 0] = c - 1j * s * nz
    retarders[:, 0, 1] = -1j * s * nx - s * ny
    retarders[:, 1, 0] = -1j * s * nx + s * ny
    retarders[:, 1, 1] = c + 1j * s * nz

    forward = _kernels.cum_jones(retarders)

    roundtrip = np.einsum("mji,mjk->mik", forward, forward)  # F^T F
    static = g[:, None, None] * roundtrip

    c_f = 299_792_458.0 / spec.n
    return FiberRealization(
        spec=spec,
        tap_pitch_m=float(tap_pitch_m),
        z_m=z,
        delay_samples=idx,
        delay_s=2.0 * z / c_f,
        reflectivity=g,
        forward_jones=forward,
        static_response=static,
    )


def _event_coef(spec):
    return phase_per_meter(spec)


def ground_truth_response(fiber, events, t):
    """Per-tap 2x2 round-trip responses H_i(t) including event phases."""
    if t < 0:
        raise ChannelError("t must be >= 0")
    h = fiber.static_response
    if not events:
        return h.copy()
    coef = _event_coef(fiber.spec)
    total = np.zeros(fiber.num_taps)
    for e in events:
        total += coef * float(e.waveform.displacement(t)) * (fiber.z_m > e.position_m)
    return h * np.exp(1j * total)[:, None, None]


def laser_phase_walk(linewidth_hz, n_samples, sample_rate_hz, seed):
    """Wiener phase walk: increment variance 2*pi*linewidth/sample_rate.

    walk[0] = 0; zero linewidth gives identical zeros.
    """
    if linewidth_hz < 0:
        raise ChannelError("linewidth must be >= 0")
    n_samples = int(n_samples)
    if n_samples <= 0:
        return np.zeros(0)
    if linewidth_hz == 0:
        return np.zeros(n_samples)
    sigma = math.sqrt(2.0 * math.pi * linewidth_hz / sample_rate_hz)
    rng = np.random.default_rng(seed)
    walk = np.empty(n_samples)
    walk[0] = 0.0
    np.cumsum(sigma * rng.standard_normal(n_samples - 1), out=walk[1:])
    return walk


def _walk_chunks(seed, sigma, num_frames, frame_len, margin):
    """Yield per-frame walk chunks over samples [f*flen - margin, f*flen + flen).

    Chunks are built frame by frame as offset + cumsum(per-frame increments)
    from counter-based substreams, so serial and parallel consumers see the
    same bits.
    """
    inc = np.random.default_rng([seed, _PHASE_TAG, 0]).standard_normal(margin)
    tail = np.cumsum(sigma * inc)
    last = tail[-1] if margin else 0.0
    for f in range(num_frames):
        inc = np.random.default_rng([seed, _PHASE_TAG, f + 1]).standard_normal(frame_len)
        vals = last + np.cumsum(sigma * inc)
        chunk = np.concatenate([tail, vals])
        tail = chunk[chunk.shape[0] - margin:]
        last = vals[-1]
        yield chunk


def _frame_recursions(frame):
    k = int(round(math.log2(frame.code_len))) - 2
    if 4 << k != frame.code_len:
        raise ChannelError("frame code length is not 4*2**k")
    return k


class _SynthPlan:
    """Precomputed state shared by every synthesized frame."""

    def __init__(self, frame, fiber, events, noise, duration_s,
                 event_sampling, enforce_timing):
        if event_sampling not in ("frame", "sample"):
            raise ChannelError("event_sampling must be 'frame' or 'sample'")
        if abs(fiber.tap_pitch_m - frame.s_r) > 1e-9 * frame.s_r:
            raise ChannelError(
                f"fiber tap pitch {fiber.tap_pitch_m} m does not match the "
                f"frame resolution {frame.s_r} m"
            )
        total = fiber.spec.total_length_m
        events = sorted(events, key=lambda e: e.position_m)
        for e in events:
            if not 0.0 < e.position_m < total:
                raise ChannelError(
                    f"event at {e.position_m} m outside the fiber (0, {total})"
                )
            if e.waveform.frequency_hz >= frame.bw:
                warnings.warn(
                    f"event frequency {e.waveform.frequency_hz} Hz at or above "
                    f"the mechanical bandwidth {frame.bw:.1f} Hz: aliasing",
                    stacklevel=3,
                )
        report = validate_timing(total, frame, noise.laser_linewidth_hz)
        if enforce_timing and not report.lower_bound_ok:
            raise ChannelError(
                f"code period {frame.t_code:.3e} s does not exceed four times "
                f"the response spread {report.t_ir:.3e} s"
            )
        if not report.coherence_ok:
            warnings.warn(
                f"code period {frame.t_code:.3e} s exceeds the coherence time "
                f"{report.t_coh:.3e} s",
                stacklevel=3,
            )
        nf = int(duration_s / frame.t_code + 1e-9)
        if nf < 2:
            raise ChannelError("duration must cover at least two frames")

        self.frame = frame
        self.fiber = fiber
        self.events = events
        self.noise = noise
        self.num_frames = nf
        self.event_sampling = event_sampling
        self.flen = frame.frame_len
        self.margin = int(fiber.delay_samples[-1])
        self.size = sfft.next_fast_len(self.flen + self.margin)
        self.coef = _event_coef(fiber.spec)

        # Taps partitioned at the event positions: region r lies beyond the
        # first r events, so its per-frame phase is the cumulative event sum.
        splits = np.searchsorted(fiber.z_m, [e.position_m for e in events],
                                 side="right")
        starts = np.concatenate([[0], splits]).astype(np.int64)
        ends = np.concatenate([splits, [fiber.num_taps]]).astype(np.int64)
        self.region_ffts = []
        for lo, hi in zip(starts, ends):
            h = np.zeros((2, 2, self.size), dtype=np.complex128)
            if hi > lo:
                d = fiber.delay_samples[lo:hi]
                np.add.at(h, (slice(None), slice(None), d),
                          np.moveaxis(fiber.static_response[lo:hi], 0, -1))
            self.region_ffts.append(sfft.fft(h, axis=-1))

        # Periodic stream block covering samples [-margin, flen); identical
        # for every frame because frames tile the stream period exactly.
        ext = (np.arange(-self.margin, self.flen) % self.flen).astype(np.int64)
        self.sx_ext = frame.x_stream[ext].astype(np.complex128)
        self.sy_ext = frame.y_stream[ext].astype(np.complex128)

        self.sigma_walk = (
            math.sqrt(2.0 * math.pi * noise.laser_linewidth_hz / frame.f_symb)
            if noise.laser_linewidth_hz > 0 else 0.0
        )
        if self.sigma_walk == 0.0:
            self.static_qx = sfft.fft(self.sx_ext, self.size)
            self.static_qy = sfft.fft(self.sy_ext, self.size)

        power = np.abs(fiber.reflectivity) ** 2
        p_ref = float(power.max()) if power.size else 0.0
        if math.isinf(noise.awgn_snr_db):
            self.sigma_noise = 0.0
        else:
            self.sigma_noise = math.sqrt(p_ref * 10.0 ** (-noise.awgn_snr_db / 10.0))

        if noise.adc_bits is not None:
            # Full scale at 5x the per-quadrature RMS of signal plus noise;
            # analytic, so quantization is deterministic and streamable.
            p_total = float(power.sum())
            fs = 5.0 * math.sqrt((p_total + self.sigma_noise**2) / 2.0)
            self.quant_step = 2.0 * fs / (1 << int(noise.adc_bits)) if fs > 0 else 0.0
            self.full_scale = fs
        else:
            self.quant_step = 0.0
            self.full_scale = 0.0

    def _region_weights(self, t):
        """Cumulative event phase per region at time(s) t."""
        phases = np.zeros((len(self.region_ffts),) + np.shape(t))
        acc = 0.0
        for r, e in enumerate(self.events):
            acc = acc + self.coef * e.waveform.displacement(t)
            phases[r + 1] = acc
        return phases

    def walk_chunks(self):
        if self.sigma_walk == 0.0:
            return None
        return _walk_chunks(self.noise.seed, self.sigma_walk,
                            self.num_frames, self.flen, self.margin)

    def frame_samples(self, f, walk_chunk):
        flen, margin, size = self.flen, self.margin, self.size
        if walk_chunk is None:
            qx, qy = self.static_qx, self.static_qy
        else:
            rot = np.exp(-1j * walk_chunk)
            qx = sfft.fft(self.sx_ext * rot, size)
            qy = sfft.fft(self.sy_ext * rot, size)

        out = np.empty((flen, 2), dtype=np.complex128)
        if self.event_sampling == "frame":
            psi = self._region_weights(f * self.frame.t_code)
            h = np.zeros((2, 2, size), dtype=np.complex128)
            for r, hf in enumerate(self.region_ffts):
                h += np.exp(1j * psi[r]) * hf
            out[:, 0] = sfft.ifft(qx * h[0, 0] + qy * h[0, 1])[margin:margin + flen]
            out[:, 1] = sfft.ifft(qx * h[1, 0] + qy * h[1, 1])[margin:margin + flen]
        else:
            t = (f * flen + np.arange(flen)) / self.frame.f_symb
            psi = self._region_weights(t)
            out[:] = 0.0
            for r, hf in enumerate(self.region_ffts):
                w = np.exp(1j * psi[r])
                out[:, 0] += w * sfft.ifft(qx * hf[0, 0] + qy * hf[0, 1])[margin:margin + flen]
                out[:, 1] += w * sfft.ifft(qx * hf[1, 0] + qy * hf[1, 1])[margin:margin + flen]

        if walk_chunk is not None:
            out *= np.exp(1j * walk_chunk[margin:])[:, None]

        if self.sigma_noise > 0.0:
            w = np.random.default_rng(
                [self.noise.seed, _AWGN_TAG, f]
            ).standard_normal((flen, 2, 2))
            out += (self.sigma_noise / math.sqrt(2.0)) * (w[..., 0] + 1j * w[..., 1])

        if self.quant_step > 0.0:
            step, fs = self.quant_step, self.full_scale
            re = np.round(np.clip(out.real, -fs, fs) / step) * step
            im = np.round(np.clip(out.imag, -fs, fs) / step) * step
            out = re + 1j * im
        return out


def iter_backscatter_frames(frame, fiber, events, noise, duration_s, *,
                            event_sampling="frame", enforce_timing=True):
    """Stream the received frames one at a time (memory-bounded synthesis).

    Yields (frame_len, 2) complex128 arrays.  The first frame carries the
    periodic steady state like every other one, but the receiver contract
    still discards it as the transient.
    """
    plan = _SynthPlan(frame, fiber, events, noise, duration_s,
                      event_sampling, enforce_timing)
    chunks = plan.walk_chunks()
    for f in range(plan.num_frames):
        chunk = next(chunks) if chunks is not None else None
        yield plan.frame_samples(f, chunk)


def backscatter(frame, fiber, events, noise, duration_s, *, workers=1,
                event_sampling="frame", enforce_timing=True):
    """Synthesize a full capture in memory.

    Deterministic given (fiber.spec.seed, noise.seed), independent of the
    worker count: every random stream is keyed by frame index.  Memory grows
    with duration; use iter_backscatter_frames for long runs.
    """
    plan = _SynthPlan(frame, fiber, events, noise, duration_s,
                      event_sampling, enforce_timing)
    out = np.empty((plan.num_frames, plan.flen, 2), dtype=np.complex128)
    chunks = plan.walk_chunks()
    chunk_list = list(chunks) if chunks is not None else [None] * plan.num_frames
    if workers > 1:
        def job(f):
            out[f] = plan.frame_samples(f, chunk_list[f])
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, range(plan.num_frames)))
    else:
        for f in range(plan.num_frames):
            out[f] = plan.frame_samples(f, chunk_list[f])
    return IQCapture(
        sample_rate_hz=frame.f_symb,
        symbol_rate_baud=frame.f_symb,
        code_recursions=_frame_recursions(frame),
        samples=out,
    )
