"""Complementary code pairs, mutually orthogonal sets, and probe-frame timing.

The probing scheme sends two bipolar sequences per polarization (slot 1 and
slot 2 of a frame).  A pair (a, b) is *complementary* when the sum of the
aperiodic autocorrelations of a and b is an impulse: 2N at lag 0, exactly 0
at every other lag, in integer arithmetic.  Two pairs are *mutually
orthogonal* when the sum of their aperiodic cross-correlations vanishes at
every lag.  Both identities together are what lets the receiver separate the
four polarization channels with a plain correlation.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.fft as sfft

from . import _kernels

C_VACUUM = 299_792_458.0

# Resource guard for the doubling recursion: 4 * 2**20 symbols per sequence.
MAX_SEQUENCE_LEN = 4 << 20

# Above this length the integer correlator switches to an FFT with exact
# rounding; below it, direct summation is just as fast and trivially exact.
_DIRECT_LIMIT = 4096


class CodeSetError(ValueError):
    """A code set or probe frame failed validation."""


def _as_bipolar(seq, name):
    arr = np.asarray(seq)
    if arr.ndim != 1 or arr.size == 0:
        raise CodeSetError(f"{name}: expected a non-empty 1-d sequence")
    arr = arr.astype(np.int8)
    if not np.all(np.abs(arr) == 1):
        raise CodeSetError(f"{name}: symbols must all be +1 or -1")
    return arr


@dataclass(frozen=True, eq=False)
class GolayPair:
    """A pair of equal-length bipolar sequences (complementarity not implied;
    use verify routines or construct via generate_golay_pair)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _as_bipolar(self.a, "a")
        b = _as_bipolar(self.b, "b")
        if a.shape != b.shape:
            raise CodeSetError("pair sequences must have equal length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self):
        return int(self.a.shape[0])


@dataclass(frozen=True, eq=False)
class OrthogonalCodeSet:
    """Two pairs, one per transmitted polarization, plus the recursion depth."""

    pair_x: GolayPair
    pair_y: GolayPair
    recursions: int

    def __post_init__(self):
        n = self.pair_x.length
        if self.pair_y.length != n:
            raise CodeSetError("all four sequences must have equal length")
        if n != 4 << self.recursions:
            raise CodeSetError(
                f"length {n} inconsistent with recursion depth {self.recursions}"
            )

    @property
    def length(self):
        return self.pair_x.length


@dataclass(frozen=True, eq=False)
class ProbeFrame:
    """One probing period: slot 1 carries pair.a, slot 2 carries pair.b,
    simultaneously on both polarizations (BPSK field +-1)."""

    x_stream: np.ndarray
    y_stream: np.ndarray
    f_symb: float
    t_code: float
    bw: float
    s_r: float

    @property
    def frame_len(self):
        return int(self.x_stream.shape[0])

    @property
    def code_len(self):
        return self.frame_len // 2


@dataclass(frozen=True)
class TimingReport:
    t_ir: float
    lower_bound_ok: bool
    t_coh: float
    coherence_ok: bool


@dataclass(frozen=True)
class CodeSetReport:
    complementary_x: bool
    complementary_y: bool
    mutually_orthogonal: bool
    first_violation: Optional[Tuple[str, int, int]]

    @property
    def ok(self):
        return (
            self.complementary_x
            and self.complementary_y
            and self.mutually_orthogonal
        )


def generate_golay_pair(recursions, max_len=MAX_SEQUENCE_LEN):
    """Build a complementary pair of length 4*2**recursions.

    Starts from the length-4 seed a=[1,1,1,-1], b=[1,1,-1,1] and doubles with
    a' = a||b, b' = a||(-b).  The recursion preserves complementarity and the
    head/tail structure (a and b agree on their first half and are negated on
    their second half) that the slot-wise receiver correlation relies on.
    """
    if recursions < 0:
        raise CodeSetError("recursion depth must be >= 0")
    length = 4 << recursions
    if length > max_len:
        raise CodeSetError(
            f"sequence length {length} exceeds the maximum {max_len}"
        )
    a = np.array([1, 1, 1, -1], dtype=np.int8)
    b = np.array([1, 1, -1, 1], dtype=np.int8)
    for _ in range(recursions):
        a, b = np.concatenate([a, b]), np.concatenate([a, -b])
    return GolayPair(a, b)


def mate_pair(pair):
    """Return the mate (reverse(b), -reverse(a)) of a complementary pair.

    The mate is itself complementary, and {pair, mate} is mutually
    orthogonal: R(a, a_m) + R(b, b_m) = 0 at every lag.
    """
    return GolayPair(pair.b[::-1].copy(), (-pair.a[::-1]).copy())


def make_code_set(recursions, max_len=MAX_SEQUENCE_LEN):
    """Convenience: generated pair on x, its mate on y."""
    pair = generate_golay_pair(recursions, max_len=max_len)
    return OrthogonalCodeSet(pair, mate_pair(pair), recursions)


def _xcorr_int_fft(x, y):
    # Correlation of integer sequences via real FFT, rounded back to int64.
    # Safe as long as the float residual stays far below 0.5.
    n = x.shape[0]
    p = sfft.next_fast_len(2 * n - 1)
    fx = sfft.rfft(x.astype(np.float64), p)
    fy = sfft.rfft(y.astype(np.float64), p)
    c = sfft.irfft(fx * np.conj(fy), p)
    full = np.concatenate([c[p - (n - 1):], c[:n]])
    rounded = np.rint(full)
    residual = np.max(np.abs(full - rounded))
    if residual > 1e-3:
        raise ArithmeticError(
            f"integer correlation residual {residual:.3e} too large to round"
        )
    return rounded.astype(np.int64)


def aperiodic_cross_correlation(x, y, method="auto"):
    """R(k) = sum_i x[i+k]*y[i] for lags -(N-1)..(N-1), integer-exact.

    x and y are equal-length integer (bipolar) sequences; result is int64.
    method: 'auto' picks direct summation up to length 4096 and an exactly
    rounded FFT beyond; 'direct' and 'fft' force one route (for oracle
    cross-checks).
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise CodeSetError("correlation needs two equal-length 1-d sequences")
    if method == "auto":
        method = "direct" if x.shape[0] <= _DIRECT_LIMIT else "fft"
    if method == "direct":
        return _kernels.xcorr_direct_int(x, y)
    if method == "fft":
        return _xcorr_int_fft(np.asarray(x, np.int64), np.asarray(y, np.int64))
    raise ValueError(f"unknown method {method!r}")


def complementary_sum(pair, method="auto"):
    """Sum of the aperiodic autocorrelations of pair.a and pair.b."""
    return aperiodic_cross_correlation(
        pair.a, pair.a, method
    ) + aperiodic_cross_correlation(pair.b, pair.b, method)


def cross_sum(pair_x, pair_y, method="auto"):
    """R(ax, ay) + R(bx, by) over all lags."""
    return aperiodic_cross_correlation(
        pair_x.a, pair_y.a, method
    ) + aperiodic_cross_correlation(pair_x.b, pair_y.b, method)


def _first_nonzero(values, expected_at_zero):
    # values covers lags -(N-1)..N-1.  Scan by increasing |lag|, positive lag
    # first, so the reported violation is the earliest meaningful one.
    n = (values.shape[0] + 1) // 2
    center = n - 1
    if values[center] != expected_at_zero:
        return 0, int(values[center])
    for lag in range(1, n):
        if values[center + lag] != 0:
            return lag, int(values[center + lag])
        if values[center - lag] != 0:
            return -lag, int(values[center - lag])
    return None


def verify_code_set(s, method="auto"):
    """Exhaustive integer check of both complementarity identities and the
    mutual-orthogonality identity; pinpoints the earliest failing lag."""
    n = s.length
    checks = (
        ("complementary_x", complementary_sum(s.pair_x, method), 2 * n),
        ("complementary_y", complementary_sum(s.pair_y, method), 2 * n),
        ("mutually_orthogonal", cross_sum(s.pair_x, s.pair_y, method), 0),
    )
    flags = {}
    first = None
    for name, sums, at_zero in checks:
        hit = _first_nonzero(sums, at_zero)
        flags[name] = hit is None
        if hit is not None and first is None:
            first = (name, hit[0], hit[1])
    return CodeSetReport(
        complementary_x=flags["complementary_x"],
        complementary_y=flags["complementary_y"],
        mutually_orthogonal=flags["mutually_orthogonal"],
        first_violation=first,
    )


def build_probe_frame(s, f_symb, n=1.45):
    """Package a verified code set into one probing frame.

    x_stream = pair_x.a || pair_x.b and likewise for y; metadata:
    t_code = 2N/f_symb, bw = 1/(2*t_code), s_r = c_f/(2*f_symb) with
    c_f = c/n the group velocity in the fiber.
    """
    if f_symb <= 0:
        raise CodeSetError("symbol rate must be positive")
    if not 1.0 < n < 2.0:
        raise CodeSetError("refractive index out of range (1, 2)")
    report = verify_code_set(s)
    if not report.ok:
        raise CodeSetError(
            f"code set failed verification: first violation {report.first_violation}"
        )
    x_stream = np.concatenate([s.pair_x.a, s.pair_x.b])
    y_stream = np.concatenate([s.pair_y.a, s.pair_y.b])
    t_code = 2 * s.length / f_symb
    c_f = C_VACUUM / n
    return ProbeFrame(
        x_stream=x_stream,
        y_stream=y_stream,
        f_symb=float(f_symb),
        t_code=t_code,
        bw=1.0 / (2.0 * t_code),
        s_r=c_f / (2.0 * f_symb),
    )


def validate_timing(length_m, frame, linewidth_hz):
    """Report the probing-timing inequalities for a fiber of given length.

    t_ir = 2L/c_f is the round-trip spread of the channel response; the code
    period must exceed 4*t_ir for sidelobe-free correlation estimates, and
    must stay below the source coherence time t_coh = 1/(pi*linewidth)
    (Lorentzian line; linewidth 0 means infinite coherence).
    Reports only; callers decide severity.
    """
    if length_m <= 0:
        raise ValueError("fiber length must be positive")
    if linewidth_hz < 0:
        raise ValueError("linewidth must be >= 0")
    c_f = 2.0 * frame.s_r * frame.f_symb
    t_ir = 2.0 * length_m / c_f
    t_coh = math.inf if linewidth_hz == 0 else 1.0 / (math.pi * linewidth_hz)
    return TimingReport(
        t_ir=t_ir,
        lower_bound_ok=frame.t_code > 4.0 * t_ir,
        t_coh=t_coh,
        coherence_ok=frame.t_code < t_coh,
    )
