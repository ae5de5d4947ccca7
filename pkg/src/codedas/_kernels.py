"""Brute-force loop kernels used as test oracles and verification paths.

Every kernel here computes by direct summation, deliberately avoiding FFTs,
so the fast frequency-domain paths elsewhere in the package can be checked
against an independent route.  Each kernel has a pure-numpy implementation
and, when numba is importable and not disabled, an @njit-compiled twin.

Set CODEDAS_DISABLE_NUMBA=1 to force the numpy implementations (useful for
debugging and for the benchmark baseline).
"""

import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    numba = None
    HAS_NUMBA = False


def _numba_disabled():
    return os.environ.get("CODEDAS_DISABLE_NUMBA", "").strip().lower() in (
        "1",
        "true",
        "yes",
    )


USE_NUMBA = HAS_NUMBA and not _numba_disabled()


def _xcorr_int_py(x, y):
    # R(k) = sum_i x[i+k]*y[i], k = -(n-1)..n-1, exact int64
    n = x.shape[0]
    out = np.zeros(2 * n - 1, dtype=np.int64)
    for k in range(-(n - 1), n):
        lo = max(0, -k)
        hi = min(n, n - k)
        acc = 0
        for i in range(lo, hi):
            acc += x[i + k] * y[i]
        out[k + n - 1] = acc
    return out


def _xcorr_complex_py(x, y):
    # Same lag convention as _xcorr_int_py; conjugates the second argument.
    n = x.shape[0]
    out = np.zeros(2 * n - 1, dtype=np.complex128)
    for k in range(-(n - 1), n):
        lo = max(0, -k)
        hi = min(n, n - k)
        acc = 0.0 + 0.0j
        for i in range(lo, hi):
            acc += x[i + k] * np.conj(y[i])
        out[k + n - 1] = acc
    return out


def _circ_xcorr_py(r, ref, num_lags):
    # Circular correlation over the full vector length, first num_lags lags.
    m = r.shape[0]
    out = np.zeros(num_lags, dtype=np.complex128)
    for tau in range(num_lags):
        acc = 0.0 + 0.0j
        for i in range(m):
            j = i + tau
            if j >= m:
                j -= m
            acc += r[j] * np.conj(ref[i])
        out[tau] = acc
    return out


def _tap_sum_py(sx, sy, taps, delays, phase, out):
    # Direct per-tap synthesis oracle.  taps: (frames, m, 2, 2) response
    # sampled once per frame; phase: source phase walk over absolute samples
    # -margin..frames*flen-1 (margin >= max delay); streams are frame-circular.
    nf = taps.shape[0]
    m = taps.shape[1]
    flen = sx.shape[0]
    margin = phase.shape[0] - nf * flen
    for f in range(nf):
        base = f * flen
        for t in range(m):
            d = delays[t]
            h00 = taps[f, t, 0, 0]
            h01 = taps[f, t, 0, 1]
            h10 = taps[f, t, 1, 0]
            h11 = taps[f, t, 1, 1]
            for s in range(flen):
                n = base + s + margin
                rot = np.exp(1j * (phase[n] - phase[n - d]))
                idx = (s - d) % flen
                cx = sx[idx]
                cy = sy[idx]
                out[f, s, 0] += rot * (h00 * cx + h01 * cy)
                out[f, s, 1] += rot * (h10 * cx + h11 * cy)
    return out


def _cum_jones_py(mats, out):
    # out[i] = mats[i] @ mats[i-1] @ ... @ mats[0]
    a00 = 1.0 + 0.0j
    a01 = 0.0 + 0.0j
    a10 = 0.0 + 0.0j
    a11 = 1.0 + 0.0j
    for i in range(mats.shape[0]):
        m00 = mats[i, 0, 0]
        m01 = mats[i, 0, 1]
        m10 = mats[i, 1, 0]
        m11 = mats[i, 1, 1]
        b00 = m00 * a00 + m01 * a10
        b01 = m00 * a01 + m01 * a11
        b10 = m10 * a00 + m11 * a10
        b11 = m10 * a01 + m11 * a11
        out[i, 0, 0] = b00
        out[i, 0, 1] = b01
        out[i, 1, 0] = b10
        out[i, 1, 1] = b11
        a00, a01, a10, a11 = b00, b01, b10, b11
    return out


def _cum_jones_numpy(mats, out):
    acc = np.eye(2, dtype=np.complex128)
    for i in range(mats.shape[0]):
        acc = mats[i] @ acc
        out[i] = acc
    return out


def _tap_sum_numpy(sx, sy, taps, delays, phase, out):
    # Vectorized-over-samples variant of _tap_sum_py (identical semantics).
    nf = taps.shape[0]
    m = taps.shape[1]
    flen = sx.shape[0]
    margin = phase.shape[0] - nf * flen
    idx = np.arange(flen)
    for f in range(nf):
        n_abs = f * flen + idx + margin
        for t in range(m):
            d = int(delays[t])
            rot = np.exp(1j * (phase[n_abs] - phase[n_abs - d]))
            src = (idx - d) % flen
            cx = sx[src]
            cy = sy[src]
            h = taps[f, t]
            out[f, :, 0] += rot * (h[0, 0] * cx + h[0, 1] * cy)
            out[f, :, 1] += rot * (h[1, 0] * cx + h[1, 1] * cy)
    return out


if USE_NUMBA:
    _xcorr_int_impl = numba.njit(cache=True)(_xcorr_int_py)
    _xcorr_complex_impl = numba.njit(cache=True)(_xcorr_complex_py)
    _circ_xcorr_impl = numba.njit(cache=True)(_circ_xcorr_py)
    _tap_sum_impl = numba.njit(cache=True)(_tap_sum_py)
    _cum_jones_impl = numba.njit(cache=True)(_cum_jones_py)
else:
    # np.correlate is a direct (non-FFT) dot-product sweep, so it keeps the
    # oracle route independent from the frequency-domain production path.
    def _xcorr_int_impl(x, y):
        return np.correlate(x, y, mode="full")

    def _xcorr_complex_impl(x, y):
        return np.correlate(x, y, mode="full")

    def _circ_xcorr_impl(r, ref, num_lags):
        out = np.empty(num_lags, dtype=np.complex128)
        for tau in range(num_lags):
            out[tau] = np.vdot(ref, np.roll(r, -tau))
        return out

    _tap_sum_impl = _tap_sum_numpy
    _cum_jones_impl = _cum_jones_numpy


def xcorr_direct_int(x, y):
    """Aperiodic cross-correlation of two equal-length integer sequences.

    Returns int64 values for lags -(n-1)..(n-1) in ascending lag order,
    with R(k) = sum_i x[i+k]*y[i].
    """
    x = np.ascontiguousarray(x, dtype=np.int64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xcorr_direct_int needs two equal-length 1-d arrays")
    return _xcorr_int_impl(x, y)


def xcorr_direct(x, y):
    """Complex aperiodic cross-correlation by direct summation (full lags)."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xcorr_direct needs two equal-length 1-d arrays")
    return _xcorr_complex_impl(x, y)


def circ_xcorr_direct(r, ref, num_lags=None):
    """Circular cross-correlation C(tau) = sum_i r[(i+tau) mod m]*conj(ref[i]).

    Direct summation; returns the first num_lags lags (default: all m).
    """
    r = np.ascontiguousarray(r, dtype=np.complex128)
    ref = np.ascontiguousarray(ref, dtype=np.complex128)
    if r.shape != ref.shape or r.ndim != 1:
        raise ValueError("circ_xcorr_direct needs two equal-length 1-d arrays")
    if num_lags is None:
        num_lags = r.shape[0]
    if not 0 < num_lags <= r.shape[0]:
        raise ValueError("num_lags out of range")
    return _circ_xcorr_impl(r, ref, int(num_lags))


def tap_sum_frames(sx, sy, taps, delays, phase):
    """Direct-sum synthesis oracle for frame-circular multi-tap channels.

    sx, sy: transmitted frame streams (flen,); taps: (frames, m, 2, 2)
    per-frame tap responses; delays: (m,) sample delays >= 0; phase: source
    phase walk over absolute samples -margin..frames*flen-1 where
    margin = len(phase) - frames*flen >= max(delays).

    Returns (frames, flen, 2) received samples.  O(frames*m*flen): use only
    on small instances.
    """
    sx = np.ascontiguousarray(sx, dtype=np.complex128)
    sy = np.ascontiguousarray(sy, dtype=np.complex128)
    taps = np.ascontiguousarray(taps, dtype=np.complex128)
    delays = np.ascontiguousarray(delays, dtype=np.int64)
    phase = np.ascontiguousarray(phase, dtype=np.float64)
    nf, m = taps.shape[0], taps.shape[1]
    flen = sx.shape[0]
    margin = phase.shape[0] - nf * flen
    if margin < (delays.max() if m else 0):
        raise ValueError("phase walk too short for the longest delay")
    out = np.zeros((nf, flen, 2), dtype=np.complex128)
    return _tap_sum_impl(sx, sy, taps, delays, phase, out)


def cum_jones(mats):
    """Running left-product of 2x2 matrices: out[i] = mats[i] @ ... @ mats[0]."""
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1:] != (2, 2):
        raise ValueError("cum_jones needs an (m, 2, 2) array")
    out = np.empty_like(mats)
    return _cum_jones_impl(mats, out)


def implementations():
    """Kernel name -> {'numpy': fn, 'numba': fn or None}; for the benchmark."""
    table = {
        "xcorr_int": {"numpy": lambda x, y: np.correlate(x, y, mode="full")},
        "xcorr_complex": {"numpy": lambda x, y: np.correlate(x, y, mode="full")},
        "tap_sum": {"numpy": _tap_sum_numpy},
        "cum_jones": {"numpy": _cum_jones_numpy},
    }
    if HAS_NUMBA:
        table["xcorr_int"]["numba"] = numba.njit(cache=True)(_xcorr_int_py)
        table["xcorr_complex"]["numba"] = numba.njit(cache=True)(_xcorr_complex_py)
        table["tap_sum"]["numba"] = numba.njit(cache=True)(_tap_sum_py)
        table["cum_jones"]["numba"] = numba.njit(cache=True)(_cum_jones_py)
    return table
