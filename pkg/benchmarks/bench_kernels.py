"""Timing comparison of the numba kernels against their numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [--repeat 5]

The numba column disappears when numba is unavailable or disabled via
CODEDAS_DISABLE_NUMBA=1.  First numba call includes compilation; a warmup
call is made before timing so the table reflects steady state.
"""

import argparse
import timeit

import numpy as np

from codedas import _kernels


def make_cases(rng):
    n = 2048
    xi = rng.integers(0, 2, size=n).astype(np.int64) * 2 - 1
    yi = rng.integers(0, 2, size=n).astype(np.int64) * 2 - 1

    xc = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    yc = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    nf, m, flen = 3, 64, 512
    sx = rng.standard_normal(flen) + 1j * rng.standard_normal(flen)
    sy = rng.standard_normal(flen) + 1j * rng.standard_normal(flen)
    taps = rng.standard_normal((nf, m, 2, 2)) + 1j * rng.standard_normal((nf, m, 2, 2))
    delays = np.arange(1, m + 1, dtype=np.int64)
    phase = 1e-3 * rng.standard_normal(nf * flen + m).cumsum()

    # retarder-like unitaries: the chained product stays bounded
    k = 20000
    thetas = rng.normal(0.0, 0.02, k)
    axes = rng.standard_normal((k, 3))
    axes /= np.linalg.norm(axes, axis=1)[:, None]
    c, s = np.cos(thetas / 2), np.sin(thetas / 2)
    nx, ny, nz = axes.T
    mats = np.empty((k, 2, 2), dtype=np.complex128)
    mats[:, 0, 0] = c - 1j * s * nz
    mats[:, 0, 1] = -1j * s * nx - s * ny
    mats[:, 1, 0] = -1j * s * nx + s * ny
    mats[:, 1, 1] = c + 1j * s * nz

    return {
        "xcorr_int": ((xi, yi), "n=2048"),
        "xcorr_complex": ((xc, yc), "n=2048"),
        "tap_sum": (
            (sx, sy, taps, delays, phase, np.zeros((nf, flen, 2), dtype=complex)),
            "3 frames x 64 taps x 512",
        ),
        "cum_jones": ((mats, np.empty_like(mats)), "m=20000"),
    }


def fresh_args(name, args):
    # output buffers must be reset between calls for the accumulating kernels
    if name == "tap_sum":
        return args[:5] + (np.zeros_like(args[5]),)
    if name == "cum_jones":
        return (args[0], np.empty_like(args[1]))
    return args


def bench(fn, name, args, repeat):
    fn(*fresh_args(name, args))  # warmup / compile
    times = []
    for _ in range(repeat):
        a = fresh_args(name, args)
        times.append(timeit.timeit(lambda: fn(*a), number=1))
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    cases = make_cases(rng)
    table = _kernels.implementations()

    print(f"numba available: {_kernels.HAS_NUMBA}  enabled: {_kernels.USE_NUMBA}")
    header = f"{'kernel':<15} {'size':<26} {'numpy':>10}"
    if _kernels.HAS_NUMBA:
        header += f" {'numba':>10} {'speedup':>8}"
    print(header)
    for name, entry in table.items():
        call_args, size = cases[name]
        t_np = bench(entry["numpy"], name, call_args, args.repeat)
        line = f"{name:<15} {size:<26} {t_np * 1e3:>8.2f}ms"
        if "numba" in entry:
            t_nb = bench(entry["numba"], name, call_args, args.repeat)
            line += f" {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
