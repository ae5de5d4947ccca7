import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codedas import _kernels


def loop_xcorr(x, y):
    n = len(x)
    out = []
    for k in range(-(n - 1), n):
        acc = 0
        for i in range(max(0, -k), min(n, n - k)):
            acc += x[i + k] * np.conj(y[i])
        out.append(acc)
    return np.asarray(out)


class TestDirectCorrelation:
    @given(
        st.integers(2, 24).flatmap(
            lambda n: st.tuples(
                st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
                st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
            )
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_int_kernel(self, xy):
        x, y = xy
        got = _kernels.xcorr_direct_int(x, y)
        assert got.dtype == np.int64
        assert got.tolist() == loop_xcorr(np.array(x), np.array(y)).tolist()

    def test_complex_kernel_conjugates_second(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(17) + 1j * rng.standard_normal(17)
        y = rng.standard_normal(17) + 1j * rng.standard_normal(17)
        got = _kernels.xcorr_direct(x, y)
        np.testing.assert_allclose(got, loop_xcorr(x, y), rtol=0, atol=1e-12)

    def test_circular_kernel(self):
        rng = np.random.default_rng(8)
        r = rng.standard_normal(33) + 1j * rng.standard_normal(33)
        ref = rng.standard_normal(33) + 1j * rng.standard_normal(33)
        want = np.array([np.sum(np.roll(r, -tau) * np.conj(ref)) for tau in range(33)])
        np.testing.assert_allclose(_kernels.circ_xcorr_direct(r, ref), want, atol=1e-12)
        np.testing.assert_allclose(
            _kernels.circ_xcorr_direct(r, ref, num_lags=5), want[:5], atol=1e-12
        )

    def test_input_validation(self):
        with pytest.raises(ValueError):
            _kernels.xcorr_direct_int([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            _kernels.xcorr_direct([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            _kernels.circ_xcorr_direct([1.0, 2.0], [1.0, 2.0], num_lags=3)
        with pytest.raises(ValueError):
            _kernels.circ_xcorr_direct([1.0, 2.0], [1.0, 2.0], num_lags=0)


class TestCumJones:
    def test_matches_matmul_chain(self):
        rng = np.random.default_rng(9)
        mats = rng.standard_normal((40, 2, 2)) + 1j * rng.standard_normal((40, 2, 2))
        got = _kernels.cum_jones(mats)
        acc = np.eye(2, dtype=complex)
        for i in range(40):
            acc = mats[i] @ acc
            np.testing.assert_allclose(got[i], acc, rtol=1e-12, atol=0)

    def test_identity_chain(self):
        mats = np.broadcast_to(np.eye(2, dtype=complex), (10, 2, 2)).copy()
        got = _kernels.cum_jones(mats)
        assert np.array_equal(got, mats)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            _kernels.cum_jones(np.zeros((4, 3, 3), dtype=complex))


class TestTapSum:
    @staticmethod
    def _tiny_case(seed=11, nf=2, m=3, flen=8):
        rng = np.random.default_rng(seed)
        sx = rng.standard_normal(flen) + 1j * rng.standard_normal(flen)
        sy = rng.standard_normal(flen) + 1j * rng.standard_normal(flen)
        taps = rng.standard_normal((nf, m, 2, 2)) + 1j * rng.standard_normal((nf, m, 2, 2))
        delays = np.array([0, 2, 5][:m])
        phase = rng.standard_normal(nf * flen + 5).cumsum() * 0.01
        return sx, sy, taps, delays, phase

    def test_matches_scalar_reference(self):
        sx, sy, taps, delays, phase = self._tiny_case()
        nf, m = taps.shape[:2]
        flen = sx.shape[0]
        margin = phase.shape[0] - nf * flen
        want = np.zeros((nf, flen, 2), dtype=complex)
        for f in range(nf):
            for t in range(m):
                d = delays[t]
                for s in range(flen):
                    n = f * flen + s + margin
                    rot = np.exp(1j * (phase[n] - phase[n - d]))
                    vin = np.array([sx[(s - d) % flen], sy[(s - d) % flen]])
                    want[f, s] += rot * (taps[f, t] @ vin)
        got = _kernels.tap_sum_frames(sx, sy, taps, delays, phase)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_zero_delay_static_tap_is_passthrough(self):
        flen = 16
        sx = np.exp(1j * np.linspace(0, 3, flen))
        sy = np.exp(-1j * np.linspace(0, 2, flen))
        taps = np.broadcast_to(np.eye(2, dtype=complex), (3, 1, 2, 2)).copy()
        phase = np.zeros(3 * flen)
        got = _kernels.tap_sum_frames(sx, sy, taps, np.array([0]), phase)
        for f in range(3):
            np.testing.assert_allclose(got[f, :, 0], sx, atol=1e-15)
            np.testing.assert_allclose(got[f, :, 1], sy, atol=1e-15)

    def test_short_phase_rejected(self):
        sx, sy, taps, delays, phase = self._tiny_case()
        with pytest.raises(ValueError):
            _kernels.tap_sum_frames(sx, sy, taps, delays, phase[4:])


class TestImplementationTable:
    def test_table_shape(self):
        table = _kernels.implementations()
        assert set(table) == {"xcorr_int", "xcorr_complex", "tap_sum", "cum_jones"}
        for entry in table.values():
            assert "numpy" in entry

    @pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not importable")
    def test_numpy_numba_agree(self):
        table = _kernels.implementations()
        rng = np.random.default_rng(13)

        xi = rng.integers(-1, 2, size=31).astype(np.int64)
        yi = rng.integers(-1, 2, size=31).astype(np.int64)
        assert np.array_equal(
            table["xcorr_int"]["numpy"](xi, yi), table["xcorr_int"]["numba"](xi, yi)
        )

        xc = (rng.standard_normal(31) + 1j * rng.standard_normal(31)).astype(complex)
        yc = (rng.standard_normal(31) + 1j * rng.standard_normal(31)).astype(complex)
        np.testing.assert_allclose(
            table["xcorr_complex"]["numpy"](xc, yc),
            table["xcorr_complex"]["numba"](xc, yc),
            atol=1e-12,
        )

        mats = rng.standard_normal((12, 2, 2)) + 1j * rng.standard_normal((12, 2, 2))
        a = table["cum_jones"]["numpy"](mats, np.empty_like(mats))
        b = table["cum_jones"]["numba"](mats, np.empty_like(mats))
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

        sx, sy, taps, delays, phase = TestTapSum._tiny_case()
        shape = (taps.shape[0], sx.shape[0], 2)
        a = table["tap_sum"]["numpy"](
            sx, sy, taps.astype(complex), delays, phase, np.zeros(shape, dtype=complex)
        )
        b = table["tap_sum"]["numba"](
            sx, sy, taps.astype(complex), delays, phase, np.zeros(shape, dtype=complex)
        )
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_disable_flag_forces_numpy_path():
    env = dict(os.environ, CODEDAS_DISABLE_NUMBA="1")
    code = (
        "import numpy as np\n"
        "from codedas import _kernels\n"
        "assert not _kernels.USE_NUMBA\n"
        "r = _kernels.xcorr_direct_int([1, -1, -1, -1], [1, -1, -1, -1])\n"
        "assert r.tolist() == [-1, 0, 1, 4, 1, 0, -1]\n"
        "m = np.array([[[0, 1], [1, 0]]], dtype=complex)\n"
        "assert np.array_equal(_kernels.cum_jones(m), m)\n"
        "print('ok')\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"
