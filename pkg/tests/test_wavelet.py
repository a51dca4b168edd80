import numpy as np
import pytest

from crimewaves import wavelet as wv
from oracles import direct_cwt


class TestBuildGrid:
    def test_j_formula(self):
        grid = wv.build_grid(512, s0=2.0, dj=0.25)
        # J = floor(4 * log2(256)) = 32 -> 33 scales
        assert grid.J == 32
        assert grid.scales.size == 33

    def test_short_series(self):
        grid = wv.build_grid(8, s0=2.0, dj=0.5)
        # J = floor(2 * log2(4)) = 4 -> scales 2 .. 8
        np.testing.assert_allclose(grid.scales[0], 2.0)
        np.testing.assert_allclose(grid.scales[-1], 8.0)

    def test_fourier_factor(self):
        grid = wv.build_grid(128)
        ratio = grid.fourier_periods / grid.scales
        want = 4 * np.pi / (6 + np.sqrt(38.0))
        np.testing.assert_allclose(ratio, want)
        assert want == pytest.approx(1.0330, abs=5e-5)

    def test_scales_increasing(self):
        grid = wv.build_grid(520)
        assert np.all(np.diff(grid.scales) > 0)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            wv.build_grid(4)
        with pytest.raises(ValueError):
            wv.build_grid(128, s0=1.0)
        with pytest.raises(ValueError):
            wv.build_grid(128, dj=0.9)


class TestTransform:
    def test_zero_series(self):
        grid = wv.build_grid(64)
        w = wv.transform(np.zeros(64), grid)
        assert np.all(w.coeffs == 0)

    def test_sine_peak_location(self):
        n = 512
        t = np.arange(n)
        y = np.cos(2 * np.pi * t / 64.0)
        grid = wv.build_grid(n, s0=2.0, dj=0.05)
        w = wv.transform(y, grid)
        mid_power = np.abs(w.coeffs[:, n // 2]) ** 2
        peak = grid.fourier_periods[np.argmax(mid_power)]
        nearest = grid.fourier_periods[grid.nearest_period_index(64.0)]
        assert peak == pytest.approx(nearest, rel=0.06)

    def test_matches_direct_convolution(self):
        rng = np.random.default_rng(42)
        n = 128
        y = rng.standard_normal(n)
        grid = wv.build_grid(n, s0=4.0, dj=0.25)
        w = wv.transform(y, grid)
        want = direct_cwt(y, grid.scales)
        err = np.max(np.abs(w.coeffs - want)) / np.max(np.abs(want))
        assert err <= 1e-8

    def test_linearity(self):
        rng = np.random.default_rng(1)
        n = 96
        y1, y2 = rng.standard_normal((2, n))
        grid = wv.build_grid(n)
        wa = wv.transform(2.0 * y1 - 3.0 * y2, grid).coeffs
        wb = 2.0 * wv.transform(y1, grid).coeffs - 3.0 * wv.transform(y2, grid).coeffs
        scale = np.max(np.abs(wb))
        np.testing.assert_allclose(wa, wb, atol=1e-10 * scale)

    def test_time_shift_covariance(self):
        rng = np.random.default_rng(2)
        n = 256
        k = 10
        base = rng.standard_normal(n - k)
        y1 = np.concatenate([base, np.zeros(k)])
        y2 = np.concatenate([np.zeros(k), base])
        grid = wv.build_grid(n)
        w1 = wv.transform(y1, grid).coeffs
        w2 = wv.transform(y2, grid).coeffs
        # compare interior columns away from the cone at modest scales
        inner = slice(64, n - 64)
        small = grid.scales <= 32
        diff = np.abs(w1[small, inner] - w2[small, 64 + k : n - 64 + k])
        assert diff.max() <= 1e-8 * np.abs(w1[small, inner]).max()

    def test_coi_shape(self):
        grid = wv.build_grid(100)
        w = wv.transform(np.zeros(100), grid)
        assert w.coi[0] == 0 and w.coi[-1] == 0
        np.testing.assert_allclose(w.coi, w.coi[::-1])
        assert np.all(w.coi >= 0)

    def test_parseval_variance(self):
        # 1/s-weighted power summed over a complete scale decomposition
        # reconstructs the second moment of the (zero-padded) series;
        # the grid must reach past both ends of the analysis grid
        rng = np.random.default_rng(9)
        n = 512
        y = rng.standard_normal(n)
        dj = 0.05
        J = int(np.ceil(np.log2(2048.0 / 0.5) / dj))
        scales = 0.5 * 2.0 ** (dj * np.arange(J + 1))
        grid = wv.ScaleGrid(s0=0.5, dj=dj, scales=scales, dt=1.0)
        w = wv.transform(y, grid, pad_factor=32)
        total = (
            dj / (wv.C_DELTA * n) * np.sum(np.abs(w.coeffs) ** 2 / scales[:, None])
        )
        assert total == pytest.approx(np.mean(y**2), rel=0.05)


class TestGlobalSpectrum:
    def test_zero(self):
        grid = wv.build_grid(64)
        w = wv.transform(np.zeros(64), grid)
        gs = wv.global_spectrum(w)
        assert np.all(gs.power == 0)

    def test_sine_peak(self):
        n = 512
        t = np.arange(n)
        y = np.sin(2 * np.pi * t / 52.0)
        grid = wv.build_grid(n, s0=2.0, dj=0.05)
        gs = wv.global_spectrum(wv.transform(y, grid))
        peak_idx = int(np.argmax(gs.power))
        assert abs(peak_idx - grid.nearest_period_index(52.0)) <= 1

    def test_coi_mask_effect(self):
        rng = np.random.default_rng(3)
        n = 256
        y = rng.standard_normal(n)
        w = wv.transform(y, wv.build_grid(n))
        masked = wv.global_spectrum(w, coi_mask=True)
        unmasked = wv.global_spectrum(w, coi_mask=False)
        # smallest scale: cone excludes only the outermost columns
        assert masked.n_avg[0] >= n - 6
        assert masked.n_avg[-1] < unmasked.n_avg[-1]


class TestScaleAvgPower:
    def test_circannual_band_bounds(self):
        grid = wv.build_grid(520, s0=2.0, dj=0.05)
        idx = grid.band_indices(wv.CIRCANNUAL_BAND)
        periods = grid.fourier_periods[idx]
        assert periods.min() >= 0.8 * 52 - 1e-9
        assert periods.max() <= 1.1 * 52 + 1e-9
        # 0.8 and 1.1 years at 52 weeks/yr
        assert periods.min() == pytest.approx(41.6, abs=1.5)
        assert periods.max() == pytest.approx(57.2, abs=2.0)

    def test_zero(self):
        grid = wv.build_grid(128)
        w = wv.transform(np.zeros(128), grid)
        sap = wv.scale_avg_power(w, (0.3, 0.6))
        assert np.all(sap.power == 0)

    def test_stationary_sine_band_power_flat(self):
        n = 1040
        t = np.arange(n)
        y = np.sin(2 * np.pi * t / 52.0)
        grid = wv.build_grid(n, s0=2.0, dj=0.05)
        w = wv.transform(y, grid)
        sap = wv.scale_avg_power(w, wv.CIRCANNUAL_BAND)
        valid = sap.band_coi_valid(w.coi)
        p = sap.power[valid]
        assert p.size > 0
        assert np.std(p) / np.mean(p) < 0.2

    def test_empty_band_rejected(self):
        grid = wv.build_grid(128)
        with pytest.raises(ValueError):
            wv.scale_avg_power(wv.transform(np.zeros(128), grid), (20.0, 21.0))


class TestReconstructDelta:
    def test_value(self):
        c = wv.reconstruct_delta(dj=0.05)
        assert c == pytest.approx(0.776, rel=0.005)

    def test_coarse_dj(self):
        c = wv.reconstruct_delta(dj=0.25)
        assert c == pytest.approx(0.776, rel=0.02)

    def test_edge_impulse_degraded(self):
        # impulse at the series edge sits outside the cone: the same sum
        # taken there misses the wrapped/clipped response
        n = 512
        y = np.zeros(n)
        y[0] = 1.0
        grid = wv.build_grid(n, s0=2.0, dj=0.1)
        w = wv.transform(y, grid)
        edge_sum = float(
            0.1 / np.pi**-0.25 * np.sum(np.real(w.coeffs[:, 0]) / np.sqrt(grid.scales))
        )
        assert abs(edge_sum - 0.776) > 0.05
