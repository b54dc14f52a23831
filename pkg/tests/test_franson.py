import math
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import TAU, WP, collinear_family, counterprop_family
from autophase import csvio
from autophase.dispersion import TaylorDispersion
from autophase.errors import AliasRisk, FlatFringeWarning, VisibilityClampWarning
from autophase.franson import (
    ALIAS_GUARD,
    DelayPair,
    FringePhasors,
    classify_correlation,
    coincidence_probability,
    franson_map,
    fringe_modulation,
    fringe_phasors,
    fringe_scan,
    fourth_order_visibility,
    probability_matrix,
    sweep_grid,
    visibility_vs_length,
    write_curve_csv,
    write_map_csv,
    write_scan_csv,
)
from autophase.jsa import (
    FrequencyGrid,
    JointSpectralAmplitude,
    PumpPulse,
    build_counterprop_jsa,
    counterprop_bandwidth_estimate,
    frequency_correlation,
)

FIRST_ORDER = TaylorDispersion(WP / 2, (0.0, 1.0))


def brute_force_probability(jsa, tau1, tau2):
    """Direct (1/16) Σ |A|² |(1 + e^{iω_l τ1})(1 + e^{iω_r τ2})|² with complex arithmetic."""
    p = np.abs(jsa.amplitude) ** 2
    p = p / p.sum()
    left = np.abs(1 + np.exp(1j * jsa.grid.omega_l * tau1)) ** 2
    right = np.abs(1 + np.exp(1j * jsa.grid.omega_r * tau2)) ** 2
    return float(np.sum(p * left[:, None] * right[None, :]) / 16)


def gaussian_jsa(tau, width_w, n=257, span_sigmas=5.0, model=FIRST_ORDER):
    pump = PumpPulse(WP, tau, width_w)
    sigma = counterprop_bandwidth_estimate(pump, model.betas[1])
    grid = FrequencyGrid.degenerate(WP, span_sigmas * sigma, n)
    return build_counterprop_jsa(pump, model, grid)


class TestCoincidenceProbability:
    def test_zero_delay_is_one(self, limiting_sources):
        for jsa in (limiting_sources.anti, limiting_sources.corr, gaussian_jsa(TAU, 3 * TAU)):
            assert coincidence_probability(jsa, (0.0, 0.0)) == pytest.approx(1.0, abs=1e-12)

    def test_matches_brute_force(self, limiting_sources):
        jsa = gaussian_jsa(TAU, 0.7 * TAU)
        for t1, t2 in [(0.3, 7.1), (40.0, 41.5), (-12.0, 90.0)]:
            assert coincidence_probability(jsa, (t1, t2)) == pytest.approx(
                brute_force_probability(jsa, t1, t2), abs=1e-13
            )

    def test_extrema_anti_correlated(self, limiting_sources):
        # closed form ¼(1 + ½ cos ω_p τ̄) once single-photon terms have decayed
        jsa = limiting_sources.anti
        for m in (10, 12, 15):
            peak = 2 * math.pi * m / WP
            trough = (2 * m + 1) * math.pi / WP
            assert coincidence_probability(jsa, (peak, peak)) == pytest.approx(0.375, abs=5e-3)
            assert coincidence_probability(jsa, (trough, trough)) == pytest.approx(0.125, abs=5e-3)

    def test_extrema_correlated_independent_of_mean_delay(self, limiting_sources):
        jsa = limiting_sources.corr
        for tau_bar in (60.0, 20 * math.pi + 1.0, (2 * 12 + 1) * math.pi, 95.3):
            assert coincidence_probability(jsa, (tau_bar, tau_bar)) == pytest.approx(0.375, abs=5e-3)

    def test_large_delay_one_period_average(self, limiting_sources):
        period = 2 * math.pi / WP
        deltas = np.arange(256) * period / 256
        # delays well beyond every coherence time (σ·τ ≥ 7), along the fringe direction
        cases = ((limiting_sources.anti, 70.0, 1.0), (limiting_sources.corr, 70.0, -1.0),
                 (gaussian_jsa(TAU, TAU), 300.0, 1.0))
        for jsa, tau0, sign in cases:
            probs = [coincidence_probability(jsa, (tau0 + d, tau0 + sign * d)) for d in deltas]
            assert np.mean(probs) == pytest.approx(0.25, abs=0.01)
        far = coincidence_probability(limiting_sources.anti, (60.0, 150.0))
        assert far == pytest.approx(0.25, abs=1e-6)

    def test_phasor_decomposition(self):
        jsa = gaussian_jsa(TAU, 2 * TAU)
        for delays in [(0.0, 0.0), (3.0, 17.0), (55.0, 52.0)]:
            ph = fringe_phasors(jsa, delays)
            assert ph.probability == pytest.approx(coincidence_probability(jsa, delays), abs=1e-13)

    def test_alias_guard(self, limiting_sources):
        jsa = limiting_sources.anti
        limit = ALIAS_GUARD / jsa.grid.step
        coincidence_probability(jsa, (0.99 * limit, 0.0))
        with pytest.raises(AliasRisk):
            coincidence_probability(jsa, (1.01 * limit, 0.0))
        with pytest.raises(AliasRisk):
            fringe_phasors(jsa, (0.0, -1.01 * limit))
        with pytest.raises(AliasRisk):
            franson_map(jsa, (0.0, 1.01 * limit / franson_map_cycle(jsa)), 5)

    def test_delay_pair_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            DelayPair(math.nan, 1.0)


def franson_map_cycle(jsa):
    return 2 * math.pi / (jsa.omega_p / 2)


def random_jsa(values):
    n = values.shape[0]
    grid = FrequencyGrid.degenerate(WP, 0.3, n)
    return JointSpectralAmplitude(grid, values)


small_amplitudes = arrays(
    np.complex128, (17, 17),
    elements=st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
).filter(lambda a: np.sum(np.abs(a) ** 2) > 1e-6)
delays = st.floats(-20.0, 20.0)


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(small_amplitudes, delays, delays)
    def test_probability_bounds(self, amp, t1, t2):
        p = coincidence_probability(random_jsa(amp), (t1, t2))
        assert -1e-12 <= p <= 1 + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.5, 2.0), st.floats(-30, 30), st.floats(-300, 300),
           st.floats(0.3, 3.0), st.floats(0.0, 150.0), st.floats(0.0, 150.0))
    def test_exchange_symmetry(self, b1, b2, b3, w_ratio, t1, t2):
        model = TaylorDispersion(WP / 2, (0.0, b1, b2, b3))
        pump = PumpPulse(WP, TAU, w_ratio * TAU / b1)
        jsa = build_counterprop_jsa(pump, model, FrequencyGrid.degenerate(WP, 0.4, 201))
        assert coincidence_probability(jsa, (t1, t2)) == pytest.approx(
            coincidence_probability(jsa, (t2, t1)), abs=1e-12
        )

    def test_fringe_phase_duality(self, limiting_sources):
        # anti-correlated: the fringe phase follows τ1 + τ2; correlated: τ1 − τ2
        total = 150.0
        diffs = np.linspace(-10.0, 10.0, 21)
        anti = limiting_sources.anti
        phases = [np.angle(fringe_phasors(anti, ((total + d) / 2, (total - d) / 2)).sum)
                  for d in diffs]
        np.testing.assert_allclose(np.unwrap(phases), phases[10], atol=1e-9)
        amplitude = 0.125
        small = np.linspace(-0.2, 0.2, 9)
        probs = [coincidence_probability(anti, ((total + d) / 2, (total - d) / 2)) for d in small]
        assert np.ptp(probs) < 1e-3 * amplitude

        corr = limiting_sources.corr
        mean = 75.0
        sums = np.linspace(-10.0, 10.0, 21)
        phases = [np.angle(fringe_phasors(corr, (mean + s / 2, mean + s / 2)).diff) for s in sums]
        np.testing.assert_allclose(phases, 0.0, atol=1e-9)
        probs = [coincidence_probability(corr, (mean + s / 2, mean + s / 2)) for s in small]
        assert np.ptp(probs) < 1e-3 * amplitude


class TestMap:
    def test_values_and_axes(self, limiting_sources):
        fmap = franson_map(limiting_sources.anti, (0.0, 15.0), 41)
        assert fmap.probability.shape == (41, 41)
        assert np.all(fmap.probability >= -1e-12) and np.all(fmap.probability <= 1 + 1e-12)
        assert fmap.probability[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert fmap.cycle == pytest.approx(4 * math.pi)
        np.testing.assert_allclose(fmap.probability, fmap.probability.T, atol=1e-12)

    def test_threads_bit_identical(self, limiting_sources):
        one = franson_map(limiting_sources.corr, (0.0, 12.0), 150, threads=1)
        many = franson_map(limiting_sources.corr, (0.0, 12.0), 150, threads=4)
        np.testing.assert_array_equal(one.probability, many.probability)

    def test_orientation(self, limiting_sources):
        # far region: the anti-correlated map varies along δ·(1,1) only
        center = DelayPair(60.0, 60.0)
        anti, corr = limiting_sources.anti, limiting_sources.corr
        for jsa, modulated, flat in ((anti, "diagonal", "antidiagonal"),
                                     (corr, "antidiagonal", "diagonal")):
            mod = fringe_scan(jsa, center, modulated).probabilities
            # ideal ptp is 0.25; the correlated fringe envelope trims the window edges
            assert 0.2 < np.ptp(mod) < 0.25 + 1e-3
            # lock-in amplitude at ω_p relative to the mean level
            far = DelayPair(120.0, 120.0)
            ratio = fringe_modulation(jsa, far, flat, periods=5) / 0.25
            assert ratio < 1e-3

    def test_fringe_period(self, limiting_sources):
        center = DelayPair(60.0, 60.0)
        for jsa, direction in ((limiting_sources.anti, "diagonal"),
                               (limiting_sources.corr, "antidiagonal")):
            scan = fringe_scan(jsa, center, direction, periods=3, samples_per_period=256)
            spectrum = np.abs(np.fft.rfft(scan.probabilities[:-1] - scan.probabilities.mean()))
            assert np.argmax(spectrum) == 3  # three periods of 2π/ω_p in the window


class TestVisibility:
    def test_limiting_sources_raw_half(self, limiting_sources):
        for jsa, direction in ((limiting_sources.anti, "diagonal"),
                               (limiting_sources.corr, "antidiagonal")):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", VisibilityClampWarning)
                scan = fourth_order_visibility(jsa, 4.0)
            assert scan.direction == direction
            assert scan.raw_visibility == pytest.approx(0.5, abs=0.02)
            # the sampled contrast also sees the fringe envelope across the window
            assert 0.4 < scan.sampled_visibility <= scan.raw_visibility + 1e-9
            assert scan.scaled_visibility == pytest.approx(1.0, abs=0.04)
            assert len(scan.deltas) >= 3 * 64

    def test_sampling_density_invariance(self, limiting_sources):
        sources = [limiting_sources.anti, limiting_sources.corr,
                   gaussian_jsa(TAU, 2 * TAU), gaussian_jsa(TAU, 0.5 * TAU)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", VisibilityClampWarning)
            for jsa in sources:
                a = fourth_order_visibility(jsa, 4.0, samples_per_period=64)
                b = fourth_order_visibility(jsa, 4.0, samples_per_period=128)
                assert abs(a.raw_visibility - b.raw_visibility) < 1e-3
                assert abs(a.sampled_visibility - b.sampled_visibility) < 1e-3

    def test_sample_density_floor(self, limiting_sources):
        with pytest.raises(ValueError):
            fourth_order_visibility(limiting_sources.anti, samples_per_period=32)

    def test_separable_source(self):
        # Wβ1 = τ gives exp(−τ²(ν_l² + ν_r²)): a product state with ρ_ν = 0
        jsa = gaussian_jsa(TAU, TAU)
        assert abs(frequency_correlation(jsa)) < 1e-9
        scan = fourth_order_visibility(jsa, 2.0)
        assert scan.scaled_visibility < 0.1
        # closed form at (k/σ, k/σ): both phasors factor into e^{−k²/2}·e^{−k²/2}
        sigma = scan.sigma
        ph = fringe_phasors(jsa, scan.center)
        assert abs(ph.diff) == pytest.approx(math.exp(-4.0), rel=1e-3)
        assert sigma == pytest.approx(1 / (2 * TAU), rel=1e-4)

    def test_flat_fringe(self):
        jsa = gaussian_jsa(TAU, TAU)
        with pytest.warns(FlatFringeWarning):
            scan = fourth_order_visibility(jsa, 4.0)
        assert scan.raw_visibility == scan.scaled_visibility == 0.0

    def test_clamp_warning(self):
        ph = FringePhasors(0j, 0j, 0j, 1.0 + 0j)
        assert ph.raw_visibility("antidiagonal") == 0.5
        jsa_like = FringePhasors(0j, 0j, 0j, 1.01 + 0j)
        from autophase.franson import _scale
        with pytest.warns(VisibilityClampWarning):
            assert _scale(jsa_like.raw_visibility("antidiagonal")) == 1.0

    def test_lock_in_modulation(self, limiting_sources):
        center = DelayPair(120.0, 120.0)
        anti = limiting_sources.anti
        assert fringe_modulation(anti, center, "diagonal", periods=5) == pytest.approx(
            0.125, abs=2e-3)
        assert fringe_modulation(anti, center, "antidiagonal", periods=5) < 1e-3


class TestClassification:
    def test_limits(self, limiting_sources):
        assert classify_correlation(limiting_sources.anti).label == "anti_correlated"
        assert classify_correlation(limiting_sources.corr).label == "correlated"

    def test_balanced_is_intermediate(self):
        result = classify_correlation(gaussian_jsa(TAU, TAU), 2.0)
        assert result.label == "intermediate"
        assert result.diagonal == pytest.approx(result.antidiagonal, abs=1e-3)

    def test_strongly_correlated_gaussian(self):
        assert classify_correlation(gaussian_jsa(TAU, 20 * TAU), 2.0).label == "correlated"
        assert classify_correlation(gaussian_jsa(TAU, TAU / 20), 2.0).label == "anti_correlated"


class TestSweep:
    lengths = np.geomspace(0.2 * TAU, 1e4 * TAU, 8)

    def test_counterprop_monotone(self):
        curve = visibility_vs_length(counterprop_family(), self.lengths)
        assert curve.label == "counterprop"
        # non-Gaussian tails leave ~1e-6 at the shortest W: resolution floor 1e-5
        assert np.all(np.diff(curve.visibility) >= -1e-5)
        assert curve.visibility[-1] > 0.99
        assert np.all((curve.visibility >= 0) & (curve.visibility <= 1))

    def test_zero_length_limit(self):
        # shortest W whose pump-only spectrum still fits inside the 0.9·ω_p/2 cap
        short = [0.5 * TAU]
        assert visibility_vs_length(counterprop_family(), short).visibility[0] < 0.1
        assert visibility_vs_length(collinear_family(), short).visibility[0] < 0.1

    def test_collinear_gvm_control_and_bent(self):
        top = self.lengths[-3:]
        control = visibility_vs_length(collinear_family(), top)
        bent = visibility_vs_length(collinear_family(b2=3.0), top)
        assert control.visibility[-1] > 0.99
        assert bent.visibility[-1] < control.visibility[-1]

    def test_threads_identical(self):
        fam = counterprop_family()
        a = visibility_vs_length(fam, self.lengths[:4], threads=1)
        b = visibility_vs_length(fam, self.lengths[:4], threads=3)
        np.testing.assert_array_equal(a.visibility, b.visibility)

    def test_lengths_validation(self):
        fam = counterprop_family()
        for bad in ([1.0, 1.0], [2.0, 1.0], [], [-1.0, 2.0]):
            with pytest.raises(ValueError):
                visibility_vs_length(fam, bad)

    def test_monochromatic_family_rejected(self):
        from autophase.franson import CounterpropFamily
        with pytest.raises(ValueError):
            CounterpropFamily(PumpPulse(WP, math.inf, 1.0), FIRST_ORDER)

    def test_sweep_grid(self):
        fam = counterprop_family()
        grid = sweep_grid(fam, TAU)
        sigma = fam.bandwidth_estimate(TAU)
        assert grid.half_span == pytest.approx(5 * sigma)
        assert grid.n_points % 2 == 1 and grid.n_points >= 257
        assert grid.step * 1.25 * 4 / sigma <= math.pi
        long = sweep_grid(collinear_family(), 1e5)
        assert long.n_points > 257  # walk-off forces a finer grid


class TestWriters:
    def test_map_csv(self, tmp_path, limiting_sources):
        fmap = franson_map(limiting_sources.anti, (0.0, 5.0), 6)
        path = write_map_csv(tmp_path / "map.csv", fmap, {"note": "x"})
        head = csvio.read_header(path)
        assert head["kind"] == "franson_map" and head["note"] == "x"
        assert head["columns"] == ["tau1", "tau2", "P"]
        table = csvio.read_table(path)
        assert table.shape == (36, 3)
        np.testing.assert_array_equal(table[:, 2], fmap.probability.ravel())

    def test_scan_and_curve_csv(self, tmp_path, limiting_sources):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", VisibilityClampWarning)
            scan = fourth_order_visibility(limiting_sources.corr)
        path = write_scan_csv(tmp_path / "scan.csv", scan)
        head = csvio.read_header(path)
        assert head["raw_visibility"] == scan.raw_visibility
        np.testing.assert_array_equal(csvio.read_table(path)[:, 1], scan.probabilities)

        curve = visibility_vs_length(counterprop_family(), [TAU, 10 * TAU])
        path = write_curve_csv(tmp_path / "curve.csv", curve)
        table = csvio.read_table(path)
        np.testing.assert_array_equal(table[:, 0], curve.lengths)
        np.testing.assert_array_equal(table[:, 1], curve.visibility)


def test_anchor_runtime(limiting_sources):
    start = time.perf_counter()
    coincidence_probability(limiting_sources.anti, (0.0, 0.0))
    probability_matrix(limiting_sources.anti, np.linspace(0, 100, 50), np.linspace(0, 100, 50))
    assert time.perf_counter() - start < 10.0
