import numpy as np
import pytest

from fluxlock.physics import NoiseModel, TimeTrace, derive_seed, synthesize_trace
from fluxlock.ramsey import RamseyConfig, invert_p1, ramsey_p1
from fluxlock.spectral import (
    cross_psd_suppression,
    fit_power_law,
    periodogram,
    split_shots_for_cross,
    welch,
)


def _white_trace(n, dt, sigma, seed):
    rng = np.random.default_rng(seed)
    return TimeTrace(dt, sigma * rng.standard_normal(n))


def test_periodogram_parseval():
    tr = _white_trace(4096, 1e-3, 2.5, seed=0)
    est = periodogram(tr)
    total = np.sum(est.psd) * est.resolution
    assert total == pytest.approx(np.mean(tr.values**2), rel=1e-6)


def test_periodogram_parseval_odd_length():
    tr = _white_trace(4095, 1e-3, 1.0, seed=1)
    est = periodogram(tr)
    assert np.sum(est.psd) * est.resolution == pytest.approx(
        np.mean(tr.values**2), rel=1e-6
    )


def test_periodogram_sinusoid_power():
    n, dt = 4096, 1e-3
    t = np.arange(n) * dt
    f0 = 200.0 / (n * dt)  # on-bin
    tr = TimeTrace(dt, 3.0 * np.cos(2 * np.pi * f0 * t))
    est = periodogram(tr)
    k = np.argmin(np.abs(est.frequencies - f0))
    # amplitude a integrates to a^2/2 in the unilateral convention
    assert est.psd[k] * est.resolution == pytest.approx(4.5, rel=1e-9)


def test_welch_reduces_to_periodogram():
    tr = _white_trace(2048, 1e-3, 1.0, seed=2)
    ref = periodogram(tr)
    est = welch(tr, n_segments=1, overlap_fraction=0.0, window="boxcar")
    np.testing.assert_allclose(est.psd, ref.psd, rtol=1e-9)


def test_welch_variance_reduction_scaling():
    """Relative bin scatter of the Welch estimate falls as n_averages^-0.5."""
    tr = _white_trace(2**16, 1e-3, 1.0, seed=3)
    segs = np.array([4, 16, 64])
    scatter = []
    for k in segs:
        est = welch(tr, n_segments=int(k), overlap_fraction=0.0, window="boxcar")
        s = est.psd[1:-1]
        scatter.append(np.std(s) / np.mean(s))
    slope = np.polyfit(np.log(segs), np.log(scatter), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_cross_psd_of_identical_traces_is_periodogram():
    tr = _white_trace(1024, 1e-3, 1.7, seed=4)
    ref = periodogram(tr)
    est = cross_psd_suppression(tr, tr)
    np.testing.assert_allclose(est.psd, ref.psd, rtol=1e-9)


def test_cross_psd_suppresses_independent_noise():
    """Shared signal is retained; independent noise drops with averaging."""
    rng = np.random.default_rng(5)
    n, dt = 2**15, 1e-3
    t = np.arange(n) * dt
    common = 2.0 * np.sin(2 * np.pi * 10.0 * t)
    a = TimeTrace(dt, common + rng.standard_normal(n))
    b = TimeTrace(dt, common + rng.standard_normal(n))
    est = cross_psd_suppression(a, b, n_segments=32)
    direct = welch(a, n_segments=32, overlap_fraction=0.0, window="boxcar")
    # away from the tone, the cross floor sits well below the direct floor
    mask = est.frequencies > 50.0
    assert np.mean(np.abs(est.psd[mask])) < 0.4 * np.mean(direct.psd[mask])
    # the tone survives
    k = np.argmin(np.abs(est.frequencies - 10.0))
    assert est.psd[k] == pytest.approx(direct.psd[k], rel=0.1)


def test_cross_psd_input_validation():
    a = _white_trace(256, 1e-3, 1.0, seed=6)
    b = _white_trace(128, 1e-3, 1.0, seed=7)
    with pytest.raises(ValueError):
        cross_psd_suppression(a, b)


def test_split_shots_for_cross():
    cfg = RamseyConfig()
    delta = 20e3
    p1 = ramsey_p1(delta, cfg)
    rng = np.random.default_rng(8)
    bits = (rng.random((5000, 20)) < p1).astype(np.int8)
    tr_a, tr_b = split_shots_for_cross(bits, cfg)
    assert len(tr_a) == len(tr_b) == 5000
    assert tr_a.sample_period == pytest.approx(cfg.estimate_period)
    # both halves estimate the same detuning (10-shot inversion bias ~5%)
    assert np.mean(tr_a.values) == pytest.approx(delta, rel=0.1)
    assert np.mean(tr_b.values) == pytest.approx(delta, rel=0.1)
    # but their sampling noise is independent
    ra = tr_a.values - delta
    rb = tr_b.values - delta
    corr = np.mean(ra * rb) / (np.std(ra) * np.std(rb))
    assert abs(corr) < 0.05


def test_split_shots_odd_count_warns():
    cfg = RamseyConfig(shots_per_estimate=21)
    bits = np.zeros((10, 21), dtype=np.int8)
    with pytest.warns(UserWarning):
        tr_a, _tr_b = split_shots_for_cross(bits, cfg)
    assert invert_p1(0.0, cfg) == pytest.approx(np.mean(tr_a.values))


def test_fit_power_law_round_trip():
    """Synthesize 1/f^alpha, fit, recover (A, alpha) for several exponents."""
    for alpha in (0.5, 0.8, 1.0, 1.2):
        model = NoiseModel(amplitude_at_1hz=5.0, exponent_alpha=alpha)
        acc = None
        for i in range(20):
            tr = synthesize_trace(model, 2**15, 1e-2, seed=derive_seed(1000, i))
            est = welch(tr, n_segments=4, overlap_fraction=0.0, window="boxcar")
            acc = est.psd if acc is None else acc + est.psd
        est.psd = acc / 20
        fit = fit_power_law(est, (0.05, 20.0))
        assert fit.exponent == pytest.approx(alpha, abs=0.03)
        assert fit.amplitude_at_1hz == pytest.approx(5.0, rel=0.05)
        assert fit(1.0) == pytest.approx(fit.amplitude_at_1hz)


def test_fit_power_law_needs_enough_bins():
    est = periodogram(_white_trace(64, 1e-3, 1.0, seed=9))
    with pytest.raises(ValueError):
        fit_power_law(est, (1.0, 1.5))


def test_fit_power_law_excludes_nonpositive_bins():
    tr = _white_trace(4096, 1e-3, 1.0, seed=10)
    est = cross_psd_suppression(tr, _white_trace(4096, 1e-3, 1.0, seed=11),
                                n_segments=8)
    assert np.any(est.psd < 0)  # independent noise: some negative bins
    with pytest.warns(UserWarning):
        fit_power_law(est, (1.0, 400.0))


def test_spectrum_csv_format(tmp_path):
    est = periodogram(_white_trace(128, 1e-3, 1.0, seed=12))
    path = tmp_path / "spec.csv"
    est.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "f_hz,psd_hz2_per_hz"
    assert len(lines) == len(est.frequencies) + 1
    assert path.read_text().endswith("\n")
