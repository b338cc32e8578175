import numpy as np
import pytest

from fluxlock.physics import (
    NoiseModel,
    TransmonSpec,
    derive_seed,
    flux_noise_to_frequency_noise,
    flux_sensitivity,
    frequency_at_flux,
    model_psd,
    synthesize_trace,
)


def test_derive_seed_deterministic_and_distinct():
    a = derive_seed(12345, 0)
    assert a == derive_seed(12345, 0)
    seeds = {derive_seed(12345, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**64 for s in seeds)


def test_model_psd_power_law_value():
    m = NoiseModel(amplitude_at_1hz=27.3e6, exponent_alpha=0.8)
    # 27.3e6 * 100**-0.8
    assert model_psd(m, 100.0) == pytest.approx(685745.33, rel=1e-6)
    assert model_psd(m, 1.0) == pytest.approx(27.3e6)


def test_model_psd_rejects_nonpositive_f():
    m = NoiseModel()
    with pytest.raises(ValueError):
        model_psd(m, 0.0)
    with pytest.raises(ValueError):
        model_psd(m, np.array([1.0, -2.0]))


def test_model_psd_monotone_decreasing_away_from_lines():
    m = NoiseModel(exponent_alpha=0.8)
    f = np.geomspace(0.1, 1e4, 200)
    s = model_psd(m, f)
    assert np.all(np.diff(s) < 0)


def test_model_psd_line_tophat():
    m = NoiseModel(amplitude_at_1hz=0.0, lines=[(60.0, 12.0)], line_width_hz=2.0)
    assert model_psd(m, 60.0) == pytest.approx(6.0)  # power / width
    assert model_psd(m, 59.1) == pytest.approx(6.0)
    assert model_psd(m, 62.5) == 0.0


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(amplitude_at_1hz=-1.0)
    with pytest.raises(ValueError):
        NoiseModel(exponent_alpha=2.5)
    with pytest.raises(ValueError):
        NoiseModel(lines=[(-60.0, 1.0)])


def test_synthesis_deterministic():
    m = NoiseModel()
    a = synthesize_trace(m, 4096, 1e-3, seed=7)
    b = synthesize_trace(m, 4096, 1e-3, seed=7)
    assert np.array_equal(a.values, b.values)
    c = synthesize_trace(m, 4096, 1e-3, seed=8)
    assert not np.array_equal(a.values, c.values)


def test_synthesis_analysis_closure():
    """Band-averaged ensemble periodogram matches the model within 1 dB."""
    from fluxlock.spectral import periodogram

    m = NoiseModel(amplitude_at_1hz=1.0, exponent_alpha=0.8)
    n, dt = 2048, 1e-3
    acc = None
    n_real = 200
    for i in range(n_real):
        est = periodogram(synthesize_trace(m, n, dt, seed=derive_seed(99, i)))
        acc = est.psd if acc is None else acc + est.psd
    mean_psd = acc / n_real
    f = est.frequencies
    target = model_psd(m, f[1:])
    # log-binned band average over the resolvable band
    edges = np.geomspace(f[1], f[-1], 13)
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (f[1:] >= lo) & (f[1:] <= hi)
        ratio_db = 10 * np.log10(mean_psd[1:][sel].mean() / target[sel].mean())
        assert abs(ratio_db) < 1.0


def test_synthesis_zero_amplitude():
    m = NoiseModel(amplitude_at_1hz=0.0)
    tr = synthesize_trace(m, 128, 1e-3, seed=1)
    assert np.all(tr.values == 0.0)


def test_flux_map_anchor_points():
    spec = TransmonSpec(f_max=4.835e9)
    assert frequency_at_flux(spec, 0.0) == pytest.approx(4.835e9)
    assert frequency_at_flux(spec, 0.11) == pytest.approx(4.69e9, rel=2e-3)
    assert frequency_at_flux(spec, 0.1813) == pytest.approx(4.44e9, rel=2e-3)


def test_sweet_spot_is_maximum_with_zero_sensitivity():
    spec = TransmonSpec()
    phis = np.linspace(-0.49, 0.49, 99)
    f = frequency_at_flux(spec, phis)
    assert np.max(f) == pytest.approx(frequency_at_flux(spec, 0.0))
    assert flux_sensitivity(spec, 0.0) == 0.0


def test_flux_sensitivity_matches_finite_difference():
    spec = TransmonSpec()
    h = 1e-7
    for phi in (0.05, 0.11, 0.1813, 0.3, 0.45):
        fd = abs(
            frequency_at_flux(spec, phi + h) - frequency_at_flux(spec, phi - h)
        ) / (2 * h)
        assert flux_sensitivity(spec, phi) == pytest.approx(fd, rel=1e-6)


def test_flux_domain_enforced():
    spec = TransmonSpec()
    with pytest.raises(ValueError):
        frequency_at_flux(spec, 0.5)
    with pytest.raises(ValueError):
        flux_sensitivity(spec, -0.6)


def test_flux_noise_transduction():
    spec = TransmonSpec()
    d = flux_sensitivity(spec, 0.11)
    assert flux_noise_to_frequency_noise(spec, 0.11, 2.0) == pytest.approx(2 * d * d)
