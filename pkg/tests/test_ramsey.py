import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxlock.physics import TimeTrace
from fluxlock.ramsey import (
    RamseyConfig,
    ShotRecord,
    estimate_frequency,
    invert_p1,
    ramsey_p1,
    sampled_frequency,
    sampling_noise_psd,
    virtual_reset,
)

CFG = RamseyConfig()  # tau=1.25 us, T=3.5 us, N=20, phi_m=pi/2


def test_config_derived_quantities():
    assert CFG.estimate_period == pytest.approx(70e-6)
    assert CFG.inversion_halfwidth == pytest.approx(200e3)


def test_config_validation():
    with pytest.raises(ValueError):
        RamseyConfig(tau=5e-6, cycle_time=3.5e-6)
    with pytest.raises(ValueError):
        RamseyConfig(shots_per_estimate=0)
    with pytest.raises(ValueError):
        RamseyConfig(init_fidelity=1.1)


@given(st.floats(-200e3, 200e3))
@settings(max_examples=200, deadline=None)
def test_inversion_bijective_on_principal_branch(delta):
    # arccos loses ~sqrt(eps) precision at the branch edges
    assert invert_p1(ramsey_p1(delta, CFG), CFG) == pytest.approx(delta, abs=1e-3)


def test_invert_p1_domain():
    with pytest.raises(ValueError):
        invert_p1(1.2, CFG)
    with pytest.raises(ValueError):
        invert_p1(-0.1, CFG)


def test_ramsey_p1_contrast_scaling():
    cfg = RamseyConfig(init_fidelity=0.92)
    assert ramsey_p1(0.0, cfg) == pytest.approx(0.5)  # phi_m = pi/2 midpoint
    full = ramsey_p1(100e3, CFG) - 0.5
    assert ramsey_p1(100e3, cfg) - 0.5 == pytest.approx(0.92 * full)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64))
@settings(max_examples=100, deadline=None)
def test_virtual_reset_definition(bits):
    q = np.array(bits, dtype=np.int8)
    out = virtual_reset(q)
    assert out[0] == q[0]  # q_{-1} = 0
    for i in range(1, len(q)):
        assert out[i] == q[i] ^ q[i - 1]


def test_virtual_reset_shot_record():
    rec = ShotRecord(np.array([1, 1, 0, 1]))
    out = virtual_reset(rec)
    assert isinstance(out, ShotRecord)
    assert list(out.bits) == [1, 0, 1, 1]


def test_estimator_bias():
    """Mean of the estimate over 1e4 trials is within 2 SEM of the truth."""
    delta = 10e3  # inner half of the inversion domain
    rng = np.random.default_rng(5)
    p1 = ramsey_p1(delta, CFG)
    n_trials = 10_000
    counts = rng.binomial(CFG.shots_per_estimate, p1, size=n_trials)
    estimates = invert_p1(counts / CFG.shots_per_estimate, CFG)
    sem = estimates.std() / math.sqrt(n_trials)
    assert abs(estimates.mean() - delta) < 2 * sem


def test_estimator_sigma_matches_sampling_law():
    """Estimator std at delta=0 is 1/(2 pi tau sqrt(N)) ~ 28.5 kHz."""
    rng = np.random.default_rng(11)
    counts = rng.binomial(CFG.shots_per_estimate, 0.5, size=20_000)
    estimates = invert_p1(counts / CFG.shots_per_estimate, CFG)
    expected = 1.0 / (2 * math.pi * CFG.tau * math.sqrt(CFG.shots_per_estimate))
    assert expected == pytest.approx(28.5e3, rel=0.01)
    assert estimates.std() == pytest.approx(expected, rel=0.10)


def test_estimator_variance_scaling():
    """Estimator std scales as N^-0.5 once past the small-N regime.

    At N=5 the saturated arccos edge outcomes (p1_hat of 0 or 1) inflate the
    variance by ~50%, so the power law is checked from N=20 up.
    """
    rng = np.random.default_rng(3)
    ns = np.array([20, 80, 320])
    sigmas = []
    for n in ns:
        cfg = RamseyConfig(shots_per_estimate=int(n))
        counts = rng.binomial(n, 0.5, size=40_000)
        sigmas.append(invert_p1(counts / n, cfg).std())
    slope = np.polyfit(np.log(ns), np.log(sigmas), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.05)


def test_estimate_frequency_record_length_checked():
    with pytest.raises(ValueError):
        estimate_frequency(np.zeros(7, dtype=np.int8), CFG)


def test_sampled_frequency_constant_trace():
    trace = TimeTrace(CFG.cycle_time, np.full(100, 1234.0))
    assert sampled_frequency(trace, 0, CFG) == pytest.approx(1234.0)
    assert sampled_frequency(trace, 0, CFG, window="full") == pytest.approx(1234.0)
    with pytest.raises(ValueError):
        sampled_frequency(trace, 0, CFG, window="bogus")


def test_sampling_noise_psd_values():
    psd = sampling_noise_psd(CFG)
    # T / (2 pi^2 tau^2) and 1/(2 N T)
    assert psd.level == pytest.approx(1.1348e5, rel=1e-3)
    assert psd.cutoff_hz == pytest.approx(7142.857, rel=1e-6)
    # integral over the band reproduces the single-estimate variance
    sigma2 = (1.0 / (2 * math.pi * CFG.tau * math.sqrt(CFG.shots_per_estimate))) ** 2
    assert psd.level * psd.cutoff_hz == pytest.approx(sigma2, rel=1e-9)
    assert psd(100.0) == psd.level
    assert psd(1e4) == 0.0
