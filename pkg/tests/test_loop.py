import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxlock.physics import NoiseModel
from fluxlock.ramsey import RamseyConfig
from fluxlock.loop import (
    LoopConfig,
    LoopDivergenceError,
    LoopState,
    build_lut,
    closed_loop_psd,
    dac_lsb,
    fixed_point_step,
    loop_step,
    run_closed_loop,
    run_ensemble_psd,
    transfer_e,
    transfer_p,
)

RCFG = RamseyConfig()
LCFG = LoopConfig(gain=0.35)
NYQ = 1.0 / (2.0 * RCFG.estimate_period)


def test_transfer_dc_and_nyquist_oracles():
    assert abs(transfer_p(0.0, LCFG, RCFG)) == pytest.approx(1.0, abs=1e-12)
    assert abs(transfer_e(0.0, LCFG, RCFG)) == pytest.approx(0.0, abs=1e-12)
    # G / (2 - G) at the estimate Nyquist
    assert abs(transfer_p(NYQ, LCFG, RCFG)) == pytest.approx(0.35 / 1.65, abs=1e-9)
    assert abs(transfer_p(NYQ, LCFG, RCFG)) == pytest.approx(0.2121, abs=1e-4)


def test_transfer_rejects_out_of_band():
    with pytest.raises(ValueError):
        transfer_p(NYQ * 1.01, LCFG, RCFG)
    with pytest.raises(ValueError):
        transfer_e(-1.0, LCFG, RCFG)


@given(st.floats(0.0, NYQ), st.floats(0.01, 1.9))
@settings(max_examples=200, deadline=None)
def test_transfer_identity(f, gain):
    """H_e = 1 - z^-1 H_p for any in-band frequency and stable gain."""
    cfg = LoopConfig(gain=gain)
    z_inv = np.exp(-1j * 2 * np.pi * f * RCFG.estimate_period)
    he = transfer_e(f, cfg, RCFG)
    hp = transfer_p(f, cfg, RCFG)
    assert he == pytest.approx(1.0 - z_inv * hp, abs=1e-10)


def test_gain_zero_limits():
    cfg = LoopConfig(gain=0.0)
    f = np.linspace(0.0, NYQ, 7)
    assert np.all(transfer_p(f, cfg, RCFG) == 0.0)
    assert np.all(transfer_e(f, cfg, RCFG) == 1.0)
    assert not cfg.stable


def test_step_response_matches_transfer_function():
    """The deterministic recursion p[n] = p[n-1] + G*(d[n] - p[n-1]) has
    impulse response G(1-G)^n, whose transform is transfer_p."""
    g = 0.35
    cfg = LoopConfig(gain=g)
    # step response via loop_step with the one-step-delayed error
    state = LoopState()
    ps = []
    for _ in range(50):
        state = loop_step(state, 1.0 - state.p, cfg)
        ps.append(state.p)
    expected = 1.0 - (1.0 - g) ** (np.arange(50) + 1)
    np.testing.assert_allclose(ps, expected, rtol=1e-12)

    # impulse response transform equals transfer_p on the rfft grid
    n = 512
    h = g * (1.0 - g) ** np.arange(n)
    spec = np.fft.rfft(h)
    f = np.fft.rfftfreq(n, RCFG.estimate_period)
    np.testing.assert_allclose(spec, transfer_p(f, cfg, RCFG), atol=1e-10)


def test_loop_step_divergence_guard():
    with pytest.raises(LoopDivergenceError):
        loop_step(LoopState(p=9e14), 1e15, LoopConfig(gain=1.0))


def test_config_validation():
    with pytest.raises(ValueError):
        LoopConfig(gain=-0.1)
    with pytest.raises(ValueError):
        LoopConfig(update_stride=0)
    with pytest.raises(ValueError):
        LoopConfig(mode="float")
    assert not LoopConfig(gain=2.5).stable
    assert LoopConfig(gain=0.35).stable


def test_bounded_for_stable_gains():
    """Accumulator driven by bounded errors stays bounded for 0 < G < 2."""
    for g in (0.1, 0.35, 1.0, 1.9):
        state = LoopState()
        rng = np.random.default_rng(0)
        for _ in range(500):
            state = loop_step(state, rng.uniform(-1, 1) - state.p, LoopConfig(gain=g))
        assert abs(state.p) < 10.0


def test_dac_lsb_default_full_scale():
    # default full scale 1/tau = 800 kHz, 16 bits -> 24.4 Hz per code
    assert dac_lsb(RCFG, LoopConfig(dac_bits=16)) == pytest.approx(800e3 / 2**15)
    assert dac_lsb(RCFG, LoopConfig(dac_full_scale=1e3, dac_bits=8)) == pytest.approx(
        1e3 / 128
    )


def test_lut_contents():
    from fluxlock.ramsey import invert_p1

    cfg = LoopConfig(gain=0.35, mode="fixed_point")
    lut = build_lut(RCFG, cfg)
    assert len(lut) == RCFG.shots_per_estimate + 1
    lsb = dac_lsb(RCFG, cfg)
    for s in (0, 5, 10, 15, 20):
        want = 0.35 * invert_p1(s / 20, RCFG)
        assert lut[s] * lsb == pytest.approx(want, abs=lsb / 2)
    # antisymmetric about the midpoint for phi_m = pi/2
    assert lut[10] == 0
    assert lut[0] == -lut[20]


def test_fixed_point_step_saturates():
    cfg = LoopConfig(gain=0.35, mode="fixed_point", dac_bits=4)
    lut = build_lut(RCFG, cfg)
    code_max = 2**3 - 1
    acc, code, sat = fixed_point_step(20, lut, code_max, cfg)
    assert sat and acc == code_max and code == code_max
    acc, code, sat = fixed_point_step(0, lut, -code_max, cfg)
    assert sat and acc == -code_max
    with pytest.raises(ValueError):
        fixed_point_step(21, lut, 0, cfg)


def test_fixed_point_tracks_real_mode():
    """With no intrinsic noise the fixed-point trajectory stays within one
    LSB per update of the real-valued accumulator."""
    model = NoiseModel(amplitude_at_1hz=0.0)
    n_est = 256
    real = run_closed_loop(model, RCFG, LoopConfig(gain=0.35), n_est, seed=42)
    fixed = run_closed_loop(
        model, RCFG, LoopConfig(gain=0.35, mode="fixed_point", dac_bits=20),
        n_est, seed=42,
    )
    lsb = dac_lsb(RCFG, LoopConfig(dac_bits=20))
    dev = np.abs(real.control_signal.values - fixed.control_signal.values)
    budget = lsb * (np.arange(n_est) + 1)
    assert np.all(dev <= budget + 1e-9)
    assert not fixed.saturated


def test_run_closed_loop_record_shape():
    model = NoiseModel()
    rec = run_closed_loop(model, RCFG, LCFG, 64, seed=1)
    assert len(rec.error_signal) == len(rec.control_signal) == 64
    assert len(rec.true_frequency) == 64
    assert rec.error_signal.sample_period == pytest.approx(RCFG.estimate_period)
    assert rec.bits is None
    rec2 = run_closed_loop(model, RCFG, LCFG, 8, seed=1, return_bits=True)
    assert rec2.bits.shape == (8, RCFG.shots_per_estimate)
    assert set(np.unique(rec2.bits)) <= {0, 1}


def test_run_closed_loop_deterministic():
    model = NoiseModel()
    a = run_closed_loop(model, RCFG, LCFG, 100, seed=9)
    b = run_closed_loop(model, RCFG, LCFG, 100, seed=9)
    assert np.array_equal(a.error_signal.values, b.error_signal.values)
    assert np.array_equal(a.control_signal.values, b.control_signal.values)
    c = run_closed_loop(model, RCFG, LCFG, 100, seed=10)
    assert not np.array_equal(a.error_signal.values, c.error_signal.values)


def test_idle_gap_stretches_sample_period():
    model = NoiseModel()
    rec = run_closed_loop(model, RCFG, LCFG, 16, seed=2, idle_gap=35e-6)
    assert rec.error_signal.sample_period == pytest.approx(
        RCFG.estimate_period + 35e-6
    )


def test_ensemble_psd_worker_independent():
    model = NoiseModel()
    r1 = run_ensemble_psd(model, RCFG, LCFG, 128, 4, master_seed=77, workers=1)
    r2 = run_ensemble_psd(model, RCFG, LCFG, 128, 4, master_seed=77, workers=2)
    for a, b in zip(r1, r2):
        assert np.array_equal(a, b)


def test_closed_loop_psd_composition():
    f = np.array([1.0, 100.0, 3000.0])
    s = closed_loop_psd(lambda x: 10.0 / x, 2.0, LCFG, RCFG, f)
    xp = transfer_p(f, LCFG, RCFG)
    xe = transfer_e(f, LCFG, RCFG)
    want = np.abs(xe) ** 2 * (10.0 / f) + np.abs(xp) ** 2 * 2.0
    np.testing.assert_allclose(s, want, rtol=1e-12)
    # gain 0 passes the intrinsic PSD through untouched
    open_cfg = LoopConfig(gain=0.0)
    np.testing.assert_allclose(
        closed_loop_psd(lambda x: 10.0 / x, 2.0, open_cfg, RCFG, f), 10.0 / f
    )
    # DC: intrinsic noise fully rejected, sampling noise fully passed
    assert closed_loop_psd(123.0, 2.0, LCFG, RCFG, 0.0) == pytest.approx(2.0)
