"""Closed-loop frequency stabilization: accumulator controller, shot-level
simulation against a synthesized noise trace, analytic transfer functions,
and a bit-exact fixed-point pipeline mirroring the hardware signal path.

Discrete-time model: estimates are sampled at t_n = n * T_N with T_N = N*T.
The accumulator output p[n] acts on the shots of estimate n+1 (one-step
actuation delay), and the error signal is the inverted Ramsey estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .physics import NoiseModel, TimeTrace, derive_seed, synthesize_trace
from .ramsey import RamseyConfig, invert_p1

__all__ = [
    "LoopConfig",
    "LoopState",
    "ClosedLoopRecord",
    "LoopDivergenceError",
    "loop_step",
    "run_closed_loop",
    "run_ensemble_psd",
    "build_lut",
    "dac_lsb",
    "fixed_point_step",
    "transfer_p",
    "transfer_e",
    "closed_loop_psd",
]


class LoopDivergenceError(RuntimeError):
    """Raised when the accumulator output diverges (unstable gain)."""


@dataclass
class LoopConfig:
    gain: float = 0.35
    update_stride: int = 20  # N_S, accumulator update period in shots
    mode: str = "real"  # "real" | "fixed_point"
    dac_full_scale: float | None = None  # Hz; None -> 1/tau at run time
    dac_bits: int = 16

    def __post_init__(self):
        if self.gain < 0:
            raise ValueError("gain must be >= 0 (0 disables the feedback)")
        if self.update_stride < 1:
            raise ValueError("update_stride must be >= 1")
        if self.mode not in ("real", "fixed_point"):
            raise ValueError("mode must be 'real' or 'fixed_point'")
        if self.mode == "fixed_point" and self.dac_bits < 1:
            raise ValueError("dac_bits must be >= 1 in fixed_point mode")

    @property
    def stable(self) -> bool:
        # pole of the control transfer function at z = 1 - G
        return 0.0 < self.gain < 2.0


@dataclass
class LoopState:
    p: float = 0.0  # accumulator output, Hz
    n: int = 0

    def __post_init__(self):
        if not math.isfinite(self.p):
            raise ValueError("accumulator value must be finite")


@dataclass
class ClosedLoopRecord:
    """Per-estimate traces of one closed-loop run.

    error_signal: inverted Ramsey estimates delta_hat[n].
    control_signal: accumulator output p[n] after estimate n.
    true_frequency: actual qubit frequency offset seen during estimate n,
    i.e. the window-averaged intrinsic trace plus the control applied to it.
    """

    error_signal: TimeTrace
    control_signal: TimeTrace
    true_frequency: TimeTrace
    saturated: bool = False
    bits: np.ndarray | None = None  # (n_estimates, N) corrected shots, on request

    def to_csv(self, path):
        dt = self.error_signal.sample_period
        with open(path, "w", newline="") as fh:
            fh.write("n,t_s,error_hz,control_hz,true_freq_hz\n")
            for i in range(len(self.error_signal)):
                fh.write(
                    f"{i},{i * dt:.12g},{self.error_signal.values[i]:.12g},"
                    f"{self.control_signal.values[i]:.12g},"
                    f"{self.true_frequency.values[i]:.12g}\n"
                )


def loop_step(state: LoopState, error: float, cfg: LoopConfig) -> LoopState:
    """One accumulator update: p <- p + G * error."""
    p = state.p + cfg.gain * error
    if not math.isfinite(p) or abs(p) > 1e15:
        raise LoopDivergenceError(f"accumulator diverged at step {state.n}")
    return LoopState(p=p, n=state.n + 1)


def dac_lsb(rcfg: RamseyConfig, lcfg: LoopConfig) -> float:
    """DAC step in Hz for the fixed-point mode (mid-tread, range +-full scale)."""
    full_scale = lcfg.dac_full_scale
    if full_scale is None:
        full_scale = 1.0 / rcfg.tau  # 4/(4 tau)
    return full_scale / 2 ** (lcfg.dac_bits - 1)


def build_lut(rcfg: RamseyConfig, lcfg: LoopConfig) -> np.ndarray:
    """Lookup table indexed by the buffer sum s in 0..N.

    lut[s] encodes G * invert_p1(s / N) as an integer DAC increment; the
    unique choice that makes the fixed-point pipeline equivalent to the
    real-valued accumulator.
    """
    n = rcfg.shots_per_estimate
    lsb = dac_lsb(rcfg, lcfg)
    vals = np.array(
        [lcfg.gain * invert_p1(s / n, rcfg) for s in range(n + 1)]
    )
    return np.rint(vals / lsb).astype(np.int64)


def fixed_point_step(buffer, lut: np.ndarray, acc: int, cfg: LoopConfig):
    """One accumulator update of the fixed-point pipeline.

    ``buffer`` is either the current window of N bits or the maintained
    buffer sum s.  Returns (acc', voltage_code, saturated); the accumulator
    clamps at the DAC code range instead of wrapping.
    """
    s = int(np.sum(buffer)) if np.ndim(buffer) else int(buffer)
    if not 0 <= s < len(lut):
        raise ValueError("buffer sum outside lookup-table range")
    code_max = 2 ** (cfg.dac_bits - 1) - 1
    acc2 = acc + int(lut[s])
    saturated = False
    if acc2 > code_max:
        acc2, saturated = code_max, True
    elif acc2 < -code_max:
        acc2, saturated = -code_max, True
    return acc2, acc2, saturated


def run_closed_loop(
    model: NoiseModel,
    rcfg: RamseyConfig,
    lcfg: LoopConfig,
    n_estimates: int,
    seed: int,
    idle_gap: float = 0.0,
    return_bits: bool = False,
) -> ClosedLoopRecord:
    """Simulate ``n_estimates`` feedback cycles against a fresh noise trace.

    Each shot sees the intrinsic trace (sampled at the cycle time, i.e. the
    free-evolution average for that shot) plus the control output applied
    with a one-step delay.  Shots are drawn as Bernoulli outcomes, converted
    to a restless raw record, and virtually reset before estimation.  The
    accumulator updates every ``update_stride`` shots; with gain 0 the loop
    reduces to open-loop monitoring.

    ``idle_gap`` adds an interleaved-computation gap (seconds) after each
    estimate during which the noise evolves but no probing occurs.
    """
    if n_estimates < 1:
        raise ValueError("n_estimates must be >= 1")
    n_shots = rcfg.shots_per_estimate
    gap_shots = int(round(idle_gap / rcfg.cycle_time))
    stride_per_estimate = n_shots + gap_shots
    n_trace = n_estimates * stride_per_estimate

    trace = synthesize_trace(model, n_trace, rcfg.cycle_time, seed=derive_seed(seed, 0))
    rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, 1)))

    fixed = lcfg.mode == "fixed_point"
    if fixed:
        lut = build_lut(rcfg, lcfg)
        lsb = dac_lsb(rcfg, lcfg)
        acc = 0
    p = 0.0
    saturated = False

    error_sig = np.empty(n_estimates)
    control_sig = np.empty(n_estimates)
    true_freq = np.empty(n_estimates)
    all_bits = np.empty((n_estimates, n_shots), dtype=np.int8) if return_bits else None

    two_pi_tau = 2.0 * np.pi * rcfg.tau
    stride = lcfg.update_stride
    window = np.zeros(n_shots, dtype=np.int8)  # last N corrected bits
    win_pos = 0
    shot_counter = 0  # global probing-shot index, for update boundaries
    prev_raw = 0

    for n in range(n_estimates):
        base = n * stride_per_estimate
        intrinsic = trace.values[base : base + n_shots]
        bits = np.empty(n_shots, dtype=np.int8)
        i = 0
        p_start = p
        while i < n_shots:
            to_update = stride - (shot_counter % stride)
            chunk = min(n_shots - i, to_update)
            delta = -(intrinsic[i : i + chunk] + p)
            p1 = 0.5 + 0.5 * rcfg.init_fidelity * np.cos(
                two_pi_tau * delta - rcfg.measurement_phase
            )
            bits[i : i + chunk] = rng.random(chunk) < p1
            idx = (win_pos + np.arange(chunk)) % n_shots
            window[idx] = bits[i : i + chunk]
            win_pos = (win_pos + chunk) % n_shots
            i += chunk
            shot_counter += chunk
            if shot_counter % stride == 0:
                s = int(window.sum())
                if fixed:
                    acc, code, sat = fixed_point_step(s, lut, acc, lcfg)
                    saturated = saturated or sat
                    p = code * lsb
                else:
                    p = p + lcfg.gain * invert_p1(s / n_shots, rcfg)
                    if not math.isfinite(p) or abs(p) > 1e15:
                        raise LoopDivergenceError(
                            f"accumulator diverged at estimate {n}"
                        )

        # restless raw record, then virtual reset back to corrected bits
        raw = np.bitwise_xor.accumulate(bits) ^ prev_raw
        corrected = np.empty_like(raw)
        corrected[0] = raw[0] ^ prev_raw
        corrected[1:] = raw[1:] ^ raw[:-1]
        prev_raw = int(raw[-1])

        error_sig[n] = invert_p1(float(corrected.mean()), rcfg)
        control_sig[n] = p
        true_freq[n] = float(intrinsic.mean()) + p_start
        if return_bits:
            all_bits[n] = corrected

    period = rcfg.estimate_period + gap_shots * rcfg.cycle_time
    return ClosedLoopRecord(
        error_signal=TimeTrace(period, error_sig),
        control_signal=TimeTrace(period, control_sig),
        true_frequency=TimeTrace(period, true_freq),
        saturated=saturated,
        bits=all_bits,
    )


def _psd_realization(args):
    model, rcfg, lcfg, n_estimates, seed = args
    from .spectral import periodogram

    rec = run_closed_loop(model, rcfg, lcfg, n_estimates, seed)
    est_e = periodogram(rec.error_signal)
    est_c = periodogram(rec.control_signal)
    est_t = periodogram(rec.true_frequency)
    return est_e.frequencies, est_e.psd, est_c.psd, est_t.psd


def run_ensemble_psd(
    model: NoiseModel,
    rcfg: RamseyConfig,
    lcfg: LoopConfig,
    n_estimates: int,
    n_realizations: int,
    master_seed: int,
    workers: int = 1,
):
    """Ensemble-averaged periodograms of error, control, and true-frequency
    signals over independent realizations.

    Per-realization seeds come from the deterministic splitting rule, so the
    result is identical for any worker count.  Returns (frequencies,
    error_psd, control_psd, true_psd).
    """
    tasks = [
        (model, rcfg, lcfg, n_estimates, derive_seed(master_seed, i))
        for i in range(n_realizations)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_psd_realization, tasks, chunksize=1))
    else:
        results = [_psd_realization(t) for t in tasks]

    freqs = results[0][0]
    sum_e = np.zeros_like(freqs)
    sum_c = np.zeros_like(freqs)
    sum_t = np.zeros_like(freqs)
    for _f, pe, pc, pt in results:
        sum_e += pe
        sum_c += pc
        sum_t += pt
    k = float(n_realizations)
    return freqs, sum_e / k, sum_c / k, sum_t / k


def _z(f, rcfg: RamseyConfig):
    f_arr = np.asarray(f, dtype=float)
    nyquist = 1.0 / (2.0 * rcfg.estimate_period)
    if np.any(f_arr < 0) or np.any(f_arr > nyquist * (1 + 1e-12)):
        raise ValueError("frequency outside [0, 1/(2 N T)]")
    return np.exp(1j * 2.0 * np.pi * f_arr * rcfg.estimate_period)


def transfer_p(f, lcfg: LoopConfig, rcfg: RamseyConfig):
    """Control-signal frequency response G / (1 - z^-1 + G z^-1).

    Identically zero for gain 0 (feedback disabled); otherwise H_p(0) = 1.
    """
    z_inv = 1.0 / _z(f, rcfg)
    if lcfg.gain == 0.0:
        out = np.zeros_like(z_inv)
    else:
        out = lcfg.gain / (1.0 - z_inv + lcfg.gain * z_inv)
    return complex(out) if np.ndim(f) == 0 else out


def transfer_e(f, lcfg: LoopConfig, rcfg: RamseyConfig):
    """Error-signal frequency response (1 - z^-1) / (1 - z^-1 + G z^-1).

    Identically one for gain 0; otherwise H_e(0) = 0 (DC rejection).
    """
    z_inv = 1.0 / _z(f, rcfg)
    if lcfg.gain == 0.0:
        out = np.ones_like(z_inv)
    else:
        out = (1.0 - z_inv) / (1.0 - z_inv + lcfg.gain * z_inv)
    return complex(out) if np.ndim(f) == 0 else out


def closed_loop_psd(s_open, s_sampling, lcfg: LoopConfig, rcfg: RamseyConfig, f):
    """Closed-loop PSD of the actual qubit frequency.

    With the one-step actuation delay the qubit sees y[n] = d[n] + p[n-1],
    so Y = X_e D + z^-1 X_p V and the intrinsic noise is shaped by |X_e|^2
    (DC rejection) while the sampling noise enters through |X_p|^2.
    ``s_open`` and ``s_sampling`` may be callables of f or arrays aligned
    with ``f``.
    """
    s_o = s_open(f) if callable(s_open) else np.asarray(s_open, dtype=float)
    s_v = s_sampling(f) if callable(s_sampling) else np.asarray(s_sampling, dtype=float)
    xp = transfer_p(f, lcfg, rcfg)
    xe = transfer_e(f, lcfg, rcfg)
    out = np.abs(np.asarray(xe)) ** 2 * s_o + np.abs(np.asarray(xp)) ** 2 * s_v
    return float(out) if np.ndim(f) == 0 else out
