"""Shot-level Ramsey probing and frequency estimation by inversion.

The probing phase runs N Ramsey shots of cycle time T with free evolution
tau; the excited-state estimate p1_hat is inverted to a detuning estimate on
[-1/(4 tau), +1/(4 tau)] for measurement phase pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RamseyConfig",
    "ShotRecord",
    "SamplingNoisePsd",
    "ramsey_p1",
    "invert_p1",
    "simulate_shot",
    "virtual_reset",
    "estimate_frequency",
    "sampled_frequency",
    "sampling_noise_psd",
]


@dataclass
class RamseyConfig:
    tau: float = 1.25e-6  # free-evolution time, s
    cycle_time: float = 3.5e-6  # full shot duration T, s
    shots_per_estimate: int = 20  # N
    measurement_phase: float = math.pi / 2  # phi_m
    init_fidelity: float = 1.0

    def __post_init__(self):
        if not 0 < self.tau < self.cycle_time:
            raise ValueError("need 0 < tau < cycle_time")
        if self.shots_per_estimate < 1:
            raise ValueError("shots_per_estimate must be >= 1")
        if not 0.0 <= self.init_fidelity <= 1.0:
            raise ValueError("init_fidelity must be in [0, 1]")

    @property
    def estimate_period(self) -> float:
        """T_N = N * T, duration of one frequency estimate."""
        return self.shots_per_estimate * self.cycle_time

    @property
    def inversion_halfwidth(self) -> float:
        """Half-width 1/(4 tau) of the invertible detuning range."""
        return 1.0 / (4.0 * self.tau)


@dataclass
class ShotRecord:
    """Discriminated single-shot outcomes q_i of one estimate."""

    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.int8)


def _bits(record) -> np.ndarray:
    if isinstance(record, ShotRecord):
        return record.bits
    return np.asarray(record, dtype=np.int8)


def ramsey_p1(delta, cfg: RamseyConfig):
    """Excited-state probability for detuning ``delta`` (Hz).

    Contrast is reduced symmetrically toward 1/2 by the initialization
    fidelity.
    """
    osc = 0.5 * np.cos(2.0 * np.pi * np.asarray(delta, dtype=float) * cfg.tau
                       - cfg.measurement_phase)
    out = 0.5 + cfg.init_fidelity * osc
    return float(out) if np.ndim(delta) == 0 else out


def invert_p1(p1, cfg: RamseyConfig):
    """Invert the Ramsey fringe: detuning on the principal branch.

    delta = (-arccos(2 p1 - 1) + phi_m) / (2 pi tau); for phi_m = pi/2 this
    is the one-to-one inverse of ramsey_p1 on [-1/(4 tau), +1/(4 tau)].
    """
    p_arr = np.asarray(p1, dtype=float)
    if np.any(p_arr < 0) or np.any(p_arr > 1):
        raise ValueError("p1 must lie in [0, 1]")
    out = (-np.arccos(2.0 * p_arr - 1.0) + cfg.measurement_phase) / (
        2.0 * np.pi * cfg.tau
    )
    return float(out) if np.ndim(p1) == 0 else out


def simulate_shot(true_delta: float, cfg: RamseyConfig, rng: np.random.Generator) -> int:
    """One Bernoulli readout with success probability ramsey_p1(true_delta)."""
    return int(rng.random() < ramsey_p1(true_delta, cfg))


def virtual_reset(record):
    """Undo restless accumulation: q'_i = XOR(q_i, q_{i-1}), q_{-1} = 0.

    The bit preceding the record is taken to be 0 (thermalized ground state).
    """
    q = _bits(record)
    out = np.empty_like(q)
    out[0] = q[0]
    out[1:] = q[1:] ^ q[:-1]
    if isinstance(record, ShotRecord):
        return ShotRecord(out)
    return out


def estimate_frequency(record, cfg: RamseyConfig) -> float:
    """Detuning estimate from one shot record: invert the mean bit value."""
    q = _bits(record)
    if len(q) != cfg.shots_per_estimate:
        raise ValueError("record length must equal shots_per_estimate")
    return invert_p1(float(np.mean(q)), cfg)


def sampled_frequency(trace, n: int, cfg: RamseyConfig, window: str = "tau") -> float:
    """Average frequency the estimator is sensitive to during estimate ``n``.

    Averages the trace over the N free-evolution windows of duration tau
    inside [n*T_N, n*T_N + N*T] (``window="tau"``), or over the full cycle
    periods (``window="full"``).
    """
    if window not in ("tau", "full"):
        raise ValueError("window must be 'tau' or 'full'")
    dt = trace.sample_period
    values = trace.values
    t0 = n * cfg.estimate_period
    win_len = cfg.tau if window == "tau" else cfg.cycle_time
    total = 0.0
    for i in range(cfg.shots_per_estimate):
        start = t0 + i * cfg.cycle_time
        stop = start + win_len
        k0 = int(math.floor(start / dt))
        k1 = max(k0 + 1, int(math.ceil(stop / dt)))
        if k1 > len(values):
            raise IndexError("trace does not cover the requested estimate window")
        total += float(np.mean(values[k0:k1]))
    return total / cfg.shots_per_estimate


@dataclass
class SamplingNoisePsd:
    """White sampling-noise PSD: flat at ``level`` up to ``cutoff_hz``, else 0."""

    level: float  # Hz^2/Hz
    cutoff_hz: float

    def __call__(self, f):
        f_arr = np.asarray(f, dtype=float)
        out = np.where((f_arr >= 0) & (f_arr <= self.cutoff_hz), self.level, 0.0)
        return float(out) if np.ndim(f) == 0 else out


def sampling_noise_psd(cfg: RamseyConfig) -> SamplingNoisePsd:
    """Finite-shot estimation noise modeled as band-limited white noise.

    Plateau T / (2 pi^2 tau^2) on [0, 1/(2 N T)]; its integral reproduces the
    single-estimate variance (1 / (2 pi tau sqrt(N)))^2.
    """
    level = cfg.cycle_time / (2.0 * np.pi**2 * cfg.tau**2)
    cutoff = 1.0 / (2.0 * cfg.estimate_period)
    return SamplingNoisePsd(level=level, cutoff_hz=cutoff)
