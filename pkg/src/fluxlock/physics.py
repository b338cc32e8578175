"""Noise environment: parametric PSD models, colored-noise synthesis, and the
flux-to-frequency map of a symmetric tunable transmon.

Conventions
-----------
All spectral densities are unilateral (one-sided), in Hz^2/Hz, so that the
total variance of a process equals the integral of its PSD from 0 to the
Nyquist frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NoiseModel",
    "TransmonSpec",
    "TimeTrace",
    "derive_seed",
    "model_psd",
    "synthesize_trace",
    "frequency_at_flux",
    "flux_sensitivity",
    "flux_noise_to_frequency_noise",
]

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(master_seed: int, index: int) -> int:
    """Derive an independent 64-bit stream seed from a master seed.

    splitmix64 finalizer applied to ``master + (index + 1) * gamma``; used to
    give parallel realizations decorrelated, reproducible generators.
    """
    z = (master_seed + (index + 1) * _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass
class NoiseModel:
    """Power-law qubit-frequency noise plus optional discrete spectral lines.

    The smooth part is ``amplitude_at_1hz * (1 Hz / f)**exponent_alpha``.
    Each line is a (frequency, power) pair; its power (Hz^2) is spread over a
    top-hat bin of width ``line_width_hz`` centered on the line frequency.
    """

    amplitude_at_1hz: float = 27.3e6  # Hz^2/Hz
    exponent_alpha: float = 0.8
    lines: list[tuple[float, float]] = field(default_factory=list)
    line_width_hz: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.amplitude_at_1hz < 0:
            raise ValueError("amplitude_at_1hz must be >= 0")
        if not 0.0 <= self.exponent_alpha <= 2.0:
            raise ValueError("exponent_alpha must be in [0, 2]")
        if self.line_width_hz <= 0:
            raise ValueError("line_width_hz must be > 0")
        for f_line, _power in self.lines:
            if f_line <= 0:
                raise ValueError("line frequencies must be > 0")

    def psd(self, f):
        return model_psd(self, f)


@dataclass
class TransmonSpec:
    """Flux-tunable transmon: sweet-spot frequency and flux map.

    Flux is expressed in units of the flux quantum; the map is the symmetric
    SQUID form f_max * sqrt(|cos(pi * phi)|), valid for |phi| < 0.5.
    """

    f_max: float = 4.835e9  # Hz

    def __post_init__(self):
        if self.f_max <= 0:
            raise ValueError("f_max must be > 0")


@dataclass
class TimeTrace:
    """Uniformly sampled frequency-offset trace."""

    sample_period: float  # s
    values: np.ndarray  # Hz

    def __post_init__(self):
        if self.sample_period <= 0:
            raise ValueError("sample_period must be > 0")
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trace contains non-finite samples")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        return len(self.values) * self.sample_period


def model_psd(model: NoiseModel, f):
    """Evaluate the unilateral model PSD at frequency ``f`` (Hz, scalar or array).

    Raises ValueError for any non-positive frequency.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise ValueError("model_psd requires f > 0")
    s = model.amplitude_at_1hz * f_arr ** (-model.exponent_alpha)
    for f_line, power in model.lines:
        half = 0.5 * model.line_width_hz
        in_bin = np.abs(f_arr - f_line) <= half
        s = s + np.where(in_bin, power / model.line_width_hz, 0.0)
    if np.isscalar(f) or f_arr.ndim == 0:
        return float(s)
    return s


def synthesize_trace(
    model: NoiseModel,
    n_samples: int,
    sample_period: float,
    seed: int | None = None,
) -> TimeTrace:
    """Generate a Gaussian stationary trace whose expected periodogram equals
    the model PSD on the resolvable band [1/(n*dt), 1/(2*dt)].

    Frequency-domain synthesis: each rfft bin is an independent complex
    Gaussian scaled so its expected one-sided periodogram is model_psd at the
    bin center; the DC bin is zeroed.  Deterministic given the seed.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if sample_period <= 0:
        raise ValueError("sample_period must be > 0")
    if seed is None:
        seed = model.rng_seed
    rng = np.random.default_rng(np.random.PCG64(seed))

    n = int(n_samples)
    dt = float(sample_period)
    freqs = np.fft.rfftfreq(n, dt)
    n_bins = len(freqs)

    re = rng.standard_normal(n_bins)
    im = rng.standard_normal(n_bins)

    if model.amplitude_at_1hz == 0 and not model.lines:
        return TimeTrace(dt, np.zeros(n))

    s = np.zeros(n_bins)
    s[1:] = model_psd(model, freqs[1:])

    # E|X_k|^2 = S_k * n / (2 dt) for doubled interior bins; the (real)
    # Nyquist bin is counted once in the one-sided convention.
    scale = np.sqrt(s * n / (2.0 * dt))
    spectrum = scale * (re + 1j * im) / math.sqrt(2.0)
    spectrum[0] = 0.0
    if n % 2 == 0:
        spectrum[-1] = scale[-1] * math.sqrt(2.0) * re[-1]

    values = np.fft.irfft(spectrum, n)
    return TimeTrace(dt, values)


def _check_flux_domain(phi):
    if np.any(np.abs(np.asarray(phi)) >= 0.5):
        raise ValueError("flux bias must satisfy |phi| < 0.5 flux quanta")


def frequency_at_flux(spec: TransmonSpec, phi):
    """Qubit frequency at flux bias ``phi`` (in flux quanta)."""
    _check_flux_domain(phi)
    out = spec.f_max * np.sqrt(np.cos(np.pi * np.asarray(phi, dtype=float)))
    return float(out) if np.ndim(phi) == 0 else out


def flux_sensitivity(spec: TransmonSpec, phi):
    """Magnitude of d f_q / d phi (Hz per flux quantum), analytic derivative."""
    _check_flux_domain(phi)
    phi_arr = np.asarray(phi, dtype=float)
    out = spec.f_max * (np.pi / 2.0) * np.abs(np.sin(np.pi * phi_arr)) / np.sqrt(
        np.cos(np.pi * phi_arr)
    )
    return float(out) if np.ndim(phi) == 0 else out


def flux_noise_to_frequency_noise(spec: TransmonSpec, phi, s_flux):
    """First-order transduction of a flux-noise PSD (Phi_0^2/Hz) into a
    frequency-noise PSD (Hz^2/Hz) at bias ``phi``."""
    d = flux_sensitivity(spec, phi)
    return d * d * np.asarray(s_flux, dtype=float) if np.ndim(s_flux) else d * d * s_flux
