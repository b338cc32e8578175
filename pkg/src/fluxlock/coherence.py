"""Coherence prediction and extraction: decay envelopes from arbitrary PSDs,
T2 readout, interleaved Ramsey simulation, and the dephasing-vs-flux-
sensitivity conversion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, curve_fit

from .physics import NoiseModel, derive_seed, synthesize_trace
from .ramsey import RamseyConfig, invert_p1
from .loop import LoopConfig

__all__ = [
    "DecayEnvelope",
    "CoherenceResult",
    "FluxNoiseAmplitude",
    "ramsey_envelope",
    "envelope_on_grid",
    "extract_t2",
    "simulate_interleaved_ramsey",
    "InterleavedRamseyResult",
    "fit_ramsey_decay",
    "dephasing_rate_from_psd",
    "dephasing_sensitivity_fit",
    "flux_noise_amplitude",
    "pure_dephasing_rate",
]


@dataclass
class DecayEnvelope:
    times: np.ndarray  # s
    chi: np.ndarray  # (0, 1]
    lower_cutoff: float  # f0, Hz

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("t_s,chi\n")
            for t, c in zip(self.times, self.chi):
                fh.write(f"{t:.12g},{c:.12g}\n")


@dataclass
class CoherenceResult:
    t2: float  # s
    gamma_phi: float  # 1/s
    gamma_1: float  # 1/s
    fit_residual: float = 0.0


@dataclass
class FluxNoiseAmplitude:
    sqrt_a_phi: float  # Phi_0
    eta: float
    k: float  # Phi_0


def _filter_integral(psd, t: float, f0: float, f_upper: float, order: int = 12) -> float:
    """Integral of S(f) sinc^2(pi f t) over [f0, f_upper].

    Gauss-Legendre on a composite grid: logarithmically spaced panels up to
    the first sinc lobe, then half-period panels so each oscillation of the
    integrand is resolved.
    """
    f_break = min(f_upper, max(0.5 / t, f0 * 1.000001))
    pts = [np.geomspace(f0, f_break, max(3, int(24 * math.log10(f_break / f0)) + 2))]
    if f_break < f_upper:
        lin = np.arange(f_break, f_upper, 0.5 / t)
        pts.append(lin[1:])
        pts.append(np.array([f_upper]))
    edges = np.unique(np.concatenate(pts))
    nodes, weights = leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    f = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    integrand = np.asarray(psd(f), dtype=float) * np.sinc(f * t) ** 2
    return float(np.sum(w * integrand))


def ramsey_envelope(psd, t: float, f0: float, f_upper: float, order: int = 12) -> float:
    """Gaussian-noise Ramsey decay envelope at free-evolution time ``t``.

    chi(t) = exp[-2 t^2 pi^2 Int_{f0}^{f_upper} S(f) sinc^2(pi f t) df].
    The lower cutoff f0 is the inverse total experiment duration; the
    integral diverges as f0 -> 0 for spectra steeper than 1/f, so f0 must be
    strictly positive.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if not 0 < f0 < f_upper:
        raise ValueError(
            "need 0 < f0 < f_upper: the dephasing integral diverges at f0 = 0"
        )
    if t == 0.0:
        return 1.0
    integral = _filter_integral(psd, t, f0, f_upper, order=order)
    return math.exp(-2.0 * t * t * math.pi**2 * integral)


def envelope_on_grid(psd, times, f0: float, f_upper: float) -> DecayEnvelope:
    times = np.asarray(times, dtype=float)
    chi = np.array([ramsey_envelope(psd, t, f0, f_upper) for t in times])
    return DecayEnvelope(times=times, chi=chi, lower_cutoff=f0)


def extract_t2(envelope: DecayEnvelope) -> float:
    """Time of the first crossing of the envelope below 1/e (linear
    interpolation between grid points)."""
    thr = 1.0 / math.e
    chi = envelope.chi
    below = np.nonzero(chi < thr)[0]
    if len(below) == 0 or below[0] == 0:
        raise ValueError(
            "envelope does not cross 1/e inside the grid: extend the time grid"
        )
    i = below[0]
    t0, t1 = envelope.times[i - 1], envelope.times[i]
    c0, c1 = chi[i - 1], chi[i]
    return float(t0 + (c0 - thr) / (c0 - c1) * (t1 - t0))


@dataclass
class InterleavedRamseyResult:
    """Probe Ramsey scans interleaved with feedback estimation blocks.

    ``coherence[b, j]`` is the unit phasor exp(i 2 pi delta_n tau_j) of the
    residual frequency offset seen by probe point j in scan block b;
    averaging it over blocks gives the measured decay envelope.
    """

    tau_grid: np.ndarray
    p1: np.ndarray  # (n_blocks, n_tau)
    coherence: np.ndarray  # complex, (n_blocks, n_tau)
    block_duration: float  # s
    feedback_on: bool
    detuning: float = 0.0

    @property
    def n_blocks(self) -> int:
        return self.p1.shape[0]

    def envelope(self, n_avg: int | None = None, start: int = 0) -> DecayEnvelope:
        """Decay envelope from averaging ``n_avg`` consecutive scan blocks."""
        if n_avg is None:
            n_avg = self.n_blocks - start
        w = self.coherence[start : start + n_avg]
        chi = np.abs(np.mean(w, axis=0))
        f0 = 1.0 / (n_avg * self.block_duration)
        return DecayEnvelope(times=self.tau_grid, chi=chi, lower_cutoff=f0)

    def p1_mean(self, n_avg: int | None = None, start: int = 0):
        if n_avg is None:
            n_avg = self.n_blocks - start
        block = self.p1[start : start + n_avg]
        return block.mean(axis=0), block.std(axis=0) / math.sqrt(len(block))

    def to_csv(self, path, n_avg: int | None = None):
        mean, sem = self.p1_mean(n_avg)
        with open(path, "w", newline="") as fh:
            fh.write("tau_r_s,p1_mean,p1_sem\n")
            for t, m, s in zip(self.tau_grid, mean, sem):
                fh.write(f"{t:.12g},{m:.12g},{s:.12g}\n")


def simulate_interleaved_ramsey(
    model: NoiseModel,
    rcfg: RamseyConfig,
    lcfg: LoopConfig,
    tau_r_grid,
    n_blocks: int,
    seed: int,
    feedback_on: bool = True,
    detuning: float = 0.0,
) -> InterleavedRamseyResult:
    """Probe Ramsey experiment interleaved with feedback estimation.

    Each scan block sweeps the probe delay grid; before every probe point a
    full frequency estimate (N shots) runs against the evolving noise trace
    and, when the feedback is on, updates the accumulator.  The probe sees
    the window-averaged residual frequency offset; with the feedback off the
    estimates still consume the same wall time so both arms share timing.
    """
    tau_grid = np.asarray(tau_r_grid, dtype=float)
    if len(tau_grid) == 0 or n_blocks < 1:
        raise ValueError("need a nonempty tau grid and n_blocks >= 1")
    n_shots = rcfg.shots_per_estimate
    dt = rcfg.cycle_time

    probe_slots = np.maximum(1, np.ceil(tau_grid / dt).astype(int)) + 1
    slots_per_block = int(np.sum(n_shots + probe_slots))
    n_trace = n_blocks * slots_per_block + 1

    trace = synthesize_trace(model, n_trace, dt, seed=derive_seed(seed, 0))
    rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, 1)))
    values = trace.values

    two_pi_tau = 2.0 * np.pi * rcfg.tau
    p = 0.0
    pos = 0
    p1 = np.empty((n_blocks, len(tau_grid)))
    coh = np.empty((n_blocks, len(tau_grid)), dtype=complex)

    for b in range(n_blocks):
        for j, tau_r in enumerate(tau_grid):
            intrinsic = values[pos : pos + n_shots]
            pos += n_shots
            delta = -(intrinsic + p)
            prob = 0.5 + 0.5 * rcfg.init_fidelity * np.cos(
                two_pi_tau * delta - rcfg.measurement_phase
            )
            bits = rng.random(n_shots) < prob
            if feedback_on:
                p += lcfg.gain * invert_p1(float(bits.mean()), rcfg)

            k = probe_slots[j]
            window = values[pos : pos + max(1, k - 1)]
            pos += k
            residual = -(float(window.mean()) + p)
            phasor = np.exp(1j * 2.0 * np.pi * residual * tau_r)
            coh[b, j] = phasor
            p1[b, j] = 0.5 + 0.5 * rcfg.init_fidelity * np.real(
                np.exp(1j * 2.0 * np.pi * detuning * tau_r) * phasor
            )

    return InterleavedRamseyResult(
        tau_grid=tau_grid,
        p1=p1,
        coherence=coh,
        block_duration=slots_per_block * dt,
        feedback_on=feedback_on,
        detuning=detuning,
    )


def fit_ramsey_decay(times, p1, detuning_guess: float, t2_guess: float = 5e-6):
    """Fit oscillation x envelope to a noisy Ramsey trace.

    Model: p1 = 1/2 + a cos(2 pi f t + phase) exp(-t/Ta - (t/Tb)^2); the
    exponential term captures white/T1-like dephasing, the Gaussian term the
    1/f part.  Returns (T2 at the envelope 1/e point, fitted params dict).
    """
    times = np.asarray(times, dtype=float)
    p1 = np.asarray(p1, dtype=float)

    def model_fn(t, a, f, phase, inv_ta, inv_tb):
        return 0.5 + a * np.cos(2 * np.pi * f * t + phase) * np.exp(
            -t * inv_ta - (t * inv_tb) ** 2
        )

    p0 = [0.45, detuning_guess, 0.0, 0.1 / t2_guess, 1.0 / t2_guess]
    bounds = ([0.0, 0.0, -np.pi, 0.0, 0.0], [0.6, np.inf, np.pi, np.inf, np.inf])
    popt, _ = curve_fit(model_fn, times, p1, p0=p0, bounds=bounds, maxfev=20000)
    a, f, phase, inv_ta, inv_tb = popt
    if inv_tb > 0:
        t2 = (-inv_ta + math.sqrt(inv_ta**2 + 4 * inv_tb**2)) / (2 * inv_tb**2)
    else:
        t2 = 1.0 / inv_ta if inv_ta > 0 else math.inf
    resid = float(np.sqrt(np.mean((model_fn(times, *popt) - p1) ** 2)))
    return float(t2), {
        "amplitude": a,
        "frequency": f,
        "phase": phase,
        "inv_ta": inv_ta,
        "inv_tb": inv_tb,
        "residual": resid,
    }


def dephasing_rate_from_psd(psd, f0: float, f_upper: float, t1: float = math.inf):
    """Pure dephasing rate implied by a frequency-noise PSD.

    Finds the 1/e time of chi(t) * exp(-t / (2 T1)) by bracketing and root
    finding, then removes the energy-relaxation contribution.
    Returns a CoherenceResult.
    """

    def log_total(t):
        chi = ramsey_envelope(psd, t, f0, f_upper)
        return math.log(max(chi, 1e-300)) - t / (2.0 * t1) + 1.0

    t_lo, t_hi = 0.0, 1e-7
    while log_total(t_hi) > 0:
        t_lo, t_hi = t_hi, t_hi * 2.0
        if t_hi > 1e3:
            raise ValueError("no 1/e crossing below 1000 s: PSD too weak")
    t2 = brentq(log_total, t_lo, t_hi, xtol=1e-12, rtol=1e-10)
    gamma_1 = 1.0 / t1 if math.isfinite(t1) else 0.0
    return CoherenceResult(
        t2=float(t2),
        gamma_phi=pure_dephasing_rate(float(t2), t1),
        gamma_1=gamma_1,
    )


def dephasing_sensitivity_fit(points) -> float:
    """Zero-intercept least-squares slope k of Gamma_phi vs |df/dPhi|.

    ``points`` is a sequence of (sensitivity Hz/Phi_0, gamma_phi 1/s); the
    returned k carries units of Phi_0.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (sensitivity, gamma_phi) points")
    d = pts[:, 0]
    g = pts[:, 1]
    denom = float(np.sum(d * d))
    if denom == 0.0:
        raise ValueError("all sensitivities are zero: slope undefined")
    return float(np.sum(d * g) / denom)


def flux_noise_amplitude(k: float, eta: float) -> float:
    """sqrt(A_Phi) = k / (2 pi sqrt(eta)), per the echo/Ramsey bandwidth
    scaling (eta = ln 2 for echo, ln(f_u / (2 pi f_l)) for Ramsey)."""
    if k < 0 or eta <= 0:
        raise ValueError("k must be >= 0 and eta > 0")
    return k / (2.0 * math.pi * math.sqrt(eta))


def pure_dephasing_rate(t2: float, t1: float) -> float:
    """Gamma_phi = 1/T2 - 1/(2 T1); clipped at zero in the noise-floor case
    T2 > 2 T1 (with a warning)."""
    if t2 <= 0:
        raise ValueError("t2 must be > 0")
    gamma = 1.0 / t2 - (0.5 / t1 if math.isfinite(t1) else 0.0)
    if gamma < 0:
        warnings.warn("T2 exceeds 2*T1: dephasing at the noise floor, returning 0")
        return 0.0
    return gamma
