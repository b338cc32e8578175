"""Spectral estimation: periodograms, Welch averaging, cross-spectrum
sampling-noise suppression, and power-law fitting.

All estimates use the unilateral density convention: a pure sinusoid of
amplitude a integrates to a^2/2, and the integral of the PSD over [0,
Nyquist] equals the mean-square value of the trace.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal as sp_signal

from .physics import TimeTrace
from .ramsey import RamseyConfig, invert_p1

__all__ = [
    "SpectrumEstimate",
    "PowerLawFit",
    "periodogram",
    "welch",
    "cross_psd_suppression",
    "split_shots_for_cross",
    "fit_power_law",
]


@dataclass
class SpectrumEstimate:
    frequencies: np.ndarray  # Hz, strictly increasing
    psd: np.ndarray  # Hz^2/Hz
    resolution: float  # Hz
    n_averages: int = 1

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("f_hz,psd_hz2_per_hz\n")
            for f, s in zip(self.frequencies, self.psd):
                fh.write(f"{f:.12g},{s:.12g}\n")


@dataclass
class PowerLawFit:
    amplitude_at_1hz: float
    exponent: float
    fit_band: tuple[float, float]
    residual: float

    def __call__(self, f):
        return self.amplitude_at_1hz * np.asarray(f, dtype=float) ** (-self.exponent)


def _values(trace) -> tuple[np.ndarray, float]:
    if isinstance(trace, TimeTrace):
        return trace.values, trace.sample_period
    raise TypeError("expected a TimeTrace")


def periodogram(trace: TimeTrace) -> SpectrumEstimate:
    """Rectangular-window one-sided periodogram.

    Normalized so that sum(psd) * df equals the mean square of the trace
    exactly (Parseval identity).
    """
    x, dt = _values(trace)
    n = len(x)
    if n < 2:
        raise ValueError("trace must have at least 2 samples")
    spec = np.fft.rfft(x)
    psd = (dt / n) * np.abs(spec) ** 2
    if n % 2 == 0:
        psd[1:-1] *= 2.0
    else:
        psd[1:] *= 2.0
    freqs = np.fft.rfftfreq(n, dt)
    return SpectrumEstimate(freqs, psd, resolution=1.0 / (n * dt), n_averages=1)


def _segment_params(n: int, n_segments: int, overlap_fraction: float):
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    nperseg = n // n_segments
    if nperseg < 2:
        raise ValueError("too few samples for the requested segmentation")
    noverlap = int(nperseg * overlap_fraction)
    if noverlap >= nperseg:
        raise ValueError("overlap_fraction must leave a positive hop")
    return nperseg, noverlap


def welch(
    trace: TimeTrace,
    n_segments: int,
    overlap_fraction: float = 0.5,
    window: str = "hann",
) -> SpectrumEstimate:
    """Welch-averaged PSD with window power correction.

    ``n_segments`` counts non-overlapping segments; with overlap the actual
    number of averaged periodograms is larger.  With one rectangular segment
    this reduces to the plain periodogram.
    """
    x, dt = _values(trace)
    nperseg, noverlap = _segment_params(len(x), n_segments, overlap_fraction)
    freqs, psd = sp_signal.welch(
        x,
        fs=1.0 / dt,
        window=window,
        nperseg=nperseg,
        noverlap=noverlap,
        detrend=False,
        return_onesided=True,
        scaling="density",
    )
    n_avg = (len(x) - noverlap) // (nperseg - noverlap)
    return SpectrumEstimate(freqs, psd, resolution=freqs[1] - freqs[0], n_averages=n_avg)


def cross_psd_suppression(
    trace_a: TimeTrace,
    trace_b: TimeTrace,
    n_segments: int = 1,
    overlap_fraction: float = 0.0,
    window: str = "boxcar",
) -> SpectrumEstimate:
    """Real part of the averaged cross-spectrum of two traces.

    A signal common to both traces is retained while noise that is
    independent between them averages toward zero as 1/sqrt(n_averages).
    With identical inputs and the default single rectangular segment this
    equals the plain periodogram.
    """
    xa, dta = _values(trace_a)
    xb, dtb = _values(trace_b)
    if len(xa) != len(xb) or dta != dtb:
        raise ValueError("traces must have equal lengths and sample periods")
    nperseg, noverlap = _segment_params(len(xa), n_segments, overlap_fraction)
    freqs, pxy = sp_signal.csd(
        xa,
        xb,
        fs=1.0 / dta,
        window=window,
        nperseg=nperseg,
        noverlap=noverlap,
        detrend=False,
        return_onesided=True,
        scaling="density",
    )
    n_avg = (len(xa) - noverlap) // (nperseg - noverlap)
    return SpectrumEstimate(
        freqs, np.real(pxy), resolution=freqs[1] - freqs[0], n_averages=n_avg
    )


def split_shots_for_cross(records, cfg: RamseyConfig):
    """Split each estimate's shots into even/odd halves and build two
    estimate traces with independent sampling noise but a common signal.

    ``records`` is an (n_estimates, N) array of corrected bits (or a
    sequence convertible to one).  Odd N drops the last shot with a warning.
    """
    bits = np.asarray(
        [r.bits if hasattr(r, "bits") else r for r in records], dtype=np.int8
    )
    if bits.ndim != 2 or bits.shape[1] < 2:
        raise ValueError("need records of at least 2 shots each")
    n = bits.shape[1]
    if n % 2 == 1:
        warnings.warn("odd shot count: dropping the last shot of each record")
        bits = bits[:, :-1]
    p_even = bits[:, 0::2].mean(axis=1)
    p_odd = bits[:, 1::2].mean(axis=1)
    period = cfg.estimate_period
    return (
        TimeTrace(period, invert_p1(p_even, cfg)),
        TimeTrace(period, invert_p1(p_odd, cfg)),
    )


def fit_power_law(
    est: SpectrumEstimate,
    band: tuple[float, float],
    n_log_bins: int = 24,
) -> PowerLawFit:
    """Least-squares power-law fit in log-log space.

    Bins are first averaged into equal log-width groups so the dense
    high-frequency end does not dominate the fit.  Non-positive PSD bins in
    the band are excluded (with a warning).
    """
    f_lo, f_hi = band
    mask = (est.frequencies >= f_lo) & (est.frequencies <= f_hi) & (est.frequencies > 0)
    f = est.frequencies[mask]
    s = est.psd[mask]
    if len(f) < 8:
        raise ValueError("need at least 8 bins inside the fit band")
    pos = s > 0
    if not np.all(pos):
        warnings.warn("excluding non-positive PSD bins from power-law fit")
        f, s = f[pos], s[pos]

    edges = np.geomspace(f[0], f[-1] * (1 + 1e-12), n_log_bins + 1)
    which = np.digitize(f, edges) - 1
    log_f, log_s = [], []
    for b in range(n_log_bins):
        sel = which == b
        if np.any(sel):
            log_f.append(np.mean(np.log10(f[sel])))
            log_s.append(np.log10(np.mean(s[sel])))
    log_f = np.asarray(log_f)
    log_s = np.asarray(log_s)

    slope, intercept = np.polyfit(log_f, log_s, 1)
    resid = float(np.sqrt(np.mean((log_s - (slope * log_f + intercept)) ** 2)))
    return PowerLawFit(
        amplitude_at_1hz=float(10.0**intercept),
        exponent=float(-slope),
        fit_band=(float(f[0]), float(f[-1])),
        residual=resid,
    )
