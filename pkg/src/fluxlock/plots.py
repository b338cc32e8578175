"""Figure rendering for scenario outputs.

Reads the CSV files a scenario wrote and renders PNG summaries next to them.
Kept separate from the simulation path so headless runs never import
matplotlib unless plotting was requested.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _load(out_dir, name):
    path = os.path.join(out_dir, name)
    if not os.path.exists(path):
        return None
    return np.genfromtxt(path, delimiter=",", names=True)


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _plot_psd(out_dir):
    fig, ax = plt.subplots(figsize=(6, 4))
    for fname, label, kw in (
        ("psd_open.csv", "direct estimate PSD", {"alpha": 0.6}),
        ("psd_suppressed.csv", "cross-spectrum", {"alpha": 0.8}),
    ):
        data = _load(out_dir, fname)
        if data is None:
            continue
        mask = (data["f_hz"] > 0) & (data["psd_hz2_per_hz"] > 0)
        ax.loglog(data["f_hz"][mask], data["psd_hz2_per_hz"][mask], label=label, **kw)
    model = _load(out_dir, "psd_model.csv")
    if model is not None:
        ax.loglog(model["f_hz"], model["model_psd_hz2_per_hz"], "k--", label="model")
        ax.loglog(model["f_hz"], model["sampling_psd_hz2_per_hz"], ":",
                  color="gray", label="sampling noise")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel(r"$S_{ff}$ (Hz$^2$/Hz)")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "psd.png")]


def _plot_closed_loop(out_dir):
    written = []
    data = _load(out_dir, "closed_loop_psd.csv")
    if data is not None:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.loglog(data["f_hz"], data["open_true_psd"], alpha=0.6, label="open loop")
        ax.loglog(data["f_hz"], data["closed_true_psd"], alpha=0.6, label="closed loop")
        ax.loglog(data["f_hz"], data["analytic_true_psd"], "k--", lw=1,
                  label="analytic closed loop")
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel(r"$S_{ff}$ (Hz$^2$/Hz)")
        ax.legend(fontsize=8)
        written.append(_save(fig, out_dir, "closed_loop_psd.png"))
    rec = _load(out_dir, "record.csv")
    if rec is not None:
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.plot(rec["t_s"], rec["true_freq_hz"] / 1e3, lw=0.5, label="qubit offset")
        ax.plot(rec["t_s"], rec["control_hz"] / 1e3, lw=0.5, label="control")
        ax.set_xlabel("time (s)")
        ax.set_ylabel("frequency (kHz)")
        ax.legend(fontsize=8)
        written.append(_save(fig, out_dir, "record.png"))
    return written


def _plot_transfer(out_dir):
    data = _load(out_dir, "transfer.csv")
    if data is None:
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    f = data["f_hz"][1:]
    ax.semilogx(f, 20 * np.log10(data["h_p_mag"][1:]), label=r"$|H_p|$")
    ax.semilogx(f, 20 * np.log10(np.maximum(data["h_e_mag"][1:], 1e-12)),
                label=r"$|H_e|$")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("magnitude (dB)")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "transfer.png")]


def _plot_ramsey(out_dir):
    fig, ax = plt.subplots(figsize=(6, 4))
    any_data = False
    for label in ("open", "feedback"):
        scan = _load(out_dir, f"ramsey_{label}.csv")
        env = _load(out_dir, f"envelope_{label}.csv")
        if scan is not None:
            ax.errorbar(scan["tau_r_s"] * 1e6, scan["p1_mean"], yerr=scan["p1_sem"],
                        fmt=".", ms=3, alpha=0.6, label=f"{label} $p_1$")
            any_data = True
        if env is not None:
            ax.plot(env["t_s"] * 1e6, 0.5 + 0.5 * env["chi"], lw=1,
                    label=f"{label} envelope")
            any_data = True
    if not any_data:
        plt.close(fig)
        return []
    ax.set_xlabel(r"probe delay ($\mu$s)")
    ax.set_ylabel(r"$p_1$")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "ramsey.png")]


def _plot_coherence_sweep(out_dir):
    data = _load(out_dir, "coherence_sweep.csv")
    if data is None:
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(data["duration_s"], np.atleast_1d(data["t2_open_s"]) * 1e6, "o-",
                label="open loop")
    ax.semilogx(data["duration_s"], np.atleast_1d(data["t2_feedback_s"]) * 1e6, "s-",
                label="feedback")
    ax.set_xlabel("averaging duration (s)")
    ax.set_ylabel(r"$T_2$ ($\mu$s)")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "coherence_sweep.png")]


def _plot_flux_sweep(out_dir):
    data = _load(out_dir, "flux_sweep.csv")
    if data is None:
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    d = data["sensitivity_hz_per_phi0"] / 1e9
    ax.plot(d, data["gamma_phi_open"] / 1e3, "o", label="open loop")
    ax.plot(d, data["gamma_phi_feedback"] / 1e3, "s", label="feedback")
    ax.set_xlabel(r"$|df/d\Phi|$ (GHz/$\Phi_0$)")
    ax.set_ylabel(r"$\Gamma_\phi$ (ms$^{-1}$)")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "flux_sweep.png")]


def _plot_rb(out_dir):
    fig, ax = plt.subplots(figsize=(6, 4))
    any_data = False
    for label, marker in (("off", "o"), ("on", "s")):
        data = _load(out_dir, f"rb_{label}.csv")
        if data is None:
            continue
        m = np.atleast_1d(data["m"])
        surv = np.atleast_1d(data["survival"])
        ax.plot(m, surv, marker, ms=3, alpha=0.4)
        lengths = np.unique(m)
        means = [surv[m == v].mean() for v in lengths]
        ax.plot(lengths, means, "-", label=f"feedback {label}")
        any_data = True
    if not any_data:
        plt.close(fig)
        return []
    ax.set_xlabel("sequence length m")
    ax.set_ylabel("survival probability")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "rb.png")]


_PLOTTERS = {
    "psd": _plot_psd,
    "closed-loop": _plot_closed_loop,
    "transfer": _plot_transfer,
    "ramsey": _plot_ramsey,
    "coherence-sweep": _plot_coherence_sweep,
    "flux-sweep": _plot_flux_sweep,
    "rb": _plot_rb,
}


def render(scenario: str, out_dir: str) -> list[str]:
    """Render the figures for one scenario; returns the PNG paths written."""
    plotter = _PLOTTERS.get(scenario)
    if plotter is None:
        raise ValueError(f"no plotter for scenario {scenario!r}")
    return plotter(out_dir)
