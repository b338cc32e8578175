"""Scenario runner: resolves INI-style configuration, orchestrates the
simulation modules, and writes CSV outputs plus a manifest of every value
that influenced the run.

All config quantities carry explicit unit suffixes (tau_us, f_max_hz, ...)
so the microsecond/nanosecond/GHz mix of the experiment cannot silently
leak into the wrong unit.
"""

from __future__ import annotations

import configparser
import math
import os

import numpy as np

from . import __version__
from .physics import (
    NoiseModel,
    TransmonSpec,
    derive_seed,
    flux_sensitivity,
    model_psd,
)
from .ramsey import RamseyConfig, sampling_noise_psd
from .loop import (
    LoopConfig,
    closed_loop_psd,
    run_closed_loop,
    run_ensemble_psd,
    transfer_e,
    transfer_p,
)
from .spectral import cross_psd_suppression, fit_power_law, split_shots_for_cross, welch
from .coherence import (
    dephasing_rate_from_psd,
    dephasing_sensitivity_fit,
    extract_t2,
    flux_noise_amplitude,
    simulate_interleaved_ramsey,
)
from .rb import NoiseWalker, RBConfig, simulate_rb

SCENARIOS = (
    "psd",
    "closed-loop",
    "transfer",
    "ramsey",
    "coherence-sweep",
    "flux-sweep",
    "rb",
)

# (default, python type); everything is stored flat as section.key
DEFAULTS: dict[str, dict[str, tuple] ] = {
    "noise": {
        "amplitude_hz2_per_hz": (27.3e6, float),
        "exponent_alpha": (0.8, float),
        "line_freq_hz": (60.0, float),
        "line_power_hz2": (0.0, float),
        "line_width_hz": (1.0, float),
    },
    "transmon": {
        "f_max_hz": (4.835e9, float),
        "flux_bias_phi0": (0.11, float),
    },
    "ramsey": {
        "tau_us": (1.25, float),
        "cycle_time_us": (3.5, float),
        "shots_per_estimate": (20, int),
        "measurement_phase_rad": (math.pi / 2, float),
        "init_fidelity": (1.0, float),
    },
    "loop": {
        "gain": (0.35, float),
        "update_stride": (20, int),
        "mode": ("real", str),
        "dac_bits": (16, int),
        "dac_full_scale_hz": (0.0, float),  # 0 -> 1/tau
    },
    "run": {
        "seed": (1, int),
        "n_estimates": (8192, int),
        "n_realizations": (8, int),
        "workers": (1, int),
    },
    "psd": {
        "n_segments": (16, int),
        "fit_f_lo_hz": (0.5, float),
        "fit_f_hi_hz": (5000.0, float),
    },
    "coherence": {
        "tau_max_us": (20.0, float),
        "n_tau": (41, int),
        "n_blocks": (64, int),
        "min_avg_blocks": (4, int),
        "detuning_khz": (300.0, float),
    },
    "fluxsweep": {
        "sqrt_a_phi_uphi0": (3.3, float),
        "n_bias": (11, int),
        "max_bias_phi0": (0.2, float),
        "t1_us": (30.0, float),
        "f_lower_hz": (0.04, float),
        "f_upper_hz": (1.0e5, float),
    },
    "rb": {
        "lengths": ("2,25,50,100,150,225,300", str),
        "n_randomizations": (7, int),
        "gate_time_ns": (40.0, float),
        "t1_us": (30.0, float),
        "t_phi1_us": (0.0, float),  # 0 -> infinite
        "t_phi2_us": (0.0, float),
        "repetitions": (1, int),
        "bias_phi0": (0.1813, float),  # the flux-sensitive 4.44 GHz point
        "cycle_stride": (64, int),
        "calibration_offset_khz": (0.0, float),
    },
}


class ConfigError(ValueError):
    """Invalid or inconsistent configuration values."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def load_config(config_path: str | None = None, overrides=()) -> dict:
    """Resolve defaults, an optional INI file, and ``section.key=value``
    override strings into a flat {(section, key): value} mapping."""
    resolved = {
        (sec, key): default
        for sec, keys in DEFAULTS.items()
        for key, (default, _t) in keys.items()
    }

    def assign(sec, key, raw):
        if sec not in DEFAULTS or key not in DEFAULTS[sec]:
            raise ConfigError([f"unknown configuration key [{sec}] {key}"])
        _default, typ = DEFAULTS[sec][key]
        try:
            resolved[(sec, key)] = typ(raw)
        except ValueError:
            raise ConfigError([f"cannot parse [{sec}] {key} = {raw!r} as {typ.__name__}"])

    if config_path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(config_path)
        if not read:
            raise ConfigError([f"cannot read config file {config_path}"])
        for sec in parser.sections():
            for key, raw in parser.items(sec):
                assign(sec, key, raw)

    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError([f"override must look like section.key=value: {item!r}"])
        dotted, raw = item.split("=", 1)
        sec, key = dotted.split(".", 1)
        assign(sec, key, raw)
    return resolved


def validate_config(config: dict) -> list[str]:
    """Structural and invariant checks over the resolved configuration.

    Returns a list of human-readable errors (empty when the config is ok);
    never runs any simulation.
    """
    errors = []
    c = lambda sec, key: config[(sec, key)]

    try:
        _build_noise(config)
    except ValueError as exc:
        errors.append(f"[noise] {exc}")

    tau = c("ramsey", "tau_us")
    cycle = c("ramsey", "cycle_time_us")
    if not 0 < tau < cycle:
        errors.append(
            f"[ramsey] need 0 < tau_us < cycle_time_us (got {tau} and {cycle})"
        )
    if c("ramsey", "shots_per_estimate") < 1:
        errors.append("[ramsey] shots_per_estimate must be >= 1")
    if not 0 <= c("ramsey", "init_fidelity") <= 1:
        errors.append("[ramsey] init_fidelity must be in [0, 1]")

    gain = c("loop", "gain")
    if gain < 0:
        errors.append("[loop] gain must be >= 0")
    elif gain >= 2:
        errors.append(
            f"[loop] gain = {gain} violates the accumulator stability bound gain < 2"
        )
    if c("loop", "mode") not in ("real", "fixed_point"):
        errors.append("[loop] mode must be 'real' or 'fixed_point'")
    if c("loop", "update_stride") < 1:
        errors.append("[loop] update_stride must be >= 1")
    if c("loop", "dac_bits") < 1:
        errors.append("[loop] dac_bits must be >= 1")

    if c("run", "n_estimates") < 2:
        errors.append("[run] n_estimates must be >= 2")
    if c("run", "n_realizations") < 1:
        errors.append("[run] n_realizations must be >= 1")
    if c("run", "workers") < 1:
        errors.append("[run] workers must be >= 1")

    if not 0 <= c("transmon", "flux_bias_phi0") < 0.5:
        errors.append("[transmon] flux_bias_phi0 must lie in [0, 0.5)")
    if not 0 <= c("rb", "bias_phi0") < 0.5:
        errors.append("[rb] bias_phi0 must lie in [0, 0.5)")

    try:
        lengths = _rb_lengths(config)
        if len(lengths) < 3:
            errors.append("[rb] need at least 3 sequence lengths")
        elif any(b <= a for a, b in zip(lengths, lengths[1:])):
            errors.append("[rb] lengths must be strictly increasing")
    except ValueError:
        errors.append(f"[rb] cannot parse lengths = {c('rb', 'lengths')!r}")

    if not 0 < c("fluxsweep", "f_lower_hz") < c("fluxsweep", "f_upper_hz"):
        errors.append("[fluxsweep] need 0 < f_lower_hz < f_upper_hz")
    return errors


def _build_noise(config) -> NoiseModel:
    lines = []
    if config[("noise", "line_power_hz2")] > 0:
        lines.append(
            (config[("noise", "line_freq_hz")], config[("noise", "line_power_hz2")])
        )
    return NoiseModel(
        amplitude_at_1hz=config[("noise", "amplitude_hz2_per_hz")],
        exponent_alpha=config[("noise", "exponent_alpha")],
        lines=lines,
        line_width_hz=config[("noise", "line_width_hz")],
    )


def _build_ramsey(config) -> RamseyConfig:
    return RamseyConfig(
        tau=config[("ramsey", "tau_us")] * 1e-6,
        cycle_time=config[("ramsey", "cycle_time_us")] * 1e-6,
        shots_per_estimate=config[("ramsey", "shots_per_estimate")],
        measurement_phase=config[("ramsey", "measurement_phase_rad")],
        init_fidelity=config[("ramsey", "init_fidelity")],
    )


def _build_loop(config, gain=None) -> LoopConfig:
    full_scale = config[("loop", "dac_full_scale_hz")]
    return LoopConfig(
        gain=config[("loop", "gain")] if gain is None else gain,
        update_stride=config[("loop", "update_stride")],
        mode=config[("loop", "mode")],
        dac_bits=config[("loop", "dac_bits")],
        dac_full_scale=full_scale if full_scale > 0 else None,
    )


def _rb_lengths(config) -> tuple[int, ...]:
    return tuple(int(tok) for tok in config[("rb", "lengths")].split(","))


def _write_manifest(out_dir, scenario, config, extra=None):
    lines = [f"scenario={scenario}", f"fluxlock_version={__version__}"]
    for (sec, key), value in sorted(config.items()):
        lines.append(f"{sec}.{key}={value}")
    for key, value in sorted((extra or {}).items()):
        lines.append(f"{key}={value}")
    with open(os.path.join(out_dir, "manifest.txt"), "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_csv(path, header, columns):
    columns = [np.asarray(col) for col in columns]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def run_scenario(
    name: str,
    config_path: str | None = None,
    overrides=(),
    out_dir: str = ".",
    seed: int | None = None,
    workers: int | None = None,
) -> list[str]:
    """Run one named scenario; returns the list of files written.

    Raises ConfigError for invalid configuration and ValueError for an
    unknown scenario name; numerical divergence propagates as
    LoopDivergenceError.
    """
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {SCENARIOS}")
    config = load_config(config_path, overrides)
    if seed is not None:
        config[("run", "seed")] = int(seed)
    if workers is not None:
        config[("run", "workers")] = int(workers)
    errors = validate_config(config)
    if errors:
        raise ConfigError(errors)

    os.makedirs(out_dir, exist_ok=True)
    runner = {
        "psd": _scenario_psd,
        "closed-loop": _scenario_closed_loop,
        "transfer": _scenario_transfer,
        "ramsey": _scenario_ramsey,
        "coherence-sweep": _scenario_coherence_sweep,
        "flux-sweep": _scenario_flux_sweep,
        "rb": _scenario_rb,
    }[name]
    files, extra = runner(config, out_dir)
    _write_manifest(out_dir, name, config, extra)
    return files + ["manifest.txt"]


def _scenario_psd(config, out_dir):
    """Open-loop estimator PSD, cross-correlation suppressed PSD, and the
    parametric model curve (the blue/green/dashed structure of the spectral
    density figure)."""
    model = _build_noise(config)
    rcfg = _build_ramsey(config)
    lcfg = _build_loop(config, gain=0.0)
    seed = config[("run", "seed")]
    n_est = config[("run", "n_estimates")]
    n_seg = config[("psd", "n_segments")]

    rec = run_closed_loop(model, rcfg, lcfg, n_est, seed, return_bits=True)
    est_open = welch(rec.error_signal, n_segments=n_seg, overlap_fraction=0.0,
                     window="boxcar")
    tr_a, tr_b = split_shots_for_cross(rec.bits, rcfg)
    est_cross = cross_psd_suppression(tr_a, tr_b, n_segments=n_seg)

    f_grid = est_open.frequencies[1:]
    s_model = model_psd(model, f_grid)
    s_est = sampling_noise_psd(rcfg)(f_grid)

    files = ["psd_open.csv", "psd_suppressed.csv", "psd_model.csv"]
    est_open.to_csv(os.path.join(out_dir, files[0]))
    est_cross.to_csv(os.path.join(out_dir, files[1]))
    _write_csv(
        os.path.join(out_dir, files[2]),
        ["f_hz", "model_psd_hz2_per_hz", "sampling_psd_hz2_per_hz"],
        [f_grid, s_model, s_est],
    )

    fit = fit_power_law(
        est_cross,
        (config[("psd", "fit_f_lo_hz")], config[("psd", "fit_f_hi_hz")]),
    )
    extra = {
        "fit_amplitude_at_1hz_hz2_per_hz": f"{fit.amplitude_at_1hz:.6g}",
        "fit_exponent": f"{fit.exponent:.6g}",
        "sampling_plateau_hz2_per_hz": f"{sampling_noise_psd(rcfg).level:.6g}",
    }
    return files, extra


def _scenario_closed_loop(config, out_dir):
    """Ensemble-averaged open/closed-loop PSDs next to the analytic
    transfer-function composition, plus one raw closed-loop record."""
    model = _build_noise(config)
    rcfg = _build_ramsey(config)
    lcfg = _build_loop(config)
    lcfg_open = _build_loop(config, gain=0.0)
    seed = config[("run", "seed")]
    n_est = config[("run", "n_estimates")]
    n_real = config[("run", "n_realizations")]
    workers = config[("run", "workers")]

    freqs, e_open, _c, t_open = run_ensemble_psd(
        model, rcfg, lcfg_open, n_est, n_real, seed, workers=workers
    )
    _f, e_closed, _c2, t_closed = run_ensemble_psd(
        model, rcfg, lcfg, n_est, n_real, derive_seed(seed, 9999), workers=workers
    )

    f_grid = freqs[1:]
    s_open_model = model_psd(model, f_grid)
    s_est = sampling_noise_psd(rcfg)(f_grid)
    he2 = np.abs(transfer_e(f_grid, lcfg, rcfg)) ** 2
    analytic_error = he2 * (s_open_model + s_est)
    analytic_true = closed_loop_psd(s_open_model, s_est, lcfg, rcfg, f_grid)

    files = ["closed_loop_psd.csv", "record.csv"]
    _write_csv(
        os.path.join(out_dir, files[0]),
        [
            "f_hz",
            "open_error_psd",
            "closed_error_psd",
            "open_true_psd",
            "closed_true_psd",
            "analytic_error_psd",
            "analytic_true_psd",
        ],
        [f_grid, e_open[1:], e_closed[1:], t_open[1:], t_closed[1:],
         analytic_error, analytic_true],
    )
    rec = run_closed_loop(model, rcfg, lcfg, min(n_est, 4096), derive_seed(seed, 7))
    rec.to_csv(os.path.join(out_dir, files[1]))
    return files, {"saturated": str(rec.saturated).lower()}


def _scenario_transfer(config, out_dir):
    rcfg = _build_ramsey(config)
    lcfg = _build_loop(config)
    nyquist = 1.0 / (2.0 * rcfg.estimate_period)
    f = np.linspace(0.0, nyquist, 513)
    hp = transfer_p(f, lcfg, rcfg)
    he = transfer_e(f, lcfg, rcfg)
    files = ["transfer.csv"]
    _write_csv(
        os.path.join(out_dir, files[0]),
        ["f_hz", "h_p_mag", "h_p_phase_rad", "h_e_mag", "h_e_phase_rad"],
        [f, np.abs(hp), np.angle(hp), np.abs(he), np.angle(he)],
    )
    return files, {"nyquist_hz": f"{nyquist:.6g}"}


def _scenario_ramsey(config, out_dir):
    """Interleaved probe Ramsey scans with the feedback off and on."""
    model = _build_noise(config)
    rcfg = _build_ramsey(config)
    lcfg = _build_loop(config)
    seed = config[("run", "seed")]
    n_tau = config[("coherence", "n_tau")]
    n_blocks = config[("coherence", "n_blocks")]
    tau_grid = np.linspace(0.0, config[("coherence", "tau_max_us")] * 1e-6, n_tau)
    detuning = config[("coherence", "detuning_khz")] * 1e3

    extra = {}
    files = []
    for label, fb in (("open", False), ("feedback", True)):
        result = simulate_interleaved_ramsey(
            model, rcfg, lcfg, tau_grid, n_blocks, derive_seed(seed, int(fb)),
            feedback_on=fb, detuning=detuning,
        )
        scan_file = f"ramsey_{label}.csv"
        env_file = f"envelope_{label}.csv"
        result.to_csv(os.path.join(out_dir, scan_file))
        env = result.envelope()
        env.to_csv(os.path.join(out_dir, env_file))
        files += [scan_file, env_file]
        try:
            extra[f"t2_{label}_s"] = f"{extract_t2(env):.6g}"
        except ValueError:
            extra[f"t2_{label}_s"] = "nan"
    return files, extra


def _scenario_coherence_sweep(config, out_dir):
    """T2 versus total averaging duration, feedback off and on (the
    cutoff-frequency dependence of the inferred coherence time)."""
    model = _build_noise(config)
    rcfg = _build_ramsey(config)
    lcfg = _build_loop(config)
    seed = config[("run", "seed")]
    n_tau = config[("coherence", "n_tau")]
    n_blocks = config[("coherence", "n_blocks")]
    min_avg = config[("coherence", "min_avg_blocks")]
    tau_grid = np.linspace(0.0, config[("coherence", "tau_max_us")] * 1e-6, n_tau)

    avgs = []
    k = min_avg
    while k <= n_blocks:
        avgs.append(k)
        k *= 2

    t2 = {}
    for label, fb in (("open", False), ("feedback", True)):
        result = simulate_interleaved_ramsey(
            model, rcfg, lcfg, tau_grid, n_blocks, derive_seed(seed, int(fb)),
            feedback_on=fb,
        )
        vals = []
        for k in avgs:
            try:
                vals.append(extract_t2(result.envelope(n_avg=k)))
            except ValueError:
                vals.append(math.nan)
        t2[label] = vals
        block_duration = result.block_duration

    files = ["coherence_sweep.csv"]
    durations = np.asarray(avgs) * block_duration
    _write_csv(
        os.path.join(out_dir, files[0]),
        ["duration_s", "t2_open_s", "t2_feedback_s"],
        [durations, t2["open"], t2["feedback"]],
    )
    return files, {}


def _scenario_flux_sweep(config, out_dir):
    """Dephasing rate versus flux sensitivity at several bias points, with
    the zero-intercept slope and the implied flux-noise amplitude."""
    spec = TransmonSpec(f_max=config[("transmon", "f_max_hz")])
    rcfg = _build_ramsey(config)
    lcfg = _build_loop(config)
    sqrt_a_phi = config[("fluxsweep", "sqrt_a_phi_uphi0")] * 1e-6
    a_phi = sqrt_a_phi**2
    t1 = config[("fluxsweep", "t1_us")] * 1e-6
    f_lo = config[("fluxsweep", "f_lower_hz")]
    f_hi = config[("fluxsweep", "f_upper_hz")]
    n_bias = config[("fluxsweep", "n_bias")]
    biases = np.linspace(0.0, config[("fluxsweep", "max_bias_phi0")], n_bias)

    s_est = sampling_noise_psd(rcfg)
    nyq = s_est.cutoff_hz

    rows = []
    for phi in biases:
        d = flux_sensitivity(spec, phi)
        a1 = 2.0 * a_phi * d * d  # unilateral S_ff at 1 Hz for S_PhiPhi = 2 A/f

        def s_open(f, a1=a1):
            return a1 / np.asarray(f, dtype=float)

        def s_closed(f, a1=a1):
            f_arr = np.asarray(f, dtype=float)
            inband = np.clip(f_arr, None, nyq * (1 - 1e-9))
            closed = closed_loop_psd(s_open(inband), s_est(inband), lcfg, rcfg, inband)
            return np.where(f_arr <= nyq, closed, s_open(f_arr))

        g_open = dephasing_rate_from_psd(s_open, f_lo, f_hi, t1=t1).gamma_phi
        g_fb = dephasing_rate_from_psd(s_closed, f_lo, f_hi, t1=t1).gamma_phi
        rows.append((phi, d, g_open, g_fb))

    rows = np.asarray(rows)
    k_open = dephasing_sensitivity_fit(rows[:, [1, 2]])
    k_fb = dephasing_sensitivity_fit(rows[:, [1, 3]])
    eta_r = math.log(f_hi / (2.0 * math.pi * f_lo))

    files = ["flux_sweep.csv"]
    _write_csv(
        os.path.join(out_dir, files[0]),
        ["flux_phi0", "sensitivity_hz_per_phi0", "gamma_phi_open", "gamma_phi_feedback"],
        [rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]],
    )
    extra = {
        "k_open_phi0": f"{k_open:.6g}",
        "k_feedback_phi0": f"{k_fb:.6g}",
        "eta_ramsey": f"{eta_r:.6g}",
        "sqrt_a_phi_recovered_phi0": f"{flux_noise_amplitude(k_open, eta_r):.6g}",
        "sqrt_a_phi_injected_phi0": f"{sqrt_a_phi:.6g}",
    }
    return files, extra


def _scenario_rb(config, out_dir):
    """Randomized benchmarking with the feedback off and on at a
    flux-sensitive bias, optionally repeated to track gate-error drift."""
    spec = TransmonSpec(f_max=config[("transmon", "f_max_hz")])
    rcfg = _build_ramsey(config)
    lcfg = _build_loop(config)
    base_model = _build_noise(config)
    seed = config[("run", "seed")]

    # rescale the calibrated noise amplitude to the RB bias point
    d_ref = flux_sensitivity(spec, config[("transmon", "flux_bias_phi0")])
    d_rb = flux_sensitivity(spec, config[("rb", "bias_phi0")])
    scale = (d_rb / d_ref) ** 2 if d_ref > 0 else 1.0
    model = NoiseModel(
        amplitude_at_1hz=base_model.amplitude_at_1hz * scale,
        exponent_alpha=base_model.exponent_alpha,
        lines=base_model.lines,
        line_width_hz=base_model.line_width_hz,
    )

    t_phi1 = config[("rb", "t_phi1_us")] * 1e-6
    t_phi2 = config[("rb", "t_phi2_us")] * 1e-6
    reps = config[("rb", "repetitions")]
    lengths = _rb_lengths(config)

    files = []
    extra = {"noise_amplitude_scale": f"{scale:.6g}"}
    rep_errors = {}
    for label, fb in (("off", False), ("on", True)):
        cfg = RBConfig(
            sequence_lengths=lengths,
            n_randomizations=config[("rb", "n_randomizations")],
            gate_time=config[("rb", "gate_time_ns")] * 1e-9,
            t1=config[("rb", "t1_us")] * 1e-6,
            t_phi1=t_phi1 if t_phi1 > 0 else math.inf,
            t_phi2=t_phi2 if t_phi2 > 0 else math.inf,
            feedback_on=fb,
        )
        n_cycles = reps * len(lengths) * cfg.n_randomizations
        walker = NoiseWalker(
            model, rcfg, lcfg, n_cycles, derive_seed(seed, 100 + int(fb)),
            feedback_on=fb, cycle_stride=config[("rb", "cycle_stride")],
            offset=config[("rb", "calibration_offset_khz")] * 1e3,
        )
        errors = []
        for rep in range(reps):
            result = simulate_rb(
                cfg, None, rcfg, lcfg,
                seed=derive_seed(seed, 200 + 2 * rep + int(fb)),
                walker=walker,
            )
            errors.append(result.fitted_error_per_gate)
            if rep == 0:
                fname = f"rb_{label}.csv"
                result.to_csv(os.path.join(out_dir, fname))
                files.append(fname)
                fit_name = f"rb_fit_{label}.txt"
                with open(os.path.join(out_dir, fit_name), "w", newline="") as fh:
                    fh.write(
                        "{\n"
                        f'  "error": {result.fitted_error_per_gate:.12g},\n'
                        f'  "ci_low": {result.confidence_68[0]:.12g},\n'
                        f'  "ci_high": {result.confidence_68[1]:.12g}\n'
                        "}\n"
                    )
                files.append(fit_name)
                extra[f"error_per_gate_{label}"] = f"{result.fitted_error_per_gate:.6g}"
        rep_errors[label] = errors

    if reps > 1:
        fname = "rb_repeats.csv"
        _write_csv(
            os.path.join(out_dir, fname),
            ["repetition", "error_off", "error_on"],
            [np.arange(reps), rep_errors["off"], rep_errors["on"]],
        )
        files.append(fname)
        for label in ("off", "on"):
            lo, hi = np.percentile(rep_errors[label], [16.0, 84.0])
            extra[f"repeat_ci_low_{label}"] = f"{lo:.6g}"
            extra[f"repeat_ci_high_{label}"] = f"{hi:.6g}"
    return files, extra
