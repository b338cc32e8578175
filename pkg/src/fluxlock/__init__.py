"""fluxlock: closed-loop qubit-frequency stabilization toolkit.

Simulates a flux-tunable qubit in 1/f^alpha frequency noise, Ramsey-based
frequency estimation, an accumulator feedback loop (real-valued or bit-exact
fixed point), and the downstream metrics: noise spectra, coherence decay, and
randomized benchmarking.
"""

__version__ = "0.1.0"

from .physics import (
    NoiseModel,
    TimeTrace,
    TransmonSpec,
    derive_seed,
    flux_noise_to_frequency_noise,
    flux_sensitivity,
    frequency_at_flux,
    model_psd,
    synthesize_trace,
)
from .ramsey import (
    RamseyConfig,
    ShotRecord,
    estimate_frequency,
    invert_p1,
    ramsey_p1,
    sampling_noise_psd,
    virtual_reset,
)
from .loop import (
    ClosedLoopRecord,
    LoopConfig,
    LoopDivergenceError,
    closed_loop_psd,
    run_closed_loop,
    run_ensemble_psd,
    transfer_e,
    transfer_p,
)
from .spectral import (
    SpectrumEstimate,
    cross_psd_suppression,
    fit_power_law,
    periodogram,
    welch,
)
from .coherence import (
    DecayEnvelope,
    dephasing_rate_from_psd,
    extract_t2,
    flux_noise_amplitude,
    ramsey_envelope,
    simulate_interleaved_ramsey,
)
from .rb import RBConfig, RBResult, clifford_group, coherence_limit, simulate_rb

__all__ = [
    "__version__",
    "NoiseModel",
    "TimeTrace",
    "TransmonSpec",
    "derive_seed",
    "model_psd",
    "synthesize_trace",
    "frequency_at_flux",
    "flux_sensitivity",
    "flux_noise_to_frequency_noise",
    "RamseyConfig",
    "ShotRecord",
    "ramsey_p1",
    "invert_p1",
    "virtual_reset",
    "estimate_frequency",
    "sampling_noise_psd",
    "LoopConfig",
    "LoopDivergenceError",
    "ClosedLoopRecord",
    "run_closed_loop",
    "run_ensemble_psd",
    "transfer_p",
    "transfer_e",
    "closed_loop_psd",
    "SpectrumEstimate",
    "periodogram",
    "welch",
    "cross_psd_suppression",
    "fit_power_law",
    "DecayEnvelope",
    "ramsey_envelope",
    "extract_t2",
    "simulate_interleaved_ramsey",
    "dephasing_rate_from_psd",
    "flux_noise_amplitude",
    "RBConfig",
    "RBResult",
    "clifford_group",
    "simulate_rb",
    "coherence_limit",
]
