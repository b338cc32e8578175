"""Monte Carlo single-qubit randomized benchmarking under quasi-static
detuning noise and relaxation, with optional interleaved feedback
stabilization, plus the analytic decoherence limit on the gate error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .physics import NoiseModel, derive_seed, synthesize_trace
from .ramsey import RamseyConfig, invert_p1
from .loop import LoopConfig

__all__ = [
    "RBConfig",
    "RBResult",
    "NoiseWalker",
    "clifford_group",
    "simulate_rb",
    "fit_rb",
    "coherence_limit",
]


@dataclass
class RBConfig:
    sequence_lengths: tuple[int, ...] = (2, 25, 50, 100, 150, 225, 300)
    n_randomizations: int = 7
    gate_time: float = 40e-9  # s
    t1: float = 30e-6
    t_phi1: float = math.inf
    t_phi2: float = math.inf
    feedback_on: bool = False
    depolarizing_p: float = 0.0  # extra per-gate depolarizing probability

    def __post_init__(self):
        lengths = tuple(int(m) for m in self.sequence_lengths)
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ValueError("sequence_lengths must be strictly increasing")
        if min(lengths) < 1:
            raise ValueError("sequence lengths must be >= 1")
        self.sequence_lengths = lengths
        if self.gate_time <= 0 or self.t1 <= 0 or self.t_phi1 <= 0 or self.t_phi2 <= 0:
            raise ValueError("times must be positive")
        if not 0.0 <= self.depolarizing_p < 1.0:
            raise ValueError("depolarizing_p must be in [0, 1)")


@dataclass
class RBResult:
    sequence_lengths: tuple[int, ...]
    survival: np.ndarray  # (n_lengths, n_randomizations)
    fitted_error_per_gate: float = math.nan
    confidence_68: tuple[float, float] = (math.nan, math.nan)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("m,randomization_id,survival\n")
            for i, m in enumerate(self.sequence_lengths):
                for r in range(self.survival.shape[1]):
                    fh.write(f"{m},{r},{self.survival[i, r]:.12g}\n")


_CLIFFORDS: np.ndarray | None = None


def clifford_group() -> np.ndarray:
    """The 24 single-qubit Clifford unitaries, canonicalized up to global
    phase, as an array of shape (24, 2, 2).

    Generated by closing {H, S} under multiplication; the identity is
    element 0.
    """
    global _CLIFFORDS
    if _CLIFFORDS is not None:
        return _CLIFFORDS

    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)

    def canonical(u):
        flat = u.ravel()
        pivot = flat[np.argmax(np.abs(flat) > 1e-8)]
        uc = u * (abs(pivot) / pivot)
        return uc, tuple(np.round(uc.ravel(), 8).view(float))

    elements = {}
    ident, key = canonical(np.eye(2, dtype=complex))
    elements[key] = ident
    frontier = [ident]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                cand, key = canonical(g @ u)
                if key not in elements:
                    elements[key] = cand
                    nxt.append(cand)
        frontier = nxt
    group = list(elements.values())
    assert len(group) == 24, f"Clifford closure produced {len(group)} elements"
    # identity first, deterministic order for the rest
    group.sort(key=lambda u: (round(abs(np.trace(u)), 8), tuple(np.round(u.ravel(), 8).view(float))))
    group.reverse()
    _CLIFFORDS = np.array(group)
    assert np.allclose(_CLIFFORDS[0], np.eye(2))
    return _CLIFFORDS


def _recovery_indices(u_tot: np.ndarray) -> np.ndarray:
    """Index of the group element proportional to each batched inverse."""
    cliffords = clifford_group()
    overlaps = np.abs(np.einsum("kac,bca->kb", cliffords, u_tot))
    return np.argmax(overlaps, axis=0)


class NoiseWalker:
    """Sequential source of quasi-static detunings for RB sequences.

    Holds a long noise trace sampled at the estimate period T_N and, when
    the feedback is on, runs one frequency estimate (N Bernoulli shots plus
    accumulator update) before each sequence so the detuning handed out is
    the stabilized residual.  One walker can span many RB repetitions,
    preserving the slow drift between them.
    """

    def __init__(
        self,
        model: NoiseModel,
        rcfg: RamseyConfig,
        lcfg: LoopConfig,
        n_cycles: int,
        seed: int,
        feedback_on: bool,
        cycle_stride: int = 64,
        offset: float = 0.0,
    ):
        self.rcfg = rcfg
        self.lcfg = lcfg
        self.feedback_on = feedback_on
        self.cycle_stride = cycle_stride
        self.offset = offset  # static miscalibration, Hz; drift sits on top
        n_trace = n_cycles * cycle_stride + 2
        self.trace = synthesize_trace(
            model, n_trace, rcfg.estimate_period, seed=derive_seed(seed, 0)
        )
        self.rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, 1)))
        self.pos = 0
        self.p = 0.0
        self.remaining = n_cycles

    def next_delta(self) -> float:
        """Detuning for the next sequence; advances the walker one cycle."""
        values = self.trace.values
        if self.remaining <= 0:
            raise IndexError("noise walker exhausted: increase n_cycles")
        self.remaining -= 1
        rcfg = self.rcfg
        if self.feedback_on:
            intrinsic = values[self.pos] + self.offset
            delta_est = -(intrinsic + self.p)
            prob = 0.5 + 0.5 * rcfg.init_fidelity * math.cos(
                2.0 * math.pi * delta_est * rcfg.tau - rcfg.measurement_phase
            )
            bits = self.rng.random(rcfg.shots_per_estimate) < prob
            self.p += self.lcfg.gain * invert_p1(float(bits.mean()), rcfg)
        delta = values[self.pos + 1] + self.offset + self.p
        self.pos += self.cycle_stride
        return float(delta)


def _evolve_batch(
    gate_idx: np.ndarray,  # (B, m) Clifford indices
    deltas: np.ndarray,  # (B,) quasi-static detunings, Hz
    cfg: RBConfig,
) -> np.ndarray:
    """Ground-state survival for a batch of sequences of equal length.

    Each gate is the ideal Clifford composed with a z rotation by
    2 pi delta t_gate, followed by amplitude damping, exponential pure
    dephasing, and optional depolarizing.  The recovery gate is the exact
    group inverse of the ideal sequence.
    """
    cliffords = clifford_group()
    n_batch, m = gate_idx.shape

    u_tot = np.broadcast_to(np.eye(2, dtype=complex), (n_batch, 2, 2)).copy()
    for g in range(m):
        u_tot = np.matmul(cliffords[gate_idx[:, g]], u_tot)
    recovery = _recovery_indices(u_tot)
    all_idx = np.concatenate([gate_idx, recovery[:, None]], axis=1)

    theta = 2.0 * np.pi * deltas * cfg.gate_time
    rz = np.stack(
        [np.exp(-0.5j * theta), np.exp(0.5j * theta)], axis=1
    )  # (B, 2) diagonal

    gamma = 1.0 - math.exp(-cfg.gate_time / cfg.t1)
    sq = math.sqrt(1.0 - gamma)
    deph = math.exp(-cfg.gate_time / cfg.t_phi1) if math.isfinite(cfg.t_phi1) else 1.0
    dep_p = cfg.depolarizing_p

    rho = np.zeros((n_batch, 2, 2), dtype=complex)
    rho[:, 0, 0] = 1.0
    for g in range(m + 1):
        u = cliffords[all_idx[:, g]] * rz[:, :, None]
        rho = np.matmul(u, np.matmul(rho, u.conj().transpose(0, 2, 1)))
        # amplitude damping toward |0>
        r11 = rho[:, 1, 1].copy()
        rho[:, 0, 0] += gamma * r11
        rho[:, 1, 1] = (1.0 - gamma) * r11
        rho[:, 0, 1] *= sq * deph
        rho[:, 1, 0] *= sq * deph
        if dep_p > 0.0:
            rho *= 1.0 - dep_p
            rho[:, 0, 0] += 0.5 * dep_p
            rho[:, 1, 1] += 0.5 * dep_p
    return np.real(rho[:, 0, 0])


def simulate_rb(
    cfg: RBConfig,
    model: NoiseModel | None,
    rcfg: RamseyConfig | None = None,
    lcfg: LoopConfig | None = None,
    seed: int = 0,
    walker: NoiseWalker | None = None,
    n_bootstrap: int = 200,
) -> RBResult:
    """Run one randomized-benchmarking experiment.

    Detunings are quasi-static per sequence, drawn from an evolving noise
    trace (or zero if ``model`` is None); with ``cfg.feedback_on`` the
    walker interleaves a frequency estimate before every sequence so the
    residual, not the raw drift, rotates the qubit.  Pass an existing
    ``walker`` to continue the same noise history across repetitions.
    """
    rcfg = rcfg or RamseyConfig()
    lcfg = lcfg or LoopConfig()
    rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, 2)))

    n_cycles = len(cfg.sequence_lengths) * cfg.n_randomizations
    if walker is None and model is not None:
        walker = NoiseWalker(
            model, rcfg, lcfg, n_cycles, seed, feedback_on=cfg.feedback_on
        )

    survival = np.empty((len(cfg.sequence_lengths), cfg.n_randomizations))
    for i, m in enumerate(cfg.sequence_lengths):
        gate_idx = rng.integers(0, 24, size=(cfg.n_randomizations, m))
        if walker is not None:
            deltas = np.array([walker.next_delta() for _ in range(cfg.n_randomizations)])
        else:
            deltas = np.zeros(cfg.n_randomizations)
        survival[i] = _evolve_batch(gate_idx, deltas, cfg)

    result = RBResult(sequence_lengths=cfg.sequence_lengths, survival=survival)
    if len(cfg.sequence_lengths) >= 3:
        err, ci = fit_rb(result, n_bootstrap=n_bootstrap, rng=rng)
        result.fitted_error_per_gate = err
        result.confidence_68 = ci
    return result


def _fit_decay(lengths: np.ndarray, p1: np.ndarray) -> float:
    """Least-squares A r^m + B; returns the error per gate (1 - r) / 2."""

    def model_fn(m, a, b, r):
        return a * np.power(r, m) + b

    p0 = [max(p1[0] - p1[-1], 0.1), min(p1[-1], 0.9), 0.999]
    bounds = ([0.0, 0.0, 0.5], [1.0, 1.0, 1.0])
    popt, _ = curve_fit(model_fn, lengths, p1, p0=p0, bounds=bounds, maxfev=20000)
    return (1.0 - popt[2]) / 2.0


def fit_rb(result: RBResult, n_bootstrap: int = 200, rng=None):
    """Error per gate from the exponential fit, with a 68% confidence
    interval from a nonparametric bootstrap over randomizations."""
    if len(result.sequence_lengths) < 3:
        raise ValueError("need at least 3 sequence lengths to fit")
    lengths = np.asarray(result.sequence_lengths, dtype=float)
    rng = rng or np.random.default_rng(0)

    err = _fit_decay(lengths, result.survival.mean(axis=1))

    n_rand = result.survival.shape[1]
    boot = []
    for _ in range(n_bootstrap):
        pick = rng.integers(0, n_rand, size=n_rand)
        try:
            boot.append(_fit_decay(lengths, result.survival[:, pick].mean(axis=1)))
        except RuntimeError:
            continue  # non-convergent resample, skip
    if boot:
        lo, hi = np.percentile(boot, [16.0, 84.0])
    else:
        lo = hi = math.nan
    return float(err), (float(lo), float(hi))


def coherence_limit(
    gate_time: float,
    t1: float,
    t_phi1: float = math.inf,
    t_phi2: float = math.inf,
) -> float:
    """Decoherence-limited error probability per gate:
    t/(3 T1) + t/(3 T_phi1) + (1/3)(t/T_phi2)^2."""
    if gate_time <= 0 or t1 <= 0 or t_phi1 <= 0 or t_phi2 <= 0:
        raise ValueError("times must be positive")
    eps = gate_time / (3.0 * t1)
    if math.isfinite(t_phi1):
        eps += gate_time / (3.0 * t_phi1)
    if math.isfinite(t_phi2):
        eps += (gate_time / t_phi2) ** 2 / 3.0
    return eps
