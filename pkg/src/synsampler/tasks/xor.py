"""Exclusive-or task for a small spiking network under a cooling schedule.

Two Poisson input neurons encode the bits (80 Hz for 1, 3 Hz for 0). During
each 400 ms presentation the reward is recomputed every 5 ms from whether
the output neuron spiked in the window, compared against the XOR target.
Presentations are separated by a 100 ms silent delay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import EngineParams, run_phase_plain, run_xor_presentation
from ..network import build_layered_network
from ..samplers import NonFiniteSampleError, TemperatureSchedule, temperature_at

PATTERNS = ((0, 0), (0, 1), (1, 0), (1, 1))
TARGETS = (0, 1, 1, 0)


@dataclass(frozen=True)
class XorConfig:
    n_hidden: int = 10
    rate_high_hz: float = 80.0
    rate_low_hz: float = 3.0
    present_ticks: int = 400
    delay_ticks: int = 100
    stride: int = 5
    tau_e: float = 0.2
    a: float = 0.5
    b: float = 0.02
    prior_sigma: float = 2.0
    bias: float = -3.0
    theta_init_sigma: float = 1.0
    probe_rounds: int = 50
    optimal_high_hz: float = 100.0
    optimal_low_hz: float = 20.0

    def __post_init__(self):
        for name in ("n_hidden", "present_ticks", "delay_ticks", "stride",
                     "probe_rounds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("rate_high_hz", "rate_low_hz", "tau_e", "a", "b",
                     "prior_sigma", "theta_init_sigma"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.present_ticks % 5 != 0:
            raise ValueError("presentation length must be a whole number of"
                             " 5 ms reward windows")

    @property
    def n_synapses(self) -> int:
        return 2 * self.n_hidden + self.n_hidden

    @property
    def cycle_seconds(self) -> float:
        return (self.present_ticks + self.delay_ticks) * 1e-3


def pattern_probabilities(bits, cfg: XorConfig) -> np.ndarray:
    """Per-tick spike probabilities of the two input neurons for a pattern."""
    return np.array([
        (cfg.rate_high_hz if b else cfg.rate_low_hz) * 1e-3 for b in bits
    ])


def _build(cfg: XorConfig, init_rng) -> tuple:
    theta0 = init_rng.normal(0.0, cfg.theta_init_sigma, cfg.n_synapses)
    net = build_layered_network([2, cfg.n_hidden, 1], bias=cfg.bias,
                                theta_init=theta0)
    rt = EngineParams(
        mode="hamiltonian",
        dt_s=cfg.stride * 1e-3,
        stride=cfg.stride,
        n_plastic=net.theta.shape[0],
        a=cfg.a,
        b=cfg.b,
        tau_e=cfg.tau_e,
        prior_mu=0.0,
        prior_sigma=cfg.prior_sigma,
    )
    return net, rt


def probe_output_rates(net, rt, net_rng, samp_rng, cfg: XorConfig) -> np.ndarray:
    """Mean output rate in Hz per pattern with parameters frozen.

    Each pattern is presented ``probe_rounds`` times for the presentation
    duration, with silent gaps in between so the membrane state decays.
    """
    was_on = rt.plastic_on
    rt.plastic_on = False
    silent = np.zeros(2)
    counts = np.zeros(net.n_neurons, dtype=np.int64)
    out = net.n_neurons - 1
    rates = np.empty(4)
    probe_s = cfg.probe_rounds * cfg.present_ticks * 1e-3
    try:
        for k, bits in enumerate(PATTERNS):
            p_in = pattern_probabilities(bits, cfg)
            before = int(counts[out])
            for _ in range(cfg.probe_rounds):
                run_phase_plain(net, rt, net_rng, samp_rng, p_in, 0.0, 0.0,
                                counts, cfg.present_ticks)
                run_phase_plain(net, rt, net_rng, samp_rng, silent, 0.0, 0.0,
                                counts, cfg.delay_ticks)
            rates[k] = (int(counts[out]) - before) / probe_s
    finally:
        rt.plastic_on = was_on
    return rates


def is_optimal(rates, cfg: XorConfig) -> bool:
    """Whether probed rates separate the patterns in the XOR ordering."""
    rates = np.asarray(rates)
    true_ok = rates[1] > cfg.optimal_high_hz and rates[2] > cfg.optimal_high_hz
    false_ok = rates[0] < cfg.optimal_low_hz and rates[3] < cfg.optimal_low_hz
    return bool(true_ok and false_ok)


def run_xor_run(seed, schedule: TemperatureSchedule,
                n_presentations: int = 20000,
                cfg: XorConfig | None = None,
                record_every: int = 500) -> dict:
    """Train one network and probe it frozen at the end."""
    cfg = cfg if cfg is not None else XorConfig()
    init_ss, net_ss, samp_ss, pick_ss = np.random.SeedSequence(seed).spawn(4)
    net, rt = _build(cfg, np.random.default_rng(init_ss))
    net_rng = np.random.default_rng(net_ss)
    samp_rng = np.random.default_rng(samp_ss)
    picks = np.random.default_rng(pick_ss).integers(0, 4, size=n_presentations)

    p_pat = [pattern_probabilities(bits, cfg) for bits in PATTERNS]
    silent = np.zeros(2)
    counts = np.zeros(net.n_neurons, dtype=np.int64)
    rewards = np.empty(n_presentations)
    n_win = n_presentations // record_every
    snaps = np.zeros((n_win, 4))
    temps = np.zeros(n_win)

    for t in range(n_presentations):
        k = int(picks[t])
        net.elig[:] = 0.0
        T = temperature_at(schedule, t * cfg.cycle_seconds)
        reward_sum = run_xor_presentation(
            net, rt, net_rng, samp_rng, p_pat[k], TARGETS[k], T,
            counts, cfg.present_ticks)
        run_phase_plain(net, rt, net_rng, samp_rng, silent, 0.0, T,
                        counts, cfg.delay_ticks)
        rewards[t] = reward_sum / cfg.present_ticks
        if not np.all(np.isfinite(net.theta)):
            raise NonFiniteSampleError(t + 1)
        if (t + 1) % record_every == 0:
            snaps[(t + 1) // record_every - 1] = net.theta[:4]
            temps[(t + 1) // record_every - 1] = T

    rates = probe_output_rates(net, rt, net_rng, samp_rng, cfg)
    window_mean = rewards[: n_win * record_every].reshape(
        n_win, record_every).mean(axis=1)
    return {
        "seed": seed,
        "presentation": (np.arange(n_win) + 1) * record_every,
        "reward_mean": window_mean,
        "rewards": rewards,
        "theta_snap": snaps,
        "temperature": temps,
        "probe_rates": rates,
        "optimal": is_optimal(rates, cfg),
        "theta": net.theta.copy(),
    }


def run_xor_experiment(schedule: TemperatureSchedule, seeds,
                       n_presentations: int = 20000,
                       cfg: XorConfig | None = None) -> dict:
    """Run one seed per entry of ``seeds`` and report the optimal fraction."""
    runs = [run_xor_run(s, schedule, n_presentations, cfg) for s in seeds]
    flags = np.array([r["optimal"] for r in runs])
    return {
        "fraction_optimal": float(flags.mean()),
        "optimal_flags": flags,
        "probe_rates": np.array([r["probe_rates"] for r in runs]),
        "reward_curves": np.array([r["reward_mean"] for r in runs]),
    }
