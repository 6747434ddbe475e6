"""Sigmoid emulation: a single spiking neuron learns to match a target rate.

Four pools of Poisson inputs encode a vector x in [0,1]^4. After each 300 ms
presentation the neuron's normalized spike count is compared with the target
sigmoid value and the network is rewarded for 10 ms with r = 1 - |f1 - f2|,
followed by a silent delay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import EngineParams, run_phase_plain
from ..network import build_layered_network
from ..samplers import NonFiniteSampleError

TARGET_WEIGHTS = np.array([4.0, 3.0, -3.0, -6.0])
TARGET_BIAS = 1.0


def target_output(x):
    """Target rate f1 for pattern(s) x: the sigmoid of the fixed affine map."""
    s = np.asarray(x, dtype=np.float64) @ TARGET_WEIGHTS + TARGET_BIAS
    return 1.0 / (1.0 + np.exp(-s))


@dataclass(frozen=True)
class SigmoidConfig:
    """Constants for the sigmoid emulation task.

    The momentum arm runs with coupling ``a`` and friction ``b`` (time
    constant 1/b = 10 s). The overdamped comparison arm shares the base
    drift rate ``a`` unless ``beta`` overrides it; the momentum arm then
    carries its 1/b integration gain, which is the effect the comparison
    probes. Gradients reach the parameters only during the brief reward
    window, so both arms need no prior to balance against (``prior_sigma``
    of 0 disables the pull). ``theta_min`` and ``theta_max`` box the
    parameters when finite; the defaults leave them free, since clamping
    also walls off the large-weight solutions this task rewards.
    """

    n_patterns: int = 20
    n_candidates: int = 2000
    pool_size: int = 20
    max_rate_hz: float = 60.0
    present_ticks: int = 300
    reward_ticks: int = 10
    delay_ticks: int = 400
    stride: int = 10
    tau_e: float = 0.2
    a: float = 2.0
    b: float = 0.1
    beta: float | None = None
    temperature: float = 1e-3
    prior_sigma: float = 0.0
    theta_min: float = -np.inf
    theta_max: float = np.inf
    bias: float = -3.0
    theta_init_sigma: float = 0.5
    record_every: int = 100

    def __post_init__(self):
        if not 2 <= self.n_patterns <= self.n_candidates:
            raise ValueError("need n_patterns <= n_candidates and at least 2")
        for name in ("pool_size", "present_ticks", "reward_ticks",
                     "delay_ticks", "stride", "record_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("max_rate_hz", "tau_e", "a", "b"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.temperature < 0.0 or self.prior_sigma < 0.0:
            raise ValueError("temperature and prior_sigma must be nonnegative")
        if self.beta is not None and self.beta <= 0.0:
            raise ValueError("beta must be positive when given")
        if not self.theta_min < self.theta_max:
            raise ValueError("theta bounds must be a nonempty interval")

    @property
    def cycle_seconds(self) -> float:
        return (self.present_ticks + self.reward_ticks + self.delay_ticks) * 1e-3

    @property
    def n_inputs(self) -> int:
        return 4 * self.pool_size

    @property
    def langevin_beta(self) -> float:
        return self.a if self.beta is None else self.beta


def make_patterns(rng, cfg: SigmoidConfig):
    """Draw candidate vectors and keep a subset spread along the target axis.

    Candidates are uniform in [0,1]^4; the kept patterns are the ones whose
    weighted sums lie nearest to evenly spaced points across the observed
    range, so the pattern set covers the target sigmoid from both tails.
    Returns (patterns, targets) sorted by weighted sum.
    """
    x = rng.random((cfg.n_candidates, 4))
    s = x @ TARGET_WEIGHTS + TARGET_BIAS
    centers = np.linspace(s.min(), s.max(), cfg.n_patterns)
    dist = np.abs(s[None, :] - centers[:, None])
    chosen = []
    for row in dist:
        row[chosen] = np.inf
        chosen.append(int(np.argmin(row)))
    idx = np.array(sorted(chosen, key=s.__getitem__))
    return x[idx], 1.0 / (1.0 + np.exp(-s[idx]))


def input_probabilities(x, cfg: SigmoidConfig) -> np.ndarray:
    """Per-tick spike probabilities for the four input pools encoding x."""
    rates = np.repeat(np.asarray(x, dtype=np.float64), cfg.pool_size)
    return rates * cfg.max_rate_hz * 1e-3


def _runtime(cfg: SigmoidConfig, mode: str, n_plastic: int) -> EngineParams:
    common = dict(
        dt_s=cfg.stride * 1e-3,
        stride=cfg.stride,
        n_plastic=n_plastic,
        tau_e=cfg.tau_e,
        prior_mu=0.0,
        prior_sigma=cfg.prior_sigma,
        theta_min=cfg.theta_min,
        theta_max=cfg.theta_max,
    )
    if mode == "hamiltonian":
        return EngineParams(mode="hamiltonian", a=cfg.a, b=cfg.b, **common)
    if mode == "langevin":
        return EngineParams(mode="langevin", beta=cfg.langevin_beta, **common)
    raise ValueError(f"unknown mode {mode!r}; expected hamiltonian or langevin")


def run_sigmoid_experiment(mode: str, seed, n_presentations: int = 5000,
                           cfg: SigmoidConfig | None = None) -> dict:
    """Train one network for ``n_presentations`` presentation cycles.

    Returns per-window mean rewards (window length ``cfg.record_every``),
    the raw per-presentation rewards, and the final parameter vector.
    """
    cfg = cfg if cfg is not None else SigmoidConfig()
    pat_ss, init_ss, net_ss, samp_ss, pick_ss = np.random.SeedSequence(seed).spawn(5)
    patterns, targets = make_patterns(np.random.default_rng(pat_ss), cfg)
    theta0 = np.random.default_rng(init_ss).normal(
        0.0, cfg.theta_init_sigma, cfg.n_inputs)
    net = build_layered_network([cfg.n_inputs, 1], bias=cfg.bias, theta_init=theta0)
    rt = _runtime(cfg, mode, net.theta.shape[0])
    net_rng = np.random.default_rng(net_ss)
    samp_rng = np.random.default_rng(samp_ss)
    picks = np.random.default_rng(pick_ss).integers(
        0, cfg.n_patterns, size=n_presentations)

    p_pat = [input_probabilities(patterns[k], cfg) for k in range(cfg.n_patterns)]
    silent = np.zeros(cfg.n_inputs)
    counts = np.zeros(net.n_neurons, dtype=np.int64)
    # Normalization uses the refractory ceiling: at most one spike per 5 ms.
    max_count = cfg.present_ticks // int(net.tref_ticks[0])
    T = cfg.temperature
    rewards = np.empty(n_presentations)
    n_win = n_presentations // cfg.record_every
    snaps = np.zeros((n_win, 4))

    for t in range(n_presentations):
        k = int(picks[t])
        net.elig[:] = 0.0
        before = int(counts[0])
        run_phase_plain(net, rt, net_rng, samp_rng, p_pat[k], 0.0, T,
                        counts, cfg.present_ticks)
        f2 = (int(counts[0]) - before) / max_count
        r = 1.0 - abs(float(targets[k]) - f2)
        run_phase_plain(net, rt, net_rng, samp_rng, silent, r, T,
                        counts, cfg.reward_ticks)
        run_phase_plain(net, rt, net_rng, samp_rng, silent, 0.0, T,
                        counts, cfg.delay_ticks)
        rewards[t] = r
        if not np.all(np.isfinite(net.theta)):
            raise NonFiniteSampleError(t + 1)
        if (t + 1) % cfg.record_every == 0:
            snaps[(t + 1) // cfg.record_every - 1] = net.theta[:4]

    window_mean = rewards[: n_win * cfg.record_every].reshape(
        n_win, cfg.record_every).mean(axis=1)
    return {
        "mode": mode,
        "seed": seed,
        "presentation": (np.arange(n_win) + 1) * cfg.record_every,
        "reward_mean": window_mean,
        "rewards": rewards,
        "theta_snap": snaps,
        "final_reward": float(window_mean[-1]) if n_win else float(rewards.mean()),
        "theta": net.theta.copy(),
    }
