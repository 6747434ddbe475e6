"""Blind reaching with a population-vector cursor.

A recurrent excitatory/inhibitory network moves a cursor in the unit square
through the preferred directions of a control pool. Each trial holds the
cursor at the start disk, presents an afferent cue during the movement
phase, and pays a 400 ms binary reward window when the cursor reaches and
holds the goal disk. The network never observes the cursor position; the
cue only signals the trial phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import EngineParams, run_phase_hold, run_phase_move, run_phase_plain
from ..network import ReachingLayout, build_reaching_network
from ..samplers import NonFiniteSampleError

OUTCOME_SUCCESS = "success"
OUTCOME_TIMEOUT = "timeout"
OUTCOME_HOLD_FAILURE = "hold-failure"
OUTCOMES = (OUTCOME_SUCCESS, OUTCOME_TIMEOUT, OUTCOME_HOLD_FAILURE)


@dataclass(frozen=True)
class ReachingConfig:
    """Geometry, cue statistics, and sampler constants for the task.

    The start/goal disk geometry is configurable; defaults put both disks
    of radius 0.05 on the square's diagonal.
    """

    start: tuple = (0.25, 0.25)
    goal: tuple = (0.75, 0.75)
    start_radius: float = 0.05
    goal_radius: float = 0.05
    hold_ticks: int = 50
    timeout_ticks: int = 5000
    reward_ticks: int = 400
    tuning_sigma: float = 0.2
    jitter_sigma: float = 0.05
    max_rate_hz: float = 60.0
    background_hz: float = 2.0
    temperature: float = 0.1
    tau_e: float = 1.0
    a: float = 0.15
    b: float = 0.02
    prior_mu: float = 0.0
    prior_sigma: float = 2.0
    clip_step: float = 40.0
    theta_min: float = -2.0
    theta_max: float = 5.0
    stride: int = 10

    def __post_init__(self):
        for name in ("hold_ticks", "timeout_ticks", "reward_ticks", "stride"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("start_radius", "goal_radius", "tuning_sigma",
                     "max_rate_hz", "tau_e", "a", "b", "prior_sigma",
                     "clip_step"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.jitter_sigma < 0.0 or self.background_hz < 0.0:
            raise ValueError("jitter_sigma and background_hz must be nonnegative")
        if self.temperature < 0.0:
            raise ValueError("temperature must be nonnegative")
        if not self.theta_min <= self.theta_max:
            raise ValueError("theta_min must not exceed theta_max")


def cue_probabilities(centers, point, cfg: ReachingConfig) -> np.ndarray:
    """Per-tick afferent spike probabilities for a cue at ``point``.

    Each afferent fires at the Gaussian tuning value of the cue position
    around its center, plus background.
    """
    d2 = ((centers - np.asarray(point, dtype=np.float64)) ** 2).sum(axis=1)
    rate = cfg.max_rate_hz * np.exp(-d2 / (2.0 * cfg.tuning_sigma ** 2))
    return (rate + cfg.background_hz) * 1e-3


def background_probabilities(n_afferents: int, cfg: ReachingConfig) -> np.ndarray:
    """Per-tick afferent spike probabilities with no cue present."""
    return np.full(n_afferents, cfg.background_hz * 1e-3)


@dataclass
class TrialResult:
    outcome: str
    s_hold_ticks: int
    move_ticks: int
    g_hold_ticks: int
    total_ticks: int
    traces: dict | None = None

    @property
    def success(self) -> bool:
        return self.outcome == OUTCOME_SUCCESS


class ReachingSession:
    """One network plus the cue world and cursor state, run trial by trial."""

    def __init__(self, seed, cfg: ReachingConfig | None = None,
                 layout: ReachingLayout | None = None, *, learning: bool = True):
        self.cfg = cfg if cfg is not None else ReachingConfig()
        layout = layout if layout is not None else ReachingLayout()
        build_ss, cue_ss, net_ss, samp_ss, task_ss = \
            np.random.SeedSequence(seed).spawn(5)
        self.net, info = build_reaching_network(build_ss, layout)
        self.dirs = np.ascontiguousarray(info["preferred_directions"])
        self.c_idx = np.ascontiguousarray(info["control_pool"], dtype=np.int32)
        self.receivers = info["input_receivers"]
        cue_rng = np.random.default_rng(cue_ss)
        self.centers = cue_rng.random((layout.n_afferents, 3))
        self.cue_point = cue_rng.random(3)
        self.net_rng = np.random.default_rng(net_ss)
        self.samp_rng = np.random.default_rng(samp_ss)
        self.task_rng = np.random.default_rng(task_ss)
        self.n_exc = layout.n_exc
        cfg = self.cfg
        self.rt = EngineParams(
            mode="hamiltonian",
            dt_s=cfg.stride * 1e-3,
            stride=cfg.stride,
            n_plastic=self.net.theta.shape[0],
            a=cfg.a,
            b=cfg.b,
            tau_e=cfg.tau_e,
            multiplicative=True,
            prior_mu=cfg.prior_mu,
            prior_sigma=cfg.prior_sigma,
            clip_step=cfg.clip_step,
            theta_min=cfg.theta_min,
            theta_max=cfg.theta_max,
            plastic_on=learning,
        )
        self.cursor = np.array(cfg.start, dtype=np.float64)
        self.p_bg = background_probabilities(layout.n_afferents, self.cfg)
        self.counts = np.zeros(self.net.n_neurons, dtype=np.int64)

    def run_trial(self, record: bool = False) -> TrialResult:
        """One trial of the state machine; the cursor starts at S.

        Holding at S for the hold duration initiates the cued movement
        phase. Reaching the goal disk within the timeout and holding it
        pays r=1 during the end window; leaving either disk during its
        hold, or not reaching the goal in time, aborts into an unrewarded
        end window. The cursor resets on the next trial.
        """
        cfg = self.cfg
        net, rt = self.net, self.rt
        cursor = self.cursor
        cursor[:] = cfg.start
        net.elig[:] = 0.0
        T = cfg.temperature
        sx, sy = cfg.start
        gx, gy = cfg.goal
        jitter = self.task_rng.normal(0.0, cfg.jitter_sigma, 3)
        p_cue = cue_probabilities(self.centers, self.cue_point + jitter, cfg)
        traces = {} if record else None

        rec = np.empty((cfg.hold_ticks, 2)) if record else None
        s_ticks, stayed = run_phase_hold(
            net, rt, self.net_rng, self.samp_rng, self.p_bg, 0.0, T,
            self.counts, cfg.hold_ticks, cursor, self.dirs, self.c_idx,
            sx, sy, cfg.start_radius, cursor_rec=rec)
        if record:
            traces["s_hold"] = rec[:s_ticks].copy()
        move_ticks = g_ticks = 0
        if not stayed:
            outcome = OUTCOME_HOLD_FAILURE
        else:
            rec = np.empty((cfg.timeout_ticks, 2)) if record else None
            move_ticks, entered = run_phase_move(
                net, rt, self.net_rng, self.samp_rng, p_cue, T,
                self.counts, cfg.timeout_ticks, cursor, self.dirs,
                self.c_idx, gx, gy, cfg.goal_radius, cursor_rec=rec)
            if record:
                traces["move"] = rec[:move_ticks].copy()
            if not entered:
                outcome = OUTCOME_TIMEOUT
            else:
                rec = np.empty((cfg.hold_ticks, 2)) if record else None
                g_ticks, held = run_phase_hold(
                    net, rt, self.net_rng, self.samp_rng, p_cue, 0.0, T,
                    self.counts, cfg.hold_ticks, cursor, self.dirs,
                    self.c_idx, gx, gy, cfg.goal_radius, cursor_rec=rec)
                if record:
                    traces["g_hold"] = rec[:g_ticks].copy()
                outcome = OUTCOME_SUCCESS if held else OUTCOME_HOLD_FAILURE

        r_end = 1.0 if outcome == OUTCOME_SUCCESS else 0.0
        run_phase_plain(net, rt, self.net_rng, self.samp_rng, self.p_bg,
                        r_end, T, self.counts, cfg.reward_ticks)
        total = s_ticks + move_ticks + g_ticks + cfg.reward_ticks
        return TrialResult(outcome, s_ticks, move_ticks, g_ticks, total, traces)


def run_reaching_experiment(seed, duration_s: float = 1800.0, *,
                            learning: bool = True,
                            cfg: ReachingConfig | None = None,
                            layout: ReachingLayout | None = None) -> dict:
    """Run trials until the simulated clock passes ``duration_s`` seconds."""
    session = ReachingSession(seed, cfg, layout, learning=learning)
    budget = int(round(duration_s * 1e3))
    outcomes = []
    trial_ticks = []
    snaps = []
    used = 0
    while used < budget:
        res = session.run_trial()
        outcomes.append(res.outcome)
        trial_ticks.append(res.total_ticks)
        snaps.append(session.net.theta[:4].copy())
        used += res.total_ticks
        if not np.all(np.isfinite(session.net.theta)):
            raise NonFiniteSampleError(len(outcomes))
    success = np.array([o == OUTCOME_SUCCESS for o in outcomes])
    n = len(outcomes)
    tail = success[n // 2:]
    return {
        "seed": seed,
        "learning": learning,
        "outcomes": outcomes,
        "success": success,
        "trial_ticks": np.array(trial_ticks),
        "n_trials": n,
        "theta_snap": np.array(snaps) if snaps else np.zeros((0, 4)),
        "success_rate": float(success.mean()) if n else 0.0,
        "late_success_rate": float(tail.mean()) if tail.size else 0.0,
        "theta": session.net.theta.copy(),
    }


def measure_excitatory_rates(seed, duration_s: float = 60.0,
                             settle_s: float = 40.0,
                             cfg: ReachingConfig | None = None,
                             layout: ReachingLayout | None = None) -> np.ndarray:
    """Per-excitatory-neuron firing rates (Hz) with plasticity off.

    The network idles on background input; rates are measured after a
    settling period so the bias regulation has converged.
    """
    cfg = cfg if cfg is not None else ReachingConfig()
    session = ReachingSession(seed, cfg, layout, learning=False)
    settle_ticks = int(round(settle_s * 1e3))
    measure_ticks = int(round((duration_s - settle_s) * 1e3))
    if measure_ticks < 1:
        raise ValueError("duration_s must exceed settle_s")
    run_phase_plain(session.net, session.rt, session.net_rng,
                    session.samp_rng, session.p_bg, 0.0, cfg.temperature,
                    session.counts, settle_ticks)
    session.counts[:] = 0
    run_phase_plain(session.net, session.rt, session.net_rng,
                    session.samp_rng, session.p_bg, 0.0, cfg.temperature,
                    session.counts, measure_ticks)
    return session.counts[: session.n_exc] / (measure_ticks * 1e-3)
