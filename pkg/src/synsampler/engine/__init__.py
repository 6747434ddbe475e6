"""Simulation engine: twin backends behind one draw protocol.

The compiled extension (``_core``, built from Cython) and the pure numpy
module (``purepy``) export the same four chunk functions. One is selected at
import time: the extension when it built, numpy otherwise, overridable with
the ``SYNSAMPLER_BACKEND`` environment variable (``compiled``, ``python``,
or ``auto``).

Random numbers never come from inside a backend. The drivers here pre-draw
a block of uniforms (one row per tick: inputs first, then neurons) and a
block of normals (one row per sampler update) and hand both down, so both
backends consume identical streams and produce identical trajectories up to
documented exp() rounding. Chunk sizes are derived from fixed draw budgets,
making the chunking itself deterministic.
"""

from __future__ import annotations

import os

import numpy as np

from . import purepy

_env = os.environ.get("SYNSAMPLER_BACKEND", "auto").strip().lower()
if _env in ("", "auto"):
    try:
        from . import _core as _backend
    except ImportError:
        _backend = purepy
elif _env == "python":
    _backend = purepy
elif _env == "compiled":
    from . import _core as _backend
else:
    raise RuntimeError(
        f"SYNSAMPLER_BACKEND={_env!r} not recognized; use 'compiled', 'python' or 'auto'"
    )

BACKEND_NAME = _backend.BACKEND_NAME


def get_backend(name: str = "auto"):
    """Return a backend module by name; tests and the benchmark use this to
    pin one explicitly."""
    name = name.strip().lower()
    if name in ("", "auto"):
        return _backend
    if name == "python":
        return purepy
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


_MODE_CODES = {"langevin": 0, "hamiltonian": 1, "generalized": 2}

# Per-chunk draw budgets in doubles (~32 MB apiece).
_UNIFORM_BUDGET = 4_000_000
_NORMAL_BUDGET = 4_000_000


class EngineParams:
    """Mutable runtime bundle read by both backends on every chunk.

    ``samp_count`` is the tick counter toward the next sampler update; the
    drivers keep it consistent across chunk and phase boundaries so update
    cadence does not depend on how a run is sliced into phases.
    """

    __slots__ = (
        "plastic_on",
        "multiplicative",
        "elig_decay",
        "elig_decay_pow",
        "prior_mu",
        "prior_inv_sig2",
        "clip_step",
        "theta_min",
        "theta_max",
        "mode",
        "a",
        "b",
        "c",
        "beta",
        "stride",
        "dt_s",
        "samp_count",
        "noise_cols",
    )

    def __init__(
        self,
        *,
        mode: str,
        dt_s: float,
        stride: int,
        n_plastic: int,
        a: float = 0.0,
        b: float = 0.0,
        c: float = 0.0,
        beta: float = 0.0,
        tau_e: float = 0.2,
        tick_dt: float = 1e-3,
        multiplicative: bool = False,
        prior_mu: float = 0.0,
        prior_sigma: float = 0.0,
        clip_step: float = np.inf,
        theta_min: float = -np.inf,
        theta_max: float = np.inf,
        plastic_on: bool = True,
    ):
        if mode not in _MODE_CODES:
            raise ValueError(f"unknown sampler mode {mode!r}")
        if stride < 1:
            raise ValueError("stride must be at least 1")
        if dt_s <= 0.0:
            raise ValueError("sampler step size must be positive")
        if tau_e <= tick_dt:
            raise ValueError("eligibility time constant must exceed the tick")
        if not theta_min <= theta_max:
            raise ValueError("theta_min must not exceed theta_max")
        if clip_step <= 0.0:
            raise ValueError("clip_step must be positive")
        self.mode = _MODE_CODES[mode]
        self.dt_s = float(dt_s)
        self.stride = int(stride)
        self.a = float(a)
        self.b = float(b)
        self.c = float(c)
        self.beta = float(beta)
        self.elig_decay = 1.0 - tick_dt / tau_e
        # Repayment factor for eligibility decay skipped on silenced synapses
        # between consecutive parameter updates (multiplicative rule only).
        self.elig_decay_pow = self.elig_decay ** int(stride)
        self.multiplicative = bool(multiplicative)
        self.prior_mu = float(prior_mu)
        if prior_sigma > 0.0:
            self.prior_inv_sig2 = 1.0 / (float(prior_sigma) ** 2)
        else:
            self.prior_inv_sig2 = 0.0
        self.clip_step = float(clip_step)
        self.theta_min = float(theta_min)
        self.theta_max = float(theta_max)
        self.plastic_on = bool(plastic_on)
        self.samp_count = 0
        self.noise_cols = n_plastic * (2 if self.mode == 2 else 1)


def _chunk_ticks(rt: EngineParams, n_cols: int, remaining: int) -> int:
    cap = max(1, _UNIFORM_BUDGET // max(1, n_cols))
    if rt.plastic_on and rt.noise_cols > 0:
        rows = max(1, _NORMAL_BUDGET // rt.noise_cols)
        cap = min(cap, rows * rt.stride)
    return min(remaining, cap)


def _draws(rt, net, net_rng, samp_rng, m):
    n_cols = net.n_inputs + net.n_neurons
    U = net_rng.random((m, n_cols))
    if rt.plastic_on:
        n_steps = (rt.samp_count + m) // rt.stride
    else:
        n_steps = 0
    N = samp_rng.standard_normal((n_steps, rt.noise_cols))
    return U, N


def _advance_count(rt: EngineParams, ticks: int) -> None:
    if rt.plastic_on:
        rt.samp_count = (rt.samp_count + ticks) % rt.stride


def run_phase_plain(net, rt, net_rng, samp_rng, p_in, r, T, counts, n_ticks, backend=None):
    """Run ``n_ticks`` with constant input rates and constant reward."""
    be = backend if backend is not None else _backend
    p_in = np.ascontiguousarray(p_in, dtype=np.float64)
    n_cols = net.n_inputs + net.n_neurons
    done = 0
    while done < n_ticks:
        m = _chunk_ticks(rt, n_cols, n_ticks - done)
        U, N = _draws(rt, net, net_rng, samp_rng, m)
        be.chunk_plain(net, rt, U, N, p_in, float(r), float(T), rt.samp_count, counts)
        _advance_count(rt, m)
        done += m
    return n_ticks


def run_xor_presentation(net, rt, net_rng, samp_rng, p_in, target, T, counts, n_ticks, backend=None):
    """One stimulus presentation; returns the summed per-tick reward.

    The 5-tick reward window is phase-locked to the presentation start, so
    the whole presentation must fit in one draw chunk.
    """
    be = backend if backend is not None else _backend
    p_in = np.ascontiguousarray(p_in, dtype=np.float64)
    n_cols = net.n_inputs + net.n_neurons
    if n_ticks > _chunk_ticks(rt, n_cols, n_ticks):
        raise ValueError("presentation too long for a single draw chunk")
    U, N = _draws(rt, net, net_rng, samp_rng, n_ticks)
    _, reward_sum = be.chunk_xor(
        net, rt, U, N, p_in, int(target), float(T), rt.samp_count, counts
    )
    _advance_count(rt, n_ticks)
    return reward_sum


def run_phase_hold(
    net, rt, net_rng, samp_rng, p_in, r, T, counts, n_ticks,
    cursor, dirs, c_idx, cx, cy, radius, cursor_rec=None, backend=None,
):
    """Hold phase: ends early if the cursor leaves the disk.

    Returns (ticks_used, stayed).
    """
    be = backend if backend is not None else _backend
    p_in = np.ascontiguousarray(p_in, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    c_idx = np.ascontiguousarray(c_idx, dtype=np.int32)
    n_cols = net.n_inputs + net.n_neurons
    done = 0
    while done < n_ticks:
        m = _chunk_ticks(rt, n_cols, n_ticks - done)
        U, N = _draws(rt, net, net_rng, samp_rng, m)
        rec = None if cursor_rec is None else cursor_rec[done : done + m]
        t_used, stayed = be.chunk_hold(
            net, rt, U, N, p_in, float(r), float(T), rt.samp_count,
            cursor, dirs, c_idx, float(cx), float(cy), float(radius), counts, rec,
        )
        _advance_count(rt, t_used)
        done += t_used
        if not stayed:
            return done, False
    return done, True


def run_phase_move(
    net, rt, net_rng, samp_rng, p_in, T, counts, n_ticks,
    cursor, dirs, c_idx, gx, gy, radius, cursor_rec=None, backend=None,
):
    """Movement phase under zero reward: ends when the cursor reaches the
    goal disk. Returns (ticks_used, entered)."""
    be = backend if backend is not None else _backend
    p_in = np.ascontiguousarray(p_in, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    c_idx = np.ascontiguousarray(c_idx, dtype=np.int32)
    n_cols = net.n_inputs + net.n_neurons
    done = 0
    while done < n_ticks:
        m = _chunk_ticks(rt, n_cols, n_ticks - done)
        U, N = _draws(rt, net, net_rng, samp_rng, m)
        rec = None if cursor_rec is None else cursor_rec[done : done + m]
        t_used, entered = be.chunk_move(
            net, rt, U, N, p_in, float(T), rt.samp_count,
            cursor, dirs, c_idx, float(gx), float(gy), float(radius), counts, rec,
        )
        _advance_count(rt, t_used)
        done += t_used
        if entered:
            return done, True
    return done, False
