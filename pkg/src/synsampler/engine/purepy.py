"""Pure numpy simulation backend.

Each chunk function advances the network over a block of ticks using
pre-drawn random numbers (see the driver in ``engine.__init__`` for the
draw protocol). The compiled backend implements the same functions with
identical arithmetic, term by term; keep the two in lockstep when editing.

Accumulation detail that matters for cross-backend agreement: synaptic
input sums are built in their own zeroed buffers via ``np.bincount`` (which
adds sequentially in array order) and only then combined with the bias, so
the float rounding sequence matches the C loops exactly.

Multiplicative eligibility exploits the weight mapping's hard zeros: a
silenced synapse (w = 0) receives no trace increments, so its eligibility
is not touched every tick; the missed decay is applied in one power of the
per-tick factor at the next parameter update. Weights only change at
parameter updates, which happen every ``stride`` plastic ticks, so the
missed span is always exactly ``stride``.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def _tick_network(net, U_row, p_in, out_z):
    """Shared per-tick network update; returns (y, f, z) views for plasticity."""
    net.rho_ticks += 1
    net.trace_m *= net.decay_m
    net.trace_r *= net.decay_r
    n_in = net.n_inputs
    if n_in:
        zin = U_row[:n_in] < p_in
        net.trace_m[:n_in] += zin
        net.trace_r[:n_in] += zin

    y = net.cnorm * (net.trace_m - net.trace_r)
    if net.fpre.size:
        sum_f = np.bincount(net.fpost, weights=net.fw * y[net.fpre], minlength=net.n_neurons)
    else:
        sum_f = 0.0
    if net.ppre.size:
        sum_p = np.bincount(net.ppost, weights=net.w * y[net.ppre], minlength=net.n_neurons)
    else:
        sum_p = 0.0
    u = (net.phi + sum_f) + sum_p

    with np.errstate(over="ignore"):
        f = 1.0 / (1.0 + np.exp(-u))
    f[net.rho_ticks < net.tref_ticks] = 0.0
    z = U_row[n_in:] < f
    net.trace_m[n_in:] += z
    net.trace_r[n_in:] += z
    net.rho_ticks[z] = 0
    if net.homeostasis.enabled:
        h = net.homeo_mask
        net.phi[h] += (net.homeostasis.nu0 * net.dt - z[h]) / net.homeostasis.tau_theta
    out_z[:] = z
    return y, f, z


def _active(net, rt):
    """Index array of live synapses for the sparse eligibility path, or None
    for the dense (additive) rule."""
    if not rt.multiplicative:
        return None
    return np.flatnonzero(net.w != 0.0)


def _plasticity_tick(net, rt, y, f, z, act):
    if act is None:
        net.elig *= rt.elig_decay
        incr = y[net.ppre] * (z[net.ppost] - f[net.ppost])
        net.elig += incr
    else:
        pre = net.ppre[act]
        post = net.ppost[act]
        incr = y[pre] * (z[post] - f[post])
        incr *= net.w[act]
        net.elig[act] = net.elig[act] * rt.elig_decay + incr


def _sampler_update(net, rt, r, T, noise_row):
    """One parameter update; returns the refreshed live-synapse index set."""
    if rt.multiplicative:
        dead = net.w == 0.0
        net.elig[dead] *= rt.elig_decay_pow
    n = net.n_plastic
    g = r * net.elig - (net.theta - rt.prior_mu) * rt.prior_inv_sig2
    if rt.mode == 1:  # momentum with friction
        sig = math.sqrt(2.0 * T * rt.b * rt.dt_s)
        net.gamma[:] = (1.0 - rt.b * rt.dt_s) * net.gamma + rt.a * rt.dt_s * g + sig * noise_row
        delta = rt.a * rt.dt_s * net.gamma
    elif rt.mode == 0:  # overdamped
        sig = math.sqrt(2.0 * T * rt.beta * rt.dt_s)
        delta = rt.beta * rt.dt_s * g + sig * noise_row
    else:  # two-block form, unit-Gaussian momentum prior
        sig_g = math.sqrt(2.0 * T * rt.b * rt.dt_s)
        net.gamma[:] = (
            (1.0 - rt.b * rt.dt_s) * net.gamma + rt.a * rt.dt_s * g + sig_g * noise_row[n:]
        )
        sig_t = math.sqrt(2.0 * T * rt.c * rt.dt_s)
        delta = (
            rt.a * rt.dt_s * net.gamma + rt.c * rt.dt_s * g + sig_t * noise_row[:n]
        )
    np.clip(delta, -rt.clip_step, rt.clip_step, out=delta)
    theta = net.theta
    theta += delta
    np.clip(theta, rt.theta_min, rt.theta_max, out=theta)
    net.refresh_weights()
    return _active(net, rt)


def _advance(net, rt, U, N, p_in, r, T, c0, counts):
    """Common chunk body for phases without task-side per-tick logic."""
    m = U.shape[0]
    z = np.empty(net.n_neurons, dtype=bool)
    k = 0
    cnt = c0
    act = _active(net, rt) if rt.plastic_on else None
    for t in range(m):
        y, f, zv = _tick_network(net, U[t], p_in, z)
        if rt.plastic_on:
            _plasticity_tick(net, rt, y, f, zv, act)
            cnt += 1
            if cnt == rt.stride:
                cnt = 0
                act = _sampler_update(net, rt, r, T, N[k])
                k += 1
        counts += zv
    return m


def chunk_plain(net, rt, U, N, p_in, r, T, c0, counts):
    """Fixed-duration block with constant input rates and reward."""
    return _advance(net, rt, U, N, p_in, r, T, c0, counts)


def chunk_xor(net, rt, U, N, p_in, target, T, c0, counts):
    """One stimulus presentation: reward recomputed every 5 ticks from the
    output neuron's spike flag. Returns (ticks_run, sum of per-tick reward)."""
    m = U.shape[0]
    out_idx = net.n_neurons - 1
    z = np.empty(net.n_neurons, dtype=bool)
    k = 0
    cnt = c0
    r = 0.0
    reward_sum = 0.0
    win_spiked = False
    act = _active(net, rt) if rt.plastic_on else None
    for t in range(m):
        y, f, zv = _tick_network(net, U[t], p_in, z)
        win_spiked = win_spiked or bool(zv[out_idx])
        if rt.plastic_on:
            _plasticity_tick(net, rt, y, f, zv, act)
            cnt += 1
            if cnt == rt.stride:
                cnt = 0
                act = _sampler_update(net, rt, r, T, N[k])
                k += 1
        if (t + 1) % 5 == 0:
            r = 1.0 if win_spiked == bool(target) else 0.0
            win_spiked = False
        reward_sum += r
        counts += zv
    return m, reward_sum


def _cursor_jump(cursor, dirs, c_idx, z):
    """Population-vector displacement: sum preferred directions of the pool's
    spikers, in pool order, then clamp to the unit square."""
    moved = False
    for c in range(c_idx.shape[0]):
        if z[c_idx[c]]:
            cursor[0] += dirs[c, 0]
            cursor[1] += dirs[c, 1]
            moved = True
    if moved:
        if cursor[0] < 0.0:
            cursor[0] = 0.0
        elif cursor[0] > 1.0:
            cursor[0] = 1.0
        if cursor[1] < 0.0:
            cursor[1] = 0.0
        elif cursor[1] > 1.0:
            cursor[1] = 1.0
    return moved


def chunk_hold(net, rt, U, N, p_in, r, T, c0, cursor, dirs, c_idx, cx, cy, radius, counts, cursor_rec):
    """Hold block: fails as soon as the cursor leaves the disk.

    Returns (ticks_run, stayed). stayed=False means the exit happened at
    tick index ticks_run-1.
    """
    m = U.shape[0]
    r2 = radius * radius
    z = np.empty(net.n_neurons, dtype=bool)
    k = 0
    cnt = c0
    act = _active(net, rt) if rt.plastic_on else None
    for t in range(m):
        y, f, zv = _tick_network(net, U[t], p_in, z)
        if rt.plastic_on:
            _plasticity_tick(net, rt, y, f, zv, act)
            cnt += 1
            if cnt == rt.stride:
                cnt = 0
                act = _sampler_update(net, rt, r, T, N[k])
                k += 1
        counts += zv
        _cursor_jump(cursor, dirs, c_idx, zv)
        if cursor_rec is not None:
            cursor_rec[t, 0] = cursor[0]
            cursor_rec[t, 1] = cursor[1]
        dx = cursor[0] - cx
        dy = cursor[1] - cy
        if dx * dx + dy * dy > r2:
            return t + 1, False
    return m, True


def chunk_move(net, rt, U, N, p_in, T, c0, cursor, dirs, c_idx, gx, gy, radius, counts, cursor_rec):
    """Movement block (reward 0): ends when the cursor enters the goal disk.

    Returns (ticks_run, entered).
    """
    m = U.shape[0]
    r2 = radius * radius
    z = np.empty(net.n_neurons, dtype=bool)
    k = 0
    cnt = c0
    act = _active(net, rt) if rt.plastic_on else None
    for t in range(m):
        y, f, zv = _tick_network(net, U[t], p_in, z)
        if rt.plastic_on:
            _plasticity_tick(net, rt, y, f, zv, act)
            cnt += 1
            if cnt == rt.stride:
                cnt = 0
                act = _sampler_update(net, rt, 0.0, T, N[k])
                k += 1
        counts += zv
        _cursor_jump(cursor, dirs, c_idx, zv)
        if cursor_rec is not None:
            cursor_rec[t, 0] = cursor[0]
            cursor_rec[t, 1] = cursor[1]
        dx = cursor[0] - gx
        dy = cursor[1] - gy
        if dx * dx + dy * dy <= r2:
            return t + 1, True
    return m, False
