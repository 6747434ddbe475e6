# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled simulation backend.

Twin of ``engine.purepy``: same chunk functions, same argument lists, and
deliberately the same floating-point operation order (synapse sums built in
zeroed buffers before the bias is added, products associated left to right).
The only tolerated difference is exp(): libm here versus numpy's vectorized
exp, which disagree by at most 1 ulp on this platform.

Silenced synapses (w = 0) contribute nothing to membrane sums and, under
the multiplicative rule, receive no trace increments, so the hot loops run
over a live-synapse index list rebuilt at every parameter update; skipped
eligibility decay is repaid in one power of the per-tick factor, exactly as
in the numpy backend.
"""

import numpy as np

from libc.math cimport exp, sqrt

BACKEND_NAME = "compiled"

DEF TASK_PLAIN = 0
DEF TASK_XOR = 1
DEF TASK_HOLD = 2
DEF TASK_MOVE = 3


def chunk_plain(net, rt, U, N, p_in, r, T, c0, counts):
    t_used, _ = _run(net, rt, U, N, p_in, TASK_PLAIN, float(r), 0, float(T), int(c0),
                     counts, None, None, None, 0.0, 0.0, 0.0, None)
    return t_used


def chunk_xor(net, rt, U, N, p_in, target, T, c0, counts):
    t_used, aux = _run(net, rt, U, N, p_in, TASK_XOR, 0.0, int(target), float(T), int(c0),
                       counts, None, None, None, 0.0, 0.0, 0.0, None)
    return t_used, aux


def chunk_hold(net, rt, U, N, p_in, r, T, c0, cursor, dirs, c_idx, cx, cy, radius,
               counts, cursor_rec):
    t_used, aux = _run(net, rt, U, N, p_in, TASK_HOLD, float(r), 0, float(T), int(c0),
                       counts, cursor, dirs, c_idx, float(cx), float(cy), float(radius),
                       cursor_rec)
    return t_used, aux != 0.0


def chunk_move(net, rt, U, N, p_in, T, c0, cursor, dirs, c_idx, gx, gy, radius,
               counts, cursor_rec):
    t_used, aux = _run(net, rt, U, N, p_in, TASK_MOVE, 0.0, 0, float(T), int(c0),
                       counts, cursor, dirs, c_idx, float(gx), float(gy), float(radius),
                       cursor_rec)
    return t_used, aux != 0.0


def _run(net, rt, U_in, N_in, p_in_arr, int task, double r, int target, double T,
         int c0, counts_arr, cursor_arr, dirs_arr, cidx_arr,
         double ccx, double ccy, double radius, rec_arr):
    cdef double[:, ::1] U = U_in
    cdef double[:, ::1] N = N_in
    cdef double[::1] p_in = p_in_arr
    cdef long long[::1] counts = counts_arr

    cdef int n_in = net.n_inputs
    cdef int n_neu = net.n_neurons
    cdef int n_src = net.n_sources
    cdef double[::1] tm = net.trace_m
    cdef double[::1] tr = net.trace_r
    cdef double[::1] dm = net.decay_m
    cdef double[::1] dr = net.decay_r
    cdef double[::1] cn = net.cnorm
    cdef double[::1] phi = net.phi
    cdef long long[::1] rho = net.rho_ticks
    cdef long long[::1] tref = net.tref_ticks

    cdef int homeo_on = 1 if net.homeostasis.enabled else 0
    cdef double nu0dt = net.homeostasis.nu0 * net.dt
    cdef double tau_h = net.homeostasis.tau_theta
    cdef unsigned char[::1] hmask = net.homeo_mask.view(np.uint8)

    cdef int[::1] fpre = net.fpre
    cdef int[::1] fpost = net.fpost
    cdef double[::1] fw = net.fw
    cdef int nf = fpre.shape[0]

    cdef int[::1] ppre = net.ppre
    cdef int[::1] ppost = net.ppost
    cdef double[::1] theta = net.theta
    cdef double[::1] gamma = net.gamma
    cdef double[::1] e = net.elig
    cdef double[::1] w = net.w
    cdef int np_ = ppre.shape[0]

    cdef int map_exp = 1 if net.mapping_kind == 1 else 0
    cdef double theta0 = net.theta0
    cdef int negzero = 1 if net.silence_negative_theta else 0

    cdef int plastic_on = 1 if rt.plastic_on else 0
    cdef int mult = 1 if rt.multiplicative else 0
    cdef double edecay = rt.elig_decay
    cdef double dpow = rt.elig_decay_pow
    cdef double pmu = rt.prior_mu
    cdef double pinv = rt.prior_inv_sig2
    cdef double cs = rt.clip_step
    cdef double tmin = rt.theta_min
    cdef double tmax = rt.theta_max
    cdef int mode = rt.mode
    cdef int stride = rt.stride
    cdef double dts = rt.dt_s

    # Sampler scalars, composed exactly like the numpy expressions.
    cdef double factor = 1.0 - rt.b * dts
    cdef double adts = rt.a * dts
    cdef double bdts = rt.beta * dts
    cdef double cdts = rt.c * dts
    cdef double sig_h = sqrt(2.0 * T * rt.b * dts)
    cdef double sig_l = sqrt(2.0 * T * rt.beta * dts)
    cdef double sig_t = sqrt(2.0 * T * rt.c * dts)

    scratch_y = np.empty(n_src, dtype=np.float64)
    scratch_f = np.empty(n_neu, dtype=np.float64)
    scratch_sf = np.empty(n_neu, dtype=np.float64)
    scratch_sp = np.empty(n_neu, dtype=np.float64)
    scratch_z = np.zeros(n_neu, dtype=np.uint8)
    scratch_act = np.empty(np_, dtype=np.int32)
    cdef double[::1] y = scratch_y
    cdef double[::1] f = scratch_f
    cdef double[::1] sumf = scratch_sf
    cdef double[::1] sump = scratch_sp
    cdef unsigned char[::1] z = scratch_z
    cdef int[::1] act = scratch_act
    cdef int n_act = 0

    cdef double[::1] cursor = cursor_arr if cursor_arr is not None else None
    cdef double[:, ::1] dirs = dirs_arr if dirs_arr is not None else None
    cdef int[::1] cidx = cidx_arr if cidx_arr is not None else None
    cdef double[:, ::1] rec = rec_arr if rec_arr is not None else None
    cdef int has_rec = 1 if rec_arr is not None else 0
    cdef int ncb = cidx.shape[0] if cidx_arr is not None else 0
    cdef double curx = cursor[0] if cursor_arr is not None else 0.0
    cdef double cury = cursor[1] if cursor_arr is not None else 0.0
    cdef double rad2 = radius * radius

    cdef int m = U.shape[0]
    cdef int out_idx = n_neu - 1
    cdef int win_spiked = 0
    cdef double reward_sum = 0.0

    cdef int t, i, j, s, ii, post, ci, moved
    cdef int scnt = c0
    cdef int krow = 0
    cdef double uu, ff, zf, incr, ee, ww, g, gm, d, th
    cdef double dx, dy
    cdef int t_used = m
    cdef double aux = 0.0
    cdef int done = 0

    for s in range(np_):
        if w[s] != 0.0:
            act[n_act] = s
            n_act += 1

    for t in range(m):
        for j in range(n_neu):
            rho[j] += 1
        for s in range(n_src):
            tm[s] *= dm[s]
            tr[s] *= dr[s]
        for i in range(n_in):
            if U[t, i] < p_in[i]:
                tm[i] += 1.0
                tr[i] += 1.0
        for s in range(n_src):
            y[s] = cn[s] * (tm[s] - tr[s])
        for j in range(n_neu):
            sumf[j] = 0.0
            sump[j] = 0.0
        for s in range(nf):
            sumf[fpost[s]] += fw[s] * y[fpre[s]]
        for ii in range(n_act):
            s = act[ii]
            sump[ppost[s]] += w[s] * y[ppre[s]]
        for j in range(n_neu):
            uu = (phi[j] + sumf[j]) + sump[j]
            if rho[j] < tref[j]:
                ff = 0.0
            else:
                ff = 1.0 / (1.0 + exp(-uu))
            f[j] = ff
            if U[t, n_in + j] < ff:
                z[j] = 1
                tm[n_in + j] += 1.0
                tr[n_in + j] += 1.0
                rho[j] = 0
                counts[j] += 1
            else:
                z[j] = 0
        if homeo_on:
            for j in range(n_neu):
                if hmask[j]:
                    phi[j] += (nu0dt - (1.0 if z[j] else 0.0)) / tau_h

        if task == TASK_XOR and z[out_idx]:
            win_spiked = 1

        if plastic_on:
            if mult:
                for ii in range(n_act):
                    s = act[ii]
                    post = ppost[s]
                    zf = (1.0 if z[post] else 0.0) - f[post]
                    incr = y[ppre[s]] * zf
                    incr = incr * w[s]
                    e[s] = e[s] * edecay + incr
            else:
                for s in range(np_):
                    post = ppost[s]
                    zf = (1.0 if z[post] else 0.0) - f[post]
                    e[s] = e[s] * edecay + y[ppre[s]] * zf
            scnt += 1
            if scnt == stride:
                scnt = 0
                n_act = 0
                for s in range(np_):
                    ww = w[s]
                    if mult and ww == 0.0:
                        ee = e[s]
                        if ee != 0.0:
                            e[s] = ee * dpow
                    g = r * e[s] - (theta[s] - pmu) * pinv
                    if mode == 1:
                        gm = factor * gamma[s] + adts * g + sig_h * N[krow, s]
                        gamma[s] = gm
                        d = adts * gm
                    elif mode == 0:
                        d = bdts * g + sig_l * N[krow, s]
                    else:
                        gm = factor * gamma[s] + adts * g + sig_h * N[krow, np_ + s]
                        gamma[s] = gm
                        d = adts * gm + cdts * g + sig_t * N[krow, s]
                    if d > cs:
                        d = cs
                    elif d < -cs:
                        d = -cs
                    th = theta[s] + d
                    if th < tmin:
                        th = tmin
                    elif th > tmax:
                        th = tmax
                    theta[s] = th
                    if map_exp:
                        if negzero and th < 0.0:
                            ww = 0.0
                        else:
                            ww = exp(th - theta0)
                    else:
                        ww = th
                    w[s] = ww
                    if ww != 0.0:
                        act[n_act] = s
                        n_act += 1
                krow += 1

        if task == TASK_XOR:
            if (t + 1) % 5 == 0:
                r = 1.0 if win_spiked == target else 0.0
                win_spiked = 0
            reward_sum += r
        elif task >= TASK_HOLD:
            moved = 0
            for ci in range(ncb):
                if z[cidx[ci]]:
                    curx += dirs[ci, 0]
                    cury += dirs[ci, 1]
                    moved = 1
            if moved:
                if curx < 0.0:
                    curx = 0.0
                elif curx > 1.0:
                    curx = 1.0
                if cury < 0.0:
                    cury = 0.0
                elif cury > 1.0:
                    cury = 1.0
            if has_rec:
                rec[t, 0] = curx
                rec[t, 1] = cury
            dx = curx - ccx
            dy = cury - ccy
            if task == TASK_HOLD:
                if dx * dx + dy * dy > rad2:
                    t_used = t + 1
                    aux = 0.0
                    done = 1
            else:
                if dx * dx + dy * dy <= rad2:
                    t_used = t + 1
                    aux = 1.0
                    done = 1
        if done:
            break

    if task == TASK_XOR:
        aux = reward_sum
    elif task == TASK_HOLD and not done:
        aux = 1.0
    elif task == TASK_MOVE and not done:
        aux = 0.0
    if cursor_arr is not None:
        cursor[0] = curx
        cursor[1] = cury
    return t_used, aux
