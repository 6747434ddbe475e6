"""Scratch: cross-backend equivalence smoke test (not part of the suite)."""
import numpy as np

from synsampler.engine import EngineParams, get_backend, run_phase_plain, run_phase_hold, run_phase_move, run_xor_presentation
from synsampler.network import build_layered_network, build_reaching_network

py = get_backend("python")
co = get_backend("compiled")


def fresh_layered(seed):
    rng = np.random.default_rng(seed)
    net = build_layered_network([4, 6, 1], theta_init=rng.normal(0, 1, 4 * 6 + 6 * 1))
    rt = EngineParams(
        mode="hamiltonian", dt_s=5e-3, stride=5, n_plastic=net.n_plastic,
        a=1.0, b=0.1, tau_e=0.2, tick_dt=net.dt, prior_mu=0.0, prior_sigma=2.0,
    )
    return net, rt


def compare(n1, n2, label):
    assert np.array_equal(n1.rho_ticks, n2.rho_ticks), f"{label}: rho differs"
    for attr in ("trace_m", "trace_r", "phi", "theta", "gamma", "elig", "w"):
        a, b = getattr(n1, attr), getattr(n2, attr)
        d = np.max(np.abs(a - b)) if a.size else 0.0
        assert d < 1e-12, f"{label}: {attr} max diff {d}"
    print(f"{label}: OK (max theta diff {np.max(np.abs(n1.theta - n2.theta)):.2e})")


# plain phase, layered identity-mapped net
for be, net, rt, cnt in [(py, *fresh_layered(7), None), (co, *fresh_layered(7), None)]:
    pass
n1, rt1 = fresh_layered(7)
n2, rt2 = fresh_layered(7)
c1 = np.zeros(n1.n_neurons, dtype=np.int64)
c2 = np.zeros(n2.n_neurons, dtype=np.int64)
p_in = np.array([0.06, 0.03, 0.08, 0.0])
run_phase_plain(n1, rt1, np.random.default_rng(1), np.random.default_rng(2), p_in, 1.0, 0.1, c1, 3000, backend=py)
run_phase_plain(n2, rt2, np.random.default_rng(1), np.random.default_rng(2), p_in, 1.0, 0.1, c2, 3000, backend=co)
assert np.array_equal(c1, c2), f"plain: spike counts differ {c1} {c2}"
compare(n1, n2, "plain/layered")

# xor presentation
n1, rt1 = fresh_layered(7)
n2, rt2 = fresh_layered(7)
c1[:] = 0
c2[:] = 0
rs1 = run_xor_presentation(n1, rt1, np.random.default_rng(3), np.random.default_rng(4), p_in, 1, 0.2, c1, 400, backend=py)
rs2 = run_xor_presentation(n2, rt2, np.random.default_rng(3), np.random.default_rng(4), p_in, 1, 0.2, c2, 400, backend=co)
assert rs1 == rs2, f"xor reward sums differ: {rs1} {rs2}"
assert np.array_equal(c1, c2)
compare(n1, n2, "xor/layered")
print("xor reward sum:", rs1)

# reaching net: hold then move, exp mapping, homeostasis, multiplicative elig
def fresh_reach():
    net, info = build_reaching_network(11)
    rt = EngineParams(
        mode="hamiltonian", dt_s=1e-2, stride=10, n_plastic=net.n_plastic,
        a=1.0, b=0.02, tau_e=1.0, tick_dt=net.dt, multiplicative=True,
        prior_mu=0.0, prior_sigma=2.0, clip_step=40.0, theta_min=-2.0, theta_max=5.0,
    )
    return net, info, rt

n1, i1, rt1 = fresh_reach()
n2, i2, rt2 = fresh_reach()
assert np.array_equal(i1["control_pool"], i2["control_pool"])
print("plastic synapses:", n1.n_plastic)
c1 = np.zeros(n1.n_neurons, dtype=np.int64)
c2 = np.zeros(n2.n_neurons, dtype=np.int64)
p_in = np.full(n1.n_inputs, 0.002)
cur1 = np.array([0.25, 0.25])
cur2 = np.array([0.25, 0.25])
dirs = i1["preferred_directions"]
pool = i1["control_pool"]
t1, s1 = run_phase_hold(n1, rt1, np.random.default_rng(5), np.random.default_rng(6), p_in, 0.0, 0.1, c1, 200, cur1, dirs, pool, 0.25, 0.25, 0.05, backend=py)
t2, s2 = run_phase_hold(n2, rt2, np.random.default_rng(5), np.random.default_rng(6), p_in, 0.0, 0.1, c2, 200, cur2, dirs, pool, 0.25, 0.25, 0.05, backend=co)
assert (t1, s1) == (t2, s2), f"hold outcome differs: {(t1, s1)} {(t2, s2)}"
assert np.array_equal(cur1, cur2), f"cursor differs {cur1} {cur2}"
print("hold outcome:", t1, s1, "cursor:", cur1)
t1, e1 = run_phase_move(n1, rt1, np.random.default_rng(7), np.random.default_rng(8), p_in, 0.1, c1, 1500, cur1, dirs, pool, 0.75, 0.75, 0.05, backend=py)
t2, e2 = run_phase_move(n2, rt2, np.random.default_rng(7), np.random.default_rng(8), p_in, 0.1, c2, 1500, cur2, dirs, pool, 0.75, 0.75, 0.05, backend=co)
assert (t1, e1) == (t2, e2), f"move outcome differs: {(t1, e1)} {(t2, e2)}"
assert np.array_equal(c1, c2), "reach counts differ"
compare(n1, n2, "hold+move/reaching")
print("move outcome:", t1, e1, "cursor:", cur1, "total spikes:", c1.sum())
