"""Cross-backend equivalence: compiled and pure-Python engines must agree.

Both backends consume the identical draw protocol, so spike trains must
match exactly and accumulated float state must match to near machine
precision (the only permitted divergence is the last ulp of exp).
"""

import numpy as np
import pytest

from synsampler.engine import (
    EngineParams,
    get_backend,
    run_phase_hold,
    run_phase_move,
    run_phase_plain,
    run_xor_presentation,
)
from synsampler.network import build_layered_network, build_reaching_network

try:
    COMPILED = get_backend("compiled")
except ImportError:
    COMPILED = None
PYTHON = get_backend("python")

pytestmark = pytest.mark.skipif(COMPILED is None,
                                reason="compiled backend not available")

ATOL = 1e-12


def fresh_layered(seed, **overrides):
    rng = np.random.default_rng(seed)
    net = build_layered_network([4, 6, 1],
                                theta_init=rng.normal(0, 1, 4 * 6 + 6))
    kw = dict(
        mode="hamiltonian", dt_s=5e-3, stride=5, n_plastic=net.n_plastic,
        a=1.0, b=0.1, tau_e=0.2, tick_dt=net.dt, prior_mu=0.0,
        prior_sigma=2.0,
    )
    kw.update(overrides)
    return net, EngineParams(**kw)


def fresh_reaching(seed):
    net, info = build_reaching_network(seed)
    rt = EngineParams(
        mode="hamiltonian", dt_s=1e-2, stride=10, n_plastic=net.n_plastic,
        a=1.0, b=0.02, tau_e=1.0, tick_dt=net.dt, multiplicative=True,
        prior_mu=0.0, prior_sigma=2.0, clip_step=40.0, theta_min=-2.0,
        theta_max=5.0,
    )
    return net, info, rt


def assert_state_close(n1, n2):
    np.testing.assert_array_equal(n1.rho_ticks, n2.rho_ticks)
    for attr in ("trace_m", "trace_r", "phi", "theta", "gamma", "elig", "w"):
        a, b = getattr(n1, attr), getattr(n2, attr)
        if a.size:
            assert np.max(np.abs(a - b)) < ATOL, attr


def test_plain_phase_matches():
    n1, rt1 = fresh_layered(7)
    n2, rt2 = fresh_layered(7)
    c1 = np.zeros(n1.n_neurons, dtype=np.int64)
    c2 = np.zeros(n2.n_neurons, dtype=np.int64)
    p_in = np.array([0.06, 0.03, 0.08, 0.0])
    run_phase_plain(n1, rt1, np.random.default_rng(1), np.random.default_rng(2),
                    p_in, 1.0, 0.1, c1, 3000, backend=PYTHON)
    run_phase_plain(n2, rt2, np.random.default_rng(1), np.random.default_rng(2),
                    p_in, 1.0, 0.1, c2, 3000, backend=COMPILED)
    np.testing.assert_array_equal(c1, c2)
    assert c1.sum() > 0
    assert_state_close(n1, n2)


def test_plain_phase_matches_with_plasticity_off():
    n1, rt1 = fresh_layered(8, plastic_on=False)
    n2, rt2 = fresh_layered(8, plastic_on=False)
    theta_before = n1.theta.copy()
    c1 = np.zeros(n1.n_neurons, dtype=np.int64)
    c2 = np.zeros(n2.n_neurons, dtype=np.int64)
    p_in = np.array([0.05, 0.05, 0.05, 0.05])
    run_phase_plain(n1, rt1, np.random.default_rng(3), np.random.default_rng(4),
                    p_in, 0.0, 0.1, c1, 2000, backend=PYTHON)
    run_phase_plain(n2, rt2, np.random.default_rng(3), np.random.default_rng(4),
                    p_in, 0.0, 0.1, c2, 2000, backend=COMPILED)
    np.testing.assert_array_equal(c1, c2)
    np.testing.assert_array_equal(n1.theta, theta_before)
    assert_state_close(n1, n2)


def test_xor_presentation_matches():
    n1, rt1 = fresh_layered(7)
    n2, rt2 = fresh_layered(7)
    c1 = np.zeros(n1.n_neurons, dtype=np.int64)
    c2 = np.zeros(n2.n_neurons, dtype=np.int64)
    p_in = np.array([0.08, 0.003, 0.08, 0.003])
    rs1 = run_xor_presentation(n1, rt1, np.random.default_rng(3),
                               np.random.default_rng(4), p_in, 1, 0.2, c1,
                               400, backend=PYTHON)
    rs2 = run_xor_presentation(n2, rt2, np.random.default_rng(3),
                               np.random.default_rng(4), p_in, 1, 0.2, c2,
                               400, backend=COMPILED)
    assert rs1 == rs2
    np.testing.assert_array_equal(c1, c2)
    assert_state_close(n1, n2)


def test_hold_and_move_match_on_recurrent_network():
    n1, i1, rt1 = fresh_reaching(11)
    n2, i2, rt2 = fresh_reaching(11)
    np.testing.assert_array_equal(i1["control_pool"], i2["control_pool"])
    c1 = np.zeros(n1.n_neurons, dtype=np.int64)
    c2 = np.zeros(n2.n_neurons, dtype=np.int64)
    p_in = np.full(n1.n_inputs, 0.002)
    cur1 = np.array([0.25, 0.25])
    cur2 = np.array([0.25, 0.25])
    dirs = i1["preferred_directions"]
    pool = i1["control_pool"]

    h1 = run_phase_hold(n1, rt1, np.random.default_rng(5),
                        np.random.default_rng(6), p_in, 0.0, 0.1, c1, 200,
                        cur1, dirs, pool, 0.25, 0.25, 0.05, backend=PYTHON)
    h2 = run_phase_hold(n2, rt2, np.random.default_rng(5),
                        np.random.default_rng(6), p_in, 0.0, 0.1, c2, 200,
                        cur2, dirs, pool, 0.25, 0.25, 0.05, backend=COMPILED)
    assert h1 == h2
    np.testing.assert_array_equal(cur1, cur2)

    m1 = run_phase_move(n1, rt1, np.random.default_rng(7),
                        np.random.default_rng(8), p_in, 0.1, c1, 1500,
                        cur1, dirs, pool, 0.75, 0.75, 0.05, backend=PYTHON)
    m2 = run_phase_move(n2, rt2, np.random.default_rng(7),
                        np.random.default_rng(8), p_in, 0.1, c2, 1500,
                        cur2, dirs, pool, 0.75, 0.75, 0.05, backend=COMPILED)
    assert m1 == m2
    np.testing.assert_array_equal(cur1, cur2)
    np.testing.assert_array_equal(c1, c2)
    assert_state_close(n1, n2)


def test_cursor_traces_match():
    n1, i1, rt1 = fresh_reaching(13)
    n2, i2, rt2 = fresh_reaching(13)
    c1 = np.zeros(n1.n_neurons, dtype=np.int64)
    c2 = np.zeros(n2.n_neurons, dtype=np.int64)
    p_in = np.full(n1.n_inputs, 0.002)
    cur1 = np.array([0.5, 0.5])
    cur2 = np.array([0.5, 0.5])
    rec1 = np.empty((600, 2))
    rec2 = np.empty((600, 2))
    t1, _ = run_phase_move(n1, rt1, np.random.default_rng(9),
                           np.random.default_rng(10), p_in, 0.1, c1, 600,
                           cur1, i1["preferred_directions"], i1["control_pool"],
                           0.9, 0.9, 0.02, cursor_rec=rec1, backend=PYTHON)
    t2, _ = run_phase_move(n2, rt2, np.random.default_rng(9),
                           np.random.default_rng(10), p_in, 0.1, c2, 600,
                           cur2, i2["preferred_directions"], i2["control_pool"],
                           0.9, 0.9, 0.02, cursor_rec=rec2, backend=COMPILED)
    assert t1 == t2
    np.testing.assert_array_equal(rec1[:t1], rec2[:t2])


def test_silencing_toggles_match():
    """Parameters crossing zero silence and revive synapses identically.

    The multiplicative rule defers eligibility decay on silenced synapses,
    so agreement here exercises the repayment bookkeeping in both backends.
    """
    results = []
    for backend in (PYTHON, COMPILED):
        rng = np.random.default_rng(21)
        net = build_layered_network([3, 4, 1],
                                    theta_init=rng.normal(0.0, 0.2, 16))
        net.mapping_kind = 1
        net.theta0 = 0.0
        net.silence_negative_theta = True
        net.refresh_weights()
        rt = EngineParams(
            mode="langevin", dt_s=2e-3, stride=2, n_plastic=net.n_plastic,
            beta=4.0, tau_e=0.05, tick_dt=net.dt, multiplicative=True,
        )
        counts = np.zeros(net.n_neurons, dtype=np.int64)
        run_phase_plain(net, rt, np.random.default_rng(22),
                        np.random.default_rng(23),
                        np.array([0.06, 0.05, 0.04]), 1.0, 0.5, counts,
                        4000, backend=backend)
        results.append((net, counts))
    (n1, c1), (n2, c2) = results
    assert (n1.w == 0.0).any(), "expected at least one silenced synapse"
    np.testing.assert_array_equal(c1, c2)
    assert_state_close(n1, n2)
