"""Unit tests for the spike-response network: kernels, gating, builders."""

import math

import numpy as np
import pytest

from synsampler.network import (
    EXCITATORY,
    INHIBITORY,
    HomeostasisParams,
    NeuronState,
    PSPKernelParams,
    ReachingLayout,
    SpikingNetwork,
    build_layered_network,
    build_reaching_network,
    firing_probability,
    homeostasis_step,
    membrane_potential,
    psp_kernel,
    psp_peak_time,
    step_network,
)

KERNEL = PSPKernelParams(tau_m=0.02, tau_r=0.002)


class TestPspKernel:
    def test_zero_at_origin(self):
        assert psp_kernel(0.0, KERNEL) == 0.0

    def test_vanishes_at_infinity(self):
        assert psp_kernel(10.0, KERNEL) < 1e-12

    def test_nonnegative_on_grid(self):
        t = np.linspace(0.0, 0.5, 2001)
        assert np.all(psp_kernel(t, KERNEL) >= 0.0)

    def test_peak_time_matches_closed_form(self):
        t_star = psp_peak_time(KERNEL)
        assert t_star == pytest.approx(
            0.02 * 0.002 / 0.018 * math.log(10.0), rel=1e-12)
        assert t_star == pytest.approx(5.117e-3, abs=5e-6)
        # Dense scan around the peak confirms the argmax numerically.
        t = np.linspace(0.0, 0.05, 50001)
        assert abs(t[np.argmax(psp_kernel(t, KERNEL))] - t_star) < 2e-6

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError, match="t >= 0"):
            psp_kernel(-0.001, KERNEL)

    def test_bad_time_constants_rejected(self):
        with pytest.raises(ValueError, match="tau_m > tau_r"):
            PSPKernelParams(tau_m=0.002, tau_r=0.02)
        with pytest.raises(ValueError, match="tau_m > tau_r"):
            PSPKernelParams(tau_m=0.02, tau_r=0.0)


class TestMembranePotential:
    def test_bias_only(self):
        assert membrane_potential(NeuronState(bias_phi=-3.0), []) == -3.0

    def test_single_input(self):
        u = membrane_potential(NeuronState(bias_phi=0.0), [(2.0, 1.0)])
        assert u == 2.0

    def test_linearity(self):
        u = membrane_potential(NeuronState(bias_phi=0.0),
                               [(1.0, 1.0), (-2.0, 1.0)])
        assert u == -1.0


class TestFiringProbability:
    def test_sigmoid_at_zero(self):
        assert firing_probability(0.0, 1.0, 0.005, 1e-3) == 0.5

    def test_refractory_blocks(self):
        assert firing_probability(50.0, 0.002, 0.005, 1e-3) == 0.0

    def test_saturates(self):
        assert firing_probability(500.0, 1.0, 0.005, 1e-3) == 1.0
        assert firing_probability(-500.0, 1.0, 0.005, 1e-3) < 1e-200
        assert firing_probability(-800.0, 1.0, 0.005, 1e-3) == 0.0

    def test_boundary_interval_allowed(self):
        # An inter-spike interval of exactly t_ref must be possible.
        assert firing_probability(0.0, 0.005, 0.005, 1e-3) == 0.5


class TestHomeostasisStep:
    PARAMS = HomeostasisParams(tau_theta=50.0, nu0=5.0, enabled=True)

    def test_quiet_tick_raises_bias(self):
        phi = homeostasis_step(0.0, False, self.PARAMS, 1e-3)
        assert phi == pytest.approx(5.0 * 1e-3 / 50.0)

    def test_spike_tick_lowers_bias(self):
        phi = homeostasis_step(0.0, True, self.PARAMS, 1e-3)
        assert phi == pytest.approx((5.0 * 1e-3 - 1.0) / 50.0)

    def test_target_rate_is_fixed_point(self):
        # Firing at exactly nu0 = 5 Hz (one spike per 200 ticks of 1 ms)
        # leaves the bias unchanged over the cycle.
        phi = 0.0
        for t in range(200):
            phi = homeostasis_step(phi, t == 0, self.PARAMS, 1e-3)
        assert phi == pytest.approx(0.0, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError, match="tau_theta"):
            HomeostasisParams(tau_theta=0.0)
        with pytest.raises(ValueError, match="nu0"):
            HomeostasisParams(nu0=-1.0)


class TestStepNetwork:
    def make_single(self, bias=0.0, w=None, t_ref=0.005):
        net = SpikingNetwork(
            1, 1, 1e-3,
            input_kernel=KERNEL, neuron_kernels=[KERNEL],
            kinds=[EXCITATORY], phi=[bias], t_ref=[t_ref],
        )
        if w is not None:
            net.set_fixed_synapses([0], [0], [w])
        return net

    def test_psp_trace_matches_convolution_oracle(self):
        """The incremental trace equals direct convolution with the kernel."""
        rng = np.random.default_rng(5)
        spikes = rng.random(1000) < 0.04
        net = self.make_single(bias=-60.0)  # silent neuron, pure input trace
        ys = []
        for z in spikes:
            step_network(net, [z], rng=rng)
            ys.append(net.cnorm[0] * (net.trace_m[0] - net.trace_r[0]))
        ys = np.array(ys)
        t = np.arange(1000) * 1e-3
        oracle = np.zeros(1000)
        for k in np.flatnonzero(spikes):
            tail = t[k:] - t[k]
            oracle[k:] += psp_kernel(tail, KERNEL)
        assert np.max(np.abs(ys - oracle)) < 1e-9

    def test_refractory_gap_is_hard(self):
        rng = np.random.default_rng(6)
        net = self.make_single(bias=10.0)  # fires whenever allowed
        spike_ticks = []
        for t in range(2000):
            z = step_network(net, [False], rng=rng)
            if z[0]:
                spike_ticks.append(t)
        gaps = np.diff(spike_ticks)
        assert len(spike_ticks) > 100
        assert gaps.min() >= 5

    def test_traces_decay_without_spikes(self):
        net = self.make_single(bias=-60.0)
        net.trace_m[:] = 1.0
        net.trace_r[:] = 1.0
        rng = np.random.default_rng(7)
        prev = np.inf
        for _ in range(50):
            step_network(net, [False], rng=rng)
            cur = net.trace_m.sum() + net.trace_r.sum()
            assert cur < prev
            prev = cur
        assert prev < 2.0 * math.exp(-0.05 / 0.02) + 1e-9

    def test_homeostatic_rate_converges_to_target(self):
        net = SpikingNetwork(
            0, 1, 1e-3,
            input_kernel=KERNEL, neuron_kernels=[KERNEL],
            kinds=[EXCITATORY], phi=[-3.0], t_ref=[0.005],
            homeostasis=HomeostasisParams(enabled=True),
            homeo_mask=[True],
        )
        rng = np.random.default_rng(8)
        for _ in range(60_000):
            step_network(net, np.zeros(0, dtype=bool), rng=rng)
        count = 0
        window = 100_000
        for _ in range(window):
            count += int(step_network(net, np.zeros(0, dtype=bool), rng=rng)[0])
        rate = count / (window * 1e-3)
        assert 4.0 <= rate <= 6.0

    def test_dt_mismatch_rejected(self):
        net = self.make_single()
        with pytest.raises(ValueError, match="disagrees"):
            step_network(net, [False], dt=2e-3, rng=np.random.default_rng(0))

    def test_exactly_one_randomness_source(self):
        net = self.make_single()
        with pytest.raises(ValueError, match="exactly one"):
            step_network(net, [False])
        with pytest.raises(ValueError, match="exactly one"):
            step_network(net, [False], rng=np.random.default_rng(0),
                         uniforms=np.zeros(1))


class TestLayeredBuilder:
    def test_synapse_enumeration_order(self):
        net = build_layered_network([2, 3, 1])
        # First block: inputs 0,1 to neurons 0,1,2 presynaptic-major; then
        # hidden sources (ids 2,3,4 as network sources) to the output.
        assert list(net.ppre[:6]) == [0, 0, 0, 1, 1, 1]
        assert list(net.ppost[:6]) == [0, 1, 2, 0, 1, 2]
        assert list(net.ppre[6:]) == [2, 3, 4]
        assert list(net.ppost[6:]) == [3, 3, 3]

    def test_theta_shape_enforced(self):
        with pytest.raises(ValueError, match="theta_init"):
            build_layered_network([2, 3, 1], theta_init=np.zeros(5))

    def test_needs_two_layers(self):
        with pytest.raises(ValueError, match="at least"):
            build_layered_network([4])


@pytest.fixture(scope="module")
def built():
    return build_reaching_network(123)


class TestReachingBuilder:
    def test_population_counts(self, built):
        net, info = built
        assert net.n_inputs == 200
        assert net.n_neurons == 120
        assert (net.kind == EXCITATORY).sum() == 100
        assert (net.kind == INHIBITORY).sum() == 20
        assert len(info["input_receivers"]) == 30
        assert len(info["control_pool"]) == 50
        assert info["preferred_directions"].shape == (50, 2)

    def test_control_pool_disjoint_from_receivers(self, built):
        _, info = built
        assert not set(info["control_pool"]) & set(info["input_receivers"])

    def test_preferred_directions_in_range(self, built):
        _, info = built
        d = info["preferred_directions"]
        assert np.all(np.abs(d) <= 0.025)

    def test_inhibitory_outgoing_weights_negative(self, built):
        net, _ = built
        inh_sources = np.flatnonzero(net.kind == INHIBITORY) + net.n_inputs
        mask = np.isin(net.fpre, inh_sources)
        assert mask.any()
        assert np.all(net.fw[mask] < 0.0)
        # Inhibitory neurons own no plastic synapses.
        assert not np.isin(net.ppre, inh_sources).any()

    def test_excitatory_fixed_weights_positive(self, built):
        net, _ = built
        exc_sources = np.flatnonzero(net.kind == EXCITATORY) + net.n_inputs
        mask = np.isin(net.fpre, exc_sources)
        assert mask.any()
        assert np.all(net.fw[mask] > 0.0)

    def test_plastic_weights_nonnegative(self, built):
        net, _ = built
        assert np.all(net.w >= 0.0)
        assert (net.w == 0.0).any()  # negative theta silences
        live = net.theta >= 0.0
        np.testing.assert_allclose(net.w[live], np.exp(net.theta[live] - 3.0))

    def test_connection_counts_within_binomial_bounds(self, built):
        net, _ = built
        n_in = net.n_inputs
        kinds = net.kind
        pre_kind_e = kinds[np.maximum(net.fpre - n_in, 0)] == EXCITATORY
        is_neuron_pre = net.fpre >= n_in
        post_i = kinds[net.fpost] == INHIBITORY
        n_ei = int((is_neuron_pre & pre_kind_e & post_i).sum())
        mean = 100 * 20 * 0.575
        sigma = math.sqrt(100 * 20 * 0.575 * 0.425)
        assert abs(n_ei - mean) <= 3 * sigma

    def test_plastic_multiplicity_within_binomial_bounds(self, built):
        net, _ = built
        n_pairs = 200 * 30 + 100 * 99
        mean = n_pairs * 5.0
        sigma = math.sqrt(n_pairs * 10 * 0.25)
        assert abs(net.n_plastic - mean) <= 3 * sigma

    def test_construction_is_seed_deterministic(self):
        n1, i1 = build_reaching_network(77)
        n2, i2 = build_reaching_network(77)
        np.testing.assert_array_equal(n1.theta, n2.theta)
        np.testing.assert_array_equal(n1.fw, n2.fw)
        np.testing.assert_array_equal(i1["control_pool"], i2["control_pool"])


class TestTopologyRoundTrip:
    def test_json_round_trip_preserves_behavior(self):
        rng = np.random.default_rng(9)
        net = build_layered_network([3, 4, 1],
                                    theta_init=rng.normal(0, 1, 16))
        clone = SpikingNetwork.from_json(net.to_json())
        r1 = np.random.default_rng(10)
        r2 = np.random.default_rng(10)
        for t in range(500):
            zin = np.array([t % 7 == 0, t % 11 == 0, t % 13 == 0])
            z1 = step_network(net, zin, rng=r1)
            z2 = step_network(clone, zin, rng=r2)
            np.testing.assert_array_equal(z1, z2)
        np.testing.assert_array_equal(net.trace_m, clone.trace_m)

    def test_layout_validation(self):
        with pytest.raises(ValueError):
            PSPKernelParams(0.01, 0.01)
        layout = ReachingLayout()
        assert layout.n_exc == 100 and layout.n_inh == 20
