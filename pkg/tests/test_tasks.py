"""Unit tests for the four experiment environments."""

import numpy as np
import pytest

from synsampler.engine import EngineParams, run_phase_move, run_xor_presentation
from synsampler.network import (
    EXCITATORY,
    PSPKernelParams,
    SpikingNetwork,
    build_layered_network,
)
from synsampler.samplers import TemperatureSchedule
from synsampler.tasks import reaching, sigmoid, xor

K = PSPKernelParams(0.02, 0.002)


class TestSigmoidTask:
    def test_target_function_is_logistic(self):
        rng = np.random.default_rng(0)
        x = rng.random((50, 4))
        s = x @ np.array([4.0, 3.0, -3.0, -6.0]) + 1.0
        np.testing.assert_allclose(
            sigmoid.target_output(x), 1.0 / (1.0 + np.exp(-s)), rtol=1e-12)

    def test_patterns_cover_the_output_range(self):
        cfg = sigmoid.SigmoidConfig()
        patterns, targets = sigmoid.make_patterns(np.random.default_rng(1), cfg)
        assert patterns.shape == (cfg.n_patterns, 4)
        assert np.all((patterns >= 0.0) & (patterns <= 1.0))
        np.testing.assert_allclose(targets, sigmoid.target_output(patterns))
        assert np.all(np.diff(targets) >= 0.0)
        s = patterns @ sigmoid.TARGET_WEIGHTS + sigmoid.TARGET_BIAS
        assert s.max() - s.min() > 8.0
        assert targets[0] < 0.1 and targets[-1] > 0.9

    def test_input_probabilities_follow_pool_intensity(self):
        cfg = sigmoid.SigmoidConfig()
        x = np.array([1.0, 0.5, 0.0, 0.25])
        p = sigmoid.input_probabilities(x, cfg)
        assert p.shape == (80,)
        np.testing.assert_allclose(p, np.repeat(x, 20) * 0.06)

    def test_short_run_is_reproducible_with_bounded_rewards(self):
        runs = [
            sigmoid.run_sigmoid_experiment("langevin", 5, n_presentations=30)
            for _ in range(2)
        ]
        np.testing.assert_array_equal(runs[0]["rewards"], runs[1]["rewards"])
        np.testing.assert_array_equal(runs[0]["theta"], runs[1]["theta"])
        r = runs[0]["rewards"]
        assert np.all((r >= 0.0) & (r <= 1.0))

    def test_modes_validated(self):
        with pytest.raises(ValueError, match="mode"):
            sigmoid.run_sigmoid_experiment("nuts", 0, n_presentations=1)


class TestXorTask:
    def test_input_encoding(self):
        cfg = xor.XorConfig()
        np.testing.assert_allclose(
            xor.pattern_probabilities((1, 0), cfg), [0.08, 0.003])
        np.testing.assert_allclose(
            xor.pattern_probabilities((0, 1), cfg), [0.003, 0.08])
        np.testing.assert_allclose(
            xor.pattern_probabilities((1, 1), cfg), [0.08, 0.08])

    def test_target_parity_table(self):
        assert xor.TARGETS == (0, 1, 1, 0)
        for bits, tgt in zip(xor.PATTERNS, xor.TARGETS):
            assert tgt == (bits[0] ^ bits[1])

    @pytest.mark.parametrize("bias,target,expected", [
        (60.0, 1, 396.0),   # firing at the refractory ceiling matches 1
        (60.0, 0, 0.0),
        (-60.0, 0, 396.0),  # silence matches 0
        (-60.0, 1, 0.0),
    ])
    def test_window_reward_truth_table(self, bias, target, expected):
        # A saturated (or silenced) output makes every 5-tick window
        # deterministic, so the summed reward is exact: the first window
        # closes at the fifth tick, leaving 396 rewarded ticks out of 400.
        net = build_layered_network([2, 1], bias=bias)
        rt = EngineParams(mode="langevin", beta=1.0, dt_s=5e-3, stride=5,
                          n_plastic=net.n_plastic, plastic_on=False)
        got = run_xor_presentation(
            net, rt, np.random.default_rng(0), np.random.default_rng(1),
            np.zeros(2), target, 0.0,
            np.zeros(net.n_neurons, dtype=np.int64), 400)
        assert got == expected

    def test_optimality_thresholds(self):
        cfg = xor.XorConfig()
        assert xor.is_optimal([10.0, 120.0, 130.0, 5.0], cfg)
        assert not xor.is_optimal([10.0, 100.0, 130.0, 5.0], cfg)
        assert not xor.is_optimal([20.0, 120.0, 130.0, 5.0], cfg)
        assert not xor.is_optimal([10.0, 120.0, 90.0, 5.0], cfg)
        assert not xor.is_optimal([30.0, 120.0, 130.0, 5.0], cfg)

    def test_fresh_network_is_not_separated(self):
        cfg = xor.XorConfig()
        net, rt = xor._build(cfg, np.random.default_rng(7))
        rates = xor.probe_output_rates(
            net, rt, np.random.default_rng(8), np.random.default_rng(9), cfg)
        assert rates.shape == (4,)
        assert not xor.is_optimal(rates, cfg)

    def test_short_run_is_reproducible(self):
        sched = TemperatureSchedule("constant", 0.3)
        runs = [xor.run_xor_run(3, sched, n_presentations=20,
                                record_every=10) for _ in range(2)]
        np.testing.assert_array_equal(runs[0]["rewards"], runs[1]["rewards"])
        np.testing.assert_array_equal(runs[0]["theta"], runs[1]["theta"])
        np.testing.assert_array_equal(runs[0]["probe_rates"],
                                      runs[1]["probe_rates"])
        assert np.all((runs[0]["rewards"] >= 0.0)
                      & (runs[0]["rewards"] <= 1.0))


def make_pool_net(biases, dirs, t_ref=10.0):
    """Tiny recurrent-free net whose spikes are forced by huge biases."""
    n = len(biases)
    net = SpikingNetwork(
        0, n, 1e-3,
        input_kernel=K, neuron_kernels=[K] * n,
        kinds=[EXCITATORY] * n, phi=biases, t_ref=[t_ref] * n,
    )
    rt = EngineParams(mode="langevin", beta=1.0, dt_s=1e-2, stride=10,
                      n_plastic=0, plastic_on=False)
    args = (net, rt, np.random.default_rng(0), np.random.default_rng(1),
            np.zeros(0))
    return args, np.ascontiguousarray(dirs, dtype=np.float64), \
        np.arange(len(dirs), dtype=np.int32)


class TestCursorKinematics:
    def test_no_spikes_leave_cursor_in_place(self):
        args, dirs, c_idx = make_pool_net([-60.0], [[0.01, -0.02]])
        cursor = np.array([0.25, 0.25])
        counts = np.zeros(1, dtype=np.int64)
        ticks, entered = run_phase_move(
            *args, 0.0, counts, 100, cursor, dirs, c_idx, 5.0, 5.0, 0.01)
        assert ticks == 100 and not entered
        np.testing.assert_array_equal(cursor, [0.25, 0.25])

    def test_single_spike_jumps_by_preferred_direction(self):
        # A long refractory period turns the saturated neuron into a
        # one-shot emitter, so the displacement is applied exactly once.
        args, dirs, c_idx = make_pool_net([60.0, -60.0],
                                          [[0.01, -0.02], [0.5, 0.5]])
        cursor = np.array([0.25, 0.25])
        counts = np.zeros(2, dtype=np.int64)
        ticks, entered = run_phase_move(
            *args, 0.0, counts, 200, cursor, dirs, c_idx, 5.0, 5.0, 0.01)
        assert ticks == 200 and not entered
        assert counts[0] == 1
        np.testing.assert_array_equal(cursor, [0.25 + 0.01, 0.25 - 0.02])

    def test_simultaneous_spikes_sum_their_vectors(self):
        args, dirs, c_idx = make_pool_net([60.0, 60.0],
                                          [[0.25, -0.5], [0.125, 0.25]])
        cursor = np.array([0.25, 0.25])
        counts = np.zeros(2, dtype=np.int64)
        run_phase_move(
            *args, 0.0, counts, 50, cursor, dirs, c_idx, 5.0, 5.0, 0.01)
        np.testing.assert_array_equal(cursor, [0.625, 0.0])

    def test_cursor_clamped_to_unit_square(self):
        args, dirs, c_idx = make_pool_net([60.0], [[0.9, -0.9]])
        cursor = np.array([0.25, 0.25])
        counts = np.zeros(1, dtype=np.int64)
        run_phase_move(
            *args, 0.0, counts, 50, cursor, dirs, c_idx, 5.0, 5.0, 0.01)
        np.testing.assert_array_equal(cursor, [1.0, 0.0])

    def test_goal_entry_stops_the_phase(self):
        args, dirs, c_idx = make_pool_net([60.0], [[0.2, 0.2]])
        cursor = np.array([0.25, 0.25])
        counts = np.zeros(1, dtype=np.int64)
        ticks, entered = run_phase_move(
            *args, 0.0, counts, 500, cursor, dirs, c_idx, 0.45, 0.45, 0.001)
        assert entered and ticks == 1
        np.testing.assert_array_equal(cursor, [0.45, 0.45])


class TestReachingTask:
    def test_cue_rates_match_tuning_curve(self):
        cfg = reaching.ReachingConfig()
        point = np.array([0.4, 0.5, 0.6])
        centers = np.vstack([point, point + [0.2, 0.0, 0.0], [1.0, 1.0, 0.0]])
        p = reaching.cue_probabilities(centers, point, cfg)
        assert p[0] == pytest.approx(0.062)
        assert p[1] == pytest.approx((60.0 * np.exp(-0.04 / 0.08) + 2.0) * 1e-3)
        assert p[2] == pytest.approx(0.002, abs=1e-6)

    def test_cue_rates_monte_carlo(self):
        cfg = reaching.ReachingConfig()
        point = np.zeros(3)
        centers = np.vstack([point, np.ones(3)])
        p = reaching.cue_probabilities(centers, point, cfg)
        rng = np.random.default_rng(11)
        n = 1_000_000
        hits = (rng.random((n, 2)) < p).sum(axis=0)
        rates = hits / (n * 1e-3)
        assert abs(rates[0] - 62.0) < 1.0
        assert abs(rates[1] - 2.0) < 0.5

    def test_background_is_flat(self):
        cfg = reaching.ReachingConfig()
        p = reaching.background_probabilities(200, cfg)
        assert p.shape == (200,)
        assert np.all(p == 0.002)

    def test_trial_state_machine_small_sample(self):
        session = reaching.ReachingSession(42, learning=False)
        cfg = session.cfg
        seen = set()
        for _ in range(12):
            res = session.run_trial(record=True)
            seen.add(res.outcome)
            assert res.outcome in reaching.OUTCOMES
            assert res.total_ticks == (res.s_hold_ticks + res.move_ticks
                                       + res.g_hold_ticks + cfg.reward_ticks)
            # The cursor starts each trial at S (the first recorded point
            # already includes the first tick's jumps, hence the slack).
            np.testing.assert_allclose(
                np.hypot(*(res.traces["s_hold"][0] - cfg.start)),
                0.0, atol=0.25)
            if res.outcome == reaching.OUTCOME_TIMEOUT:
                assert res.s_hold_ticks == cfg.hold_ticks
                assert res.move_ticks == cfg.timeout_ticks
                assert res.g_hold_ticks == 0
            elif res.outcome == reaching.OUTCOME_SUCCESS:
                assert res.g_hold_ticks == cfg.hold_ticks
                d = np.hypot(*(res.traces["g_hold"] - cfg.goal).T)
                assert np.all(d <= cfg.goal_radius + 1e-12)
            else:
                assert (res.s_hold_ticks < cfg.hold_ticks
                        or res.g_hold_ticks < cfg.hold_ticks)
        assert seen  # at least one outcome observed

    def test_trials_are_seed_reproducible(self):
        outs = []
        for _ in range(2):
            session = reaching.ReachingSession(7, learning=False)
            outs.append([session.run_trial().outcome for _ in range(3)])
        assert outs[0] == outs[1]
