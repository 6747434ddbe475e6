"""Digit classification with immediate reward: one random training image per
update, winner-take-all scoring, and periodic deterministic accuracy probes
on a fixed test subset."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import perceptron
from ..samplers import NonFiniteSampleError, SamplerConfig


@dataclass(frozen=True)
class MnistConfig:
    """Knobs of the digit experiment.

    The two sampler arms share the 0.02 step. The momentum arm runs the
    two-block dynamics with gradient coupling ``a``, friction ``b``, and
    direct parameter drive ``c``; the momentum-free arm is plain overdamped
    search with rate ``beta``.
    """

    n_updates: int = 100_000
    eval_every: int = 1000
    eval_size: int = 2000
    dt: float = 0.02
    beta: float = 0.2
    a: float = 2.0
    b: float = 0.02
    c: float = 2.0
    temperature: float = 0.01
    init_scale: float = 0.1
    n_hidden: int = 30

    def __post_init__(self):
        if self.n_updates < 1 or self.eval_every < 1 or self.eval_size < 1:
            raise ValueError("update and probe counts must be positive")
        if self.n_updates % self.eval_every:
            raise ValueError("eval_every must divide n_updates")
        if self.temperature < 0.0:
            raise ValueError("temperature must be nonnegative")


def sampler_for_mode(cfg: MnistConfig, mode: str) -> SamplerConfig:
    """Sampler settings for one arm of the experiment."""
    if mode == "langevin":
        return SamplerConfig(mode="langevin", dt=cfg.dt, beta=cfg.beta)
    if mode == "hamiltonian":
        return SamplerConfig(mode="generalized", dt=cfg.dt, a=cfg.a, b=cfg.b, c=cfg.c)
    raise ValueError(f"unknown digit-experiment mode {mode!r}")


def flatten_images(images: np.ndarray) -> np.ndarray:
    """Accept (n, 28, 28) uint8 or (n, 784) float and return (n, 784)
    float32 scaled to [0, 1]."""
    images = np.asarray(images)
    if images.ndim == 3:
        flat = images.reshape(images.shape[0], -1).astype(np.float32)
        flat *= np.float32(1.0 / 255.0)
        return flat
    if images.ndim == 2:
        return images.astype(np.float32, copy=False)
    raise ValueError(f"cannot interpret image array of shape {images.shape}")


def run_mnist_experiment(
    train_images,
    train_labels,
    test_images,
    test_labels,
    *,
    mode: str = "langevin",
    seed: int = 0,
    cfg: Optional[MnistConfig] = None,
    switch_at: Optional[int] = None,
    switch_to: str = "hamiltonian",
    stop_at: Optional[int] = None,
    resume_state: Optional[dict] = None,
):
    """Train one network for ``cfg.n_updates`` single-image presentations.

    ``switch_at`` changes the sampler arm at that update index, keeping the
    parameters and zeroing the momentum. Accuracy is probed every
    ``cfg.eval_every`` updates on the first ``cfg.eval_size`` test images
    with deterministic hidden activations. Returns a dict of aligned arrays:
    update, accuracy, reward_rate, momentum_on, plus the initial accuracy
    under key accuracy0.

    ``stop_at`` suspends the run after that many updates and attaches the
    full training state under key ``state``; feeding that dict back in as
    ``resume_state`` continues the run bit for bit where it stopped. A
    resumed run may request a different ``mode``: the parameters carry over
    and the momentum starts from zero, exactly as with ``switch_at``.
    """
    cfg = cfg or MnistConfig()
    if switch_at is not None and not 0 < switch_at < cfg.n_updates:
        raise ValueError("switch_at must fall inside the run")
    if switch_at is not None and resume_state is not None:
        raise ValueError(
            "switch_at cannot be combined with resume_state; "
            "pass the new mode instead")
    if stop_at is not None:
        if not 0 < stop_at <= cfg.n_updates:
            raise ValueError("stop_at must fall inside the run")
        if stop_at % cfg.eval_every:
            raise ValueError("stop_at must be a multiple of eval_every")
    train_images = flatten_images(train_images)
    test_images = flatten_images(test_images)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    test_labels = np.asarray(test_labels, dtype=np.int64)
    eval_images = test_images[: cfg.eval_size]
    eval_labels = test_labels[: cfg.eval_size]

    init_ss, net_ss, samp_ss, data_ss = np.random.SeedSequence(seed).spawn(4)
    net_rng = np.random.default_rng(net_ss)
    samp_rng = np.random.default_rng(samp_ss)
    picks = np.random.default_rng(data_ss).integers(
        0, train_images.shape[0], size=cfg.n_updates
    )
    n_checks = cfg.n_updates // cfg.eval_every

    if resume_state is None:
        net = perceptron.PerceptronNet(
            784, cfg.n_hidden, 10,
            init_scale=cfg.init_scale, rng=np.random.default_rng(init_ss),
        )
        accuracy0 = perceptron.evaluate(net, eval_images, eval_labels)
        out = {
            "update": np.zeros(n_checks, dtype=np.int64),
            "accuracy": np.zeros(n_checks),
            "reward_rate": np.zeros(n_checks),
            "momentum_on": np.zeros(n_checks, dtype=np.int64),
            "theta_snap": np.zeros((n_checks, 4)),
            "accuracy0": accuracy0,
        }
        start = 0
        reward_acc = 0
    else:
        st = resume_state
        if st["seed"] != seed or st["n_updates"] != cfg.n_updates:
            raise ValueError("resume state does not match this run")
        net = perceptron.PerceptronNet(
            784, cfg.n_hidden, 10, theta=np.asarray(st["theta"], dtype=float),
        )
        net.gamma[:] = np.asarray(st["gamma"], dtype=float)
        if mode != st["mode"]:
            perceptron.reset_momentum(net)
        net_rng.bit_generator.state = st["net_rng"]
        samp_rng.bit_generator.state = st["samp_rng"]
        out = {
            "update": np.asarray(st["out_update"], dtype=np.int64).copy(),
            "accuracy": np.asarray(st["out_accuracy"], dtype=float).copy(),
            "reward_rate": np.asarray(st["out_reward_rate"], dtype=float).copy(),
            "momentum_on": np.asarray(st["out_momentum_on"], dtype=np.int64).copy(),
            "theta_snap": np.asarray(st["out_theta_snap"], dtype=float)
            .reshape(n_checks, 4).copy(),
            "accuracy0": float(st["accuracy0"]),
        }
        start = int(st["t"])
        reward_acc = int(st["reward_acc"])
    end = cfg.n_updates if stop_at is None else stop_at
    if end <= start:
        raise ValueError("stop_at must lie beyond the resume point")

    sampler = sampler_for_mode(cfg, mode)
    momentum_on = mode == "hamiltonian"
    grad = np.empty(net.n_params)

    for t in range(start, end):
        if switch_at is not None and t == switch_at:
            sampler = sampler_for_mode(cfg, switch_to)
            momentum_on = switch_to == "hamiltonian"
            perceptron.reset_momentum(net)
        image = train_images[picks[t]]
        hidden_z, probs, winner = perceptron.forward(net, image, net_rng)
        r = perceptron.immediate_reward(winner, int(train_labels[picks[t]]))
        reward_acc += r
        perceptron.immediate_gradient(
            net, image, hidden_z, perceptron.one_hot(winner, 10), r,
            f_output=probs, out=grad,
        )
        try:
            perceptron.apply_update(net, grad, sampler, cfg.temperature,
                                    samp_rng)
        except ValueError as err:
            # The sampler state refuses non-finite values; report the
            # update index at which the run diverged.
            raise NonFiniteSampleError(t + 1) from err
        if (t + 1) % cfg.eval_every == 0:
            if not np.all(np.isfinite(net.theta)):
                raise NonFiniteSampleError(t + 1)
            k = t // cfg.eval_every
            out["update"][k] = t + 1
            out["accuracy"][k] = perceptron.evaluate(net, eval_images, eval_labels)
            out["reward_rate"][k] = reward_acc / cfg.eval_every
            out["momentum_on"][k] = int(momentum_on)
            out["theta_snap"][k] = net.theta[:4]
            reward_acc = 0
    if end < cfg.n_updates:
        out["state"] = {
            "t": end,
            "seed": seed,
            "n_updates": cfg.n_updates,
            "mode": switch_to if switch_at is not None and switch_at < end else mode,
            "theta": net.theta.copy(),
            "gamma": net.gamma.copy(),
            "net_rng": net_rng.bit_generator.state,
            "samp_rng": samp_rng.bit_generator.state,
            "reward_acc": reward_acc,
            "accuracy0": out["accuracy0"],
            "out_update": out["update"].copy(),
            "out_accuracy": out["accuracy"].copy(),
            "out_reward_rate": out["reward_rate"].copy(),
            "out_momentum_on": out["momentum_on"].copy(),
            "out_theta_snap": out["theta_snap"].copy(),
        }
    return out
