"""Three-layer stochastic perceptron for the digit experiment: Bernoulli
hidden units, sigmoid output scores, winner-take-all readout, and the
immediate-reward gradient that feeds the samplers."""

from __future__ import annotations

import numpy as np

from .samplers import (
    ParameterState,
    SamplerConfig,
    generalized_step,
    hamiltonian_step,
    langevin_step,
)


def _sigmoid(u: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-u))


class PerceptronNet:
    """Parameters of a fully connected in-hidden-out net as one flat vector.

    Weights use the identity mapping, so entries carry their own sign. The
    momentum vector starts at zero and is only touched by momentum-bearing
    sampler modes.
    """

    def __init__(self, n_in=784, n_hidden=30, n_out=10, *, theta=None,
                 init_scale=0.1, rng=None):
        if min(n_in, n_hidden, n_out) < 1:
            raise ValueError("all three layer sizes must be positive")
        self.n_in = int(n_in)
        self.n_hidden = int(n_hidden)
        self.n_out = int(n_out)
        n_w1 = self.n_hidden * self.n_in
        n_w2 = self.n_out * self.n_hidden
        self.n_params = n_w1 + self.n_hidden + n_w2 + self.n_out
        self._s_w1 = slice(0, n_w1)
        self._s_b1 = slice(n_w1, n_w1 + self.n_hidden)
        self._s_w2 = slice(n_w1 + self.n_hidden, n_w1 + self.n_hidden + n_w2)
        self._s_b2 = slice(n_w1 + self.n_hidden + n_w2, self.n_params)
        if theta is not None:
            theta = np.array(theta, dtype=np.float64)
            if theta.shape != (self.n_params,):
                raise ValueError(
                    f"theta must have shape ({self.n_params},), got {theta.shape}"
                )
        elif rng is not None:
            theta = float(init_scale) * rng.standard_normal(self.n_params)
        else:
            theta = np.zeros(self.n_params)
        self.theta = theta
        self.gamma = np.zeros(self.n_params)

    @property
    def w1(self) -> np.ndarray:
        return self.theta[self._s_w1].reshape(self.n_hidden, self.n_in)

    @property
    def b1(self) -> np.ndarray:
        return self.theta[self._s_b1]

    @property
    def w2(self) -> np.ndarray:
        return self.theta[self._s_w2].reshape(self.n_out, self.n_hidden)

    @property
    def b2(self) -> np.ndarray:
        return self.theta[self._s_b2]


def forward(net: PerceptronNet, image: np.ndarray, rng):
    """One stochastic pass. Returns (hidden_z, output_probs, winner).

    Hidden bits are Bernoulli draws from their sigmoid activations; output
    scores are sigmoids of the weighted hidden bits; the winner is the
    argmax with ties going to the lowest index.
    """
    f_hidden = _sigmoid(net.w1 @ image + net.b1)
    hidden_z = (rng.random(net.n_hidden) < f_hidden).astype(np.float64)
    output_probs = _sigmoid(net.w2 @ hidden_z + net.b2)
    winner = int(np.argmax(output_probs))
    return hidden_z, output_probs, winner


def immediate_reward(winner: int, label: int) -> int:
    """1 when the winning output index is the target class, else 0."""
    return int(winner == label)


def one_hot(index: int, n: int) -> np.ndarray:
    vec = np.zeros(n)
    vec[index] = 1.0
    return vec


def immediate_gradient(net, image, hidden_z, output_z, r, *,
                       f_hidden=None, f_output=None, out=None):
    """Per-parameter score r * y_pre * (z_post - f_post) as a flat vector.

    ``output_z`` is the realized output activity (the winner's one-hot
    vector). Bias entries use y_pre = 1. Pass ``f_hidden``/``f_output`` to
    reuse activations from the forward pass; ``out`` to reuse a buffer.
    """
    if out is None:
        out = np.empty(net.n_params)
    if r == 0:
        out.fill(0.0)
        return out
    image = np.asarray(image, dtype=np.float64)
    if f_hidden is None:
        f_hidden = _sigmoid(net.w1 @ image + net.b1)
    if f_output is None:
        f_output = _sigmoid(net.w2 @ hidden_z + net.b2)
    d_hidden = r * (hidden_z - f_hidden)
    d_output = r * (output_z - f_output)
    np.multiply.outer(
        d_hidden, image, out=out[net._s_w1].reshape(net.n_hidden, net.n_in)
    )
    out[net._s_b1] = d_hidden
    np.multiply.outer(
        d_output, hidden_z, out=out[net._s_w2].reshape(net.n_out, net.n_hidden)
    )
    out[net._s_b2] = d_output
    return out


def apply_update(net: PerceptronNet, grad, cfg: SamplerConfig, temperature, rng):
    """Advance the flat parameter vector by one sampler step.

    Noise draws come from ``rng`` in a fixed order (theta block first for
    the two-block mode). Non-finite results raise through the state
    constructor, which is the abort signal the harness catches.
    """
    state = ParameterState(theta=net.theta, gamma=net.gamma)
    if cfg.mode == "langevin":
        new = langevin_step(state, grad, cfg, temperature,
                            rng.standard_normal(net.n_params))
    elif cfg.mode == "hamiltonian":
        new = hamiltonian_step(state, grad, cfg, temperature,
                               rng.standard_normal(net.n_params))
    else:
        new = generalized_step(state, grad, cfg, temperature,
                               rng.standard_normal(net.n_params),
                               rng.standard_normal(net.n_params))
    net.theta = new.theta
    net.gamma = new.gamma
    return net


def reset_momentum(net: PerceptronNet) -> None:
    """Zero the momentum block, as a mode switch requires; theta is kept."""
    net.gamma = np.zeros(net.n_params)


def evaluate(net: PerceptronNet, images, labels) -> float:
    """Classification accuracy with deterministic hidden activations.

    Hidden units contribute their firing probabilities instead of sampled
    bits, so repeated calls on the same parameters agree exactly.
    """
    h = _sigmoid(images @ net.w1.T + net.b1)
    scores = h @ net.w2.T + net.b2
    winners = np.argmax(scores, axis=1)
    return float(np.mean(winners == np.asarray(labels)))
