"""Reward-modulated gradient estimation for plastic synapses.

An eligibility trace per synapse accumulates the spike-timing term
y_pre * (z_post - f_post) with exponential forgetting. Multiplying the
trace by the instantaneous reward gives the drift estimate fed to the
samplers; a Gaussian prior contributes -(theta - mu)/sigma^2 on top.
Parameter changes can be clipped per update and boxed to an interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

__all__ = [
    "EligibilityConfig",
    "PriorConfig",
    "ClipConfig",
    "eligibility_step",
    "reward_gradient",
    "prior_gradient",
    "clip_and_apply",
    "total_drift",
    "ESTIMATOR_WINDOW_TAU_G",
]

# Window length of the batched gradient estimator this online rule is the
# limit of. The rule below is exactly that tau_g -> 0 limit; no windowed
# variant is implemented, the constant documents the omission.
ESTIMATOR_WINDOW_TAU_G = 0.0


@dataclass(frozen=True)
class EligibilityConfig:
    """tau_e is the reward discount horizon in seconds; the multiplicative
    flag scales increments by the current weight (used with the exponential
    weight mapping, where dw/dtheta is proportional to w)."""

    tau_e: float
    multiplicative: bool = False

    def __post_init__(self) -> None:
        if not (self.tau_e > 0.0 and math.isfinite(self.tau_e)):
            raise ValueError(f"tau_e must be positive and finite, got {self.tau_e}")


@dataclass(frozen=True)
class PriorConfig:
    """Gaussian prior over theta, or uninformative (zero gradient)."""

    kind: str = "gaussian"
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "uninformative"):
            raise ValueError(f"prior kind must be gaussian or uninformative, got {self.kind!r}")
        if self.kind == "gaussian" and not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"gaussian prior requires sigma > 0, got {self.sigma}")


@dataclass(frozen=True)
class ClipConfig:
    """Per-update step clip and box bounds on theta. Either control can be
    disabled by passing infinity."""

    max_step: float = math.inf
    theta_min: float = -math.inf
    theta_max: float = math.inf

    def __post_init__(self) -> None:
        if self.max_step <= 0.0:
            raise ValueError(f"max_step must be > 0, got {self.max_step}")
        if not self.theta_min <= self.theta_max:
            raise ValueError(
                f"empty theta bounds [{self.theta_min}, {self.theta_max}]"
            )


def eligibility_step(e, w, y_pre, z_post, f_post, cfg: EligibilityConfig, dt: float):
    """One tick of the trace: e' = e*(1 - dt/tau_e) + scale*y_pre*(z_post - f_post).

    scale is w under the multiplicative form, 1 otherwise. The spike term
    carries no extra dt factor; the sampler's rate constant absorbs the time
    scale. Works elementwise on arrays.
    """
    e = np.asarray(e, dtype=np.float64)
    z = np.asarray(z_post, dtype=np.float64)
    f = np.asarray(f_post, dtype=np.float64)
    if np.any(f < 0.0) or np.any(f > 1.0):
        raise ValueError("f_post must lie in [0, 1]")
    scale = np.asarray(w, dtype=np.float64) if cfg.multiplicative else 1.0
    out = e * (1.0 - dt / cfg.tau_e) + scale * np.asarray(y_pre, dtype=np.float64) * (z - f)
    return out if out.ndim else float(out)


def reward_gradient(e, r):
    """Drift estimate from the trace: r * e."""
    out = np.asarray(r, dtype=np.float64) * np.asarray(e, dtype=np.float64)
    return out if out.ndim else float(out)


def prior_gradient(theta, cfg: PriorConfig):
    """Score of the prior at theta: -(theta - mu)/sigma^2, or 0 when uninformative."""
    theta = np.asarray(theta, dtype=np.float64)
    if cfg.kind == "uninformative":
        out = np.zeros_like(theta)
    else:
        out = -(theta - cfg.mu) / (cfg.sigma * cfg.sigma)
    return out if out.ndim else float(out)


def total_drift(e, r, theta, prior: PriorConfig):
    """reward_gradient + prior_gradient, the full log-posterior score estimate."""
    out = reward_gradient(e, r) + prior_gradient(theta, prior)
    return out if np.ndim(out) else float(out)


def clip_and_apply(theta, delta, cfg: ClipConfig):
    """theta' = clamp(theta + clamp(delta, +-max_step), [theta_min, theta_max])."""
    theta = np.asarray(theta, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    step = np.clip(delta, -cfg.max_step, cfg.max_step)
    out = np.clip(theta + step, cfg.theta_min, cfg.theta_max)
    return out if out.ndim else float(out)
