"""Coupled stochastic-differential-equation samplers over parameter vectors.

Three integrators share one parameter/momentum state:

* ``langevin_step``: overdamped dynamics. theta drifts along the score and
  receives isotropic noise scaled by the temperature.
* ``hamiltonian_step``: underdamped dynamics with friction. A momentum
  variable integrates the score; theta follows the momentum. The momentum
  update runs first and the parameter moves with the updated momentum.
* ``generalized_step``: a two-block skew-symmetric/diffusive form that
  contains both of the above as parameter choices.

All steps are pure functions from state to state. Randomness enters only
through explicit noise arguments so callers own the RNG stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ParameterState",
    "SamplerConfig",
    "TemperatureSchedule",
    "langevin_step",
    "hamiltonian_step",
    "generalized_step",
    "temperature_at",
    "NonFiniteSampleError",
]


class NonFiniteSampleError(RuntimeError):
    """A sampler chain produced a non-finite value; ``step`` is 1-based."""

    def __init__(self, step: int):
        super().__init__(f"non-finite sample at step {step}")
        self.step = step


@dataclass
class ParameterState:
    """Sampler state: parameters ``theta`` and conjugate momenta ``gamma``.

    Both arrays always have the same shape. Langevin dynamics simply never
    touch ``gamma``.
    """

    theta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self) -> None:
        self.theta = np.asarray(self.theta, dtype=np.float64)
        self.gamma = np.asarray(self.gamma, dtype=np.float64)
        if self.theta.shape != self.gamma.shape:
            raise ValueError(
                f"theta shape {self.theta.shape} != gamma shape {self.gamma.shape}"
            )
        if not np.all(np.isfinite(self.theta)) or not np.all(np.isfinite(self.gamma)):
            raise ValueError("non-finite values in sampler state")

    @classmethod
    def zeros(cls, n: int) -> "ParameterState":
        return cls(theta=np.zeros(n), gamma=np.zeros(n))

    def copy(self) -> "ParameterState":
        return ParameterState(theta=self.theta.copy(), gamma=self.gamma.copy())


_MODES = ("langevin", "hamiltonian", "generalized")


@dataclass(frozen=True)
class SamplerConfig:
    """Integrator constants.

    ``a`` couples momentum and parameters, ``b`` is the momentum friction,
    ``c`` is the direct (overdamped) drift rate in the generalized form, and
    ``beta`` is the Langevin drift rate. ``dt`` is the integrator step in
    seconds. Mode-specific validity:

    * langevin: requires beta > 0; a, b, c must be 0.
    * hamiltonian: requires a > 0, b > 0, c == 0, and b*dt <= 1
      (b*dt == 1 is the memoryless edge case and is allowed).
    * generalized: requires a, b, c >= 0 and b > 0 or c > 0, otherwise the
      dynamics have no diffusive part and no unique stationary law.
    """

    mode: str
    dt: float
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ValueError(f"unknown sampler mode {self.mode!r}; expected one of {_MODES}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        for name in ("a", "b", "c", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.mode == "langevin":
            if self.beta <= 0.0:
                raise ValueError("langevin mode requires beta > 0")
            if self.a != 0.0 or self.b != 0.0 or self.c != 0.0:
                raise ValueError("langevin mode requires a = b = c = 0")
        elif self.mode == "hamiltonian":
            if self.a <= 0.0 or self.b <= 0.0:
                raise ValueError("hamiltonian mode requires a > 0 and b > 0")
            if self.c != 0.0:
                raise ValueError("hamiltonian mode requires c = 0")
            if self.b * self.dt > 1.0 + 1e-12:
                raise ValueError(
                    f"b*dt = {self.b * self.dt:.6g} > 1 overshoots the friction "
                    "(momentum decay factor would be negative)"
                )
        else:
            if self.b == 0.0 and self.c == 0.0:
                raise ValueError("generalized mode requires b > 0 or c > 0")


_SCHEDULE_KINDS = ("constant", "linear", "exponential")


@dataclass(frozen=True)
class TemperatureSchedule:
    """Deterministic temperature trajectory T(t).

    kinds:
      constant     T(t) = T0
      linear       T falls linearly from T0 to T_final over ``duration``
      exponential  T decays geometrically from T0 to T_final over ``duration``

    Cooling schedules clamp at T_final afterwards. T_final = 0 is allowed
    for linear cooling (zero-temperature limit); the exponential form needs
    T_final > 0 since its trajectory is a ratio.
    """

    kind: str
    T0: float
    T_final: float = 0.0
    duration: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _SCHEDULE_KINDS:
            raise ValueError(
                f"unknown schedule kind {self.kind!r}; expected one of {_SCHEDULE_KINDS}"
            )
        if not (math.isfinite(self.T0) and self.T0 >= 0.0):
            raise ValueError(f"T0 must be finite and >= 0, got {self.T0}")
        if self.kind == "constant":
            return
        if not (math.isfinite(self.T_final) and self.T_final >= 0.0):
            raise ValueError(f"T_final must be finite and >= 0, got {self.T_final}")
        if self.T_final > self.T0:
            raise ValueError("cooling schedule requires T_final <= T0")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ValueError("cooling schedule requires duration > 0")
        if self.kind == "exponential" and (self.T_final <= 0.0 or self.T0 <= 0.0):
            raise ValueError("exponential schedule requires T0 > 0 and T_final > 0")


def temperature_at(schedule: TemperatureSchedule, t: float) -> float:
    """Evaluate a schedule at time ``t`` (seconds, t >= 0)."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if schedule.kind == "constant":
        return schedule.T0
    if t >= schedule.duration:
        return schedule.T_final
    frac = t / schedule.duration
    if schedule.kind == "linear":
        return schedule.T0 - (schedule.T0 - schedule.T_final) * frac
    return schedule.T0 * (schedule.T_final / schedule.T0) ** frac


def _check_step_args(
    state: ParameterState, grad: np.ndarray, temperature: float, noise: np.ndarray
) -> np.ndarray:
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.theta.shape:
        raise ValueError(f"gradient shape {grad.shape} != state shape {state.theta.shape}")
    if not (math.isfinite(temperature) and temperature >= 0.0):
        raise ValueError(f"temperature must be finite and >= 0, got {temperature}")
    if noise.shape != state.theta.shape:
        raise ValueError(f"noise shape {noise.shape} != state shape {state.theta.shape}")
    return grad


def langevin_step(
    state: ParameterState,
    grad_theta: np.ndarray,
    cfg: SamplerConfig,
    temperature: float,
    noise: np.ndarray,
) -> ParameterState:
    """One overdamped update.

        theta' = theta + beta*dt*grad + sqrt(2*T*beta*dt) * noise

    ``noise`` is a standard-normal draw of the parameter shape; at T = 0 the
    noise term vanishes and the update is plain gradient ascent. ``gamma``
    passes through untouched.
    """
    if cfg.mode != "langevin":
        raise ValueError(f"langevin_step needs a langevin config, got mode {cfg.mode!r}")
    noise = np.asarray(noise, dtype=np.float64)
    grad = _check_step_args(state, grad_theta, temperature, noise)
    sigma = math.sqrt(2.0 * temperature * cfg.beta * cfg.dt)
    theta = state.theta + cfg.beta * cfg.dt * grad + sigma * noise
    return ParameterState(theta=theta, gamma=state.gamma.copy())


def hamiltonian_step(
    state: ParameterState,
    grad_theta: np.ndarray,
    cfg: SamplerConfig,
    temperature: float,
    noise: np.ndarray,
) -> ParameterState:
    """One underdamped update with friction.

        gamma' = (1 - b*dt) * gamma + a*dt*grad + sqrt(2*T*b*dt) * noise
        theta' = theta + a*dt*gamma'

    The noise enters the momentum line only; at b*dt = 1 the previous
    momentum is forgotten entirely within one step.
    """
    if cfg.mode != "hamiltonian":
        raise ValueError(f"hamiltonian_step needs a hamiltonian config, got mode {cfg.mode!r}")
    noise = np.asarray(noise, dtype=np.float64)
    grad = _check_step_args(state, grad_theta, temperature, noise)
    sigma = math.sqrt(2.0 * temperature * cfg.b * cfg.dt)
    gamma = (1.0 - cfg.b * cfg.dt) * state.gamma + cfg.a * cfg.dt * grad + sigma * noise
    theta = state.theta + cfg.a * cfg.dt * gamma
    return ParameterState(theta=theta, gamma=gamma)


def generalized_step(
    state: ParameterState,
    grad_theta: np.ndarray,
    cfg: SamplerConfig,
    temperature: float,
    noise_theta: np.ndarray,
    noise_gamma: np.ndarray,
    grad_gamma: Optional[np.ndarray] = None,
) -> ParameterState:
    """One update of the two-block dynamics.

        gamma' = gamma + dt*(a*grad_theta + b*grad_gamma)      + sqrt(2*T*b*dt) * noise_gamma
        theta' = theta + dt*(-a*grad_gamma' + c*grad_theta)    + sqrt(2*T*c*dt) * noise_theta

    ``grad_gamma`` is the momentum-prior score at the current momentum. When
    omitted the built-in unit-Gaussian prior is used (score -gamma) and the
    parameter line's coupling term re-evaluates it at the updated momentum
    (grad_gamma' = -gamma'), which makes the reductions exact:

    * a = b = 0 with c = beta reproduces ``langevin_step`` bit for bit;
    * c = 0 with the built-in prior reproduces ``hamiltonian_step`` bit for
      bit.

    A user-supplied ``grad_gamma`` vector is treated as constant across the
    step (plain Euler-Maruyama on both lines).
    """
    if cfg.mode != "generalized":
        raise ValueError(f"generalized_step needs a generalized config, got mode {cfg.mode!r}")
    noise_theta = np.asarray(noise_theta, dtype=np.float64)
    noise_gamma = np.asarray(noise_gamma, dtype=np.float64)
    grad = _check_step_args(state, grad_theta, temperature, noise_theta)
    if noise_gamma.shape != state.theta.shape:
        raise ValueError(
            f"noise_gamma shape {noise_gamma.shape} != state shape {state.theta.shape}"
        )
    gaussian_prior = grad_gamma is None
    if not gaussian_prior:
        g_gamma = np.asarray(grad_gamma, dtype=np.float64)
        if g_gamma.shape != state.theta.shape:
            raise ValueError(
                f"grad_gamma shape {g_gamma.shape} != state shape {state.theta.shape}"
            )

    # Term-by-term arithmetic mirrors the specialized steps so the stated
    # reductions hold at the bit level, not just algebraically.
    sig_g = math.sqrt(2.0 * temperature * cfg.b * cfg.dt)
    if gaussian_prior:
        # b * grad_gamma = -b*gamma folds into a (1 - b*dt) decay factor.
        gamma = (1.0 - cfg.b * cfg.dt) * state.gamma + cfg.a * cfg.dt * grad + sig_g * noise_gamma
        coupling = gamma  # -grad_gamma evaluated at the updated momentum
    else:
        gamma = state.gamma + cfg.a * cfg.dt * grad + cfg.b * cfg.dt * g_gamma + sig_g * noise_gamma
        coupling = -g_gamma

    sig_t = math.sqrt(2.0 * temperature * cfg.c * cfg.dt)
    theta = state.theta + cfg.a * cfg.dt * coupling + cfg.c * cfg.dt * grad + sig_t * noise_theta
    return ParameterState(theta=theta, gamma=gamma)
