"""Stochastic spike-response network engine.

Neurons are point units: membrane potential u = sum(w * y) + phi, firing
probability sigma(u) gated by a hard refractory window, spikes drawn
Bernoulli per 1 ms tick. Postsynaptic potentials follow a double-exponential
kernel maintained as two decay accumulators per presynaptic source, shared
across that source's outgoing synapses and scaled per synapse by w.

The arrays in :class:`SpikingNetwork` are the single source of truth for
both simulation backends; everything here is plain numpy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "NeuronState",
    "Synapse",
    "PSPKernelParams",
    "HomeostasisParams",
    "SpikingNetwork",
    "psp_kernel",
    "psp_peak_time",
    "membrane_potential",
    "firing_probability",
    "homeostasis_step",
    "step_network",
    "build_layered_network",
    "build_reaching_network",
    "ReachingLayout",
]

EXCITATORY = 0
INHIBITORY = 1

# Mapping kinds from plastic parameter theta to synaptic weight w.
MAP_IDENTITY = 0
MAP_EXP_SHIFT = 1

_FRESH_RHO_TICKS = 10**9  # "long since last spike": never blocks


@dataclass(frozen=True)
class PSPKernelParams:
    """Double-exponential kernel time constants, seconds."""

    tau_m: float
    tau_r: float

    def __post_init__(self) -> None:
        if not (self.tau_m > self.tau_r > 0.0):
            raise ValueError(
                f"PSP kernel requires tau_m > tau_r > 0, got tau_m={self.tau_m}, tau_r={self.tau_r}"
            )


@dataclass(frozen=True)
class HomeostasisParams:
    """Slow bias regulation toward a target rate.

    Per tick the bias moves by (nu0*dt - spike)/tau_theta, so the drift
    vanishes exactly when the neuron fires at nu0.
    """

    tau_theta: float = 50.0
    nu0: float = 5.0
    enabled: bool = False

    def __post_init__(self) -> None:
        if self.tau_theta <= 0.0:
            raise ValueError(f"tau_theta must be > 0, got {self.tau_theta}")
        if self.nu0 < 0.0:
            raise ValueError(f"nu0 must be >= 0, got {self.nu0}")


@dataclass
class NeuronState:
    """Point-neuron snapshot used by the scalar reference operations."""

    membrane_u: float = 0.0
    bias_phi: float = 0.0
    time_since_spike_rho: float = math.inf
    kind: int = EXCITATORY
    refractory_t_ref: float = 0.005


@dataclass
class Synapse:
    """One connection record, as serialized in topology dumps."""

    pre: int
    post: int
    weight_w: float
    theta: float = 0.0
    eligibility_e: float = 0.0
    plastic: bool = False
    mapping: int = MAP_IDENTITY


def psp_kernel(t, params: PSPKernelParams):
    """Closed-form kernel value: eps(t) = tau_r/(tau_m-tau_r) * (e^(-t/tau_m) - e^(-t/tau_r)).

    Vanishes at t=0, rises briefly, decays with tau_m. The incremental
    two-accumulator form used by the engine reproduces this exactly at tick
    resolution because each accumulator decays by the exact per-tick factor.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("psp_kernel requires t >= 0")
    c = params.tau_r / (params.tau_m - params.tau_r)
    out = c * (np.exp(-t / params.tau_m) - np.exp(-t / params.tau_r))
    return out if out.ndim else float(out)


def psp_peak_time(params: PSPKernelParams) -> float:
    """Argmax of the kernel: tau_m*tau_r/(tau_m-tau_r) * ln(tau_m/tau_r)."""
    return (
        params.tau_m
        * params.tau_r
        / (params.tau_m - params.tau_r)
        * math.log(params.tau_m / params.tau_r)
    )


def membrane_potential(neuron: NeuronState, incoming: Iterable[Tuple[float, float]]) -> float:
    """u = sum over synapses of w * y, plus the bias."""
    u = neuron.bias_phi
    for w, y in incoming:
        u += w * y
    return u


def firing_probability(u: float, rho: float, t_ref: float, dt: float) -> float:
    """Per-tick spike probability: sigma(u) once the refractory window has passed.

    The gate opens when rho >= t_ref; rho is compared with half-tick slack so
    accumulated float time cannot miss the boundary tick. An inter-spike
    interval of exactly t_ref is therefore possible (at t_ref = 5 ms and a
    1 ms tick the ceiling is 200 Hz, i.e. 60 spikes in a 300 ms window).
    """
    if rho < t_ref - 0.5 * dt:
        return 0.0
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    ex = math.exp(u)
    return ex / (1.0 + ex)


def homeostasis_step(phi: float, spiked: bool, params: HomeostasisParams, dt: float) -> float:
    """One tick of bias regulation; spikes count 1, the target contributes nu0*dt."""
    return phi + (params.nu0 * dt - (1.0 if spiked else 0.0)) / params.tau_theta


class SpikingNetwork:
    """Array-of-structs network state shared by both simulation backends.

    Sources are indexed 0..n_inputs-1 (external afferents) followed by the
    network's own neurons. Each source carries one shared PSP trace pair.
    Synapses are split into a fixed list (static weights) and a plastic list
    (theta, momentum, eligibility, derived weight).
    """

    def __init__(
        self,
        n_inputs: int,
        n_neurons: int,
        dt: float = 1e-3,
        *,
        input_kernel: PSPKernelParams,
        neuron_kernels: Sequence[PSPKernelParams],
        kinds: Sequence[int],
        phi: Sequence[float],
        t_ref: Sequence[float],
        homeostasis: HomeostasisParams = HomeostasisParams(),
        homeo_mask: Optional[Sequence[bool]] = None,
        mapping_kind: int = MAP_IDENTITY,
        theta0: float = 0.0,
        silence_negative_theta: bool = False,
    ) -> None:
        if n_inputs < 0 or n_neurons <= 0:
            raise ValueError("need n_inputs >= 0 and n_neurons > 0")
        if dt <= 0:
            raise ValueError("dt must be > 0")
        self.n_inputs = int(n_inputs)
        self.n_neurons = int(n_neurons)
        self.n_sources = self.n_inputs + self.n_neurons
        self.dt = float(dt)

        kinds = np.asarray(kinds, dtype=np.int8)
        if kinds.shape != (n_neurons,):
            raise ValueError("kinds must have one entry per neuron")
        self.kind = kinds

        tau_m = np.empty(self.n_sources)
        tau_r = np.empty(self.n_sources)
        tau_m[: self.n_inputs] = input_kernel.tau_m
        tau_r[: self.n_inputs] = input_kernel.tau_r
        if len(neuron_kernels) != n_neurons:
            raise ValueError("neuron_kernels must have one entry per neuron")
        for j, k in enumerate(neuron_kernels):
            tau_m[self.n_inputs + j] = k.tau_m
            tau_r[self.n_inputs + j] = k.tau_r
        self.tau_m_src = tau_m
        self.tau_r_src = tau_r
        self.decay_m = np.exp(-self.dt / tau_m)
        self.decay_r = np.exp(-self.dt / tau_r)
        self.cnorm = tau_r / (tau_m - tau_r)
        self.trace_m = np.zeros(self.n_sources)
        self.trace_r = np.zeros(self.n_sources)

        self.phi = np.asarray(phi, dtype=np.float64).copy()
        if self.phi.shape != (n_neurons,):
            raise ValueError("phi must have one entry per neuron")
        t_ref = np.asarray(t_ref, dtype=np.float64)
        if t_ref.shape != (n_neurons,):
            raise ValueError("t_ref must have one entry per neuron")
        self.t_ref = t_ref.copy()
        self.tref_ticks = np.rint(t_ref / dt).astype(np.int64)
        self.rho_ticks = np.full(n_neurons, _FRESH_RHO_TICKS, dtype=np.int64)

        self.homeostasis = homeostasis
        if homeo_mask is None:
            homeo_mask = np.zeros(n_neurons, dtype=bool)
        self.homeo_mask = np.asarray(homeo_mask, dtype=bool).copy()

        # Fixed synapses (weights never change).
        self.fpre = np.zeros(0, dtype=np.int32)
        self.fpost = np.zeros(0, dtype=np.int32)
        self.fw = np.zeros(0, dtype=np.float64)

        # Plastic synapses.
        self.ppre = np.zeros(0, dtype=np.int32)
        self.ppost = np.zeros(0, dtype=np.int32)
        self.theta = np.zeros(0, dtype=np.float64)
        self.gamma = np.zeros(0, dtype=np.float64)
        self.elig = np.zeros(0, dtype=np.float64)
        self.w = np.zeros(0, dtype=np.float64)

        if mapping_kind not in (MAP_IDENTITY, MAP_EXP_SHIFT):
            raise ValueError(f"unknown mapping kind {mapping_kind}")
        self.mapping_kind = int(mapping_kind)
        self.theta0 = float(theta0)
        self.silence_negative_theta = bool(silence_negative_theta)

    # -- wiring ---------------------------------------------------------

    def set_fixed_synapses(self, pre, post, w) -> None:
        self.fpre = np.ascontiguousarray(pre, dtype=np.int32)
        self.fpost = np.ascontiguousarray(post, dtype=np.int32)
        self.fw = np.ascontiguousarray(w, dtype=np.float64)
        self._check_indices(self.fpre, self.fpost)

    def set_plastic_synapses(self, pre, post, theta) -> None:
        self.ppre = np.ascontiguousarray(pre, dtype=np.int32)
        self.ppost = np.ascontiguousarray(post, dtype=np.int32)
        self.theta = np.ascontiguousarray(theta, dtype=np.float64)
        n = self.theta.shape[0]
        self.gamma = np.zeros(n)
        self.elig = np.zeros(n)
        self.w = np.zeros(n)
        self._check_indices(self.ppre, self.ppost)
        self.refresh_weights()

    def _check_indices(self, pre, post) -> None:
        if pre.shape != post.shape:
            raise ValueError("pre/post index arrays must match in length")
        if pre.size and (pre.min() < 0 or pre.max() >= self.n_sources):
            raise ValueError("presynaptic index out of range")
        if post.size and (post.min() < 0 or post.max() >= self.n_neurons):
            raise ValueError("postsynaptic index out of range")

    def refresh_weights(self) -> None:
        """Recompute w from theta under the configured mapping."""
        if self.mapping_kind == MAP_IDENTITY:
            np.copyto(self.w, self.theta)
        else:
            np.exp(self.theta - self.theta0, out=self.w)
            if self.silence_negative_theta:
                self.w[self.theta < 0.0] = 0.0

    @property
    def n_plastic(self) -> int:
        return int(self.theta.shape[0])

    @property
    def rho_seconds(self) -> np.ndarray:
        return self.rho_ticks * self.dt

    def neuron_state(self, j: int) -> NeuronState:
        return NeuronState(
            membrane_u=float(self.phi[j]),
            bias_phi=float(self.phi[j]),
            time_since_spike_rho=float(self.rho_ticks[j] * self.dt),
            kind=int(self.kind[j]),
            refractory_t_ref=float(self.t_ref[j]),
        )

    def psp_values(self) -> np.ndarray:
        """Current kernel value per source: cnorm * (slow - fast accumulator)."""
        return self.cnorm * (self.trace_m - self.trace_r)

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        """Topology and full dynamic state, JSON-safe."""
        return {
            "n_inputs": self.n_inputs,
            "n_neurons": self.n_neurons,
            "dt": self.dt,
            "kinds": self.kind.tolist(),
            "tau_m_src": self.tau_m_src.tolist(),
            "tau_r_src": self.tau_r_src.tolist(),
            "phi": self.phi.tolist(),
            "t_ref": self.t_ref.tolist(),
            "rho_ticks": self.rho_ticks.tolist(),
            "trace_m": self.trace_m.tolist(),
            "trace_r": self.trace_r.tolist(),
            "homeostasis": {
                "tau_theta": self.homeostasis.tau_theta,
                "nu0": self.homeostasis.nu0,
                "enabled": self.homeostasis.enabled,
            },
            "homeo_mask": self.homeo_mask.tolist(),
            "mapping_kind": self.mapping_kind,
            "theta0": self.theta0,
            "silence_negative_theta": self.silence_negative_theta,
            "fixed_synapses": {
                "pre": self.fpre.tolist(),
                "post": self.fpost.tolist(),
                "w": self.fw.tolist(),
            },
            "plastic_synapses": {
                "pre": self.ppre.tolist(),
                "post": self.ppost.tolist(),
                "theta": self.theta.tolist(),
                "gamma": self.gamma.tolist(),
                "eligibility": self.elig.tolist(),
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpikingNetwork":
        n_in = d["n_inputs"]
        n_neu = d["n_neurons"]
        tau_m = d["tau_m_src"]
        tau_r = d["tau_r_src"]
        input_kernel = (
            PSPKernelParams(tau_m[0], tau_r[0]) if n_in else PSPKernelParams(0.02, 0.002)
        )
        neuron_kernels = [PSPKernelParams(tau_m[n_in + j], tau_r[n_in + j]) for j in range(n_neu)]
        h = d["homeostasis"]
        net = cls(
            n_in,
            n_neu,
            d["dt"],
            input_kernel=input_kernel,
            neuron_kernels=neuron_kernels,
            kinds=d["kinds"],
            phi=d["phi"],
            t_ref=d["t_ref"],
            homeostasis=HomeostasisParams(h["tau_theta"], h["nu0"], h["enabled"]),
            homeo_mask=d["homeo_mask"],
            mapping_kind=d["mapping_kind"],
            theta0=d["theta0"],
            silence_negative_theta=d["silence_negative_theta"],
        )
        fs = d["fixed_synapses"]
        net.set_fixed_synapses(fs["pre"], fs["post"], fs["w"])
        ps = d["plastic_synapses"]
        net.set_plastic_synapses(ps["pre"], ps["post"], ps["theta"])
        net.gamma[:] = ps["gamma"]
        net.elig[:] = ps["eligibility"]
        net.rho_ticks[:] = d["rho_ticks"]
        net.trace_m[:] = d["trace_m"]
        net.trace_r[:] = d["trace_r"]
        net.refresh_weights()
        return net

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, s: str) -> "SpikingNetwork":
        return cls.from_json_dict(json.loads(s))


def step_network(
    net: SpikingNetwork,
    input_spikes,
    dt: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    uniforms: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Advance the network by one tick; returns the neuron spike vector.

    Tick order: refractory clocks advance, PSP traces decay, input spikes
    enter their traces (contributing nothing this tick since the kernel
    starts at zero), membrane potentials and firing probabilities are
    computed, spikes are drawn, spikers' traces are bumped and their clocks
    reset, homeostasis adjusts masked biases.

    Exactly one of ``rng`` and ``uniforms`` must be given; ``uniforms`` is a
    length-n_neurons vector of U[0,1) draws, which is how the batch engine
    feeds the identical stream.
    """
    if dt is not None and abs(dt - net.dt) > 1e-15:
        raise ValueError(
            f"dt {dt} disagrees with the network tick {net.dt}; decay factors are precomputed"
        )
    if (rng is None) == (uniforms is None):
        raise ValueError("pass exactly one of rng or uniforms")
    z_in = np.asarray(input_spikes, dtype=bool)
    if z_in.shape != (net.n_inputs,):
        raise ValueError(f"input_spikes must have shape ({net.n_inputs},)")

    net.rho_ticks += 1
    net.trace_m *= net.decay_m
    net.trace_r *= net.decay_r
    if net.n_inputs:
        net.trace_m[: net.n_inputs] += z_in
        net.trace_r[: net.n_inputs] += z_in

    y = net.cnorm * (net.trace_m - net.trace_r)
    # Synaptic sums go into their own zeroed buffers before the bias joins,
    # so the rounding sequence matches the batch engines exactly.
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

    if uniforms is None:
        uniforms = rng.random(net.n_neurons)
    z = uniforms < f

    net.trace_m[net.n_inputs :] += z
    net.trace_r[net.n_inputs :] += z
    net.rho_ticks[z] = 0
    if net.homeostasis.enabled:
        h = net.homeo_mask
        net.phi[h] += (net.homeostasis.nu0 * net.dt - z[h]) / net.homeostasis.tau_theta
    return z


def build_layered_network(
    layer_sizes: Sequence[int],
    *,
    dt: float = 1e-3,
    bias: float = -3.0,
    t_ref: float = 0.005,
    input_kernel: PSPKernelParams = PSPKernelParams(0.02, 0.002),
    neuron_kernel: PSPKernelParams = PSPKernelParams(0.02, 0.002),
    theta_init: Optional[np.ndarray] = None,
) -> SpikingNetwork:
    """Feedforward fully connected net: layer_sizes[0] inputs, the rest neurons.

    All connections are plastic with the identity mapping (signed weights);
    theta_init must enumerate them layer by layer, presynaptic-major, or is
    zeros when omitted.
    """
    if len(layer_sizes) < 2:
        raise ValueError("need at least input and one neuron layer")
    n_in = layer_sizes[0]
    n_neu = sum(layer_sizes[1:])
    net = SpikingNetwork(
        n_in,
        n_neu,
        dt,
        input_kernel=input_kernel,
        neuron_kernels=[neuron_kernel] * n_neu,
        kinds=[EXCITATORY] * n_neu,
        phi=[bias] * n_neu,
        t_ref=[t_ref] * n_neu,
    )
    pre, post = [], []
    src_base = 0  # source index of the presynaptic layer's first unit
    post_base = 0  # neuron index of the postsynaptic layer's first unit
    for li in range(1, len(layer_sizes)):
        n_pre, n_post = layer_sizes[li - 1], layer_sizes[li]
        for i in range(n_pre):
            for j in range(n_post):
                pre.append(src_base + i)
                post.append(post_base + j)
        src_base = n_in + post_base  # next layer's sources are these neurons
        post_base += n_post
    n_syn = len(pre)
    theta = np.zeros(n_syn) if theta_init is None else np.asarray(theta_init, dtype=np.float64)
    if theta.shape != (n_syn,):
        raise ValueError(f"theta_init must have shape ({n_syn},)")
    net.set_plastic_synapses(pre, post, theta)
    return net


@dataclass(frozen=True)
class ReachingLayout:
    """Construction constants for the motor-cortex-like recurrent network."""

    n_exc: int = 100
    n_inh: int = 20
    n_afferents: int = 200
    n_input_receivers: int = 30
    n_control: int = 50
    p_ei: float = 0.575  # E -> I connection probability
    p_ie: float = 0.6
    p_ii: float = 0.55
    ee_pair_prob: float = 1.0  # plastic potential pairs exist for all E pairs
    multiplicity_n: int = 10
    multiplicity_p: float = 0.5
    theta_init_mu: float = -0.5
    theta_init_sigma: float = 0.5
    theta0: float = 3.0
    bias: float = -3.0
    exc_kernel: PSPKernelParams = PSPKernelParams(0.02, 0.002)
    inh_kernel: PSPKernelParams = PSPKernelParams(0.01, 0.001)
    t_ref_exc: float = 0.005
    t_ref_inh: float = 0.002


def _truncated_normal(rng, mu, sigma, size, positive):
    """Resample-until-valid truncation at zero (from below or above)."""
    out = rng.normal(mu, sigma, size)
    bad = out <= 0.0 if positive else out >= 0.0
    while np.any(bad):
        out[bad] = rng.normal(mu, sigma, int(bad.sum()))
        bad = out <= 0.0 if positive else out >= 0.0
    return out


def build_reaching_network(
    seed, layout: ReachingLayout = ReachingLayout(), dt: float = 1e-3
) -> Tuple[SpikingNetwork, dict]:
    """Construct the recurrent excitatory/inhibitory cursor-control network.

    100 E + 20 I neurons, 200 afferent inputs. Fixed connections: E->I with
    probability 0.575 and weights ~ N(1, 0.1) truncated positive; I->E and
    I->I with probabilities 0.6 / 0.55 and weights ~ N(-2, 0.2) truncated
    negative. Plastic potential synapses: afferent->each of 30 randomly
    chosen input-receiving E neurons, and every ordered E->E pair (no
    self-connections), with per-pair multiplicity ~ Binomial(10, 0.5).
    Weights map as w = exp(theta - 3), silenced to 0 where theta < 0.
    Homeostatic bias regulation is enabled for excitatory neurons.

    Returns the network plus an info dict: input receiver ids, control-pool
    neuron ids, and their preferred directions (uniform in +-0.025 per axis).
    """
    rng = np.random.default_rng(seed)
    nE, nI = layout.n_exc, layout.n_inh
    n_aff = layout.n_afferents
    n_neu = nE + nI
    kinds = np.array([EXCITATORY] * nE + [INHIBITORY] * nI, dtype=np.int8)
    kernels = [layout.exc_kernel] * nE + [layout.inh_kernel] * nI
    t_ref = np.array([layout.t_ref_exc] * nE + [layout.t_ref_inh] * nI)

    net = SpikingNetwork(
        n_aff,
        n_neu,
        dt,
        input_kernel=layout.exc_kernel,
        neuron_kernels=kernels,
        kinds=kinds,
        phi=np.full(n_neu, layout.bias),
        t_ref=t_ref,
        homeostasis=HomeostasisParams(enabled=True),
        homeo_mask=np.array([True] * nE + [False] * nI),
        mapping_kind=MAP_EXP_SHIFT,
        theta0=layout.theta0,
        silence_negative_theta=True,
    )

    receivers = np.sort(rng.choice(nE, size=layout.n_input_receivers, replace=False))
    rest = np.setdiff1d(np.arange(nE), receivers)
    control = np.sort(rng.choice(rest, size=layout.n_control, replace=False))
    preferred = rng.uniform(-0.025, 0.025, size=(layout.n_control, 2))

    # Fixed connections. Source index of neuron j is n_aff + j.
    fpre, fpost, fw = [], [], []
    ei_mask = rng.random((nE, nI)) < layout.p_ei
    n_ei = int(ei_mask.sum())
    w_ei = _truncated_normal(rng, 1.0, 0.1, n_ei, positive=True)
    k = 0
    for e in range(nE):
        for i in range(nI):
            if ei_mask[e, i]:
                fpre.append(n_aff + e)
                fpost.append(nE + i)
                fw.append(w_ei[k])
                k += 1
    ie_mask = rng.random((nI, nE)) < layout.p_ie
    ii_mask = rng.random((nI, nI)) < layout.p_ii
    np.fill_diagonal(ii_mask, False)
    n_inh_syn = int(ie_mask.sum() + ii_mask.sum())
    w_inh = _truncated_normal(rng, -2.0, 0.2, n_inh_syn, positive=False)
    k = 0
    for i in range(nI):
        for e in range(nE):
            if ie_mask[i, e]:
                fpre.append(n_aff + nE + i)
                fpost.append(e)
                fw.append(w_inh[k])
                k += 1
    for i in range(nI):
        for j in range(nI):
            if ii_mask[i, j]:
                fpre.append(n_aff + nE + i)
                fpost.append(nE + j)
                fw.append(w_inh[k])
                k += 1
    net.set_fixed_synapses(fpre, fpost, fw)

    # Plastic potential synapses with binomial multiplicity per pair.
    pairs_pre, pairs_post = [], []
    for a in range(n_aff):
        for r in receivers:
            pairs_pre.append(a)
            pairs_post.append(int(r))
    for e1 in range(nE):
        for e2 in range(nE):
            if e1 == e2:
                continue
            if layout.ee_pair_prob < 1.0 and rng.random() >= layout.ee_pair_prob:
                continue
            pairs_pre.append(n_aff + e1)
            pairs_post.append(e2)
    counts = rng.binomial(layout.multiplicity_n, layout.multiplicity_p, size=len(pairs_pre))
    ppre = np.repeat(np.asarray(pairs_pre, dtype=np.int32), counts)
    ppost = np.repeat(np.asarray(pairs_post, dtype=np.int32), counts)
    theta = rng.normal(layout.theta_init_mu, layout.theta_init_sigma, size=ppre.shape[0])
    net.set_plastic_synapses(ppre, ppost, theta)

    info = {
        "input_receivers": receivers,
        "control_pool": control,
        "preferred_directions": preferred,
    }
    return net, info
