"""Reward-driven stochastic policy search in spiking and binary networks.

The package couples a stochastic spike-response network (``network``), its
reward-modulated plasticity rules (``plasticity``), and a family of
parameter samplers with temperature schedules (``samplers``) into a twin
compiled/numpy simulation engine (``engine``). Analytic cross-checks live
in ``oracles``, the published experiments in ``tasks``, and the run
machinery in ``harness`` behind the ``synsampler`` command.
"""

__version__ = "0.1.0"

from . import plasticity, samplers  # noqa: F401
from .network import (  # noqa: F401
    PSPKernelParams,
    SpikingNetwork,
    build_layered_network,
    build_reaching_network,
    psp_kernel,
    step_network,
)
from .samplers import (  # noqa: F401
    ParameterState,
    SamplerConfig,
    TemperatureSchedule,
    generalized_step,
    hamiltonian_step,
    langevin_step,
    temperature_at,
)
