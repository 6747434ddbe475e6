"""Experiment environments: sigmoid emulation, blind cursor reaching,
exclusive-or with cooling, and digit classification."""

from . import mnist, reaching, sigmoid, xor  # noqa: F401
