"""Numerics for entanglement-assisted classical communication over noisy channels."""

__version__ = "0.1.0"
