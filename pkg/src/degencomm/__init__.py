"""Degeneracy protocols, pointer chasing, and the hardness gadget bench."""

__version__ = "0.1.0"
