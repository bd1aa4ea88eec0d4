"""Majorana-mode entanglement toolkit: Clifford algebra, GNS blocks, separability, metrology."""

__version__ = "0.1.0"
