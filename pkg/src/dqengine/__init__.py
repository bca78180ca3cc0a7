"""Deformation quantization toolkit: Moyal and fermionic star products,
star exponentials, propagators and Feynman-Kac ground-state energies."""

__version__ = "0.1.0"
