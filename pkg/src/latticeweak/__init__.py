"""Lattice simulation of a single baryon's weak decay in one spatial dimension."""
__version__ = "0.1.0"
