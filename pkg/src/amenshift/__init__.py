"""Entropy of saturated sets for lattice amenable group actions on subshifts."""

__version__ = "0.1.0"
