"""Cheating analysis, certificates and balancing for die-rolling protocols built from integer commitments."""

__version__ = "0.1.0"
