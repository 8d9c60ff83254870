"""Relativistic Lagrangian gas dynamics: solver, symmetries and conservation-law checks."""

__version__ = "0.1.0"
