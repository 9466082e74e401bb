"""Desk-scale laboratory for Carleman-linearized, block-encoded fluid solvers."""

__version__ = "0.1.0"
