"""Relaxed nonconvex variational problems in one and two dimensions."""

__version__ = "0.1.0"
