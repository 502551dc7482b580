"""Riemann minimal examples, the Shiffman function and the KdV hierarchy."""

__version__ = "0.1.0"
