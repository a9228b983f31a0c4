"""Resonances of funneled hyperbolic surfaces via metric ribbon graphs."""

__version__ = "0.1.0"
