"""Exact computations for rank-one quantum groups over a deformation ring."""

__version__ = "0.1.0"
