"""Exact-arithmetic workbench for Hecke operators over finite fields,
trace/zeta experiments, a point-counting correspondence calculus and
transfer-matrix lattice models."""

__version__ = "0.1.0"
