"""Exact and interval-certified tools for the secrecy function of modular lattices."""

__version__ = "0.1.0"
