"""Executable finite-scale models of predicative topos theory."""

__version__ = "0.1.0"
