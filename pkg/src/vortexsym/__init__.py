"""Lie-symmetry verification engine for the reparametrized vortex mode equation."""

__version__ = "0.1.0"
