"""Modeling toolkit for a 3-D vertical-nanowire logic fabric."""

__version__ = "0.1.0"
