"""Weil-reciprocity relations for symbols on products of supersingular elliptic curves."""

from .localfield import FieldDesc, LocalElement

__all__ = ["FieldDesc", "LocalElement"]
__version__ = "0.1.0"
