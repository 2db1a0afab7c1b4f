"""Desk-scale laboratory for hard instances of the halting problem."""

__version__ = "0.1.0"
