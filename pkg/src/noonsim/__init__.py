"""Adiabatic dark-state passage and NOON-state extraction in a two-mode cavity."""

__version__ = "0.1.0"
