"""Quasimorphisms of free groups, random walks on their hulls, and twisted model sets."""

__version__ = "0.1.0"
