"""Verification workbench for depth-r projector combinatorics on a single apartment."""

__version__ = "0.1.0"
