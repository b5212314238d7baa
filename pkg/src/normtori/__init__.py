"""Flabby resolutions, Schur covers and Hasse norm principle obstructions for norm one tori."""

__version__ = "0.1.0"
